// SPDX-License-Identifier: Apache-2.0
//
// damsec - delay-alignment modulation toolkit for secure ISAC simulation
// Copyright (C) 2026 The damsec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef DAMSEC_DAMSEC_HPP
#define DAMSEC_DAMSEC_HPP

#include "types.hpp"
#include "linalg.hpp"
#include "channel.hpp"
#include "pulse.hpp"
#include "waveform.hpp"
#include "stage1_angle.hpp"
#include "stage2_delay.hpp"
#include "secrecy.hpp"
#include "precoding.hpp"
#include "qcqp.hpp"
#include "sca.hpp"
#include "experiments.hpp"
#include "validation.hpp"

#endif
