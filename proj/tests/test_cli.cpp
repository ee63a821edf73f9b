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


#include <catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace
{
    struct Run
    {
        int code = -1;
        std::string output;
    };

    Run run(const std::string &args)
    {
        const std::string cmd = std::string(DAMSEC_CLI_PATH) + " " + args + " 2>&1";
        Run r;
        FILE *p = popen(cmd.c_str(), "r");
        REQUIRE(p != nullptr);
        std::array<char, 4096> buf{};
        size_t n = 0;
        while ((n = fread(buf.data(), 1, buf.size(), p)) > 0)
            r.output.append(buf.data(), n);
        const int status = pclose(p);
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        return r;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path scratch(const std::string &name)
    {
        const auto dir = fs::temp_directory_path() / ("damsec_cli_" + name);
        fs::remove_all(dir);
        return dir;
    }
} // namespace

TEST_CASE("validate prints the check table", "[cli]")
{
    const auto r = run("validate --seed 7");
    CHECK(r.code == 0);
    CHECK(r.output.find("PASS") != std::string::npos);
    CHECK(r.output.find("FAIL") == std::string::npos);
}

TEST_CASE("missing config is a configuration error", "[cli]")
{
    const auto r = run("sse-sweep --config /nonexistent/damsec.json");
    CHECK(r.code == 1);
    CHECK(r.output.find("/nonexistent/damsec.json") != std::string::npos);
}

TEST_CASE("unknown flag prints usage", "[cli]")
{
    const auto r = run("sse-sweep --bogus 3");
    CHECK(r.code == 1);
    CHECK(r.output.find("--trials") != std::string::npos);
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("--help").code == 0);
}

TEST_CASE("sse-sweep output is reproducible", "[cli]")
{
    const std::string cfg = std::string(DAMSEC_SOURCE_DIR) + "/configs/smoke.json";
    const auto a = scratch("a"), b = scratch("b");
    REQUIRE(run("sse-sweep --config " + cfg + " --trials 1 --out " + a.string()).code == 0);
    REQUIRE(run("sse-sweep --config " + cfg + " --trials 1 --out " + b.string()).code == 0);
    const auto csv = slurp(a / "sse_vs_power.csv");
    CHECK(csv == slurp(b / "sse_vs_power.csv"));
    CHECK(csv.rfind("scheme,power_dbm,metric,value,trials,stderr\n", 0) == 0);
    CHECK(slurp(a / "sse_vs_power.manifest.json") == slurp(b / "sse_vs_power.manifest.json"));
    CHECK(slurp(a / "sse_vs_power.manifest.json").find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("solve writes the trace when asked", "[cli]")
{
    const auto d = scratch("solve");
    const auto r = run("solve --seed 3 --power-dbm 20 --trace --out " + d.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(d / "solve.csv"));
    CHECK(fs::exists(d / "sca_trace.csv"));
    CHECK(slurp(d / "sca_trace.csv").rfind("iteration,", 0) == 0);
    CHECK(run("crb-sweep --trials 0").code == 1);
}
