/**
 * Copyright 2026 The hsduo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsduo/error.h"
#include "hsduo/harness.h"
#include "hsduo/simnet.h"

using namespace hsduo;

namespace {

constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_LIVENESS = 3;

struct RunArgs {
    std::string protocol = "hotstuff";
    size_t nodes = 4;
    size_t byz = 1;
    double delay = 0.1;
    size_t rounds = 10;
    double delta = 0.5;
    std::string clock = "virtual";
    std::string placement = "tail";
    std::string behavior;
    std::string detection = "fail-fast";
    std::uint64_t seed = 0;
    std::string log;
};

struct SweepArgs {
    size_t repeats = 0;     // 0: the sweep's default
    std::string csv;
    std::string report_dir;
    std::uint64_t seed = 0;
    std::string clock = "virtual";
    std::vector<double> values;
    size_t jobs = 0;
    std::vector<std::string> protocols;
};

struct ReportArgs {
    std::vector<std::string> in;
    std::string out = "report";
    size_t nodes = 103;
};

std::vector<NodeId> parse_list(const std::string &s) {
    std::vector<NodeId> ids;
    size_t pos = 0;
    while (pos <= s.size())
    {
        size_t comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (tok.empty()) throw ConfigError("empty entry in Byzantine node list");
        char *end = nullptr;
        unsigned long v = std::strtoul(tok.c_str(), &end, 10);
        if (*end != '\0') throw ConfigError("bad node id '" + tok + "'");
        ids.push_back(static_cast<NodeId>(v));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return ids;
}

void apply_placement(SimConfig &c, const std::string &s) {
    if (s == "tail")
        c.placement = Placement::Tail;
    else if (s == "random")
        c.placement = Placement::Random;
    else if (s.rfind("list:", 0) == 0)
    {
        c.placement = Placement::Explicit;
        c.byz_nodes = parse_list(s.substr(5));
    }
    else
        throw ConfigError("unknown placement '" + s + "' (tail, random, list:a,b,..)");
}

void apply_detection(SimConfig &c, const std::string &s) {
    if (s == "fail-fast" || s == "fail_fast")
    {
        c.detection = Detection::FailFast;
        return;
    }
    if (s.rfind("timer:", 0) == 0)
    {
        char *end = nullptr;
        double t = std::strtod(s.c_str() + 6, &end);
        if (end == s.c_str() + 6 || *end != '\0')
            throw ConfigError("bad timer value in '" + s + "'");
        c.detection = Detection::Timer;
        c.view_timeout = t;
        return;
    }
    throw ConfigError("unknown detection '" + s + "' (fail-fast, timer:T)");
}

/* HSDUO_SEED wins over --seed. */
std::uint64_t effective_seed(std::uint64_t flag) {
    const char *env = std::getenv("HSDUO_SEED");
    if (!env || !*env) return flag;
    char *end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError(std::string("bad HSDUO_SEED '") + env + "'");
    return v;
}

int cmd_run(const RunArgs &a) {
    SimConfig c;
    c.protocol = parse_protocol(a.protocol);
    c.n = a.nodes;
    c.f = a.byz;
    c.delay = a.delay;
    c.rounds = a.rounds;
    c.delta = a.delta;
    c.clock = parse_clock(a.clock);
    apply_placement(c, a.placement);
    // random placement models the Byzantine sweep, which mixes both faults
    c.behavior = !a.behavior.empty() ? parse_behavior(a.behavior) :
                 c.placement == Placement::Random ? ByzBehavior::Both
                                                  : ByzBehavior::WithholdVotes;
    apply_detection(c, a.detection);
    c.seed = effective_seed(a.seed);
    c.validate();

    MessageLog log;
    RunHooks hooks;
    if (!a.log.empty()) hooks.log = &log;
    Metrics m = run_consensus(c, hooks);
    if (!a.log.empty()) log.write(a.log);

    std::printf("protocol %s\n", std::string(to_string(c.protocol)).c_str());
    std::printf("nodes %zu\nbyzantine %zu\n", c.n, c.f);
    std::printf("virtual_elapsed_s %.9f\n", m.virtual_elapsed);
    if (c.clock == ClockMode::Real) std::printf("wall_elapsed_s %.6f\n", m.wall_elapsed);
    std::printf("rounds_committed %zu\n", m.rounds_committed);
    std::printf("views_attempted %zu\n", m.views_attempted);
    std::printf("view_changes %zu\n", m.view_changes);
    std::printf("messages_sent %zu\n", m.messages_sent);
    std::printf("sync_waits %zu\n", m.sync_waits);
    std::printf("happy_path_rounds %zu\n", m.happy_path_rounds);
    return 0;
}

int cmd_sweep(SweepSpec spec, const SweepArgs &a) {
    if (a.repeats) spec.repeats = a.repeats;
    if (!a.values.empty()) spec.values = a.values;
    if (!a.protocols.empty())
    {
        spec.protocols.clear();
        for (const auto &p: a.protocols) spec.protocols.push_back(parse_protocol(p));
    }
    spec.fixed.seed = effective_seed(a.seed);
    spec.fixed.clock = parse_clock(a.clock);
    spec.workers = a.jobs;
    // reject bad cells up front; run_sweep would only mark them
    for (double v: spec.values) spec.cell_config(spec.protocols.front(), v, 0);

    ResultTable t = run_sweep(spec);
    std::vector<ResultTable> tables{t};
    std::string csv = to_csv(tables);
    if (!a.csv.empty())
    {
        std::ofstream out(a.csv, std::ios::binary);
        if (!out || !(out << csv)) throw IoError("cannot write " + a.csv);
    }
    else
        std::cout << csv;
    if (!a.report_dir.empty()) report(tables, a.report_dir, spec.fixed.n);

    int rc = 0;
    for (const auto &c: t.cells)
        if (!c.ok())
        {
            std::fprintf(stderr, "cell %s %s=%g failed: %s\n",
                         std::string(to_string(c.protocol)).c_str(),
                         std::string(to_string(t.varying)).c_str(), c.value,
                         c.error.c_str());
            rc = EXIT_LIVENESS;
        }
    return rc;
}

int cmd_report(const ReportArgs &a) {
    std::vector<ResultTable> tables;
    for (const auto &path: a.in)
        for (auto &t: read_csv(path)) tables.push_back(std::move(t));
    report(tables, a.out, a.nodes);
    std::cout << summary_text(tables, a.nodes);
    return 0;
}

void add_sweep_options(CLI::App *sub, SweepArgs &a) {
    sub->add_option("--repeats", a.repeats, "Seeds per cell (default: 1, or 1000 for sweep-byz)");
    sub->add_option("--csv", a.csv, "Write the CSV here instead of stdout");
    sub->add_option("--report", a.report_dir, "Also write a full report into this directory");
    sub->add_option("--seed", a.seed, "Base seed; repetition i uses seed+i");
    sub->add_option("--clock", a.clock, "virtual or real")->check(CLI::IsMember({"virtual", "real"}));
    sub->add_option("--values", a.values, "Override the swept values")->delimiter(',');
    sub->add_option("--protocols", a.protocols, "Subset of hotstuff,hotstuff2")->delimiter(',');
    sub->add_option("--jobs", a.jobs, "Worker threads (0: one per core)");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"HotStuff / HotStuff-2 simulator and benchmark harness"};
    app.require_subcommand(1);

    RunArgs ra;
    auto *run = app.add_subcommand("run", "Simulate one configuration");
    run->add_option("--protocol", ra.protocol, "hotstuff or hotstuff2")->required();
    run->add_option("--nodes", ra.nodes, "Node count n")->required();
    run->add_option("--byz", ra.byz, "Byzantine count f")->required();
    run->add_option("--delay", ra.delay, "Communication delay per phase-step (s)")->required();
    run->add_option("--rounds", ra.rounds, "Blocks to commit")->required();
    run->add_option("--view-switch-delay", ra.delta, "HotStuff-2 view-switch delay (s)");
    run->add_option("--clock", ra.clock, "virtual or real");
    run->add_option("--byz-placement", ra.placement, "tail, random or list:a,b,..");
    run->add_option("--byz-behavior", ra.behavior, "silent, withhold or both");
    run->add_option("--detection", ra.detection, "fail-fast or timer:T");
    run->add_option("--seed", ra.seed, "Seed for random placement");
    run->add_option("--log", ra.log, "Write the message log here");

    SweepArgs da, na, ba;
    auto *sd = app.add_subcommand("sweep-delay", "Run time against communication delay");
    add_sweep_options(sd, da);
    auto *sn = app.add_subcommand("sweep-nodes", "Run time against node count");
    add_sweep_options(sn, na);
    auto *sb = app.add_subcommand("sweep-byz", "Run time against Byzantine count");
    add_sweep_options(sb, ba);

    ReportArgs rpa;
    auto *rp = app.add_subcommand("report", "Tables, figure data and summary from result CSVs");
    rp->add_option("--in", rpa.in, "Result CSV files")->required()->expected(1, -1);
    rp->add_option("--out", rpa.out, "Output directory");
    rp->add_option("--nodes", rpa.nodes, "Node count of the Byzantine sweep");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return EXIT_CONFIG;
    }

    try
    {
        if (*run) return cmd_run(ra);
        if (*sd) return cmd_sweep(SweepSpec::delay_defaults(), da);
        if (*sn) return cmd_sweep(SweepSpec::nodes_defaults(), na);
        if (*sb) return cmd_sweep(SweepSpec::byzantine_defaults(), ba);
        if (*rp) return cmd_report(rpa);
    }
    catch (const ConfigError &e)
    {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return EXIT_CONFIG;
    }
    catch (const LivenessFailure &e)
    {
        std::fprintf(stderr, "liveness guard: %s\n", e.what());
        return EXIT_LIVENESS;
    }
    catch (const Error &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
