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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "hsduo/error.h"
#include "hsduo/harness.h"

namespace hsduo {

std::string_view to_string(Varying v) {
    switch (v)
    {
        case Varying::Delay: return "delay";
        case Varying::Nodes: return "nodes";
        case Varying::Byzantine: return "byzantine";
    }
    return "?";
}

Varying parse_varying(std::string_view s) {
    if (s == "delay") return Varying::Delay;
    if (s == "nodes") return Varying::Nodes;
    if (s == "byzantine" || s == "byz") return Varying::Byzantine;
    throw ConfigError("unknown sweep dimension '" + std::string(s) + "'");
}

SweepSpec SweepSpec::delay_defaults() {
    SweepSpec s;
    s.varying = Varying::Delay;
    s.values = {10, 1, 0.1, 0.01, 0.001, 0.0001};
    s.fixed.n = 13;
    s.fixed.f = 4;
    return s;
}

SweepSpec SweepSpec::nodes_defaults() {
    SweepSpec s;
    s.varying = Varying::Nodes;
    for (int n = 13; n <= 103; n += 9) s.values.push_back(n);
    s.fixed.n = 13;
    s.fixed.f = 3;
    return s;
}

SweepSpec SweepSpec::byzantine_defaults() {
    SweepSpec s;
    s.varying = Varying::Byzantine;
    for (int f = 4; f <= 34; f += 5) s.values.push_back(f);
    s.fixed.n = 103;
    s.fixed.placement = Placement::Random;
    s.fixed.behavior = ByzBehavior::Both;
    s.repeats = 1000;
    return s;
}

static size_t as_count(double v, const char *what) {
    if (!(v >= 0) || v != std::floor(v) || v > 1e9)
        throw ConfigError(std::string(what) + " must be a non-negative integer, got " +
                          std::to_string(v));
    return static_cast<size_t>(v);
}

SimConfig SweepSpec::cell_config(Protocol p, double value, size_t rep) const {
    SimConfig c = fixed;
    c.protocol = p;
    c.seed = fixed.seed + rep;
    switch (varying)
    {
        case Varying::Delay:
            c.delay = value;
            break;
        case Varying::Nodes:
            c.n = as_count(value, "node count");
            c.f = c.n / 4;
            break;
        case Varying::Byzantine:
            c.f = as_count(value, "Byzantine count");
            break;
    }
    c.validate();
    return c;
}

const Cell &ResultTable::at(Protocol p, size_t value_index) const {
    for (size_t i = 0; i < protocols.size(); i++)
        if (protocols[i] == p) return at(i, value_index);
    throw Error("table has no " + std::string(to_string(p)) + " row");
}

bool ResultTable::has(Protocol p) const {
    return std::find(protocols.begin(), protocols.end(), p) != protocols.end();
}

namespace {

struct RepResult {
    Metrics m;
    std::string error;
};

void fill_cell(Cell &c, const std::vector<RepResult> &reps, bool real_clock) {
    c.seed_count = reps.size();
    for (const auto &r: reps)
        if (!r.error.empty())
        {
            c.error = r.error;
            c.seed_count = 0;
            c.mean = c.stddev = c.min = c.max = std::nan("");
            c.rounds = c.views = c.view_changes = c.sync_waits = std::nan("");
            return;
        }
    double sum = 0;
    c.min = INFINITY;
    c.max = -INFINITY;
    for (const auto &r: reps)
    {
        double t = real_clock ? r.m.wall_elapsed : r.m.virtual_elapsed;
        sum += t;
        c.min = std::min(c.min, t);
        c.max = std::max(c.max, t);
        c.rounds += static_cast<double>(r.m.rounds_committed);
        c.views += static_cast<double>(r.m.views_attempted);
        c.view_changes += static_cast<double>(r.m.view_changes);
        c.sync_waits += static_cast<double>(r.m.sync_waits);
    }
    double k = static_cast<double>(reps.size());
    c.mean = sum / k;
    double sq = 0;
    for (const auto &r: reps)
    {
        double t = real_clock ? r.m.wall_elapsed : r.m.virtual_elapsed;
        sq += (t - c.mean) * (t - c.mean);
    }
    c.stddev = std::sqrt(sq / k);
    c.rounds /= k;
    c.views /= k;
    c.view_changes /= k;
    c.sync_waits /= k;
}

} // namespace

ResultTable run_sweep(const SweepSpec &spec) {
    if (spec.repeats == 0) throw ConfigError("repeats must be positive");
    if (spec.protocols.empty()) throw ConfigError("no protocols to sweep");
    if (spec.values.empty()) throw ConfigError("no values to sweep");

    ResultTable t;
    t.varying = spec.varying;
    t.protocols = spec.protocols;
    t.values = spec.values;
    size_t ncells = t.protocols.size() * t.values.size();
    t.cells.resize(ncells);

    // every (cell, repetition) owns a result slot, so the assembly order is fixed
    std::vector<std::vector<RepResult>> results(ncells,
                                                std::vector<RepResult>(spec.repeats));
    size_t ntasks = ncells * spec.repeats;
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t k; (k = next.fetch_add(1)) < ntasks;)
        {
            size_t cell = k / spec.repeats, rep = k % spec.repeats;
            Protocol p = t.protocols[cell / t.values.size()];
            double v = t.values[cell % t.values.size()];
            auto &slot = results[cell][rep];
            try
            {
                slot.m = run_consensus(spec.cell_config(p, v, rep));
            }
            catch (const Error &e)
            {
                slot.error = e.what();
            }
        }
    };

    bool real = spec.fixed.clock == ClockMode::Real;
    size_t workers = spec.workers;
    if (workers == 0)
        workers = real ? std::min<size_t>(ntasks, 256)
                       : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, ntasks);
    if (workers <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (size_t i = 0; i < workers; i++) pool.emplace_back(worker);
        for (auto &th: pool) th.join();
    }

    for (size_t cell = 0; cell < ncells; cell++)
    {
        Cell &c = t.cells[cell];
        c.protocol = t.protocols[cell / t.values.size()];
        c.value = t.values[cell % t.values.size()];
        fill_cell(c, results[cell], real);
    }
    return t;
}

static ResultTable checked_sweep(const SweepSpec &spec, Varying want) {
    if (spec.varying != want)
        throw ConfigError("expected a " + std::string(to_string(want)) + " sweep, got " +
                          std::string(to_string(spec.varying)));
    return run_sweep(spec);
}

ResultTable sweep_delay(const SweepSpec &spec) {
    return checked_sweep(spec, Varying::Delay);
}

ResultTable sweep_nodes(const SweepSpec &spec) {
    return checked_sweep(spec, Varying::Nodes);
}

ResultTable sweep_byzantine(const SweepSpec &spec) {
    return checked_sweep(spec, Varying::Byzantine);
}

/* CSV */

static std::string fmt(const char *f, double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

static std::string fmt_value(double v) {
    return fmt("%.10g", v);
}

std::string to_csv(const std::vector<ResultTable> &tables) {
    std::string s =
        "protocol,varying,value,mean_elapsed_s,stddev_s,rounds,views,view_changes,"
        "sync_waits,seed_count\n";
    for (const auto &t: tables)
        for (const auto &c: t.cells)
        {
            s += to_string(c.protocol);
            s += ',';
            s += to_string(t.varying);
            s += ',' + fmt_value(c.value);
            s += ',' + fmt("%.6f", c.mean);
            s += ',' + fmt("%.6f", c.stddev);
            s += ',' + fmt("%.3f", c.rounds);
            s += ',' + fmt("%.3f", c.views);
            s += ',' + fmt("%.3f", c.view_changes);
            s += ',' + fmt("%.3f", c.sync_waits);
            s += ',' + std::to_string(c.seed_count);
            s += '\n';
        }
    return s;
}

std::string to_wide_csv(const ResultTable &t) {
    std::string s = "protocol";
    for (double v: t.values) s += ',' + fmt_value(v);
    s += '\n';
    for (size_t p = 0; p < t.protocols.size(); p++)
    {
        s += to_string(t.protocols[p]);
        for (size_t i = 0; i < t.values.size(); i++) s += ',' + fmt("%.6f", t.at(p, i).mean);
        s += '\n';
    }
    return s;
}

std::string figure4_csv(const ResultTable &t) {
    if (!t.has(Protocol::HotStuff) || !t.has(Protocol::HotStuff2))
        throw ConfigError("figure data needs both protocols");
    std::string s = "f,hs,hs2\n";
    for (size_t i = 0; i < t.values.size(); i++)
        s += fmt_value(t.values[i]) + ',' + fmt("%.6f", t.at(Protocol::HotStuff, i).mean) +
             ',' + fmt("%.6f", t.at(Protocol::HotStuff2, i).mean) + '\n';
    return s;
}

static std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

static double to_double(const std::string &s, const std::string &path, size_t lineno) {
    char *end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0')
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
    return v;
}

std::vector<ResultTable> read_csv(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || split(line).size() != 10 ||
        split(line)[0] != "protocol")
        throw ConfigError(path + ": not a results CSV");

    std::vector<ResultTable> tables;
    std::vector<std::vector<Cell>> raw;
    size_t lineno = 1;
    while (std::getline(in, line))
    {
        lineno++;
        if (line.empty()) continue;
        auto f = split(line);
        if (f.size() != 10)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 10 fields");
        Cell c;
        c.protocol = parse_protocol(f[0]);
        Varying v = parse_varying(f[1]);
        c.value = to_double(f[2], path, lineno);
        c.mean = to_double(f[3], path, lineno);
        c.stddev = to_double(f[4], path, lineno);
        c.rounds = to_double(f[5], path, lineno);
        c.views = to_double(f[6], path, lineno);
        c.view_changes = to_double(f[7], path, lineno);
        c.sync_waits = to_double(f[8], path, lineno);
        c.seed_count = static_cast<size_t>(to_double(f[9], path, lineno));
        c.min = c.max = c.mean;
        if (std::isnan(c.mean)) c.error = "failed";

        size_t ti = 0;
        while (ti < tables.size() && tables[ti].varying != v) ti++;
        if (ti == tables.size())
        {
            tables.emplace_back().varying = v;
            raw.emplace_back();
        }
        auto &t = tables[ti];
        if (!t.has(c.protocol)) t.protocols.push_back(c.protocol);
        if (std::find(t.values.begin(), t.values.end(), c.value) == t.values.end())
            t.values.push_back(c.value);
        raw[ti].push_back(std::move(c));
    }
    for (size_t ti = 0; ti < tables.size(); ti++)
    {
        auto &t = tables[ti];
        t.cells.assign(t.protocols.size() * t.values.size(), Cell{});
        std::vector<bool> filled(t.cells.size(), false);
        for (auto &c: raw[ti])
        {
            size_t p = std::find(t.protocols.begin(), t.protocols.end(), c.protocol) -
                       t.protocols.begin();
            size_t i = std::find(t.values.begin(), t.values.end(), c.value) - t.values.begin();
            t.cells[p * t.values.size() + i] = c;
            filled[p * t.values.size() + i] = true;
        }
        for (size_t k = 0; k < filled.size(); k++)
            if (!filled[k])
            {
                auto &c = t.cells[k];
                c.protocol = t.protocols[k / t.values.size()];
                c.value = t.values[k % t.values.size()];
                c.error = "missing";
                c.mean = std::nan("");
            }
    }
    return tables;
}

/* Report */

double crossover_f(const ResultTable &t) {
    if (!t.has(Protocol::HotStuff) || !t.has(Protocol::HotStuff2)) return -1;
    for (size_t i = 0; i + 1 < t.values.size(); i++)
    {
        double lo = t.at(Protocol::HotStuff2, i).mean - t.at(Protocol::HotStuff, i).mean;
        double hi = t.at(Protocol::HotStuff2, i + 1).mean -
                    t.at(Protocol::HotStuff, i + 1).mean;
        if (lo < 0 && hi >= 0)
            return t.values[i] + (t.values[i + 1] - t.values[i]) * lo / (lo - hi);
    }
    return -1;
}

static void compare_rows(std::ostringstream &out, const ResultTable &t) {
    const char *label = t.varying == Varying::Delay ? "d" :
                        t.varying == Varying::Nodes ? "n" : "f";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %-10s %12s %12s %8s  %s\n", label, "hotstuff",
                  "hotstuff2", "ratio", "faster");
    out << buf;
    for (size_t i = 0; i < t.values.size(); i++)
    {
        const Cell &a = t.at(Protocol::HotStuff, i);
        const Cell &b = t.at(Protocol::HotStuff2, i);
        const char *win = !a.ok() || !b.ok() ? "n/a" :
                          b.mean < a.mean ? "hotstuff2" :
                          a.mean < b.mean ? "hotstuff" : "tie";
        std::snprintf(buf, sizeof(buf), "  %-10s %12.6f %12.6f %8.4f  %s\n",
                      fmt_value(t.values[i]).c_str(), a.mean, b.mean, b.mean / a.mean, win);
        out << buf;
    }
}

std::string summary_text(const std::vector<ResultTable> &tables, size_t nodes) {
    std::ostringstream out;
    out << "happy-path phase-steps per view: hotstuff " << phase_steps(Protocol::HotStuff)
        << ", hotstuff2 " << phase_steps(Protocol::HotStuff2) << " (ratio "
        << fmt("%.2f", static_cast<double>(phase_steps(Protocol::HotStuff2)) /
                           static_cast<double>(phase_steps(Protocol::HotStuff)))
        << ")\n";
    for (const auto &t: tables)
    {
        out << '\n' << to_string(t.varying) << " sweep (mean elapsed, s)\n";
        if (!t.has(Protocol::HotStuff) || !t.has(Protocol::HotStuff2))
        {
            out << "  single protocol; no comparison\n";
            continue;
        }
        compare_rows(out, t);
        if (t.varying == Varying::Byzantine)
        {
            double fx = crossover_f(t);
            if (fx < 0)
                out << "  crossover: none in the swept range\n";
            else
                out << "  crossover: f ~ " << fmt("%.2f", fx) << ", f/n ~ "
                    << fmt("%.4f", fx / static_cast<double>(nodes)) << " at n=" << nodes
                    << " (analytic with d=0.1, delta=0.5: 1/6 ~ 0.1667)\n";
        }
    }
    return out.str();
}

static void write_file(const std::filesystem::path &p, const std::string &data) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << data;
    out.flush();
    if (!out) throw IoError("failed writing " + p.string());
}

void report(const std::vector<ResultTable> &tables, const std::string &out_dir,
            size_t nodes) {
    if (tables.empty()) throw NoResults("no result tables to report");
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory " + out_dir);
    write_file(dir / "results.csv", to_csv(tables));
    for (const auto &t: tables)
    {
        write_file(dir / ("table_" + std::string(to_string(t.varying)) + ".csv"),
                   to_wide_csv(t));
        if (t.varying == Varying::Byzantine && t.has(Protocol::HotStuff) &&
            t.has(Protocol::HotStuff2))
            write_file(dir / "figure4.csv", figure4_csv(t));
    }
    write_file(dir / "summary.txt", summary_text(tables, nodes));
}

} // namespace hsduo
