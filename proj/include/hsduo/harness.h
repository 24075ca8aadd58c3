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


#ifndef _HSDUO_HARNESS_H
#define _HSDUO_HARNESS_H

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hsduo/simnet.h"

namespace hsduo {

enum class Varying: std::uint8_t { Delay, Nodes, Byzantine };

std::string_view to_string(Varying v);
/** Accepts delay, nodes, byzantine; throws ConfigError otherwise. */
Varying parse_varying(std::string_view s);

struct SweepSpec {
    Varying varying = Varying::Delay;
    std::vector<double> values;
    SimConfig fixed;
    size_t repeats = 1;
    std::vector<Protocol> protocols{Protocol::HotStuff, Protocol::HotStuff2};
    /** Worker threads; 0 picks one per core (real clock: one per task). */
    size_t workers = 0;

    /** d in {10 .. 0.0001}, n=13, f=4 tail-placed. */
    static SweepSpec delay_defaults();
    /** n = 13, 22, .., 103 with f = n/4 tail-placed, d=0.1. */
    static SweepSpec nodes_defaults();
    /** n=103, f = 4, 9, .., 34 randomly placed, 1000 seeds per cell. */
    static SweepSpec byzantine_defaults();

    /** Config of repetition `rep` (seed = fixed.seed + rep) for one swept value. */
    SimConfig cell_config(Protocol p, double value, size_t rep) const;
};

struct Cell {
    Protocol protocol = Protocol::HotStuff;
    double value = 0;
    double mean = 0;
    double stddev = 0;
    double min = 0;
    double max = 0;
    // averages over the repetitions
    double rounds = 0;
    double views = 0;
    double view_changes = 0;
    double sync_waits = 0;
    size_t seed_count = 0;
    std::string error;      // non-empty when a repetition failed

    bool ok() const { return error.empty(); }
};

/** Protocols x swept values; cells are protocol-major. */
struct ResultTable {
    Varying varying = Varying::Delay;
    std::vector<Protocol> protocols;
    std::vector<double> values;
    std::vector<Cell> cells;

    const Cell &at(size_t protocol_index, size_t value_index) const {
        return cells[protocol_index * values.size() + value_index];
    }
    /** Throws Error when the protocol is not a row of the table. */
    const Cell &at(Protocol p, size_t value_index) const;
    bool has(Protocol p) const;
};

/**
 * Run every (protocol, value, repetition) of the spec. Cells are
 * independent and may run on several threads; results do not depend on
 * the thread count. A cell whose config is rejected or whose run aborts
 * is marked, the rest of the table is still filled.
 */
ResultTable run_sweep(const SweepSpec &spec);

/* Each throws ConfigError when spec.varying does not match. */
ResultTable sweep_delay(const SweepSpec &spec);
ResultTable sweep_nodes(const SweepSpec &spec);
ResultTable sweep_byzantine(const SweepSpec &spec);

/** `protocol,varying,value,mean_elapsed_s,stddev_s,rounds,views,view_changes,sync_waits,seed_count` */
std::string to_csv(const std::vector<ResultTable> &tables);
/** Protocol rows by swept-value columns of the mean elapsed time. */
std::string to_wide_csv(const ResultTable &table);
/** `f,hs,hs2` from a Byzantine table holding both protocols. */
std::string figure4_csv(const ResultTable &table);
/** Parses to_csv output; throws IoError or ConfigError. */
std::vector<ResultTable> read_csv(const std::string &path);

/**
 * Where hotstuff2 - hotstuff changes sign from negative to positive,
 * linearly interpolated between neighbouring cells; negative when the
 * means never cross.
 */
double crossover_f(const ResultTable &byzantine);

/** Plain-text comparison; `nodes` scales the crossover to a fraction of n. */
std::string summary_text(const std::vector<ResultTable> &tables, size_t nodes = 103);

/**
 * Writes results.csv, table_<varying>.csv, figure4.csv (Byzantine sweeps)
 * and summary.txt into `out_dir`. Throws NoResults or IoError.
 */
void report(const std::vector<ResultTable> &tables, const std::string &out_dir,
            size_t nodes = 103);

} // namespace hsduo

#endif
