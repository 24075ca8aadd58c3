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

#ifndef _HSDUO_SIMNET_H
#define _HSDUO_SIMNET_H

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "hsduo/hotstuff2.h"
#include "hsduo/replica.h"

namespace hsduo {

enum class Protocol: std::uint8_t { HotStuff, HotStuff2 };
enum class ClockMode: std::uint8_t { Virtual, Real };
enum class Placement: std::uint8_t { Tail, Random, Explicit };
enum class ByzBehavior: std::uint8_t { SilentLeader, WithholdVotes, Both };
enum class Detection: std::uint8_t { FailFast, Timer };

std::string_view to_string(Protocol p);
std::string_view to_string(ClockMode c);
std::string_view to_string(Placement p);
std::string_view to_string(ByzBehavior b);

/** Throw ConfigError on unknown names. */
Protocol parse_protocol(std::string_view s);
ClockMode parse_clock(std::string_view s);
ByzBehavior parse_behavior(std::string_view s);

struct SimConfig {
    size_t n = 4;
    size_t f = 1;
    Protocol protocol = Protocol::HotStuff;
    double delay = 0.1;         // communication delay per phase-step (s)
    double delta = 0.5;         // HotStuff-2 view-switch delay (s)
    size_t rounds = 10;         // blocks every honest replica must commit
    ClockMode clock = ClockMode::Virtual;
    Placement placement = Placement::Tail;
    std::vector<NodeId> byz_nodes;  // Placement::Explicit
    ByzBehavior behavior = ByzBehavior::WithholdVotes;
    Detection detection = Detection::FailFast;
    double view_timeout = 1.0;  // Detection::Timer
    std::uint64_t seed = 0;

    /** Throws ConfigError. */
    void validate() const;
};

/** Which nodes are Byzantine and how they misbehave. */
struct BehaviorTable {
    std::vector<bool> byzantine;
    bool silent_leader = false;
    bool withhold_votes = false;

    bool is_byzantine(NodeId i) const { return byzantine[i]; }
    /** Sends nothing in views it leads. */
    bool silent(NodeId i) const { return byzantine[i] && silent_leader; }
    /** Never votes (nor sends NewView). */
    bool withholds(NodeId i) const { return byzantine[i] && withhold_votes; }
    std::vector<NodeId> members() const;
    size_t honest_count() const;
};

/** Throws ConfigError when an explicit list does not name f distinct valid nodes. */
BehaviorTable inject_byzantine(const SimConfig &cfg);

/**
 * Views the run needs before `rounds` views have honest, non-silent
 * leaders, i.e. the failed-view count under fail-fast detection.
 */
size_t silent_leader_views(const BehaviorTable &byz, size_t n, size_t rounds);

/* Discrete events */

enum class EventKind: std::uint8_t { Start, PhaseDeliver, TimerFire, FailureDetect };

struct Event {
    double at = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::Start;
    std::vector<Envelope> batch;    // PhaseDeliver
    Timer timer;                    // TimerFire
    ViewNumber view = 0;            // FailureDetect
};

/** Min-queue on (at, seq); seq is assigned at scheduling time. */
class EventQueue {
    struct Later {
        bool operator()(const Event &a, const Event &b) const {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> q;
    std::uint64_t next_seq = 0;

    public:
    const Event &schedule(Event ev);
    bool empty() const { return q.empty(); }
    size_t size() const { return q.size(); }
    const Event &top() const { return q.top(); }
    Event pop();
};

/**
 * Schedule one phase-step's messages as a single batch delivered `delay`
 * after `now`. Leader broadcasts pay delay_d; the replies that complete
 * the step are scheduled with zero delay.
 */
const Event &apply_delay(EventQueue &q, double now, double delay,
                         std::vector<Envelope> batch);

/* Measurement */

struct Metrics {
    double virtual_elapsed = 0;
    double wall_elapsed = 0;
    size_t rounds_committed = 0;
    size_t views_attempted = 0;
    size_t view_changes = 0;
    size_t messages_sent = 0;
    size_t sync_waits = 0;
    size_t happy_path_rounds = 0;
    size_t messages_dropped = 0;
};

struct LogRecord {
    double time = 0;
    NodeId from = 0;
    NodeId to = 0;
    MsgKind kind = MsgKind::Vote;
    ViewNumber view = 0;
    PhaseTag phase = PhaseTag::Prepare;
    Digest block_hash{};

    bool operator==(const LogRecord &) const = default;
};

/**
 * Point-to-point sends of a run (self-deliveries excluded). Text form:
 * a header line, then one `time,from,to,kind,view,phase,block_hash` line
 * per send, LF-terminated.
 */
class MessageLog {
    std::vector<LogRecord> records_;

    public:
    void add(const LogRecord &r) { records_.push_back(r); }
    const std::vector<LogRecord> &records() const { return records_; }
    std::string to_text() const;
    /** Throws IoError. */
    void write(const std::string &path) const;
};

struct RunHooks {
    MessageLog *log = nullptr;
    /** Called after every replica transition with its before/after safety state. */
    std::function<void(NodeId, const SafetyState &, const SafetyState &)> on_step;
    /** Called for every block an honest replica commits. */
    std::function<void(NodeId, const Block &)> on_commit;
    /** Per-view outcomes seen by honest replicas, in view order. */
    std::vector<ViewOutcome> *outcomes = nullptr;
};

/**
 * Drive n replicas until every honest one committed `rounds` blocks.
 * Deterministic in virtual mode for a fixed config. Throws ConfigError,
 * LivenessFailure (views beyond 100 x rounds, or no events left), or Error
 * on conflicting commits.
 */
Metrics run_consensus(const SimConfig &cfg, const RunHooks &hooks = {});

/** Phase-steps per committed view: 4 for HotStuff, 3 for HotStuff-2. */
size_t phase_steps(Protocol p);

/**
 * Analytic run time with random Byzantine placement:
 * P*R*d + R*(p/(1-p))*c_fail with p = f/n and c_fail the cost of one failed
 * view (detection, plus the view-switch delay for HotStuff-2).
 */
double expected_runtime(const SimConfig &cfg);

} // namespace hsduo

#endif
