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
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <thread>
#include <unordered_set>

#include "hsduo/error.h"
#include "hsduo/hotstuff.h"
#include "hsduo/hotstuff2.h"
#include "hsduo/simnet.h"

namespace hsduo {

std::string_view to_string(Protocol p) {
    return p == Protocol::HotStuff ? "hotstuff" : "hotstuff2";
}

std::string_view to_string(ClockMode c) {
    return c == ClockMode::Virtual ? "virtual" : "real";
}

std::string_view to_string(Placement p) {
    switch (p)
    {
        case Placement::Tail: return "tail";
        case Placement::Random: return "random";
        case Placement::Explicit: return "list";
    }
    return "?";
}

std::string_view to_string(ByzBehavior b) {
    switch (b)
    {
        case ByzBehavior::SilentLeader: return "silent";
        case ByzBehavior::WithholdVotes: return "withhold";
        case ByzBehavior::Both: return "both";
    }
    return "?";
}

Protocol parse_protocol(std::string_view s) {
    if (s == "hotstuff") return Protocol::HotStuff;
    if (s == "hotstuff2" || s == "hotstuff-2") return Protocol::HotStuff2;
    throw ConfigError("unknown protocol '" + std::string(s) + "'");
}

ClockMode parse_clock(std::string_view s) {
    if (s == "virtual") return ClockMode::Virtual;
    if (s == "real") return ClockMode::Real;
    throw ConfigError("unknown clock mode '" + std::string(s) + "'");
}

ByzBehavior parse_behavior(std::string_view s) {
    if (s == "silent" || s == "silent_leader" || s == "silent-leader")
        return ByzBehavior::SilentLeader;
    if (s == "withhold" || s == "withhold_votes" || s == "withhold-votes")
        return ByzBehavior::WithholdVotes;
    if (s == "both") return ByzBehavior::Both;
    throw ConfigError("unknown Byzantine behavior '" + std::string(s) + "'");
}

void SimConfig::validate() const {
    if (n == 0) throw ConfigError("need at least one node");
    if (!validate_bft_condition(n, f))
        throw ConfigError("n=" + std::to_string(n) + ", f=" + std::to_string(f) +
                          " violates n >= 3f+1");
    if (!(delay >= 0)) throw ConfigError("delay must be non-negative");
    if (!(delta >= 0)) throw ConfigError("view-switch delay must be non-negative");
    if (rounds == 0) throw ConfigError("rounds must be positive");
    if (detection == Detection::Timer && !(view_timeout > 0))
        throw ConfigError("view timeout must be positive");
    if (placement == Placement::Explicit)
    {
        if (byz_nodes.size() != f)
            throw ConfigError("Byzantine list names " +
                              std::to_string(byz_nodes.size()) +
                              " nodes, expected f=" + std::to_string(f));
        std::set<NodeId> uniq(byz_nodes.begin(), byz_nodes.end());
        if (uniq.size() != byz_nodes.size())
            throw ConfigError("Byzantine list repeats a node");
        if (!uniq.empty() && *uniq.rbegin() >= n)
            throw ConfigError("Byzantine list names a node outside [0, n)");
    }
}

std::vector<NodeId> BehaviorTable::members() const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < byzantine.size(); i++)
        if (byzantine[i]) out.push_back(i);
    return out;
}

size_t BehaviorTable::honest_count() const {
    return static_cast<size_t>(std::count(byzantine.begin(), byzantine.end(), false));
}

BehaviorTable inject_byzantine(const SimConfig &cfg) {
    cfg.validate();
    BehaviorTable t;
    t.byzantine.assign(cfg.n, false);
    t.silent_leader = cfg.behavior != ByzBehavior::WithholdVotes;
    t.withhold_votes = cfg.behavior != ByzBehavior::SilentLeader;
    switch (cfg.placement)
    {
        case Placement::Tail:
            for (size_t i = cfg.n - cfg.f; i < cfg.n; i++) t.byzantine[i] = true;
            break;
        case Placement::Random: {
            // partial Fisher-Yates on mt19937_64 output: identical on every platform
            std::mt19937_64 rng(cfg.seed);
            std::vector<NodeId> ids(cfg.n);
            for (NodeId i = 0; i < cfg.n; i++) ids[i] = i;
            for (size_t i = 0; i < cfg.f; i++)
            {
                size_t j = i + static_cast<size_t>(rng() % (cfg.n - i));
                std::swap(ids[i], ids[j]);
                t.byzantine[ids[i]] = true;
            }
            break;
        }
        case Placement::Explicit:
            for (auto i: cfg.byz_nodes) t.byzantine[i] = true;
            break;
    }
    return t;
}

size_t silent_leader_views(const BehaviorTable &byz, size_t n, size_t rounds) {
    if (!byz.silent_leader) return 0;
    size_t failed = 0, good = 0;
    for (ViewNumber v = 1; good < rounds; v++)
    {
        if (byz.silent(leader_for_view(v, n)))
            failed++;
        else
            good++;
    }
    return failed;
}

const Event &EventQueue::schedule(Event ev) {
    ev.seq = next_seq++;
    q.push(std::move(ev));
    return q.top();
}

Event EventQueue::pop() {
    // priority_queue::top is const; the element is discarded right after
    Event ev = std::move(const_cast<Event &>(q.top()));
    q.pop();
    return ev;
}

const Event &apply_delay(EventQueue &q, double now, double delay,
                         std::vector<Envelope> batch) {
    Event ev;
    ev.at = now + delay;
    ev.kind = EventKind::PhaseDeliver;
    ev.batch = std::move(batch);
    return q.schedule(std::move(ev));
}

std::string MessageLog::to_text() const {
    std::string s = "time,from,to,kind,view,phase,block_hash\n";
    s.reserve(s.size() + records_.size() * 120);
    char buf[96];
    for (const auto &r: records_)
    {
        std::snprintf(buf, sizeof(buf), "%.9f,%" PRIu32 ",%" PRIu32 ",",
                      r.time, r.from, r.to);
        s += buf;
        s += to_string(r.kind);
        std::snprintf(buf, sizeof(buf), ",%" PRIu64 ",", r.view);
        s += buf;
        s += to_string(r.phase);
        s += ',';
        s += to_hex(r.block_hash);
        s += '\n';
    }
    return s;
}

void MessageLog::write(const std::string &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write message log to " + path);
    out << to_text();
    if (!out) throw IoError("failed writing message log to " + path);
}

size_t phase_steps(Protocol p) {
    return p == Protocol::HotStuff ? 4 : 3;
}

double expected_runtime(const SimConfig &cfg) {
    double base = static_cast<double>(phase_steps(cfg.protocol) * cfg.rounds) * cfg.delay;
    if (cfg.behavior == ByzBehavior::WithholdVotes || cfg.f == 0) return base;
    double p = static_cast<double>(cfg.f) / static_cast<double>(cfg.n);
    double detect = cfg.detection == Detection::FailFast ? cfg.delay : cfg.view_timeout;
    double c_fail = cfg.protocol == Protocol::HotStuff ? detect : detect + cfg.delta;
    return base + static_cast<double>(cfg.rounds) * (p / (1 - p)) * c_fail;
}

namespace {

using steady = std::chrono::steady_clock;

template<typename Replica>
class Simulation {
    const SimConfig &cfg;
    const RunHooks &hooks;
    BehaviorTable byz;
    KeyRegistry reg;
    BlockStore store;
    ReplicaContext ctx;
    std::vector<Replica> replicas;
    EventQueue q;
    Output out;
    Metrics m;

    size_t honest_total;
    size_t honest_done = 0;
    bool done = false;
    double now = 0;
    steady::time_point wall_start;
    ViewNumber view_guard;

    std::unordered_map<std::uint64_t, Digest> decided;     // height -> hash
    std::set<ViewNumber> committed_views, failed_views, sync_views;
    std::unordered_set<ViewNumber> detections;
    ViewNumber last_commit_view = 0;

    void step_done(NodeId i);
    void route(NodeId i);
    void record_action(NodeId i, const Action &a);

    template<typename Fn>
    void step(NodeId i, Fn &&fn) {
        out.clear();
        if (hooks.on_step)
        {
            SafetyState before = replicas[i].safety();
            fn(replicas[i]);
            hooks.on_step(i, before, replicas[i].safety());
        }
        else
            fn(replicas[i]);
        route(i);
        if (!byz.is_byzantine(i) && replicas[i].view() > view_guard)
            throw LivenessFailure(
                "view " + std::to_string(replicas[i].view()) +
                " exceeds the guard of 100 x rounds at t=" + std::to_string(now) +
                " (committed " + std::to_string(replicas[i].committed().size()) +
                " of " + std::to_string(cfg.rounds) + " blocks)");
    }

    public:
    Simulation(const SimConfig &cfg, const RunHooks &hooks):
        cfg(cfg), hooks(hooks), byz(inject_byzantine(cfg)),
        reg(static_cast<NodeId>(cfg.n)),
        ctx(ReplicaContext::make(
            cfg.n, cfg.f, cfg.delta,
            cfg.detection == Detection::Timer ? std::optional<double>(cfg.view_timeout)
                                              : std::nullopt,
            reg, store)),
        honest_total(byz.honest_count()),
        view_guard(100 * static_cast<ViewNumber>(cfg.rounds)) {
        replicas.reserve(cfg.n);
        for (NodeId i = 0; i < cfg.n; i++) replicas.emplace_back(i, ctx);
        out.outbound.reserve(cfg.n);
    }

    Metrics run();
};

template<typename Replica>
void Simulation<Replica>::route(NodeId i) {
    std::vector<Envelope> bcast, replies;
    for (auto &env: out.outbound)
    {
        const auto &msg = env.msg;
        bool is_bcast = is_broadcast(msg.kind);
        if (is_bcast && byz.silent(i))
        {
            // the proposal that never comes is noticed one delay later
            if (msg.kind == MsgKind::Proposal &&
                cfg.detection == Detection::FailFast &&
                detections.insert(msg.view).second)
            {
                Event ev;
                ev.at = now + cfg.delay;
                ev.kind = EventKind::FailureDetect;
                ev.view = msg.view;
                q.schedule(std::move(ev));
            }
            continue;
        }
        if (!is_bcast && byz.withholds(i)) continue;
        if (env.to != i)
        {
            m.messages_sent++;
            if (hooks.log)
                hooks.log->add(LogRecord{now, i, env.to, msg.kind, msg.view,
                                         msg.phase, msg.block_hash()});
        }
        (is_bcast ? bcast : replies).push_back(std::move(env));
    }
    if (!bcast.empty()) apply_delay(q, now, cfg.delay, std::move(bcast));
    if (!replies.empty()) apply_delay(q, now, 0, std::move(replies));
    for (const auto &a: out.actions) record_action(i, a);
}

template<typename Replica>
void Simulation<Replica>::record_action(NodeId i, const Action &a) {
    if (a.kind == Action::Kind::SetTimer)
    {
        Event ev;
        ev.at = a.timer.at;
        ev.kind = EventKind::TimerFire;
        ev.timer = a.timer;
        q.schedule(std::move(ev));
        return;
    }
    if (byz.is_byzantine(i)) return;
    switch (a.kind)
    {
        case Action::Kind::Commit: {
            auto [it, fresh] = decided.emplace(a.block->height, a.block->hash);
            if (!fresh && it->second != a.block->hash)
                throw Error("safety violation: conflicting commits at height " +
                            std::to_string(a.block->height));
            if (hooks.on_commit) hooks.on_commit(i, *a.block);
            committed_views.insert(a.view);
            last_commit_view = std::max(last_commit_view, a.view);
            if (replicas[i].committed().size() == cfg.rounds &&
                a.block->height == cfg.rounds)
            {
                if (++honest_done == honest_total) done = true;
            }
            break;
        }
        case Action::Kind::ViewFailed:
            failed_views.insert(a.view);
            break;
        case Action::Kind::SyncWaitEnter:
            sync_views.insert(a.view);
            break;
        default:
            break;
    }
}

template<typename Replica>
Metrics Simulation<Replica>::run() {
    wall_start = steady::now();
    q.schedule(Event{0, 0, EventKind::Start});
    while (!done && !q.empty())
    {
        Event ev = q.pop();
        now = ev.at;
        if (cfg.clock == ClockMode::Real)
            std::this_thread::sleep_until(
                wall_start + std::chrono::duration_cast<steady::duration>(
                                 std::chrono::duration<double>(now)));
        switch (ev.kind)
        {
            case EventKind::Start:
                for (NodeId i = 0; i < cfg.n && !done; i++)
                    step(i, [&](Replica &r) { r.on_start(now, out); });
                break;
            case EventKind::PhaseDeliver:
                for (const auto &env: ev.batch)
                {
                    if (done) break;
                    step(env.to, [&](Replica &r) { r.on_message(env.msg, now, out); });
                }
                break;
            case EventKind::TimerFire:
                step(ev.timer.node, [&](Replica &r) { r.on_timer(ev.timer, now, out); });
                break;
            case EventKind::FailureDetect:
                for (NodeId i = 0; i < cfg.n && !done; i++)
                    step(i, [&](Replica &r) { r.on_timeout(ev.view, now, out); });
                break;
        }
    }
    if (!done)
        throw LivenessFailure("event queue drained at t=" + std::to_string(now) +
                              " with " + std::to_string(honest_done) + " of " +
                              std::to_string(honest_total) +
                              " honest replicas finished");

    m.virtual_elapsed = now;
    m.wall_elapsed = std::chrono::duration<double>(steady::now() - wall_start).count();
    size_t rounds = SIZE_MAX;
    for (NodeId i = 0; i < cfg.n; i++)
    {
        if (byz.is_byzantine(i)) continue;
        rounds = std::min(rounds, replicas[i].committed().size());
        m.messages_dropped += replicas[i].dropped();
    }
    m.rounds_committed = rounds;
    m.views_attempted = last_commit_view;
    m.view_changes = m.views_attempted > rounds ? m.views_attempted - rounds : 0;
    for (auto v: sync_views)
        if (v <= last_commit_view) m.sync_waits++;
    for (auto v: committed_views)
        if (!failed_views.count(v) && !failed_views.count(v - 1) && !sync_views.count(v))
            m.happy_path_rounds++;
    if (hooks.outcomes)
    {
        hooks.outcomes->clear();
        for (ViewNumber v = 1; v <= last_commit_view; v++)
            hooks.outcomes->push_back(ViewOutcome{v, committed_views.count(v) > 0,
                                                  failed_views.count(v) > 0,
                                                  sync_views.count(v) > 0});
    }
    return m;
}

} // namespace

Metrics run_consensus(const SimConfig &cfg, const RunHooks &hooks) {
    cfg.validate();
    if (cfg.protocol == Protocol::HotStuff)
        return Simulation<HsReplica>(cfg, hooks).run();
    return Simulation<Hs2Replica>(cfg, hooks).run();
}

} // namespace hsduo
