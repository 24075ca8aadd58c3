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

#ifndef _HSDUO_HOTSTUFF2_H
#define _HSDUO_HOTSTUFF2_H

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "hsduo/replica.h"

namespace hsduo {

enum class Hs2Phase: std::uint8_t {
    Propose,    // waiting for the view's proposal
    PreCommit,  // voted on the proposal, waiting for the first QC
    Decide,     // locked and voted again, waiting for the decide broadcast
    SyncWait,   // lagging after a failed view; silent until proposal or deadline
};

std::string_view to_string(Hs2Phase p);

/**
 * HotStuff-2 replica: two voting phases per view.
 *
 * Happy path: the leader proposes with its high QC; replicas vote; the
 * leader turns n-f votes into the first QC and broadcasts it (pre-commit);
 * replicas lock on it and vote again; n-f second votes form the QC carried
 * by the decide broadcast, on which replicas commit. The next view's leader
 * proposes as soon as it has committed, so a view costs three broadcasts.
 *
 * After a failed view, non-leaders enter SyncWait for the view-switch delay
 * and stay silent; a proposal for the new view ends the wait early. The new
 * leader waits out the same delay before proposing.
 */
class Hs2Replica {
    const ReplicaContext *ctx;
    NodeId self;
    ViewNumber view_ = 0;
    Hs2Phase phase_ = Hs2Phase::Propose;
    SafetyState safety_;
    std::optional<double> sync_deadline_;
    ViewNumber vote_view = 0;
    int vote_rank = -1;     // 0: proposal vote, 1: pre-commit vote
    std::vector<BlockPtr> committed_;

    ViewNumber proposed_view = 0;
    BlockPtr proposal;
    std::array<VoteCollector, 2> collectors;

    size_t dropped_ = 0;
    DigestMemo memo;
    std::array<QcPtr, 4> verified;
    size_t verified_next = 0;

    bool check_qc(const QcPtr &qc);
    bool may_vote(ViewNumber v, int rank) const;
    void vote(PhaseTag phase, const Digest &block, Output &out);
    void enter_view(ViewNumber v, Hs2Phase phase, double now, Output &out);
    void arm_view_timer(double now, Output &out);
    void exit_sync_wait(double now, Output &out);
    void propose(Output &out);
    void commit_through(const BlockPtr &blk, ViewNumber qc_view, Output &out);
    void broadcast(Message msg, Output &out) const;

    void on_proposal(const Message &msg, double now, Output &out);
    void on_certificate(const Message &msg, double now, Output &out);
    void on_vote(const Message &msg, Output &out);

    public:
    Hs2Replica(NodeId id, const ReplicaContext &ctx);

    NodeId id() const { return self; }
    ViewNumber view() const { return view_; }
    Hs2Phase phase() const { return phase_; }
    const SafetyState &safety() const { return safety_; }
    const std::optional<double> &sync_deadline() const { return sync_deadline_; }
    const std::vector<BlockPtr> &committed() const { return committed_; }
    size_t dropped() const { return dropped_; }
    bool is_leader() const { return leader_for_view(view_, ctx->n) == self; }

    /** Enter view 1; its leader proposes immediately. */
    void on_start(double now, Output &out);
    void on_message(const Message &msg, double now, Output &out);
    /** The current view failed (detector or own timer); see enter_sync_wait. */
    void on_timeout(ViewNumber view, double now, Output &out);
    void on_timer(const Timer &t, double now, Output &out);

    /**
     * Abandon the current view and move to the next one. A non-leader enters
     * SyncWait until now + delta; the next view's leader instead schedules its
     * proposal for now + delta.
     */
    void enter_sync_wait(double now, Output &out);
};

/** Outcome of one view, as seen by an honest replica. */
struct ViewOutcome {
    ViewNumber view = 0;
    bool committed = false;
    bool timed_out = false;
    bool sync_wait = false;
};

/**
 * True iff the last completed view committed without a timeout or SyncWait.
 * Only labels metrics; protocol behaviour never depends on it.
 */
bool happy_path_detector(std::span<const ViewOutcome> history);

} // namespace hsduo

#endif
