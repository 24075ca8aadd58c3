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

#ifndef _HSDUO_HOTSTUFF_H
#define _HSDUO_HOTSTUFF_H

#include <array>
#include <map>
#include <vector>

#include "hsduo/replica.h"

namespace hsduo {

/** Where a HotStuff replica is within its current view. */
enum class HsPhase: std::uint8_t {
    Prepare,    // waiting for the view's proposal
    PreCommit,  // voted prepare, waiting for prepareQC
    Commit,     // voted pre-commit, waiting for precommitQC
    Decide,     // voted commit, waiting for commitQC
    NewView,    // timed out, waiting for the next leader's proposal
};

std::string_view to_string(HsPhase p);

/**
 * Basic (non-chained) four-phase HotStuff replica.
 *
 * A view runs prepare -> pre-commit -> commit -> decide. In each phase the
 * leader broadcasts and collects n-f votes into the QC it broadcasts next:
 * prepare votes form the prepareQC (replicas raise high_qc), pre-commit
 * votes the precommitQC (replicas lock), commit votes the commitQC (replicas
 * commit on the decide broadcast). After committing, or after a pacemaker
 * timeout, replicas send NewView(high_qc) to the next view's leader, which
 * proposes once it holds n-f of them.
 *
 * Transitions depend only on (state, input, now); outputs are appended to
 * the caller's Output. Invalid or stale input is dropped and counted.
 */
class HsReplica {
    const ReplicaContext *ctx;
    NodeId self;
    ViewNumber view_ = 0;
    HsPhase phase_ = HsPhase::Prepare;
    SafetyState safety_;
    // last (view, phase) this replica voted in; phases rank Prepare < PreCommit < Commit
    ViewNumber vote_view = 0;
    int vote_rank = -1;
    std::vector<BlockPtr> committed_;

    // leader role
    ViewNumber proposed_view = 0;
    BlockPtr proposal;
    std::array<VoteCollector, 3> collectors;
    struct NewViewSet {
        std::vector<bool> seen;
        std::vector<QcPtr> qcs;
    };
    std::map<ViewNumber, NewViewSet> new_views;

    size_t dropped_ = 0;
    DigestMemo memo;
    DigestMemo new_view_memo;
    std::array<QcPtr, 4> verified;  // recently verified certificates
    size_t verified_next = 0;

    bool check_qc(const QcPtr &qc);
    bool may_vote(ViewNumber v, int rank) const;
    void vote(PhaseTag phase, const Digest &block, Output &out);
    void send_new_view(Output &out);
    void enter_view(ViewNumber v, HsPhase phase, double now, Output &out);
    void propose(const QcPtr &justify, Output &out);
    void commit_through(const BlockPtr &blk, ViewNumber qc_view, Output &out);
    void broadcast(Message msg, Output &out) const;

    void on_proposal(const Message &msg, double now, Output &out);
    void on_certificate(const Message &msg, double now, Output &out);
    void on_vote(const Message &msg, Output &out);
    void on_new_view(const Message &msg, double now, Output &out);

    public:
    HsReplica(NodeId id, const ReplicaContext &ctx);

    NodeId id() const { return self; }
    ViewNumber view() const { return view_; }
    HsPhase phase() const { return phase_; }
    const SafetyState &safety() const { return safety_; }
    const std::vector<BlockPtr> &committed() const { return committed_; }
    size_t dropped() const { return dropped_; }
    bool is_leader() const { return leader_for_view(view_, ctx->n) == self; }

    /** Enter view 1 and send NewView(genesis QC) to its leader. */
    void on_start(double now, Output &out);
    void on_message(const Message &msg, double now, Output &out);
    /** Pacemaker timeout for `view`; ignored unless it is the current view. */
    void on_timeout(ViewNumber view, double now, Output &out);
    void on_timer(const Timer &t, double now, Output &out);

    /**
     * Effect of a verified QC on the replica: prepare QCs raise high_qc,
     * pre-commit QCs raise the lock, commit QCs commit their block (and any
     * uncommitted ancestors). Never lowers the lock or high_qc.
     */
    void apply_qc(const QcPtr &qc, Output &out);
};

} // namespace hsduo

#endif
