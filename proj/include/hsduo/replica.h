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

#ifndef _HSDUO_REPLICA_H
#define _HSDUO_REPLICA_H

#include <optional>
#include <string_view>
#include <vector>

#include "hsduo/protocol_core.h"

namespace hsduo {

/* Wire messages. All replicas of a simulation exchange these in memory. */

enum class MsgKind: std::uint8_t {
    Proposal,       // leader -> all: block + justify QC
    Vote,           // replica -> leader
    Certificate,    // leader -> all: freshly formed QC
    NewView,        // replica -> next leader: high QC
};

std::string_view to_string(MsgKind k);

/** Leader broadcasts open a phase-step and pay the communication delay. */
inline bool is_broadcast(MsgKind k) {
    return k == MsgKind::Proposal || k == MsgKind::Certificate;
}

struct Message {
    MsgKind kind = MsgKind::Vote;
    PhaseTag phase = PhaseTag::Prepare;
    ViewNumber view = 0;
    NodeId from = 0;
    BlockPtr block;     // Proposal
    QcPtr qc;           // Proposal justify, Certificate payload, NewView high QC
    Vote vote;          // Vote, NewView

    /** Block the message is about, for logs. */
    const Digest &block_hash() const;
};

struct Envelope {
    NodeId to;
    Message msg;
};

enum class TimerKind: std::uint8_t {
    ViewTimeout,    // pacemaker timer, timer(T) detection only
    SyncDeadline,   // end of a HotStuff-2 view-synchronization wait
    ViewSwitch,     // HotStuff-2 next leader's view-switch delay
};

struct Timer {
    TimerKind kind = TimerKind::ViewTimeout;
    NodeId node = 0;
    ViewNumber view = 0;
    double at = 0;
};

/** Side effects a transition asks of the simulator. */
struct Action {
    enum class Kind: std::uint8_t {
        SetTimer,
        Commit,         // block committed; view = view of the deciding QC
        ViewFailed,     // replica gave up on `view`
        SyncWaitEnter,  // entered SyncWait for `view`
        SyncWaitExit,
    };
    Kind kind;
    ViewNumber view = 0;
    BlockPtr block;
    Timer timer;
};

struct Output {
    std::vector<Envelope> outbound;
    std::vector<Action> actions;

    void clear() {
        outbound.clear();
        actions.clear();
    }
};

/** Read-mostly context shared by every replica of one simulation. */
struct ReplicaContext {
    size_t n = 0;
    size_t f = 0;
    size_t quorum = 0;
    /** HotStuff-2 view-switch delay (seconds); unused by HotStuff. */
    double delta = 0;
    /** Pacemaker view timer; absent under fail-fast detection. */
    std::optional<double> view_timeout;
    KeyRegistry *reg = nullptr;
    BlockStore *store = nullptr;
    QcPtr genesis_qc;

    /** Builds the context and installs the genesis QC into `reg`. */
    static ReplicaContext make(size_t n, size_t f, double delta,
                               std::optional<double> view_timeout,
                               KeyRegistry &reg, BlockStore &store);
};

/** Single-entry cache of vote_digest(); a replica checks the QC it just voted toward. */
class DigestMemo {
    PhaseTag phase{};
    ViewNumber view = 0;
    Digest block{};
    Digest value{};
    bool valid = false;

    public:
    const Digest &get(PhaseTag p, ViewNumber v, const Digest &b);
};

/**
 * Leader-side collection of one phase's votes for the current view.
 * Accepts each voter once and reports the quorum-th vote exactly once.
 */
class VoteCollector {
    std::vector<Vote> votes;
    std::vector<bool> seen;
    Digest expected{};
    bool formed = false;
    bool active = false;

    public:
    void reset(size_t n, PhaseTag phase, ViewNumber view, const Digest &block);
    void clear() { active = false; votes.clear(); }

    bool is_active() const { return active; }
    bool is_formed() const { return formed; }
    size_t size() const { return votes.size(); }

    enum class Result { Rejected, Duplicate, Added, Quorum, Late };

    Result add(const KeyRegistry &reg, const Vote &vote, size_t quorum);
    /** QC over the collected votes; call once add() returned Quorum. */
    QuorumCertificate certify(const KeyRegistry &reg, size_t quorum) const;
};

std::vector<std::uint8_t> command_payload(ViewNumber view, NodeId proposer);

} // namespace hsduo

#endif
