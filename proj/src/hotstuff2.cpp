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

#include <memory>

#include "hsduo/error.h"
#include "hsduo/hotstuff2.h"

namespace hsduo {

std::string_view to_string(Hs2Phase p) {
    switch (p)
    {
        case Hs2Phase::Propose: return "propose";
        case Hs2Phase::PreCommit: return "pre-commit";
        case Hs2Phase::Decide: return "decide";
        case Hs2Phase::SyncWait: return "sync-wait";
    }
    return "?";
}

Hs2Replica::Hs2Replica(NodeId id, const ReplicaContext &ctx):
    ctx(&ctx), self(id) {}

bool Hs2Replica::check_qc(const QcPtr &qc) {
    if (!qc) return false;
    for (const auto &v: verified)
        if (v == qc) return true;
    const auto &d = memo.get(qc->phase, qc->view, qc->block_hash);
    if (!verify_qc(*ctx->reg, *qc, ctx->quorum, d)) return false;
    verified[verified_next] = qc;
    verified_next = (verified_next + 1) % verified.size();
    return true;
}

bool Hs2Replica::may_vote(ViewNumber v, int rank) const {
    return v > vote_view || (v == vote_view && rank > vote_rank);
}

void Hs2Replica::vote(PhaseTag phase, const Digest &block, Output &out) {
    const auto &d = memo.get(phase, view_, block);
    Message msg;
    msg.kind = MsgKind::Vote;
    msg.phase = phase;
    msg.view = view_;
    msg.from = self;
    msg.vote = Vote{phase, view_, block, self, ctx->reg->sign(self, d)};
    vote_view = view_;
    vote_rank = phase == PhaseTag::Prepare ? 0 : 1;
    if (phase == PhaseTag::Prepare)
        safety_.last_voted_view = std::max(safety_.last_voted_view, view_);
    out.outbound.push_back({leader_for_view(view_, ctx->n), std::move(msg)});
}

void Hs2Replica::enter_view(ViewNumber v, Hs2Phase phase, double, Output &) {
    view_ = v;
    phase_ = phase;
    for (auto &c: collectors) c.clear();
}

void Hs2Replica::arm_view_timer(double now, Output &out) {
    if (!ctx->view_timeout) return;
    Action a{Action::Kind::SetTimer};
    a.view = view_;
    a.timer = Timer{TimerKind::ViewTimeout, self, view_, now + *ctx->view_timeout};
    out.actions.push_back(std::move(a));
}

void Hs2Replica::exit_sync_wait(double, Output &out) {
    sync_deadline_.reset();
    phase_ = Hs2Phase::Propose;
    Action a{Action::Kind::SyncWaitExit};
    a.view = view_;
    out.actions.push_back(std::move(a));
}

void Hs2Replica::broadcast(Message msg, Output &out) const {
    for (NodeId i = 0; i < ctx->n; i++)
        out.outbound.push_back({i, msg});
}

void Hs2Replica::propose(Output &out) {
    const auto &justify = safety_.high_qc;
    const auto &parent = ctx->store->get(justify->block_hash);
    proposal = ctx->store->add(
        Block::make(*parent, view_, self, command_payload(view_, self)));
    proposed_view = view_;
    collectors[0].reset(ctx->n, PhaseTag::Prepare, view_, proposal->hash);
    collectors[1].reset(ctx->n, PhaseTag::PreCommit, view_, proposal->hash);
    Message msg;
    msg.kind = MsgKind::Proposal;
    msg.phase = PhaseTag::Prepare;
    msg.view = view_;
    msg.from = self;
    msg.block = proposal;
    msg.qc = justify;
    broadcast(std::move(msg), out);
}

void Hs2Replica::commit_through(const BlockPtr &blk, ViewNumber qc_view,
                                Output &out) {
    std::uint64_t top = committed_.empty() ? 0 : committed_.back()->height;
    if (blk->height <= top) return;
    std::vector<BlockPtr> chain;
    BlockPtr b = blk;
    while (b->height > top)
    {
        chain.push_back(b);
        b = ctx->store->get(b->parent);
    }
    const auto &base = committed_.empty() ? ctx->store->genesis() : committed_.back();
    if (b->hash != base->hash)
        throw Error("replica " + std::to_string(self) +
                    " asked to commit a block conflicting with height " +
                    std::to_string(top));
    for (auto it = chain.rbegin(); it != chain.rend(); it++)
    {
        committed_.push_back(*it);
        Action a{Action::Kind::Commit};
        a.view = qc_view;
        a.block = *it;
        out.actions.push_back(std::move(a));
    }
}

void Hs2Replica::on_start(double now, Output &out) {
    safety_.high_qc = ctx->genesis_qc;
    enter_view(1, Hs2Phase::Propose, now, out);
    arm_view_timer(now, out);
    if (is_leader()) propose(out);
}

void Hs2Replica::on_message(const Message &msg, double now, Output &out) {
    switch (msg.kind)
    {
        case MsgKind::Proposal: on_proposal(msg, now, out); break;
        case MsgKind::Certificate: on_certificate(msg, now, out); break;
        case MsgKind::Vote: on_vote(msg, out); break;
        case MsgKind::NewView: dropped_++; break;   // not part of this protocol
    }
}

void Hs2Replica::on_proposal(const Message &msg, double now, Output &out) {
    if (msg.view < view_) return;
    if (msg.view == view_ && !may_vote(view_, 0)) return;
    const auto &blk = msg.block;
    const auto &justify = msg.qc;
    if (!blk || !justify || msg.from != leader_for_view(msg.view, ctx->n) ||
        blk->proposer != msg.from || blk->view != msg.view ||
        blk->parent != justify->block_hash || justify->view >= msg.view ||
        blk->hash != Block::compute_hash(blk->parent, blk->height, blk->view,
                                         blk->proposer, blk->payload))
    {
        dropped_++;
        return;
    }
    auto parent = ctx->store->find(blk->parent);
    if (!parent || parent->height + 1 != blk->height || !check_qc(justify))
    {
        dropped_++;
        return;
    }
    if (!ctx->store->find(blk->hash)) ctx->store->add(*blk);

    bool was_waiting = phase_ == Hs2Phase::SyncWait;
    bool jumped = msg.view > view_;
    if (was_waiting) exit_sync_wait(now, out);
    if (jumped) enter_view(msg.view, Hs2Phase::Propose, now, out);
    if (was_waiting || jumped) arm_view_timer(now, out);
    phase_ = Hs2Phase::Propose;
    safety_.update_high(justify);
    if (!safe_node(*blk, *justify, safety_, *ctx->store)) return;
    vote(PhaseTag::Prepare, blk->hash, out);
    phase_ = Hs2Phase::PreCommit;
}

void Hs2Replica::on_certificate(const Message &msg, double now, Output &out) {
    const auto &qc = msg.qc;
    if (msg.view != view_ || phase_ == Hs2Phase::SyncWait) return;
    PhaseTag carried;
    switch (msg.phase)
    {
        case PhaseTag::PreCommit: carried = PhaseTag::Prepare; break;
        case PhaseTag::Decide: carried = PhaseTag::PreCommit; break;
        default: dropped_++; return;
    }
    if (!qc || qc->phase != carried || qc->view != msg.view ||
        msg.from != leader_for_view(msg.view, ctx->n))
    {
        dropped_++;
        return;
    }
    if (msg.phase == PhaseTag::PreCommit && !may_vote(view_, 1)) return;
    if (!check_qc(qc))
    {
        dropped_++;
        return;
    }
    if (msg.phase == PhaseTag::PreCommit)
    {
        safety_.update_high(qc);
        safety_.update_lock(qc);
        vote(PhaseTag::PreCommit, qc->block_hash, out);
        phase_ = Hs2Phase::Decide;
        return;
    }
    commit_through(ctx->store->get(qc->block_hash), qc->view, out);
    enter_view(view_ + 1, Hs2Phase::Propose, now, out);
    arm_view_timer(now, out);
    if (is_leader()) propose(out);
}

void Hs2Replica::on_vote(const Message &msg, Output &out) {
    if (msg.view != view_ || proposed_view != view_) return;
    int idx = msg.vote.phase == PhaseTag::Prepare ? 0 :
              msg.vote.phase == PhaseTag::PreCommit ? 1 : -1;
    if (idx < 0 || msg.vote.voter != msg.from || msg.vote.view != msg.view)
    {
        dropped_++;
        return;
    }
    auto &col = collectors[idx];
    switch (col.add(*ctx->reg, msg.vote, ctx->quorum))
    {
        case VoteCollector::Result::Rejected:
            dropped_++;
            return;
        case VoteCollector::Result::Quorum:
            break;
        default:
            return;
    }
    Message cert;
    cert.kind = MsgKind::Certificate;
    cert.phase = idx == 0 ? PhaseTag::PreCommit : PhaseTag::Decide;
    cert.view = view_;
    cert.from = self;
    cert.qc = std::make_shared<const QuorumCertificate>(
        col.certify(*ctx->reg, ctx->quorum));
    broadcast(std::move(cert), out);
}

void Hs2Replica::enter_sync_wait(double now, Output &out) {
    Action failed{Action::Kind::ViewFailed};
    failed.view = view_;
    out.actions.push_back(std::move(failed));

    ViewNumber next = view_ + 1;
    if (leader_for_view(next, ctx->n) == self)
    {
        sync_deadline_.reset();
        enter_view(next, Hs2Phase::Propose, now, out);
        Action a{Action::Kind::SetTimer};
        a.view = next;
        a.timer = Timer{TimerKind::ViewSwitch, self, next, now + ctx->delta};
        out.actions.push_back(std::move(a));
        return;
    }
    enter_view(next, Hs2Phase::SyncWait, now, out);
    sync_deadline_ = now + ctx->delta;
    Action enter{Action::Kind::SyncWaitEnter};
    enter.view = next;
    out.actions.push_back(std::move(enter));
    Action a{Action::Kind::SetTimer};
    a.view = next;
    a.timer = Timer{TimerKind::SyncDeadline, self, next, *sync_deadline_};
    out.actions.push_back(std::move(a));
}

void Hs2Replica::on_timeout(ViewNumber view, double now, Output &out) {
    if (view != view_) return;
    enter_sync_wait(now, out);
}

void Hs2Replica::on_timer(const Timer &t, double now, Output &out) {
    switch (t.kind)
    {
        case TimerKind::ViewTimeout:
            on_timeout(t.view, now, out);
            break;
        case TimerKind::SyncDeadline:
            if (phase_ == Hs2Phase::SyncWait && view_ == t.view)
            {
                exit_sync_wait(now, out);
                arm_view_timer(now, out);
            }
            break;
        case TimerKind::ViewSwitch:
            if (view_ == t.view && proposed_view < view_ && is_leader())
            {
                arm_view_timer(now, out);
                propose(out);
            }
            break;
    }
}

bool happy_path_detector(std::span<const ViewOutcome> history) {
    for (auto it = history.rbegin(); it != history.rend(); it++)
    {
        if (!it->committed && !it->timed_out) continue;    // still running
        return it->committed && !it->timed_out && !it->sync_wait;
    }
    return false;
}

} // namespace hsduo
