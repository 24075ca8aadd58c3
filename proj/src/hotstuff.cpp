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
#include <memory>

#include "hsduo/error.h"
#include "hsduo/hotstuff.h"

namespace hsduo {

std::string_view to_string(HsPhase p) {
    switch (p)
    {
        case HsPhase::Prepare: return "prepare";
        case HsPhase::PreCommit: return "pre-commit";
        case HsPhase::Commit: return "commit";
        case HsPhase::Decide: return "decide";
        case HsPhase::NewView: return "new-view";
    }
    return "?";
}

namespace {

int vote_rank_of(PhaseTag p) {
    switch (p)
    {
        case PhaseTag::Prepare: return 0;
        case PhaseTag::PreCommit: return 1;
        case PhaseTag::Commit: return 2;
        default: return -1;
    }
}

} // namespace

HsReplica::HsReplica(NodeId id, const ReplicaContext &ctx):
    ctx(&ctx), self(id) {}

bool HsReplica::check_qc(const QcPtr &qc) {
    if (!qc) return false;
    for (const auto &v: verified)
        if (v == qc) return true;
    const auto &d = memo.get(qc->phase, qc->view, qc->block_hash);
    if (!verify_qc(*ctx->reg, *qc, ctx->quorum, d)) return false;
    verified[verified_next] = qc;
    verified_next = (verified_next + 1) % verified.size();
    return true;
}

bool HsReplica::may_vote(ViewNumber v, int rank) const {
    return v > vote_view || (v == vote_view && rank > vote_rank);
}

void HsReplica::vote(PhaseTag phase, const Digest &block, Output &out) {
    const auto &d = memo.get(phase, view_, block);
    Message msg;
    msg.kind = MsgKind::Vote;
    msg.phase = phase;
    msg.view = view_;
    msg.from = self;
    msg.vote = Vote{phase, view_, block, self, ctx->reg->sign(self, d)};
    vote_view = view_;
    vote_rank = vote_rank_of(phase);
    if (phase == PhaseTag::Prepare)
        safety_.last_voted_view = std::max(safety_.last_voted_view, view_);
    out.outbound.push_back({leader_for_view(view_, ctx->n), std::move(msg)});
}

void HsReplica::send_new_view(Output &out) {
    const auto &hqc = safety_.high_qc;
    Message msg;
    msg.kind = MsgKind::NewView;
    msg.phase = PhaseTag::NewView;
    msg.view = view_;
    msg.from = self;
    msg.qc = hqc;
    const auto &d = new_view_memo.get(PhaseTag::NewView, view_, hqc->block_hash);
    msg.vote = Vote{PhaseTag::NewView, view_, hqc->block_hash, self,
                    ctx->reg->sign(self, d)};
    out.outbound.push_back({leader_for_view(view_, ctx->n), std::move(msg)});
}

void HsReplica::enter_view(ViewNumber v, HsPhase phase, double now,
                           Output &out) {
    view_ = v;
    phase_ = phase;
    for (auto &c: collectors) c.clear();
    new_views.erase(new_views.begin(), new_views.lower_bound(v));
    if (ctx->view_timeout)
    {
        Action a{Action::Kind::SetTimer};
        a.view = v;
        a.timer = Timer{TimerKind::ViewTimeout, self, v, now + *ctx->view_timeout};
        out.actions.push_back(std::move(a));
    }
}

void HsReplica::broadcast(Message msg, Output &out) const {
    for (NodeId i = 0; i < ctx->n; i++)
        out.outbound.push_back({i, msg});
}

void HsReplica::propose(const QcPtr &justify, Output &out) {
    const auto &parent = ctx->store->get(justify->block_hash);
    proposal = ctx->store->add(
        Block::make(*parent, view_, self, command_payload(view_, self)));
    proposed_view = view_;
    collectors[0].reset(ctx->n, PhaseTag::Prepare, view_, proposal->hash);
    collectors[1].reset(ctx->n, PhaseTag::PreCommit, view_, proposal->hash);
    collectors[2].reset(ctx->n, PhaseTag::Commit, view_, proposal->hash);
    Message msg;
    msg.kind = MsgKind::Proposal;
    msg.phase = PhaseTag::Prepare;
    msg.view = view_;
    msg.from = self;
    msg.block = proposal;
    msg.qc = justify;
    broadcast(std::move(msg), out);
}

void HsReplica::commit_through(const BlockPtr &blk, ViewNumber qc_view,
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

void HsReplica::apply_qc(const QcPtr &qc, Output &out) {
    switch (qc->phase)
    {
        case PhaseTag::Prepare:
            safety_.update_high(qc);
            break;
        case PhaseTag::PreCommit:
            safety_.update_high(qc);
            safety_.update_lock(qc);
            break;
        case PhaseTag::Commit:
            commit_through(ctx->store->get(qc->block_hash), qc->view, out);
            break;
        default:
            break;
    }
}

void HsReplica::on_start(double now, Output &out) {
    safety_.high_qc = ctx->genesis_qc;
    enter_view(1, HsPhase::Prepare, now, out);
    send_new_view(out);
}

void HsReplica::on_message(const Message &msg, double now, Output &out) {
    switch (msg.kind)
    {
        case MsgKind::Proposal: on_proposal(msg, now, out); break;
        case MsgKind::Certificate: on_certificate(msg, now, out); break;
        case MsgKind::Vote: on_vote(msg, out); break;
        case MsgKind::NewView: on_new_view(msg, now, out); break;
    }
}

void HsReplica::on_proposal(const Message &msg, double now, Output &out) {
    if (msg.view < view_) return;   // stale
    if (msg.view == view_ && !may_vote(view_, 0)) return;  // already voted
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

    if (msg.view > view_)
        enter_view(msg.view, HsPhase::Prepare, now, out);
    else
        phase_ = HsPhase::Prepare;
    safety_.update_high(justify);
    if (!safe_node(*blk, *justify, safety_, *ctx->store)) return;
    vote(PhaseTag::Prepare, blk->hash, out);
    phase_ = HsPhase::PreCommit;
}

void HsReplica::on_certificate(const Message &msg, double now, Output &out) {
    const auto &qc = msg.qc;
    if (msg.view != view_) return;  // stale or from a view we never entered
    PhaseTag carried;
    switch (msg.phase)
    {
        case PhaseTag::PreCommit: carried = PhaseTag::Prepare; break;
        case PhaseTag::Commit: carried = PhaseTag::PreCommit; break;
        case PhaseTag::Decide: carried = PhaseTag::Commit; break;
        default: dropped_++; return;
    }
    if (!qc || qc->phase != carried || qc->view != msg.view ||
        msg.from != leader_for_view(msg.view, ctx->n))
    {
        dropped_++;
        return;
    }
    if (msg.phase != PhaseTag::Decide && !may_vote(view_, vote_rank_of(msg.phase)))
        return;     // duplicate delivery
    if (!check_qc(qc))
    {
        dropped_++;
        return;
    }
    apply_qc(qc, out);
    switch (msg.phase)
    {
        case PhaseTag::PreCommit:
            vote(PhaseTag::PreCommit, qc->block_hash, out);
            phase_ = HsPhase::Commit;
            break;
        case PhaseTag::Commit:
            vote(PhaseTag::Commit, qc->block_hash, out);
            phase_ = HsPhase::Decide;
            break;
        default:
            enter_view(view_ + 1, HsPhase::Prepare, now, out);
            send_new_view(out);
            break;
    }
}

void HsReplica::on_vote(const Message &msg, Output &out) {
    if (msg.view != view_ || proposed_view != view_) return;   // not collecting
    int idx = vote_rank_of(msg.vote.phase);
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
    static constexpr PhaseTag next[] = {PhaseTag::PreCommit, PhaseTag::Commit,
                                        PhaseTag::Decide};
    Message cert;
    cert.kind = MsgKind::Certificate;
    cert.phase = next[idx];
    cert.view = view_;
    cert.from = self;
    cert.qc = std::make_shared<const QuorumCertificate>(
        col.certify(*ctx->reg, ctx->quorum));
    broadcast(std::move(cert), out);
}

void HsReplica::on_new_view(const Message &msg, double now, Output &out) {
    ViewNumber v = msg.view;
    if (leader_for_view(v, ctx->n) != self)
    {
        dropped_++;
        return;
    }
    if (v < view_ || v <= proposed_view) return;    // late
    const auto &vt = msg.vote;
    if (!msg.qc || vt.phase != PhaseTag::NewView || vt.view != v ||
        vt.voter != msg.from || vt.voter >= ctx->n ||
        vt.block_hash != msg.qc->block_hash ||
        !verify_vote(*ctx->reg, vt,
                     new_view_memo.get(PhaseTag::NewView, v, vt.block_hash)) ||
        !check_qc(msg.qc))
    {
        dropped_++;
        return;
    }
    auto &set = new_views[v];
    if (set.seen.empty()) set.seen.assign(ctx->n, false);
    if (set.seen[vt.voter]) return;
    set.seen[vt.voter] = true;
    set.qcs.push_back(msg.qc);
    if (set.qcs.size() < ctx->quorum) return;

    QcPtr best = set.qcs.front();
    for (const auto &qc: set.qcs)
        if (qc->view > best->view) best = qc;
    if (v > view_)
        enter_view(v, HsPhase::Prepare, now, out);
    else
        phase_ = HsPhase::Prepare;
    safety_.update_high(best);
    new_views.erase(new_views.begin(), new_views.upper_bound(v));
    propose(best, out);
}

void HsReplica::on_timeout(ViewNumber view, double now, Output &out) {
    if (view != view_) return;
    Action a{Action::Kind::ViewFailed};
    a.view = view;
    out.actions.push_back(std::move(a));
    enter_view(view_ + 1, HsPhase::NewView, now, out);
    send_new_view(out);
}

void HsReplica::on_timer(const Timer &t, double now, Output &out) {
    if (t.kind == TimerKind::ViewTimeout)
        on_timeout(t.view, now, out);
}

} // namespace hsduo
