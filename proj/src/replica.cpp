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
#include <string>

#include "hsduo/replica.h"

namespace hsduo {

std::string_view to_string(MsgKind k) {
    switch (k)
    {
        case MsgKind::Proposal: return "proposal";
        case MsgKind::Vote: return "vote";
        case MsgKind::Certificate: return "certificate";
        case MsgKind::NewView: return "new-view";
    }
    return "?";
}

const Digest &Message::block_hash() const {
    static const Digest none{};
    switch (kind)
    {
        case MsgKind::Proposal: return block ? block->hash : none;
        case MsgKind::Certificate: return qc ? qc->block_hash : none;
        case MsgKind::Vote:
        case MsgKind::NewView: return vote.block_hash;
    }
    return none;
}

ReplicaContext ReplicaContext::make(size_t n, size_t f, double delta,
                                    std::optional<double> view_timeout,
                                    KeyRegistry &reg, BlockStore &store) {
    ReplicaContext ctx;
    ctx.n = n;
    ctx.f = f;
    ctx.quorum = quorum_size(n, f);
    ctx.delta = delta;
    ctx.view_timeout = view_timeout;
    ctx.reg = &reg;
    ctx.store = &store;
    ctx.genesis_qc = std::make_shared<const QuorumCertificate>(
        make_genesis_qc(reg, store));
    return ctx;
}

const Digest &DigestMemo::get(PhaseTag p, ViewNumber v, const Digest &b) {
    if (!valid || p != phase || v != view || b != block)
    {
        phase = p;
        view = v;
        block = b;
        value = vote_digest(p, v, b);
        valid = true;
    }
    return value;
}

void VoteCollector::reset(size_t n, PhaseTag phase, ViewNumber view,
                          const Digest &block) {
    votes.clear();
    votes.reserve(n);
    seen.assign(n, false);
    expected = vote_digest(phase, view, block);
    formed = false;
    active = true;
}

VoteCollector::Result VoteCollector::add(const KeyRegistry &reg,
                                         const Vote &vote, size_t quorum) {
    if (!active) return Result::Rejected;
    if (vote.voter >= seen.size() || !verify_vote(reg, vote, expected))
        return Result::Rejected;
    if (seen[vote.voter]) return Result::Duplicate;
    if (formed) return Result::Late;
    seen[vote.voter] = true;
    votes.push_back(vote);
    if (votes.size() == quorum)
    {
        formed = true;
        return Result::Quorum;
    }
    return Result::Added;
}

QuorumCertificate VoteCollector::certify(const KeyRegistry &reg,
                                         size_t quorum) const {
    return make_qc(reg, votes, quorum);
}

std::vector<std::uint8_t> command_payload(ViewNumber view, NodeId proposer) {
    auto s = "cmd/v" + std::to_string(view) + "/p" + std::to_string(proposer);
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

} // namespace hsduo
