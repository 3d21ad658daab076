#include "onedelta/smr.hpp"

#include <algorithm>

namespace onedelta {

namespace {
std::string dstr(Digest d) { return std::to_string(d); }
std::string vstr(View v) { return std::to_string(v); }
std::string hstr(Height h) { return std::to_string(h); }

std::vector<std::uint8_t> batch_bytes(View v, std::uint64_t seq) {
  std::vector<std::uint8_t> b(16);
  for (int i = 0; i < 8; ++i) {
    b[i] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i));
    b[8 + i] = static_cast<std::uint8_t>(seq >> (8 * i));
  }
  return b;
}

template <typename M>
std::vector<Signature> first_quorum(const std::map<ReplicaId, M>& m, std::uint32_t k);

template <>
std::vector<Signature> first_quorum(const std::map<ReplicaId, Signature>& m, std::uint32_t k) {
  std::vector<Signature> out;
  for (const auto& [r, s] : m) {
    if (out.size() == k) break;
    out.push_back(s);
  }
  return out;
}
}  // namespace

void SmrReplica::on_start(Context& ctx) {
  ctx.note("enter_view", {"0"});
  ctx.set_timer(progress_base(), TimerTag{timer::kSmrProgress, 0, 1});
  if (params_.leader_of(0) == ctx.self()) {
    // View 0 bootstraps without a status set: the first block extends genesis.
    Block b;
    b.height = 1;
    b.batch = batch_bytes(0, batch_seq_++);
    b.parent = Block::genesis().id();
    propose_block(ctx, b, std::nullopt);
    ctx.set_timer(params_.A(), TimerTag{timer::kSmrPropose, 0});
  }
}

void SmrReplica::add_block(Context& ctx, const Block& b) {
  if (b == Block::genesis()) return;
  if (b.height == 0) return;  // only genesis may sit at height 0
  const Digest id = b.id();
  if (store_.has(id)) return;
  store_.add(b);
  ctx.note("block", {dstr(id), hstr(b.height), dstr(b.parent)});
  retry_pending(ctx);
}

void SmrReplica::on_message(Context& ctx, ReplicaId /*from*/, const WireMessage& msg) {
  if (const auto* p = std::get_if<MsgSmrPropose>(&msg.v())) {
    process_proposal(ctx, std::make_shared<MsgSmrPropose>(*p), /*evidence_only=*/false);
    return;
  }
  if (const auto* bd = std::get_if<MsgBlockData>(&msg.v())) {
    add_block(ctx, bd->block);
    return;
  }
  if (const auto* v = std::get_if<MsgSmrVote>(&msg.v())) {
    if (!ctx.auth().verify(v->sig, smr_vote_digest(v->block, v->height, v->view))) return;
    add_vote(ctx, v->view, v->block, v->height, v->sig);
    return;
  }
  if (const auto* c = std::get_if<MsgVoteCert>(&msg.v())) {
    if (c->cert == VoteCert::genesis_cert()) return;
    if (!verify_vote_cert(c->cert, params_.f, ctx.auth())) return;
    for (const auto& s : c->cert.votes) {
      add_vote(ctx, c->cert.view, c->cert.block, c->cert.height, s);
    }
    return;
  }
  if (const auto* b = std::get_if<MsgBlame>(&msg.v())) {
    if (!ctx.auth().verify(b->sig, blame_digest(b->view))) return;
    add_blame(ctx, b->view, b->sig);
    return;
  }
  if (const auto* bc = std::get_if<MsgBlameCert>(&msg.v())) {
    if (!verify_blame_cert(bc->cert, params_.f, ctx.auth())) return;
    on_blame_cert(ctx, bc->cert);
    return;
  }
  if (const auto* ev = std::get_if<MsgEquivEvidence>(&msg.v())) {
    if (!ev->a || !ev->b) return;
    process_proposal(ctx, ev->a, /*evidence_only=*/true);
    process_proposal(ctx, ev->b, /*evidence_only=*/true);
    return;
  }
  if (const auto* st = std::get_if<MsgStatus>(&msg.v())) {
    if (params_.leader_of(st->view) != ctx.self()) return;
    if (!status_ok(*st, st->view, ctx.auth())) return;
    statuses_[st->view].emplace(st->sig.signer, *st);
    if (in_view_steady(st->view) && pending_first_ &&
        status_deadline_passed_.count(st->view) &&
        statuses_[st->view].size() >= params_.f + 1) {
      make_first_proposal(ctx);
    }
    return;
  }
  if (!msf_) return;
  if (const auto* a = std::get_if<MsgAck>(&msg.v())) {
    if (!ctx.auth().verify(a->sig, smr_vote_digest(a->block, a->height, a->view, domain::kAck)))
      return;
    add_ack(ctx, *a);
    return;
  }
  if (const auto* v2 = std::get_if<MsgVote2>(&msg.v())) {
    if (!ctx.auth().verify(v2->sig,
                           smr_vote_digest(v2->block, v2->height, v2->view, domain::kVote2)))
      return;
    add_vote2(ctx, *v2);
    return;
  }
  if (const auto* vs = std::get_if<MsgVote2Set>(&msg.v())) {
    for (const auto& v2 : vs->votes) {
      if (ctx.auth().verify(v2.sig,
                            smr_vote_digest(v2.block, v2.height, v2.view, domain::kVote2))) {
        add_vote2(ctx, v2);
      }
    }
    return;
  }
  if (const auto* b2 = std::get_if<MsgBlame2>(&msg.v())) {
    if (!ctx.auth().verify(b2->sig, blame_digest(b2->view, domain::kBlame2))) return;
    add_blame2(ctx, *b2);
    return;
  }
  if (const auto* bs = std::get_if<MsgBlame2Set>(&msg.v())) {
    for (const auto& b2 : bs->blames) {
      if (ctx.auth().verify(b2.sig, blame_digest(b2.view, domain::kBlame2))) add_blame2(ctx, b2);
    }
    return;
  }
}

void SmrReplica::record_leader_proposal(Context& ctx, const std::shared_ptr<MsgSmrPropose>& p) {
  if (!recorded_props_.insert(p->signed_digest()).second) return;
  auto& props = leader_props_[p->view];
  for (const auto& q : props) {
    bool equiv = false;
    const Digest pid = p->block.id(), qid = q->block.id();
    if (pid != qid && p->block.height == q->block.height) equiv = true;
    if (p->status && q->status && pid != qid) equiv = true;  // two "first" proposals
    if (!equiv && equivocates(store_, pid, qid)) equiv = true;
    if (!equiv) continue;
    const View u = p->view;
    if (equiv_views_.insert(u).second) ctx.note("equiv_detected", {vstr(u)});
    if (evidence_sent_.insert(u).second) {
      ctx.broadcast(MsgEquivEvidence{q, p});
      send_blame(ctx, u, "equiv");
    }
    break;
  }
  props.push_back(p);
}

void SmrReplica::process_proposal(Context& ctx, const std::shared_ptr<MsgSmrPropose>& p,
                                  bool evidence_only) {
  if (p->sig.signer != params_.leader_of(p->view)) return;
  if (!ctx.auth().verify(p->sig, p->signed_digest())) return;
  add_block(ctx, p->block);
  record_leader_proposal(ctx, p);
  if (evidence_only) return;
  if (p->view > view_) {
    // Not in that view yet; hold and retry at entry.
    pending_props_.push_back(p);
    return;
  }
  if (!in_view_steady(p->view)) return;
  if (proposals_forwarded_.insert(p->signed_digest()).second) ctx.broadcast(*p);
  try_accept(ctx, p);
}

bool SmrReplica::status_ok(const MsgStatus& s, View entering, const Authenticator& auth) const {
  if (s.view != entering) return false;
  if (!auth.verify(s.sig, status_digest(s.block, s.view))) return false;
  if (s.cert == VoteCert::genesis_cert()) return s.block == Block::genesis().id();
  if (s.cert.view >= entering) return false;
  if (s.cert.block != s.block) return false;
  return verify_vote_cert(s.cert, params_.f, auth);
}

void SmrReplica::try_accept(Context& ctx, const std::shared_ptr<MsgSmrPropose>& p) {
  const Digest sd = p->signed_digest();
  if (accepted_.count(sd)) return;
  const Digest id = p->block.id();

  std::optional<bool> ext;
  if (p->status) {
    const auto& S = *p->status;
    if (S.size() != params_.f + 1) return;
    std::set<ReplicaId> signers;
    const VoteCert* best = nullptr;
    for (const auto& s : S) {
      if (!signers.insert(s.sig.signer).second) return;
      if (!status_ok(s, p->view, ctx.auth())) return;
      if (best == nullptr || rank_cert(s.cert, *best) > 0) best = &s.cert;
    }
    ext = store_.extends_known(id, best->block);
  } else {
    ext = store_.extends_known(id, highest_cert_.block);
  }
  if (!ext.has_value()) {
    pending_props_.push_back(p);
    return;
  }
  if (!*ext) return;
  // Voting also requires the full chain down to genesis, so Step 2 can
  // rebroadcast every ancestor a peer might be missing.
  if (!store_.chain_known(id)) {
    pending_props_.push_back(p);
    return;
  }

  accepted_.insert(sd);
  accepted_blocks_.insert({p->view, id});
  ctx.note("accept", {vstr(p->view), hstr(p->block.height), dstr(id)});
  // Rebroadcast any chain blocks peers may be missing.
  blocks_forwarded_.insert(id);  // travels inside the proposal itself
  for (Digest anc : store_.chain_of(id, 0)) {
    if (anc == id) continue;
    if (blocks_forwarded_.insert(anc).second) ctx.broadcast(MsgBlockData{*store_.get(anc)});
  }
  if (!view_clean(p->view)) return;
  if (msf_) {
    ctx.note("ack", {vstr(p->view), hstr(p->block.height), dstr(id)});
    ctx.broadcast(MsgAck{
        id, p->block.height, p->view,
        ctx.sign(smr_vote_digest(id, p->block.height, p->view, domain::kAck))});
    if (ack_ready_.count({p->view, id})) start_vote_timer(ctx, p->view, id);
  } else {
    start_vote_timer(ctx, p->view, id);
  }
}

void SmrReplica::start_vote_timer(Context& ctx, View v, Digest block) {
  const Key k{v, block};
  if (!timer_started_.insert(k).second) return;
  vote_timers_[k] = ctx.set_timer(
      params_.D(), TimerTag{timer::kSmrVote, block, static_cast<std::uint64_t>(v)});
}

void SmrReplica::add_ack(Context& ctx, const MsgAck& m) {
  const Key k{m.view, m.block};
  auto& signers = acks_[k];
  signers.emplace(m.sig.signer, m.sig);
  if (signers.size() != params_.f + 1) return;
  ack_ready_.insert(k);
  if (accepted_blocks_.count(k) && in_view_steady(m.view) && view_clean(m.view)) {
    start_vote_timer(ctx, m.view, m.block);
  }
}

void SmrReplica::on_timer(Context& ctx, const TimerTag& tag) {
  switch (tag.kind) {
    case timer::kSmrVote: {
      const View v = static_cast<View>(tag.b);
      const Digest block = tag.a;
      if (!in_view_steady(v) || !view_clean(v)) return;
      const Block* b = store_.get(block);
      if (b == nullptr) return;
      ctx.note("vote", {vstr(v), hstr(b->height), dstr(block)});
      ctx.broadcast(MsgSmrVote{block, b->height, v,
                               ctx.sign(smr_vote_digest(block, b->height, v))});
      return;
    }
    case timer::kSmrProgress: {
      const View v = static_cast<View>(tag.a);
      const std::uint64_t p = tag.b;
      if (!in_view_steady(v) || blamed_views_.count(v)) return;
      // Height-bounded harness runs stop producing blocks on purpose; do
      // not demand more progress than the chain can have.
      if (params_.max_height != 0 && p > params_.max_height) return;
      if (committed_in_view_ >= p) {
        ctx.set_timer(params_.A(), TimerTag{timer::kSmrProgress, tag.a, p + 1});
      } else {
        send_blame(ctx, v, "progress");
      }
      return;
    }
    case timer::kSmrEnterView:
      enter_view(ctx, static_cast<View>(tag.a));
      return;
    case timer::kSmrStatusDeadline: {
      const View v = static_cast<View>(tag.a);
      status_deadline_passed_.insert(v);
      if (in_view_steady(v) && pending_first_ &&
          statuses_[v].size() >= params_.f + 1) {
        make_first_proposal(ctx);
      }
      return;
    }
    case timer::kSmrPropose: {
      const View v = static_cast<View>(tag.a);
      if (!in_view_steady(v) || params_.leader_of(v) != ctx.self()) return;
      if (pending_first_) return;
      if (params_.max_height != 0 && last_height_ >= params_.max_height) return;
      Block b;
      b.height = last_height_ + 1;
      b.batch = batch_bytes(v, batch_seq_++);
      b.parent = last_proposed_;
      propose_block(ctx, b, std::nullopt);
      ctx.set_timer(params_.A(), TimerTag{timer::kSmrPropose, tag.a});
      return;
    }
    default:
      return;
  }
}

void SmrReplica::propose_block(Context& ctx, const Block& b,
                               std::optional<std::vector<MsgStatus>> status) {
  MsgSmrPropose p;
  p.block = b;
  p.view = view_;
  p.status = std::move(status);
  p.sig = ctx.sign(p.signed_digest());
  last_proposed_ = b.id();
  last_height_ = b.height;
  proposals_forwarded_.insert(p.signed_digest());  // our broadcast is the forward
  ctx.note("propose", {vstr(view_), hstr(b.height), dstr(b.id())});
  ctx.broadcast(p);  // self-delivery runs our own acceptance path
}

void SmrReplica::make_first_proposal(Context& ctx) {
  pending_first_ = false;
  std::vector<MsgStatus> S;
  const VoteCert* best = nullptr;
  for (const auto& [r, st] : statuses_[view_]) {
    if (S.size() == params_.f + 1) break;
    S.push_back(st);
    if (best == nullptr || rank_cert(st.cert, *best) > 0) best = &st.cert;
  }
  Block b;
  b.height = best->height + 1;
  b.batch = batch_bytes(view_, batch_seq_++);
  b.parent = best->block;
  propose_block(ctx, b, std::move(S));
  ctx.set_timer(params_.A(), TimerTag{timer::kSmrPropose, static_cast<std::uint64_t>(view_)});
}

void SmrReplica::add_vote(Context& ctx, View v, Digest block, Height h, const Signature& sig) {
  const Key k{v, block};
  auto& signers = votes_[k];
  signers.emplace(sig.signer, sig);
  if (signers.size() != params_.f + 1 || vote_quorum_done_.count(k)) return;
  vote_quorum_done_.insert(k);
  VoteCert c;
  c.view = v;
  c.block = block;
  c.height = h;
  c.votes = first_quorum(signers, params_.f + 1);
  record_cert(ctx, c);
}

void SmrReplica::record_cert(Context& ctx, const VoteCert& c) {
  const Key k{c.view, c.block};
  if (certs_.emplace(k, c).second) {
    ctx.note("cert_formed", {vstr(c.view), hstr(c.height), dstr(c.block)});
  }
  if (c.view >= entry_floor_ && rank_cert(c, highest_cert_) > 0) highest_cert_ = c;
  if (!in_view_steady(c.view) || !view_clean(c.view)) return;
  ctx.broadcast(MsgVoteCert{c, c.height});
  if (msf_) {
    ctx.note("vote2", {vstr(c.view), hstr(c.height), dstr(c.block)});
    ctx.broadcast(MsgVote2{c.block, c.height, c.view,
                           ctx.sign(smr_vote_digest(c.block, c.height, c.view, domain::kVote2))});
  } else {
    try_commit(ctx, c.view, c.block, c.height);
  }
}

void SmrReplica::add_vote2(Context& ctx, const MsgVote2& m) {
  const Key k{m.view, m.block};
  auto& by = vote2s_[k];
  by.emplace(m.sig.signer, m);
  if (by.size() != params_.f + 1 || vote2_done_.count(k)) return;
  vote2_done_.insert(k);
  if (!in_view_steady(m.view) || !view_clean(m.view)) return;
  MsgVote2Set set;
  for (const auto& [r, v2] : by) {
    if (set.votes.size() == params_.f + 1) break;
    set.votes.push_back(v2);
  }
  ctx.broadcast(set);
  try_commit(ctx, m.view, m.block, m.height);
}

void SmrReplica::try_commit(Context& ctx, View v, Digest block, Height h) {
  if (h <= committed_height_) return;
  auto ids = store_.chain_of(block, committed_height_);
  const bool contiguous = !ids.empty() && ids.back() == block &&
                          store_.get(ids.front())->height == committed_height_ + 1;
  if (!contiguous) {
    pending_commits_.emplace_back(v, block, h);
    return;
  }
  for (Digest id : ids) {
    const Block* b = store_.get(id);
    ctx.commit(dstr(id), b->height, id);
    ctx.note("commit_block", {vstr(v), hstr(b->height), dstr(id)});
  }
  committed_height_ = h;
  committed_in_view_ += ids.size();
  ctx.note("direct_commit", {vstr(v), hstr(h), dstr(block)});
}

void SmrReplica::add_blame(Context& ctx, View v, const Signature& sig) {
  auto& signers = blames_[v];
  signers.emplace(sig.signer, sig);
  if (signers.size() != params_.f + 1) return;
  BlameCert bc;
  bc.view = v;
  bc.blames = first_quorum(signers, params_.f + 1);
  on_blame_cert(ctx, bc);
}

void SmrReplica::on_blame_cert(Context& ctx, const BlameCert& bc) {
  const View u = bc.view;
  const bool fresh = blame_cert_views_.insert(u).second;
  if (fresh) ctx.note("blame_cert", {vstr(u)});
  if (!in_view_steady(u) || !fresh) return;
  ctx.broadcast(MsgBlameCert{bc});
  if (msf_) {
    // Quit the view but keep phase Steady until the second blame round
    // confirms f+1 replicas quit; view_clean() already blocks votes.
    ctx.note("blame2", {vstr(u)});
    ctx.broadcast(MsgBlame2{u, ctx.sign(blame_digest(u, domain::kBlame2))});
  } else {
    begin_view_change(ctx, u);
  }
}

void SmrReplica::add_blame2(Context& ctx, const MsgBlame2& m) {
  auto& by = blame2s_[m.view];
  by.emplace(m.sig.signer, m);
  if (by.size() != params_.f + 1 || !blame2_done_.insert(m.view).second) return;
  MsgBlame2Set set;
  for (const auto& [r, b2] : by) {
    if (set.blames.size() == params_.f + 1) break;
    set.blames.push_back(b2);
  }
  ctx.broadcast(set);
  if (in_view_steady(m.view)) begin_view_change(ctx, m.view);
}

void SmrReplica::begin_view_change(Context& ctx, View v) {
  phase_ = Phase::ViewChangeWait;
  ctx.note("view_change_start", {vstr(v)});
  for (auto& [k, id] : vote_timers_) ctx.abort_timer(id);
  vote_timers_.clear();
  ctx.set_timer(2 * params_.D(),
                TimerTag{timer::kSmrEnterView, static_cast<std::uint64_t>(v + 1)});
}

void SmrReplica::enter_view(Context& ctx, View v) {
  if (v <= view_) return;
  view_ = v;
  phase_ = Phase::Steady;
  entry_floor_ = v;
  committed_in_view_ = 0;
  ctx.note("enter_view", {vstr(v)});
  MsgStatus st;
  st.block = highest_cert_.block;
  st.cert = highest_cert_;
  st.view = v;
  st.sig = ctx.sign(status_digest(st.block, v));
  ctx.send(params_.leader_of(v), st);
  if (params_.leader_of(v) == ctx.self()) {
    pending_first_ = true;
    ctx.set_timer(2 * params_.D(),
                  TimerTag{timer::kSmrStatusDeadline, static_cast<std::uint64_t>(v)});
  }
  ctx.set_timer(progress_base(), TimerTag{timer::kSmrProgress, static_cast<std::uint64_t>(v), 1});
  retry_pending(ctx);
}

void SmrReplica::send_blame(Context& ctx, View v, const char* reason) {
  if (!blamed_views_.insert(v).second) return;
  ctx.note("blame", {vstr(v), reason});
  ctx.broadcast(MsgBlame{v, ctx.sign(blame_digest(v))});
}

void SmrReplica::retry_pending(Context& ctx) {
  // Held proposals and commits may become actionable as blocks arrive or
  // views advance. Requeueing is idempotent via the accept/commit dedups.
  auto props = std::move(pending_props_);
  pending_props_.clear();
  for (const auto& p : props) {
    if (p->view > view_) {
      pending_props_.push_back(p);
      continue;
    }
    if (!in_view_steady(p->view)) continue;
    if (proposals_forwarded_.insert(p->signed_digest()).second) ctx.broadcast(*p);
    try_accept(ctx, p);
  }
  auto commits = std::move(pending_commits_);
  pending_commits_.clear();
  for (const auto& [v, block, h] : commits) try_commit(ctx, v, block, h);
}

}  // namespace onedelta
