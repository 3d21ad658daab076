#include "onedelta/ba.hpp"

#include <algorithm>

namespace onedelta {

namespace {
std::string dstr(Digest d) { return std::to_string(d); }
}  // namespace

void AgreementEngine::start(Context& ctx) {
  ctx.set_timer(params_.fallback_start(), TimerTag{timer::kBaFallback});
}

void AgreementEngine::observe_proposal(Context& ctx, const Value& value,
                                       const WireMessage& fwd) {
  const Digest vd = value.digest();
  if (proposals_seen_.count(vd)) return;  // dedup by value
  proposals_seen_.emplace(vd, value);
  ctx.note("proposal_seen", {value.to_string(), dstr(vd)});
  if (proposals_seen_.size() == 2) ctx.note("conflict_seen", {});
  ctx.broadcast(fwd);
  ctx.set_timer(params_.vote_wait(), TimerTag{timer::kBaVote, vd});
}

bool AgreementEngine::handle_message(Context& ctx, const WireMessage& msg) {
  if (const auto* v = std::get_if<MsgBaVote>(&msg.v())) {
    if (!ctx.auth().verify(v->sig, ba_vote_digest(v->value))) return true;
    add_vote(ctx, v->value, v->sig);
    return true;
  }
  if (const auto* vs = std::get_if<MsgBaVoteSet>(&msg.v())) {
    const Digest d = ba_vote_digest(vs->value);
    for (const auto& sig : vs->votes) {
      if (ctx.auth().verify(sig, d)) add_vote(ctx, vs->value, sig);
    }
    return true;
  }
  if (const auto* ds = std::get_if<MsgDolevStrong>(&msg.v())) {
    handle_dolev_strong(ctx, *ds);
    return true;
  }
  return false;
}

bool AgreementEngine::handle_timer(Context& ctx, const TimerTag& tag) {
  switch (tag.kind) {
    case timer::kBaVote: {
      auto it = proposals_seen_.find(tag.a);
      if (it == proposals_seen_.end()) return true;
      // Vote unless a conflicting proposal (different value) was seen.
      bool conflict = false;
      for (const auto& [d, v] : proposals_seen_) {
        if (d != tag.a) conflict = true;
      }
      if (!conflict) {
        const Value& value = it->second;
        ctx.note("vote", {value.to_string(), dstr(tag.a)});
        ctx.broadcast(MsgBaVote{value, ctx.sign(ba_vote_digest(value))});
      }
      return true;
    }
    case timer::kBaFallback:
      start_fallback(ctx);
      return true;
    case timer::kBaDecide:
      decide(ctx);
      return true;
    default:
      return false;
  }
}

void AgreementEngine::add_vote(Context& ctx, const Value& value, const Signature& sig) {
  const Digest vd = value.digest();
  auto& signers = votes_[vd];
  signers.emplace(sig.signer, sig);
  if (signers.size() != params_.f + 1 || quorum_done_.count(vd)) return;
  quorum_done_.insert(vd);
  if (!proposals_seen_.count(vd)) proposals_seen_.emplace(vd, value);
  on_vote_quorum(ctx, value);
}

void AgreementEngine::on_vote_quorum(Context& ctx, const Value& value) {
  const Tick now = ctx.local_time();
  if (now <= params_.commit_deadline()) {
    // Broadcast the first completing quorum, lock, and commit.
    std::vector<Signature> sigs;
    for (const auto& [r, s] : votes_[value.digest()]) sigs.push_back(s);
    sigs.resize(params_.f + 1);
    ctx.broadcast(MsgBaVoteSet{value, sigs});
    if (!lock_set_) {
      lock_ = value;
      lock_set_ = true;
      ctx.note("lock", {value.to_string(), dstr(value.digest())});
    } else if (!(lock_ == value)) {
      ctx.note("second_lock_quorum", {value.to_string()});
    }
    if (!committed_) commit_value(ctx, value, /*step4=*/true);
  } else {
    if (!lock_set_) {
      lock_ = value;
      lock_set_ = true;
      ctx.note("lock", {value.to_string(), dstr(value.digest())});
    } else if (!(lock_ == value)) {
      ctx.note("second_lock_quorum", {value.to_string()});
    }
  }
}

void AgreementEngine::commit_value(Context& ctx, const Value& v, bool step4) {
  committed_ = v;
  committed_step4_ = step4;
  ctx.commit(v.to_string(), 0, v.digest());
  ctx.note(step4 ? "step4_commit" : "fallback_commit",
           {v.to_string(), dstr(v.digest()), std::to_string(ctx.local_time())});
}

void AgreementEngine::start_fallback(Context& ctx) {
  fallback_running_ = true;
  ctx.note("fallback_input", {lock_.to_string(), dstr(lock_.digest())});
  ctx.broadcast(MsgDolevStrong{ctx.self(), lock_, {ctx.sign(ds_digest(ctx.self(), lock_))}});
  ctx.set_timer((params_.f + 2) * params_.ds_round(), TimerTag{timer::kBaDecide});
}

void AgreementEngine::handle_dolev_strong(Context& ctx, const MsgDolevStrong& msg) {
  // Lock-step rounds of 2*Delta starting at the fallback invocation; a
  // chain is accepted in round r only with at least r signatures.
  const Tick since = ctx.local_time() - fallback_start_local_;
  if (since >= static_cast<Tick>(params_.f + 1) * params_.ds_round()) return;
  const Tick round = std::max<Tick>(since / params_.ds_round() + 1, 1);
  if (msg.chain.empty() || msg.chain.size() > params_.f + 1) return;
  if (msg.chain[0].signer != msg.instance) return;
  if (!distinct_signers(msg.chain)) return;
  const Digest d = ds_digest(msg.instance, msg.value);
  for (const auto& s : msg.chain) {
    if (!ctx.auth().verify(s, d)) return;
  }
  if (static_cast<Tick>(msg.chain.size()) < std::min<Tick>(round, params_.f + 1)) return;

  auto& extracted = ds_extracted_[msg.instance];
  const Digest vd = msg.value.digest();
  if (extracted.count(vd)) return;
  extracted.emplace(vd, msg.value);

  // Relay once with our signature appended, unless already a signer.
  if (ds_relayed_.count({msg.instance, vd})) return;
  ds_relayed_.insert({msg.instance, vd});
  if (msg.chain.size() > params_.f) return;
  for (const auto& s : msg.chain) {
    if (s.signer == ctx.self()) return;
  }
  MsgDolevStrong relay = msg;
  relay.chain.push_back(ctx.sign(d));
  ctx.broadcast(relay);
}

void AgreementEngine::decide(Context& ctx) {
  // One output per instance: the uniquely extracted value, else bot.
  std::map<Digest, std::pair<Value, std::uint32_t>> counts;
  std::uint32_t bot_count = 0;
  for (ReplicaId r = 0; r < params_.n; ++r) {
    auto it = ds_extracted_.find(r);
    if (it == ds_extracted_.end() || it->second.size() != 1) {
      ++bot_count;
      continue;
    }
    const auto& [vd, v] = *it->second.begin();
    auto& slot = counts[vd];
    slot.first = v;
    ++slot.second;
  }
  Value decided = Value::bottom();
  for (const auto& [vd, vc] : counts) {
    if (2 * vc.second > params_.n) decided = vc.first;
  }
  ctx.note("decide", {decided.to_string(), dstr(decided.digest())});
  if (!committed_) commit_value(ctx, decided, /*step4=*/false);
  terminated_ = true;
  ctx.note("terminate", {});
}

// ---- 1d-ba ------------------------------------------------------------------

void BaReplica::on_start(Context& ctx) {
  ctx.note("input", {engine_.input().to_string(), std::to_string(engine_.input().digest())});
  engine_.start(ctx);
  ctx.broadcast(MsgInput{engine_.input(), ctx.sign(input_digest(engine_.input()))});
}

void BaReplica::on_message(Context& ctx, ReplicaId /*from*/, const WireMessage& msg) {
  if (const auto* in = std::get_if<MsgInput>(&msg.v())) {
    if (!ctx.auth().verify(in->sig, input_digest(in->value))) return;
    const Digest vd = in->value.digest();
    input_values_.emplace(vd, in->value);
    auto& signers = input_sigs_[vd];
    signers.emplace(in->sig.signer, in->sig);
    if (signers.size() == params_.f + 1) {
      Proposal p;
      p.value = in->value;
      for (const auto& [r, s] : signers) p.signatures.push_back(s);
      engine_.observe_proposal(ctx, p.value, MsgBaProposal{p});
    }
    return;
  }
  if (const auto* bp = std::get_if<MsgBaProposal>(&msg.v())) {
    if (!verify_proposal(bp->proposal, params_.n, params_.f, ctx.auth())) return;
    engine_.observe_proposal(ctx, bp->proposal.value, msg);
    return;
  }
  engine_.handle_message(ctx, msg);
}

void BaReplica::on_timer(Context& ctx, const TimerTag& tag) { engine_.handle_timer(ctx, tag); }

// ---- 1d-bb ------------------------------------------------------------------

void BbReplica::on_start(Context& ctx) {
  engine_.start(ctx);
  if (ctx.self() == sender_) {
    ctx.note("input", {input_.to_string(), std::to_string(input_.digest())});
    ctx.broadcast(MsgBbProposal{input_, ctx.sign(bb_propose_digest(input_))});
  }
}

void BbReplica::on_message(Context& ctx, ReplicaId /*from*/, const WireMessage& msg) {
  if (const auto* p = std::get_if<MsgBbProposal>(&msg.v())) {
    if (p->sig.signer != sender_) return;
    if (!ctx.auth().verify(p->sig, bb_propose_digest(p->value))) return;
    engine_.observe_proposal(ctx, p->value, msg);
    return;
  }
  engine_.handle_message(ctx, msg);
}

void BbReplica::on_timer(Context& ctx, const TimerTag& tag) { engine_.handle_timer(ctx, tag); }

}  // namespace onedelta
