#include "onedelta/adversary.hpp"

#include <algorithm>
#include <random>

namespace onedelta {

// ---- delay-max ---------------------------------------------------------------

class DelayMaxReplica::DelayCtx : public Context {
 public:
  DelayCtx(Context& real, Tick extra) : real_(real), extra_(extra) {}

  ReplicaId self() const override { return real_.self(); }
  Tick local_time() const override { return real_.local_time(); }
  Tick global_time() const override { return real_.global_time(); }

  void send(ReplicaId to, const WireMessage& msg) override {
    real_.send_delayed(to, msg, to == self() ? 0 : extra_);
  }
  void broadcast(const WireMessage& msg) override {
    // Keep instantaneous self-delivery; delay everyone else.
    real_.send_delayed(self(), msg, 0);
    for (ReplicaId r = 0; r < n_; ++r) {
      if (r != self()) real_.send_delayed(r, msg, extra_);
    }
  }
  void send_delayed(ReplicaId to, const WireMessage& msg, Tick extra) override {
    real_.send_delayed(to, msg, extra + (to == self() ? 0 : extra_));
  }

  TimerId set_timer(Tick d, const TimerTag& tag) override { return real_.set_timer(d, tag); }
  void abort_timer(TimerId id) override { real_.abort_timer(id); }
  Signature sign(Digest d) override { return real_.sign(d); }
  const Authenticator& auth() const override { return real_.auth(); }
  void commit(const std::string& p, Height h, Digest d) override { real_.commit(p, h, d); }
  void note(const std::string& k, const std::vector<std::string>& a) override {
    real_.note(k, a);
  }

  void set_n(std::uint32_t n) { n_ = n; }

 private:
  Context& real_;
  Tick extra_;
  std::uint32_t n_ = 0;
};

void DelayMaxReplica::on_start(Context& ctx) {
  DelayCtx dc(ctx, extra_);
  dc.set_n(n_);
  inner_->on_start(dc);
}
void DelayMaxReplica::on_message(Context& ctx, ReplicaId from, const WireMessage& msg) {
  DelayCtx dc(ctx, extra_);
  dc.set_n(n_);
  inner_->on_message(dc, from, msg);
}
void DelayMaxReplica::on_timer(Context& ctx, const TimerTag& tag) {
  DelayCtx dc(ctx, extra_);
  dc.set_n(n_);
  inner_->on_timer(dc, tag);
}

// ---- equivocate --------------------------------------------------------------

class EquivocateReplica::SuppressCtx : public Context {
 public:
  SuppressCtx(Context& real, const std::set<std::size_t>& suppress)
      : real_(real), suppress_(suppress) {}

  ReplicaId self() const override { return real_.self(); }
  Tick local_time() const override { return real_.local_time(); }
  Tick global_time() const override { return real_.global_time(); }

  void send(ReplicaId to, const WireMessage& msg) override {
    if (!suppressed(msg)) real_.send(to, msg);
  }
  void broadcast(const WireMessage& msg) override {
    if (!suppressed(msg)) real_.broadcast(msg);
  }
  void send_delayed(ReplicaId to, const WireMessage& msg, Tick extra) override {
    if (!suppressed(msg)) real_.send_delayed(to, msg, extra);
  }

  TimerId set_timer(Tick d, const TimerTag& tag) override { return real_.set_timer(d, tag); }
  void abort_timer(TimerId id) override { real_.abort_timer(id); }
  Signature sign(Digest d) override { return real_.sign(d); }
  const Authenticator& auth() const override { return real_.auth(); }
  void commit(const std::string& p, Height h, Digest d) override { real_.commit(p, h, d); }
  void note(const std::string& k, const std::vector<std::string>& a) override {
    real_.note(k, a);
  }

 private:
  bool suppressed(const WireMessage& msg) const { return suppress_.count(msg.v().index()) != 0; }

  Context& real_;
  const std::set<std::size_t>& suppress_;
};

void EquivocateReplica::on_start(Context& ctx) {
  for (auto& [to, msg] : initial_sends_(ctx)) ctx.send(to, msg);
  SuppressCtx sc(ctx, suppress_);
  inner_->on_start(sc);
}
void EquivocateReplica::on_message(Context& ctx, ReplicaId from, const WireMessage& msg) {
  SuppressCtx sc(ctx, suppress_);
  inner_->on_message(sc, from, msg);
}
void EquivocateReplica::on_timer(Context& ctx, const TimerTag& tag) {
  SuppressCtx sc(ctx, suppress_);
  inner_->on_timer(sc, tag);
}

namespace {
template <typename T>
std::size_t variant_index() {
  return WireVariant(T{}).index();
}
}  // namespace

std::unique_ptr<Replica> make_ba_equivocator(BaParams params, const Value& x, const Value& y,
                                             std::set<ReplicaId> to_x, std::set<ReplicaId> to_y) {
  auto inner = std::make_unique<BaReplica>(params, x);
  auto builder = [x, y, to_x = std::move(to_x),
                  to_y = std::move(to_y)](Context& ctx) {
    std::vector<std::pair<ReplicaId, WireMessage>> out;
    for (ReplicaId r : to_x) out.emplace_back(r, MsgInput{x, ctx.sign(input_digest(x))});
    for (ReplicaId r : to_y) out.emplace_back(r, MsgInput{y, ctx.sign(input_digest(y))});
    return out;
  };
  return std::make_unique<EquivocateReplica>(
      std::move(inner), std::set<std::size_t>{variant_index<MsgInput>()}, builder);
}

std::unique_ptr<Replica> make_bb_equivocator(BaParams params, ReplicaId sender, const Value& x,
                                             const Value& y, std::set<ReplicaId> to_x,
                                             std::set<ReplicaId> to_y) {
  auto inner = std::make_unique<BbReplica>(params, sender, x);
  auto builder = [x, y, to_x = std::move(to_x),
                  to_y = std::move(to_y)](Context& ctx) {
    std::vector<std::pair<ReplicaId, WireMessage>> out;
    for (ReplicaId r : to_x) out.emplace_back(r, MsgBbProposal{x, ctx.sign(bb_propose_digest(x))});
    for (ReplicaId r : to_y) out.emplace_back(r, MsgBbProposal{y, ctx.sign(bb_propose_digest(y))});
    return out;
  };
  return std::make_unique<EquivocateReplica>(
      std::move(inner), std::set<std::size_t>{variant_index<MsgBbProposal>()}, builder);
}

std::unique_ptr<Replica> make_smr_equivocator(SmrParams params, bool msf,
                                              std::set<ReplicaId> to_x, std::set<ReplicaId> to_y) {
  auto inner = std::make_unique<SmrReplica>(params, msf);
  auto builder = [to_x = std::move(to_x), to_y = std::move(to_y)](Context& ctx) {
    auto mk = [&](std::uint8_t tag) {
      Block b;
      b.height = 1;
      b.parent = Block::genesis().id();
      b.batch = {tag};
      MsgSmrPropose p;
      p.block = b;
      p.view = 0;
      p.sig = ctx.sign(p.signed_digest());
      return p;
    };
    MsgSmrPropose px = mk(0), py = mk(1);
    std::vector<std::pair<ReplicaId, WireMessage>> out;
    for (ReplicaId r : to_x) out.emplace_back(r, px);
    for (ReplicaId r : to_y) out.emplace_back(r, py);
    return out;
  };
  return std::make_unique<EquivocateReplica>(
      std::move(inner), std::set<std::size_t>{variant_index<MsgSmrPropose>()}, builder);
}

// ---- lower-bound scenario constructions --------------------------------------

std::vector<LbScenario> scenario_lowerbound_sync(std::uint32_t n) {
  // Three equal groups P, Q, R; f = n/3.
  const std::uint32_t g = n / 3;
  std::set<ReplicaId> P, Q, R;
  for (ReplicaId r = 0; r < g; ++r) P.insert(r);
  for (ReplicaId r = g; r < 2 * g; ++r) Q.insert(r);
  for (ReplicaId r = 2 * g; r < n; ++r) R.insert(r);

  std::vector<LbScenario> out(3);
  out[0].name = "lb-sync-A";
  out[0].silent = Q;
  out[0].inputs.assign(n, Value::of_int(0));

  out[1].name = "lb-sync-B";
  out[1].silent = P;
  out[1].inputs.assign(n, Value::of_int(1));

  out[2].name = "lb-sync-C";
  out[2].equivocators = R;
  out[2].equiv_to_x = P;
  out[2].equiv_to_y = Q;
  out[2].inputs.assign(n, Value::of_int(0));
  for (ReplicaId r : Q) out[2].inputs[r] = Value::of_int(1);
  // P<->Q traffic runs at the pessimistic bound in this scenario.
  out[2].delta_equals_Delta = true;
  return out;
}

std::vector<LbScenario> scenario_lowerbound_mlf(std::uint32_t f, Tick horizon) {
  const std::uint32_t n = 3 * f - 1;
  std::set<ReplicaId> A, B, C;
  for (ReplicaId r = 0; r < f - 1; ++r) A.insert(r);
  for (ReplicaId r = f - 1; r < 2 * f; ++r) B.insert(r);
  for (ReplicaId r = 2 * f; r < n; ++r) C.insert(r);

  // Static A <-/-> C partition: |A| + |C| = 2f-2 < n - f faulty links per
  // replica side, inside the budget.
  LinkSchedule links;
  links.fls = f - 1;
  links.flr = f - 1;
  for (ReplicaId a : A) {
    for (ReplicaId c : C) {
      links.faults.push_back(LinkFault{a, c, 0, horizon});
      links.faults.push_back(LinkFault{c, a, 0, horizon});
    }
  }

  std::vector<LbScenario> out(3);
  out[0].name = "lb-mlf-1";
  out[0].silent = C;
  out[0].inputs.assign(n, Value::of_int(0));
  out[0].links = links;

  out[1].name = "lb-mlf-2";
  out[1].silent = A;
  out[1].inputs.assign(n, Value::of_int(1));
  out[1].links = links;

  // Scenario 3: one Byzantine replica b in B split-brains its input toward
  // the two partitioned sides and stays silent toward the rest of B.
  out[2].name = "lb-mlf-3";
  const ReplicaId b = *B.begin();
  out[2].equivocators = {b};
  out[2].equiv_to_x = A;
  out[2].equiv_to_y = C;
  out[2].inputs.assign(n, Value::of_int(0));
  for (ReplicaId r : C) out[2].inputs[r] = Value::of_int(1);
  out[2].links = links;
  return out;
}

// ---- fuzz plans ---------------------------------------------------------------

FuzzPlan make_fuzz_plan(std::uint64_t seed, const SimConfig& cfg, bool allow_byzantine,
                        bool with_links, bool with_sluggish) {
  std::mt19937_64 rng(seed ^ 0x5eedfau);
  FuzzPlan plan;
  plan.byzantine.assign(cfg.n, false);
  plan.start_offsets.assign(cfg.n, 0);
  plan.inputs.assign(cfg.n, 0);

  std::uniform_int_distribution<int> coin(0, 1);
  for (auto& in : plan.inputs) in = static_cast<std::uint64_t>(coin(rng));
  if (cfg.sigma > 0) {
    std::uniform_int_distribution<Tick> off(0, cfg.sigma);
    for (auto& o : plan.start_offsets) o = off(rng);
  }

  if (allow_byzantine && cfg.f > 0) {
    std::uniform_int_distribution<std::uint32_t> count(0, cfg.f);
    std::uint32_t k = count(rng);
    std::vector<ReplicaId> ids(cfg.n);
    for (ReplicaId r = 0; r < cfg.n; ++r) ids[r] = r;
    std::shuffle(ids.begin(), ids.end(), rng);
    std::uniform_int_distribution<int> strat(0, 2);
    for (std::uint32_t i = 0; i < k; ++i) {
      plan.byzantine[ids[i]] = true;
      plan.strategy[ids[i]] = strat(rng);
    }
    for (ReplicaId r = 0; r < cfg.n; ++r) {
      if (!plan.byzantine[r] && coin(rng)) plan.split.insert(r);
    }
  }

  if (with_links) {
    LinkSchedule links;
    // Random per-replica budgets with f_l^s + f_l^r < n - f.
    std::uniform_int_distribution<std::uint32_t> budget(0, cfg.n - cfg.f - 1);
    links.fls = budget(rng);
    links.flr = (cfg.n - cfg.f - 1) > links.fls
                    ? std::uniform_int_distribution<std::uint32_t>(
                          0, cfg.n - cfg.f - 1 - links.fls)(rng)
                    : 0;
    std::uniform_int_distribution<int> tries_d(0, 24);
    std::uniform_int_distribution<ReplicaId> rep(0, cfg.n - 1);
    std::uniform_int_distribution<Tick> begin_d(0, cfg.horizon / 2);
    std::uniform_int_distribution<Tick> len_d(1, 8 * cfg.Delta);
    const int tries = tries_d(rng);
    for (int i = 0; i < tries; ++i) {
      LinkFault w;
      w.from = rep(rng);
      w.to = rep(rng);
      if (w.from == w.to) continue;
      w.begin = begin_d(rng);
      w.end = w.begin + len_d(rng);
      links.faults.push_back(w);
      if (check_link_budget(links, cfg)) links.faults.pop_back();  // would bust the budget
    }
    plan.links = links;
  }

  if (with_sluggish) {
    SluggishSchedule slug;
    std::uniform_int_distribution<int> tries_d(0, 24);
    std::uniform_int_distribution<ReplicaId> rep(0, cfg.n - 1);
    std::uniform_int_distribution<Tick> begin_d(0, cfg.horizon / 2);
    std::uniform_int_distribution<Tick> len_d(1, 8 * cfg.Delta);
    const int tries = tries_d(rng);
    for (int i = 0; i < tries; ++i) {
      SluggishWindow w;
      w.replica = rep(rng);
      if (plan.byzantine[w.replica]) continue;  // sluggishness is an honest fault
      w.begin = begin_d(rng);
      w.end = w.begin + len_d(rng);
      slug.windows.push_back(w);
      if (check_sluggish_budget(slug, cfg, plan.byzantine)) slug.windows.pop_back();
    }
    plan.sluggish = slug;
  }

  return plan;
}

}  // namespace onedelta
