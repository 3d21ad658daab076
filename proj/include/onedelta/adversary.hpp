#pragma once

#include <functional>
#include <memory>

#include "onedelta/ba.hpp"
#include "onedelta/sim.hpp"
#include "onedelta/smr.hpp"

namespace onedelta {

// Byzantine strategies pluggable into any run. All of them are deterministic
// functions of the run seed and their constructor arguments; none can forge
// honest signatures (the authenticator only signs for the caller).

// Sends nothing, ever.
class SilentReplica : public Replica {
 public:
  void on_start(Context&) override {}
  void on_message(Context&, ReplicaId, const WireMessage&) override {}
  void on_timer(Context&, const TimerTag&) override {}
  bool terminated() const override { return true; }
};

// Follows the wrapped protocol but schedules every network send +Delta late.
class DelayMaxReplica : public Replica {
 public:
  DelayMaxReplica(std::uint32_t n, std::unique_ptr<Replica> inner, Tick extra)
      : n_(n), inner_(std::move(inner)), extra_(extra) {}

  void on_start(Context& ctx) override;
  void on_message(Context& ctx, ReplicaId from, const WireMessage& msg) override;
  void on_timer(Context& ctx, const TimerTag& tag) override;
  bool terminated() const override { return inner_->terminated(); }

 private:
  class DelayCtx;
  std::uint32_t n_;
  std::unique_ptr<Replica> inner_;
  Tick extra_;
};

// Split-brain sender: at start, sends `to_x` one signed payload and `to_y`
// a conflicting one (replicas in neither set get nothing), then follows the
// wrapped protocol for everything except the suppressed message kinds.
class EquivocateReplica : public Replica {
 public:
  using SendBuilder = std::function<std::vector<std::pair<ReplicaId, WireMessage>>(Context&)>;

  // suppress: variant indexes of outbound messages the inner replica must
  // not send itself (its own version of the equivocated message).
  EquivocateReplica(std::unique_ptr<Replica> inner, std::set<std::size_t> suppress,
                    SendBuilder initial_sends)
      : inner_(std::move(inner)),
        suppress_(std::move(suppress)),
        initial_sends_(std::move(initial_sends)) {}

  void on_start(Context& ctx) override;
  void on_message(Context& ctx, ReplicaId from, const WireMessage& msg) override;
  void on_timer(Context& ctx, const TimerTag& tag) override;
  bool terminated() const override { return inner_->terminated(); }

 private:
  class SuppressCtx;
  std::unique_ptr<Replica> inner_;
  std::set<std::size_t> suppress_;
  SendBuilder initial_sends_;
};

// Factories wiring the split-brain payloads for each protocol. The signer
// signs both payloads with its own key, which the model permits.
std::unique_ptr<Replica> make_ba_equivocator(BaParams params, const Value& x, const Value& y,
                                             std::set<ReplicaId> to_x, std::set<ReplicaId> to_y);
std::unique_ptr<Replica> make_bb_equivocator(BaParams params, ReplicaId sender, const Value& x,
                                             const Value& y, std::set<ReplicaId> to_x,
                                             std::set<ReplicaId> to_y);
// Equivocating view-0 leader: two different height-1 blocks off genesis.
std::unique_ptr<Replica> make_smr_equivocator(SmrParams params, bool msf,
                                              std::set<ReplicaId> to_x, std::set<ReplicaId> to_y);

// One lower-bound construction run: who is Byzantine and how, plus the
// per-replica inputs and any link schedule it needs.
struct LbScenario {
  std::string name;
  std::set<ReplicaId> silent;
  std::set<ReplicaId> equivocators;      // split-brain input senders
  std::set<ReplicaId> equiv_to_x, equiv_to_y;
  Value x = Value::of_int(0);
  Value y = Value::of_int(1);
  std::vector<Value> inputs;             // per replica
  std::optional<LinkSchedule> links;
  bool delta_equals_Delta = false;       // scenario needs delays at the bound
};

// Three-group construction (P, Q, R), 3 | n, f = n/3: scenarios A, B, C.
std::vector<LbScenario> scenario_lowerbound_sync(std::uint32_t n);
// Three-group construction under the link-failure model, n = 3f-1 with a
// static A <-/-> C partition inside the budget: scenarios 1, 2, 3.
std::vector<LbScenario> scenario_lowerbound_mlf(std::uint32_t f, Tick horizon);

// Seed-derived randomized fault plan for the fuzz suites.
struct FuzzPlan {
  std::vector<bool> byzantine;
  // 0 = silent, 1 = equivocate, 2 = delay-max, per Byzantine replica.
  std::map<ReplicaId, int> strategy;
  std::set<ReplicaId> split;  // x-recipients for equivocators
  std::vector<Tick> start_offsets;
  std::vector<std::uint64_t> inputs;  // 0/1 per replica
  std::optional<LinkSchedule> links;
  std::optional<SluggishSchedule> sluggish;
};

FuzzPlan make_fuzz_plan(std::uint64_t seed, const SimConfig& cfg, bool allow_byzantine,
                        bool with_links, bool with_sluggish);

}  // namespace onedelta
