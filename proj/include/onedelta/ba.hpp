#pragma once

#include "onedelta/protocol.hpp"

namespace onedelta {

namespace timer {
inline constexpr std::uint32_t kBaVote = 1;
inline constexpr std::uint32_t kBaFallback = 2;
inline constexpr std::uint32_t kBaDecide = 3;
inline constexpr std::uint32_t kSmrVote = 10;
inline constexpr std::uint32_t kSmrProgress = 11;
inline constexpr std::uint32_t kSmrEnterView = 12;
inline constexpr std::uint32_t kSmrStatusDeadline = 13;
inline constexpr std::uint32_t kSmrPropose = 14;
}  // namespace timer

struct BaParams {
  std::uint32_t n = 3;
  std::uint32_t f = 1;
  Tick Delta = 10;
  Tick sigma = 0;
  // 2 under the mobile-link relay transform: every wait is doubled.
  Tick scale = 1;

  Tick vote_wait() const { return Delta * scale; }
  Tick commit_deadline() const { return (3 * Delta + sigma) * scale; }
  Tick fallback_start() const { return (4 * Delta + sigma) * scale; }
  Tick ds_round() const { return 2 * Delta * scale; }
};

// Steps 2-5 shared by the agreement and broadcast protocols: forward the
// proposal, wait one Delta, vote, commit by the deadline or lock, then run
// the fallback lock-step agreement (n parallel Dolev-Strong broadcasts
// plus a majority decision round).
class AgreementEngine {
 public:
  AgreementEngine(BaParams params, Value input) : params_(params), input_(std::move(input)) {
    fallback_start_local_ = params_.fallback_start();
  }

  void start(Context& ctx);
  // A valid new proposal for `value` was formed or received; `fwd` is the
  // message to forward to all others.
  void observe_proposal(Context& ctx, const Value& value, const WireMessage& fwd);
  bool handle_message(Context& ctx, const WireMessage& msg);
  bool handle_timer(Context& ctx, const TimerTag& tag);
  bool terminated() const { return terminated_; }
  const Value& input() const { return input_; }

 private:
  void add_vote(Context& ctx, const Value& value, const Signature& sig);
  void on_vote_quorum(Context& ctx, const Value& value);
  void start_fallback(Context& ctx);
  void handle_dolev_strong(Context& ctx, const MsgDolevStrong& msg);
  void decide(Context& ctx);
  void commit_value(Context& ctx, const Value& v, bool step4);

  BaParams params_;
  Value input_;
  Value lock_ = Value::bottom();
  bool lock_set_ = false;
  std::map<Digest, Value> proposals_seen_;
  std::map<Digest, std::map<ReplicaId, Signature>> votes_;
  std::set<Digest> quorum_done_;
  std::optional<Value> committed_;
  bool committed_step4_ = false;
  bool fallback_running_ = false;
  bool terminated_ = false;
  Tick fallback_start_local_ = 0;

  // Dolev-Strong state, one broadcast instance per replica.
  std::map<ReplicaId, std::map<Digest, Value>> ds_extracted_;
  std::set<std::pair<ReplicaId, Digest>> ds_relayed_;
};

// 1d-ba: all-to-all input exchange, f+1 co-signed proposals.
class BaReplica : public Replica {
 public:
  BaReplica(BaParams params, Value input)
      : params_(params), engine_(params, std::move(input)) {}

  void on_start(Context& ctx) override;
  void on_message(Context& ctx, ReplicaId from, const WireMessage& msg) override;
  void on_timer(Context& ctx, const TimerTag& tag) override;
  bool terminated() const override { return engine_.terminated(); }

 private:
  BaParams params_;
  AgreementEngine engine_;
  std::map<Digest, std::map<ReplicaId, Signature>> input_sigs_;
  std::map<Digest, Value> input_values_;
};

// 1d-bb: designated-sender broadcast; the proposal is one leader-signed value.
class BbReplica : public Replica {
 public:
  BbReplica(BaParams params, ReplicaId sender, Value input)
      : params_(params), sender_(sender), engine_(params, Value::bottom()), input_(std::move(input)) {}

  void on_start(Context& ctx) override;
  void on_message(Context& ctx, ReplicaId from, const WireMessage& msg) override;
  void on_timer(Context& ctx, const TimerTag& tag) override;
  bool terminated() const override { return engine_.terminated(); }

 private:
  BaParams params_;
  ReplicaId sender_;
  AgreementEngine engine_;
  Value input_;
};

}  // namespace onedelta
