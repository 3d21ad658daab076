#pragma once

#include <memory>

#include "onedelta/protocol.hpp"

namespace onedelta {

// Relay transform for mobile link failures. Every protocol message travels
// in a relay envelope; each replica relays a received original once to
// everyone except the sender, and relayed copies are never re-relayed, so
// an honest send reaches every honest replica within two hops even when
// individual links drop. The wrapped protocol must run with its timing
// parameters doubled (scale = 2).
class RelayReplica : public Replica {
 public:
  RelayReplica(std::uint32_t n, std::unique_ptr<Replica> inner)
      : n_(n), inner_(std::move(inner)) {}

  void on_start(Context& ctx) override;
  void on_message(Context& ctx, ReplicaId from, const WireMessage& msg) override;
  void on_timer(Context& ctx, const TimerTag& tag) override;
  bool terminated() const override { return inner_->terminated(); }

  Replica& inner() { return *inner_; }

 private:
  class RelayCtx;

  std::uint32_t n_;
  std::unique_ptr<Replica> inner_;
  std::set<std::pair<ReplicaId, Digest>> relayed_;    // (origin, inner digest)
  std::set<std::pair<ReplicaId, Digest>> delivered_;  // delivered to inner once
};

}  // namespace onedelta
