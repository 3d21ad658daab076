#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "onedelta/wire.hpp"

namespace onedelta {

struct TimerTag {
  std::uint32_t kind = 0;
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  friend bool operator==(const TimerTag&, const TimerTag&) = default;
};

using TimerId = std::uint64_t;

// Everything a replica may do. The simulator owns scheduling; handlers are
// called single-threaded in (time, seq) order.
class Context {
 public:
  virtual ~Context() = default;

  virtual ReplicaId self() const = 0;
  virtual Tick local_time() const = 0;
  virtual Tick global_time() const = 0;

  // Network send to one peer. Delivery follows the run's delivery model.
  virtual void send(ReplicaId to, const WireMessage& msg) = 0;
  // Send to all others via the network, plus instantaneous self-delivery.
  virtual void broadcast(const WireMessage& msg) = 0;

  virtual TimerId set_timer(Tick duration, const TimerTag& tag) = 0;
  virtual void abort_timer(TimerId id) = 0;

  // Sign with this replica's own identity.
  virtual Signature sign(Digest digest) = 0;
  virtual const Authenticator& auth() const = 0;

  // Commit record: `payload` is the committed value / block id rendering,
  // `height` is 0 for single-shot protocols.
  virtual void commit(const std::string& payload, Height height, Digest digest) = 0;
  // Structured observation consumed by the trace checkers.
  virtual void note(const std::string& kind, const std::vector<std::string>& args) = 0;

  // Byzantine-only escape hatch: schedule a send with an extra delay on
  // top of the delivery model. Honest code never calls this.
  virtual void send_delayed(ReplicaId to, const WireMessage& msg, Tick extra) = 0;
};

class Replica {
 public:
  virtual ~Replica() = default;
  virtual void on_start(Context& ctx) = 0;
  virtual void on_message(Context& ctx, ReplicaId from, const WireMessage& msg) = 0;
  virtual void on_timer(Context& ctx, const TimerTag& tag) = 0;
  // Single-shot protocols report termination so the run can stop early.
  virtual bool terminated() const { return false; }
};

}  // namespace onedelta
