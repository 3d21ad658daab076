#include "onedelta/mlf.hpp"

namespace onedelta {

// Wraps every outbound message in a relay envelope and marks our own
// broadcasts as already relayed so the same-tick self-copy is not echoed.
class RelayReplica::RelayCtx : public Context {
 public:
  RelayCtx(Context& real, RelayReplica& owner) : real_(real), owner_(owner) {}

  ReplicaId self() const override { return real_.self(); }
  Tick local_time() const override { return real_.local_time(); }
  Tick global_time() const override { return real_.global_time(); }

  void send(ReplicaId to, const WireMessage& msg) override {
    real_.send(to, wrap(msg));
  }
  void broadcast(const WireMessage& msg) override {
    real_.broadcast(wrap(msg));
  }
  void send_delayed(ReplicaId to, const WireMessage& msg, Tick extra) override {
    real_.send_delayed(to, wrap(msg), extra);
  }

  TimerId set_timer(Tick duration, const TimerTag& tag) override {
    return real_.set_timer(duration, tag);
  }
  void abort_timer(TimerId id) override { real_.abort_timer(id); }
  Signature sign(Digest digest) override { return real_.sign(digest); }
  const Authenticator& auth() const override { return real_.auth(); }
  void commit(const std::string& payload, Height height, Digest digest) override {
    real_.commit(payload, height, digest);
  }
  void note(const std::string& kind, const std::vector<std::string>& args) override {
    real_.note(kind, args);
  }

 private:
  WireMessage wrap(const WireMessage& msg) {
    auto inner = std::make_shared<WireMessage>(msg);
    const Digest d = message_digest(*inner);
    owner_.relayed_.insert({self(), d});
    real_.note("inner_sent", {std::to_string(d)});
    return MsgRelay{self(), false, std::move(inner)};
  }

  Context& real_;
  RelayReplica& owner_;
};

void RelayReplica::on_start(Context& ctx) {
  RelayCtx rc(ctx, *this);
  inner_->on_start(rc);
}

void RelayReplica::on_timer(Context& ctx, const TimerTag& tag) {
  RelayCtx rc(ctx, *this);
  inner_->on_timer(rc, tag);
}

void RelayReplica::on_message(Context& ctx, ReplicaId from, const WireMessage& msg) {
  ReplicaId origin = from;
  bool already_relayed = false;
  std::shared_ptr<WireMessage> inner;
  if (const auto* r = std::get_if<MsgRelay>(&msg.v())) {
    if (!r->inner) return;
    origin = r->origin;
    already_relayed = r->relay;
    inner = r->inner;
  } else {
    // Bare message from a peer that skipped the envelope; treat as an
    // original so it still gets relayed and delivered once.
    inner = std::make_shared<WireMessage>(msg);
  }
  const Digest d = message_digest(*inner);
  const std::pair<ReplicaId, Digest> key{origin, d};

  if (!already_relayed && relayed_.insert(key).second) {
    for (ReplicaId r = 0; r < n_; ++r) {
      if (r == ctx.self() || r == from) continue;
      ctx.send(r, MsgRelay{origin, true, inner});
    }
  }
  if (delivered_.insert(key).second) {
    ctx.note("inner_recv", {std::to_string(origin), std::to_string(d)});
    RelayCtx rc(ctx, *this);
    inner_->on_message(rc, origin, *inner);
  }
}

}  // namespace onedelta
