#pragma once

#include <functional>
#include <memory>
#include <queue>
#include <random>

#include "onedelta/protocol.hpp"

namespace onedelta {

enum class DeliveryMode { Synchronous, MobileLink, MobileSluggish };

struct DelayPolicy {
  enum class Kind { Fixed, UniformRandom, AdversarialMax };
  Kind kind = Kind::Fixed;
  Tick fixed = 1;

  static DelayPolicy Fixed(Tick d) { return {Kind::Fixed, d}; }
  static DelayPolicy Uniform() { return {Kind::UniformRandom, 1}; }
  static DelayPolicy AdversarialMax() { return {Kind::AdversarialMax, 1}; }
};

struct SimConfig {
  std::uint32_t n = 3;
  std::uint32_t f = 1;
  Tick Delta = 10;   // known pessimistic bound
  Tick delta = 1;    // actual bound, 0 < delta <= Delta
  Tick sigma = 0;    // max clock skew
  std::uint64_t seed = 0;
  DeliveryMode mode = DeliveryMode::Synchronous;
  DelayPolicy delay;
  Tick horizon = 100000;

  // n >= 2f+1, 0 < delta <= Delta, sigma >= 0.
  bool valid(std::string* why = nullptr) const;
};

// Time-indexed directed-link faults. Intervals are [begin, end).
struct LinkFault {
  ReplicaId from = 0;
  ReplicaId to = 0;
  Tick begin = 0;
  Tick end = 0;
};

struct LinkSchedule {
  std::uint32_t fls = 0;  // max faulty send links per replica
  std::uint32_t flr = 0;  // max faulty receive links per replica
  std::vector<LinkFault> faults;

  bool faulty(ReplicaId from, ReplicaId to, Tick t) const;
};

// A link faulty on [a,b) counts against the budget on [a, b+delta).
std::optional<std::string> check_link_budget(const LinkSchedule& s, const SimConfig& c);

// Sluggish windows per replica; prompt everywhere else.
struct SluggishWindow {
  ReplicaId replica = 0;
  Tick begin = 0;
  Tick end = 0;
};

struct SluggishSchedule {
  std::vector<SluggishWindow> windows;

  bool prompt(ReplicaId r, Tick t) const;
};

// At every instant, |honest ∧ prompt| must be >= f+1.
std::optional<std::string> check_sluggish_budget(const SluggishSchedule& s, const SimConfig& c,
                                                 const std::vector<bool>& byzantine);

struct TraceEvent {
  Tick time = 0;
  std::uint64_t seq = 0;
  ReplicaId replica = 0;
  std::string kind;  // start | deliver | timer | send
  Digest payload = 0;
};

struct CommitRecord {
  ReplicaId replica = 0;
  Tick global_time = 0;
  Tick local_time = 0;
  Height height = 0;
  std::string payload;
  Digest digest = 0;
};

struct Note {
  Tick time = 0;
  ReplicaId replica = 0;
  std::string kind;
  std::vector<std::string> args;
};

struct SimTrace {
  std::uint64_t seed = 0;
  std::vector<TraceEvent> events;
  std::vector<CommitRecord> commits;
  std::vector<Note> notes;
  std::vector<std::string> violations;
  bool non_terminating = false;

  std::string serialize() const;
};

// Per-run network fault inputs; protocol-level Byzantine behavior lives in
// the replica objects themselves.
struct NetworkFaults {
  std::optional<LinkSchedule> links;
  std::optional<SluggishSchedule> sluggish;
  std::vector<Tick> start_offsets;  // per replica, in [0, sigma]; empty = all 0
  std::vector<bool> byzantine;      // empty = all honest
};

class Simulation {
 public:
  Simulation(const SimConfig& config, std::vector<std::unique_ptr<Replica>> replicas,
             NetworkFaults faults = {});

  SimTrace run();

  Authenticator& authenticator() { return auth_; }

 private:
  struct Event {
    Tick time = 0;
    std::uint64_t seq = 0;
    ReplicaId target = 0;
    enum class Kind { Start, Deliver, Timer } kind = Kind::Start;
    ReplicaId from = 0;
    std::shared_ptr<WireMessage> msg;
    TimerTag tag;

    // min-heap on (time, seq)
    friend bool operator>(const Event& a, const Event& b) {
      return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
    }
  };

  class Ctx;
  friend class Ctx;

  void schedule(Event e);
  // Delivery time per the active delivery model; nullopt = dropped.
  std::optional<Tick> delivery_time(ReplicaId from, ReplicaId to, Tick at);
  Tick draw_delay();
  bool prompt(ReplicaId r, Tick t) const;
  bool is_byzantine(ReplicaId r) const;

  SimConfig config_;
  std::vector<std::unique_ptr<Replica>> replicas_;
  NetworkFaults faults_;
  Authenticator auth_;
  std::mt19937_64 rng_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t next_seq_ = 0;
  std::set<TimerId> aborted_timers_;
  std::vector<bool> started_;
  Tick now_ = 0;
  SimTrace trace_;
};

}  // namespace onedelta
