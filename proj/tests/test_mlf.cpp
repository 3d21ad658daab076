#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>

#include "onedelta/harness.hpp"
#include "onedelta/mlf.hpp"

using namespace onedelta;

namespace {

Scenario scn(const std::string& text) {
  std::string err;
  auto s = Scenario::parse(text, &err);
  REQUIRE_MESSAGE(s.has_value(), err);
  return *s;
}

// Broadcasts one message at start; records what it hears.
class OneShot : public Replica {
 public:
  explicit OneShot(View v) : v_(v) {}
  void on_start(Context& ctx) override { ctx.broadcast(MsgBlame{v_, ctx.sign(0)}); }
  void on_message(Context& ctx, ReplicaId from, const WireMessage& msg) override {
    ctx.note("got", {std::to_string(from), std::to_string(message_digest(msg))});
  }
  void on_timer(Context&, const TimerTag&) override {}

 private:
  View v_;
};

}  // namespace

TEST_CASE("relayed copies are delivered to the inner protocol exactly once") {
  SimConfig cfg;
  cfg.n = 4;
  cfg.f = 1;
  cfg.delta = 2;
  cfg.delay = DelayPolicy::Uniform();
  cfg.seed = 3;
  cfg.horizon = 100;
  std::vector<std::unique_ptr<Replica>> rs;
  for (ReplicaId r = 0; r < 4; ++r) {
    rs.push_back(std::make_unique<RelayReplica>(4, std::make_unique<OneShot>(r)));
  }
  auto t = Simulation(cfg, std::move(rs)).run();
  // Every replica hears each origin's single message exactly once, despite
  // up to n-2 relayed copies of it arriving.
  std::map<std::pair<ReplicaId, std::string>, int> got;
  for (const auto& n : t.notes) {
    if (n.kind == "got") got[{n.replica, n.args[0] + ":" + n.args[1]}]++;
  }
  CHECK(got.size() == 4u * 4u);  // 4 origins heard by 4 replicas (incl. self)
  for (const auto& [k, count] : got) CHECK(count == 1);
}

TEST_CASE("relay transform doubles the agreement bound to 2Delta+4delta") {
  // adversarial-max charges each message the relayed worst case (2*delta),
  // which is what makes the bound tight; faster links commit earlier.
  auto s = scn(
      "protocol = 1d-ba+mlf\n"
      "n = 5\nf = 2\nDelta = 10\ndelta = 1\nsigma = 0\nmode = mobile-link\n"
      "delay = adversarial-max\ninputs = all:7\nstrategy = none\nhorizon = 5000\n");
  CHECK(s.expected_bound_value() == 24);
  auto o = execute(s, 1);
  CHECK(o.violations.empty());
  CHECK(o.last_commit == 24);
  CHECK(o.bound_exact);
}

TEST_CASE("an honest send reaches all honest replicas within 2delta") {
  auto s = scn(
      "protocol = 1d-ba+mlf\n"
      "n = 5\nf = 2\nDelta = 6\ndelta = 3\nsigma = 0\nmode = mobile-link\n"
      "delay = uniform\ninputs = random\nstrategy = fuzz\nhorizon = 5000\n");
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto o = execute(s, seed);
    auto c = o.check;
    c.trace = &o.trace;
    Violations v;
    for (auto& x : check_lemma5(c)) v.push_back(x);
    for (auto& x : check_agreement(c)) v.push_back(x);
    CHECK_MESSAGE(v.empty(), "seed " << seed << ": " << v.front());
  }
}

TEST_CASE("a static partition within the link budget cannot break agreement") {
  for (const char* strat : {"lb-mlf-1", "lb-mlf-2", "lb-mlf-3"}) {
    auto s = scn(std::string(
                     "protocol = 1d-ba+mlf\n"
                     "n = 5\nf = 2\nDelta = 10\ndelta = 10\nsigma = 0\n"
                     "mode = mobile-link\ndelay = adversarial-max\nhorizon = 5000\n"
                     "strategy = ") +
                 strat + "\n");
    auto o = execute(s, 1);
    auto c = o.check;
    c.trace = &o.trace;
    auto v = check_agreement(c);
    CHECK_MESSAGE(v.empty(), strat << ": " << v.front());
  }
}

TEST_CASE("the chained protocol survives the relay transform") {
  auto s = scn(
      "protocol = 1d-smr+mlf\n"
      "n = 4\nf = 1\nDelta = 10\ndelta = 1\nsigma = 0\nalpha = 5\nblocks = 3\n"
      "mode = mobile-link\ndelay = fixed:1\nstrategy = none\nhorizon = 8000\n");
  auto o = execute(s, 1);
  CHECK(o.violations.empty());
  bool committed = false;
  for (const auto& cr : o.trace.commits) committed = committed || cr.height >= 3;
  CHECK(committed);
}
