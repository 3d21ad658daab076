#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "onedelta/harness.hpp"

using namespace onedelta;

namespace {

const char* kBase =
    "protocol = 1d-ba\n"
    "n = 5\nf = 2\nDelta = 10\ndelta = 1\nsigma = 0\n"
    "delay = fixed:1\ninputs = all:7\nstrategy = none\nhorizon = 5000\n";

Scenario scn(const std::string& text) {
  std::string err;
  auto s = Scenario::parse(text, &err);
  REQUIRE_MESSAGE(s.has_value(), err);
  return *s;
}

std::size_t commas(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), ','));
}

}  // namespace

TEST_CASE("scenario files parse every documented key") {
  auto s = scn(
      "# comment line\n"
      "protocol = 1d-smr-msf\n"
      "n = 4\nf = 1\nDelta = 20\ndelta = 3\nsigma = 5\nseed = 9\nhorizon = 777\n"
      "runs = 4\nmode = mobile-sluggish\ndelay = uniform\nsender = 2\nalpha = 7\n"
      "blocks = 3\ninputs = random\nstrategy = fuzz\nskew = random\n"
      "byzantine = 1,2\nsplit = 0,3\nsuites = safety, lemma2\n"
      "[sluggish]\n"
      "window = 1 10 20\n");
  CHECK(s.protocol == "1d-smr-msf");
  CHECK(s.sim.n == 4);
  CHECK(s.sim.Delta == 20);
  CHECK(s.sim.seed == 9);
  CHECK(s.sim.horizon == 777);
  CHECK(s.runs == 4);
  CHECK(s.sim.mode == DeliveryMode::MobileSluggish);
  CHECK(s.alpha == 7);
  CHECK(s.blocks == 3);
  CHECK(s.byzantine == std::vector<ReplicaId>{1, 2});
  CHECK(s.suites == std::vector<std::string>{"safety", "lemma2"});
  REQUIRE(s.sluggish.has_value());
  CHECK(s.sluggish->windows.size() == 1);
}

TEST_CASE("link fault sections parse and validate against the budget") {
  auto s = scn(std::string(
      "protocol = 1d-ba+mlf\n"
      "n = 5\nf = 2\nDelta = 10\ndelta = 2\nmode = mobile-link\ndelay = fixed:2\n"
      "[link_faults]\nfls = 1\nflr = 1\nfault = 0 1 0 50\n"));
  REQUIRE(s.links.has_value());
  CHECK(s.links->faults.size() == 1);

  // The same file with a budget-busting schedule must be rejected.
  std::string err;
  auto bad = Scenario::parse(
      "protocol = 1d-ba+mlf\n"
      "n = 5\nf = 2\nDelta = 10\ndelta = 2\nmode = mobile-link\ndelay = fixed:2\n"
      "[link_faults]\nfls = 1\nflr = 1\nfault = 0 1 0 50\nfault = 0 2 0 50\n",
      &err);
  CHECK_FALSE(bad.has_value());
}

TEST_CASE("malformed scenarios are rejected with a line number") {
  std::string err;
  CHECK_FALSE(Scenario::parse("protocol = 1d-ba\nnonsense\n", &err).has_value());
  CHECK(err.find("line 2") != std::string::npos);
  CHECK_FALSE(Scenario::parse("protocol = nope\n", &err).has_value());
  CHECK_FALSE(Scenario::parse("n = 3\nf = 2\n", &err).has_value());          // n < 2f+1
  CHECK_FALSE(Scenario::parse("delta = 0\n", &err).has_value());
  CHECK_FALSE(Scenario::parse("unknown_key = 1\n", &err).has_value());
}

TEST_CASE("expected bounds follow the protocol family") {
  CHECK(scn(kBase).expected_bound() == "Delta+2*delta");
  CHECK(scn(kBase).expected_bound_value() == 12);
  auto msf = scn(
      "protocol = 1d-smr-msf\nn = 4\nf = 1\nDelta = 10\ndelta = 1\nalpha = 5\n");
  CHECK(msf.expected_bound() == "Delta+4*delta");
  CHECK(msf.expected_bound_value() == 14);
  auto mlf = scn(
      "protocol = 1d-bb+mlf\nn = 5\nf = 2\nDelta = 10\ndelta = 1\nmode = mobile-link\n");
  CHECK(mlf.expected_bound() == "2*Delta+4*delta");
  CHECK(mlf.expected_bound_value() == 24);
  CHECK(mlf.scale() == 2);
  CHECK(mlf.base_protocol() == "1d-bb");
}

TEST_CASE("csv rows have the same shape as the header") {
  auto s = scn(kBase);
  auto o = execute(s, 1);
  CHECK(commas(csv_header()) == commas(csv_row(s, o)));
  CHECK(csv_row(s, o).find("1d-ba") != std::string::npos);
}

TEST_CASE("exported traces replay byte-identically") {
  auto s = scn(kBase);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto o = execute(s, seed);
    auto text = trace_file_text(s, o);
    auto divergence = replay_trace_text(text);
    CHECK_MESSAGE(!divergence.has_value(), *divergence);
  }
}

TEST_CASE("replay detects a tampered trace") {
  auto s = scn(kBase);
  auto o = execute(s, 1);
  auto text = trace_file_text(s, o);
  auto pos = text.find("deliver");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 7, "dropped");
  CHECK(replay_trace_text(text).has_value());
}

TEST_CASE("replay covers every protocol and strategy family") {
  const std::vector<std::string> files = {
      kBase,
      "protocol = 1d-bb\nn = 5\nf = 2\nDelta = 8\ndelta = 2\nsender = 1\n"
      "delay = uniform\ninputs = all:3\nstrategy = equivocate\nbyzantine = 1\n"
      "split = 0,2\nhorizon = 5000\n",
      "protocol = 1d-smr\nn = 4\nf = 1\nDelta = 8\ndelta = 2\nalpha = 4\nblocks = 3\n"
      "delay = uniform\nstrategy = silent\nbyzantine = 0\nhorizon = 5000\n",
      "protocol = 1d-smr-msf\nn = 4\nf = 1\nDelta = 8\ndelta = 2\nalpha = 4\nblocks = 2\n"
      "mode = mobile-sluggish\ndelay = uniform\nstrategy = fuzz\nhorizon = 8000\n",
      "protocol = 1d-ba+mlf\nn = 5\nf = 2\nDelta = 8\ndelta = 2\nmode = mobile-link\n"
      "delay = uniform\ninputs = random\nstrategy = fuzz\nhorizon = 8000\n",
  };
  for (const auto& text : files) {
    auto s = scn(text);
    auto o = execute(s, 7);
    auto divergence = replay_trace_text(trace_file_text(s, o));
    CHECK_MESSAGE(!divergence.has_value(), s.protocol << ": " << *divergence);
  }
}
