#pragma once

#include "onedelta/checks.hpp"
#include "onedelta/sim.hpp"

namespace onedelta {

// A parsed scenario file: flat key = value lines plus [link_faults] and
// [sluggish] sections. One scenario describes one protocol configuration;
// the harness executes it under one or more seeds.
struct Scenario {
  SimConfig sim;
  std::string protocol = "1d-ba";  // 1d-ba|1d-bb|1d-smr|1d-smr-msf|1d-ba+mlf|1d-bb+mlf|1d-smr+mlf
  ReplicaId sender = 0;            // 1d-bb designated sender
  Tick alpha = 10;                 // SMR proposal cadence
  Height blocks = 0;               // SMR: chain length cap, 0 = unbounded
  std::string inputs = "all:0";    // all:<k> | <v0>,<v1>,... | random
  std::string strategy = "none";   // none|silent|equivocate|delay-max|lb-sync-A..C|lb-mlf-1..3|fuzz
  std::vector<ReplicaId> byzantine;    // explicit set for the plain strategies
  std::vector<ReplicaId> equiv_split;  // x-recipients for equivocate
  std::string skew = "zero";           // zero | random | <o0>,<o1>,...
  std::uint32_t runs = 1;
  std::optional<LinkSchedule> links;
  std::optional<SluggishSchedule> sluggish;
  std::vector<std::string> suites;  // default suites for `check`
  std::string raw;                  // original text, embedded in trace exports

  static std::optional<Scenario> parse(const std::string& text, std::string* err);
  static std::optional<Scenario> load(const std::string& path, std::string* err);

  bool mlf() const { return protocol.size() > 4 && protocol.substr(protocol.size() - 4) == "+mlf"; }
  std::string base_protocol() const {
    return mlf() ? protocol.substr(0, protocol.size() - 4) : protocol;
  }
  Tick scale() const { return mlf() ? 2 : 1; }
  bool is_smr() const {
    const std::string b = base_protocol();
    return b == "1d-smr" || b == "1d-smr-msf";
  }
  // Good-case commit bound, symbolically and in ticks.
  std::string expected_bound() const;
  Tick expected_bound_value() const;
  std::optional<std::string> validate() const;  // nullopt = ok
};

struct RunOutcome {
  std::uint64_t seed = 0;
  SimTrace trace;
  CheckContext check;  // trace pointer is rebound by the caller if copied
  Violations violations;
  // Max global commit time over honest replicas; -1 if none committed.
  Tick last_commit = -1;
  // SMR: true iff every (honest replica, block) commit lands exactly at
  // proposal time + expected bound. Single-shot: commit == bound exactly.
  bool bound_exact = true;
};

// Executes one seed: builds replicas (honest + strategy), runs, applies
// the protocol's standard checks.
RunOutcome execute(const Scenario& s, std::uint64_t seed);

// Trace files embed the scenario so replays are self-contained.
std::string trace_file_text(const Scenario& s, const RunOutcome& o);
// Re-executes an exported trace; nullopt = byte-identical.
std::optional<std::string> replay_trace_text(const std::string& text);

std::string csv_header();
std::string csv_row(const Scenario& s, const RunOutcome& o);

}  // namespace onedelta
