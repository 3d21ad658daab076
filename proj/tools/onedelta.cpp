#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "onedelta/harness.hpp"

namespace fs = std::filesystem;
using namespace onedelta;

namespace {

struct CommonOpts {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> runs;
  std::optional<Tick> horizon;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "base seed (overrides scenario)");
  cmd->add_option("--runs", o.runs, "number of seeds (overrides scenario)");
  cmd->add_option("--horizon", o.horizon, "simulation horizon (overrides scenario)");
  cmd->add_option("--out", o.out, "output directory for CSV and traces");
}

std::optional<Scenario> load_with_overrides(const std::string& path, const CommonOpts& o) {
  std::string err;
  auto s = Scenario::load(path, &err);
  if (!s) {
    std::cerr << "error: " << err << "\n";
    return std::nullopt;
  }
  if (o.seed) s->sim.seed = *o.seed;
  if (o.runs) s->runs = *o.runs;
  if (o.horizon) s->sim.horizon = *o.horizon;
  if (auto why = s->validate()) {
    std::cerr << "error: " << *why << "\n";
    return std::nullopt;
  }
  return s;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

int cmd_run(const std::string& file, const CommonOpts& opts) {
  auto s = load_with_overrides(file, opts);
  if (!s) return 2;
  std::ostringstream csv;
  csv << csv_header() << "\n";
  std::size_t violations = 0;
  for (std::uint32_t i = 0; i < s->runs; ++i) {
    const std::uint64_t seed = s->sim.seed + i;
    RunOutcome o = execute(*s, seed);
    csv << csv_row(*s, o) << "\n";
    std::cout << "seed " << seed << ": latency=" << o.last_commit
              << " expected=" << s->expected_bound() << "=" << s->expected_bound_value()
              << " bound_exact=" << (o.bound_exact ? "yes" : "no")
              << " violations=" << o.violations.size() << "\n";
    for (const auto& v : o.violations) std::cout << "  violation: " << v << "\n";
    violations += o.violations.size();
    if (!opts.out.empty()) {
      fs::create_directories(opts.out);
      write_file(fs::path(opts.out) / ("trace-" + std::to_string(seed) + ".txt"),
                 trace_file_text(*s, o));
    }
  }
  if (!opts.out.empty()) {
    fs::create_directories(opts.out);
    write_file(fs::path(opts.out) / "report.csv", csv.str());
  }
  std::cout << (violations == 0 ? "ok" : "FAIL") << "\n";
  return violations == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& file, const std::string& vary, const std::string& range,
              const CommonOpts& opts) {
  auto s0 = load_with_overrides(file, opts);
  if (!s0) return 2;
  Tick a = 0, b = 0, step = 1;
  {
    std::vector<Tick> parts;
    std::stringstream ss(range);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(std::stoll(item));
    if (parts.size() != 3 || parts[2] <= 0 || parts[1] < parts[0]) {
      std::cerr << "error: --range needs a:b:step with step > 0\n";
      return 2;
    }
    a = parts[0];
    b = parts[1];
    step = parts[2];
  }
  std::ostringstream csv;
  csv << vary << "," << csv_header() << "\n";
  std::size_t violations = 0;
  for (Tick v = a; v <= b; v += step) {
    Scenario s = *s0;
    if (vary == "delta") {
      // A Fixed policy pinned at the old delta means "Fixed(delta)"; keep
      // it tracking so measured latency follows the closed form.
      if (s.sim.delay.kind == DelayPolicy::Kind::Fixed && s.sim.delay.fixed == s.sim.delta) {
        s.sim.delay.fixed = v;
      }
      s.sim.delta = v;
    }
    else if (vary == "Delta") s.sim.Delta = v;
    else if (vary == "sigma") s.sim.sigma = v;
    else if (vary == "alpha") s.alpha = v;
    else if (vary == "n") {
      s.sim.n = static_cast<std::uint32_t>(v);
      s.sim.f = (s.sim.n - 1) / 2;
    } else {
      std::cerr << "error: --vary must be one of delta, Delta, n, sigma, alpha\n";
      return 2;
    }
    if (auto why = s.validate()) {
      std::cerr << "error at " << vary << "=" << v << ": " << *why << "\n";
      return 2;
    }
    for (std::uint32_t i = 0; i < s.runs; ++i) {
      RunOutcome o = execute(s, s.sim.seed + i);
      csv << v << "," << csv_row(s, o) << "\n";
      std::cout << vary << "=" << v << " seed=" << o.seed << " latency=" << o.last_commit
                << " expected=" << s.expected_bound_value() << "\n";
      violations += o.violations.size();
    }
  }
  if (!opts.out.empty()) {
    fs::create_directories(opts.out);
    write_file(fs::path(opts.out) / "sweep.csv", csv.str());
  }
  return violations == 0 ? 0 : 1;
}

int cmd_check(const std::string& file, std::vector<std::string> suites, const CommonOpts& opts) {
  auto s = load_with_overrides(file, opts);
  if (!s) return 2;
  if (suites.empty()) suites = s->suites;
  if (suites.empty()) {
    std::cerr << "error: no suites named (use --suite or the scenario's suites key)\n";
    return 2;
  }
  std::size_t failures = 0;
  std::optional<std::uint64_t> first_bad;
  for (std::uint32_t i = 0; i < s->runs; ++i) {
    const std::uint64_t seed = s->sim.seed + i;
    RunOutcome o = execute(*s, seed);
    Violations all = o.violations;
    for (const auto& name : suites) {
      for (auto& v : run_suite(name, o.check)) all.push_back(name + ": " + v);
    }
    if (!all.empty()) {
      ++failures;
      std::cout << "seed " << seed << ": FAIL\n";
      for (const auto& v : all) std::cout << "  " << v << "\n";
      if (!first_bad) {
        first_bad = seed;
        if (!opts.out.empty()) {
          fs::create_directories(opts.out);
          write_file(fs::path(opts.out) / ("failing-trace-" + std::to_string(seed) + ".txt"),
                     trace_file_text(*s, o));
        }
      }
    }
  }
  std::cout << (s->runs - failures) << "/" << s->runs << " traces pass";
  if (first_bad) std::cout << " (first failure replayable with seed " << *first_bad << ")";
  std::cout << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_replay(const std::string& file) {
  std::ifstream in(file);
  if (!in) {
    std::cerr << "error: cannot open " << file << "\n";
    return 2;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  if (auto div = replay_trace_text(ss.str())) {
    std::cout << "replay FAILED: " << *div << "\n";
    return 1;
  }
  std::cout << "replay identical\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronous BFT protocol harness"};
  app.require_subcommand(1);

  std::string file, vary, range, trace;
  std::vector<std::string> suites;
  CommonOpts opts;

  auto* run = app.add_subcommand("run", "execute a scenario and report latency");
  run->add_option("file", file, "scenario file")->required();
  add_common(run, opts);

  auto* sweep = app.add_subcommand("sweep", "run a scenario across a parameter range");
  sweep->add_option("file", file, "scenario file")->required();
  sweep->add_option("--vary", vary, "parameter: delta, Delta, n, sigma, alpha")->required();
  sweep->add_option("--range", range, "a:b:step")->required();
  add_common(sweep, opts);

  auto* check = app.add_subcommand("check", "run invariant suites over all seeds");
  check->add_option("file", file, "scenario file")->required();
  check->add_option("--suite", suites, "suite names (repeatable)")->delimiter(',');
  add_common(check, opts);

  auto* replay = app.add_subcommand("replay", "re-execute an exported trace");
  replay->add_option("trace", trace, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(file, opts);
  if (sweep->parsed()) return cmd_sweep(file, vary, range, opts);
  if (check->parsed()) return cmd_check(file, suites, opts);
  if (replay->parsed()) return cmd_replay(trace);
  return 2;
}
