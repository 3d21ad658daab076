#include "onedelta/harness.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "onedelta/adversary.hpp"
#include "onedelta/ba.hpp"
#include "onedelta/mlf.hpp"
#include "onedelta/smr.hpp"

namespace onedelta {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::int64_t> split_ints(const std::string& s, char sep = ',') {
  std::vector<std::int64_t> out;
  for (const auto& p : split(s, sep)) out.push_back(std::stoll(p));
  return out;
}

}  // namespace

std::optional<Scenario> Scenario::parse(const std::string& text, std::string* err) {
  Scenario s;
  s.raw = text;
  std::string section;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    if (err) *err = "line " + std::to_string(lineno) + ": " + why;
    return std::nullopt;
  };
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      if (section == "link_faults" && !s.links) s.links = LinkSchedule{};
      if (section == "sluggish" && !s.sluggish) s.sluggish = SluggishSchedule{};
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) return fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (section.empty()) {
        if (key == "protocol") s.protocol = val;
        else if (key == "n") s.sim.n = static_cast<std::uint32_t>(std::stoul(val));
        else if (key == "f") s.sim.f = static_cast<std::uint32_t>(std::stoul(val));
        else if (key == "Delta") s.sim.Delta = std::stoll(val);
        else if (key == "delta") s.sim.delta = std::stoll(val);
        else if (key == "sigma") s.sim.sigma = std::stoll(val);
        else if (key == "seed") s.sim.seed = std::stoull(val);
        else if (key == "horizon") s.sim.horizon = std::stoll(val);
        else if (key == "runs") s.runs = static_cast<std::uint32_t>(std::stoul(val));
        else if (key == "mode") {
          if (val == "sync") s.sim.mode = DeliveryMode::Synchronous;
          else if (val == "mobile-link") s.sim.mode = DeliveryMode::MobileLink;
          else if (val == "mobile-sluggish") s.sim.mode = DeliveryMode::MobileSluggish;
          else return fail("unknown mode: " + val);
        } else if (key == "delay") {
          if (val == "uniform") s.sim.delay = DelayPolicy::Uniform();
          else if (val == "adversarial-max") s.sim.delay = DelayPolicy::AdversarialMax();
          else if (val.rfind("fixed:", 0) == 0)
            s.sim.delay = DelayPolicy::Fixed(std::stoll(val.substr(6)));
          else return fail("unknown delay policy: " + val);
        } else if (key == "sender") s.sender = static_cast<ReplicaId>(std::stoul(val));
        else if (key == "alpha") s.alpha = std::stoll(val);
        else if (key == "blocks") s.blocks = std::stoull(val);
        else if (key == "inputs") s.inputs = val;
        else if (key == "strategy") s.strategy = val;
        else if (key == "skew") s.skew = val;
        else if (key == "byzantine") {
          for (auto x : split_ints(val)) s.byzantine.push_back(static_cast<ReplicaId>(x));
        } else if (key == "split") {
          for (auto x : split_ints(val)) s.equiv_split.push_back(static_cast<ReplicaId>(x));
        } else if (key == "suites") s.suites = split(val, ',');
        else return fail("unknown key: " + key);
      } else if (section == "link_faults") {
        if (key == "fls") s.links->fls = static_cast<std::uint32_t>(std::stoul(val));
        else if (key == "flr") s.links->flr = static_cast<std::uint32_t>(std::stoul(val));
        else if (key == "fault") {
          auto parts = split_ints(val, ' ');
          if (parts.size() != 4) return fail("fault needs: from to begin end");
          s.links->faults.push_back(LinkFault{static_cast<ReplicaId>(parts[0]),
                                              static_cast<ReplicaId>(parts[1]), parts[2],
                                              parts[3]});
        } else return fail("unknown link_faults key: " + key);
      } else if (section == "sluggish") {
        if (key == "window") {
          auto parts = split_ints(val, ' ');
          if (parts.size() != 3) return fail("window needs: replica begin end");
          s.sluggish->windows.push_back(
              SluggishWindow{static_cast<ReplicaId>(parts[0]), parts[1], parts[2]});
        } else return fail("unknown sluggish key: " + key);
      } else {
        return fail("unknown section: " + section);
      }
    } catch (const std::exception&) {
      return fail("bad value for " + key + ": " + val);
    }
  }
  if (auto why = s.validate()) return fail(*why);
  return s;
}

std::optional<Scenario> Scenario::load(const std::string& path, std::string* err) {
  std::ifstream in(path);
  if (!in) {
    if (err) *err = "cannot open " + path;
    return std::nullopt;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), err);
}

std::optional<std::string> Scenario::validate() const {
  std::string why;
  if (!sim.valid(&why)) return why;
  static const std::set<std::string> known = {"1d-ba",     "1d-bb",     "1d-smr", "1d-smr-msf",
                                              "1d-ba+mlf", "1d-bb+mlf", "1d-smr+mlf"};
  if (!known.count(protocol)) return "unknown protocol: " + protocol;
  if (is_smr() && alpha <= 0) return "alpha must be > 0";
  if (base_protocol() == "1d-bb" && sender >= sim.n) return "sender out of range";
  if (links) {
    if (auto v = check_link_budget(*links, sim)) return *v;
  }
  if (runs == 0) return "runs must be >= 1";
  return std::nullopt;
}

std::string Scenario::expected_bound() const {
  if (mlf()) return "2*Delta+4*delta";
  if (base_protocol() == "1d-smr-msf") return "Delta+4*delta";
  return "Delta+2*delta";
}

Tick Scenario::expected_bound_value() const {
  if (mlf()) return 2 * sim.Delta + 4 * sim.delta;
  if (base_protocol() == "1d-smr-msf") return sim.Delta + 4 * sim.delta;
  return sim.Delta + 2 * sim.delta;
}

namespace {

std::vector<Value> resolve_inputs(const Scenario& s, std::uint64_t seed) {
  std::vector<Value> out(s.sim.n, Value::of_int(0));
  if (s.inputs.rfind("all:", 0) == 0) {
    const auto v = Value::of_int(std::stoull(s.inputs.substr(4)));
    out.assign(s.sim.n, v);
  } else if (s.inputs == "random") {
    std::mt19937_64 rng(seed ^ 0x1135u);
    std::uniform_int_distribution<int> coin(0, 1);
    for (auto& v : out) v = Value::of_int(static_cast<std::uint64_t>(coin(rng)));
  } else {
    auto vals = split_ints(s.inputs);
    for (std::uint32_t r = 0; r < s.sim.n && r < vals.size(); ++r) {
      out[r] = Value::of_int(static_cast<std::uint64_t>(vals[r]));
    }
  }
  return out;
}

std::vector<Tick> resolve_skew(const Scenario& s, std::uint64_t seed) {
  std::vector<Tick> out(s.sim.n, 0);
  if (s.skew == "zero") return out;
  if (s.skew == "random") {
    if (s.sim.sigma > 0) {
      std::mt19937_64 rng(seed ^ 0x5cefu);
      std::uniform_int_distribution<Tick> off(0, s.sim.sigma);
      for (auto& o : out) o = off(rng);
    }
    return out;
  }
  auto vals = split_ints(s.skew);
  for (std::uint32_t r = 0; r < s.sim.n && r < vals.size(); ++r) out[r] = vals[r];
  return out;
}

std::unique_ptr<Replica> make_honest(const Scenario& s, ReplicaId /*self*/, const Value& input) {
  const std::string base = s.base_protocol();
  if (base == "1d-ba") {
    return std::make_unique<BaReplica>(
        BaParams{s.sim.n, s.sim.f, s.sim.Delta, s.sim.sigma, s.scale()}, input);
  }
  if (base == "1d-bb") {
    return std::make_unique<BbReplica>(
        BaParams{s.sim.n, s.sim.f, s.sim.Delta, s.sim.sigma, s.scale()}, s.sender, input);
  }
  SmrParams p{s.sim.n, s.sim.f, s.sim.Delta, s.alpha, s.scale(), s.blocks};
  return std::make_unique<SmrReplica>(p, base == "1d-smr-msf");
}

struct Plan {
  std::vector<bool> byzantine;
  std::map<ReplicaId, int> strategy;  // 0 silent, 1 equivocate, 2 delay-max
  std::set<ReplicaId> to_x, to_y;
  std::vector<Value> inputs;
  std::vector<Tick> offsets;
  std::optional<LinkSchedule> links;
  std::optional<SluggishSchedule> sluggish;
  std::optional<std::string> error;
};

Plan resolve_plan(const Scenario& s, std::uint64_t seed) {
  Plan plan;
  plan.byzantine.assign(s.sim.n, false);
  plan.inputs = resolve_inputs(s, seed);
  plan.offsets = resolve_skew(s, seed);
  plan.links = s.links;
  plan.sluggish = s.sluggish;

  auto mark = [&](const std::set<ReplicaId>& who, int strat) {
    for (ReplicaId r : who) {
      if (r < s.sim.n) {
        plan.byzantine[r] = true;
        plan.strategy[r] = strat;
      }
    }
  };
  auto explicit_byz = [&](ReplicaId fallback) {
    std::set<ReplicaId> out(s.byzantine.begin(), s.byzantine.end());
    if (out.empty()) out.insert(fallback);
    return out;
  };
  auto default_split = [&](const std::set<ReplicaId>& byz) {
    plan.to_x.clear();
    plan.to_y.clear();
    if (!s.equiv_split.empty()) {
      plan.to_x.insert(s.equiv_split.begin(), s.equiv_split.end());
    } else {
      std::uint32_t taken = 0;
      for (ReplicaId r = 0; r < s.sim.n && taken < (s.sim.n - byz.size()) / 2; ++r) {
        if (!byz.count(r)) {
          plan.to_x.insert(r);
          ++taken;
        }
      }
    }
    for (ReplicaId r = 0; r < s.sim.n; ++r) {
      if (!plan.to_x.count(r) && !byz.count(r)) plan.to_y.insert(r);
    }
  };

  if (s.strategy == "none") {
    return plan;
  }
  if (s.strategy == "silent") {
    mark(explicit_byz(s.sim.n - 1), 0);
    return plan;
  }
  if (s.strategy == "delay-max") {
    mark(explicit_byz(s.sim.n - 1), 2);
    return plan;
  }
  if (s.strategy == "equivocate") {
    ReplicaId fallback = s.sim.n - 1;
    if (s.base_protocol() == "1d-bb") fallback = s.sender;
    if (s.is_smr()) fallback = 0;  // view-0 leader
    auto byz = explicit_byz(fallback);
    mark(byz, 1);
    default_split(byz);
    return plan;
  }
  if (s.strategy.rfind("lb-sync-", 0) == 0) {
    if (s.sim.n % 3 != 0) {
      plan.error = "lb-sync scenarios need 3 | n";
      return plan;
    }
    auto all = scenario_lowerbound_sync(s.sim.n);
    const std::size_t idx = s.strategy == "lb-sync-A" ? 0 : s.strategy == "lb-sync-B" ? 1 : 2;
    const auto& lb = all[idx];
    mark(lb.silent, 0);
    mark(lb.equivocators, 1);
    plan.to_x = lb.equiv_to_x;
    plan.to_y = lb.equiv_to_y;
    plan.inputs = lb.inputs;
    if (lb.links) plan.links = lb.links;
    return plan;
  }
  if (s.strategy.rfind("lb-mlf-", 0) == 0) {
    if (s.sim.n != 3 * s.sim.f - 1) {
      plan.error = "lb-mlf scenarios need n = 3f-1";
      return plan;
    }
    auto all = scenario_lowerbound_mlf(s.sim.f, s.sim.horizon);
    const std::size_t idx = static_cast<std::size_t>(s.strategy.back() - '1');
    if (idx > 2) {
      plan.error = "unknown lb-mlf scenario";
      return plan;
    }
    const auto& lb = all[idx];
    mark(lb.silent, 0);
    mark(lb.equivocators, 1);
    plan.to_x = lb.equiv_to_x;
    plan.to_y = lb.equiv_to_y;
    plan.inputs = lb.inputs;
    if (lb.links) plan.links = lb.links;
    return plan;
  }
  if (s.strategy == "fuzz") {
    FuzzPlan fp = make_fuzz_plan(seed, s.sim, /*allow_byzantine=*/true,
                                 s.sim.mode == DeliveryMode::MobileLink && !s.links,
                                 s.sim.mode == DeliveryMode::MobileSluggish && !s.sluggish);
    plan.byzantine = fp.byzantine;
    plan.strategy = fp.strategy;
    plan.offsets = fp.start_offsets;
    for (std::uint32_t r = 0; r < s.sim.n; ++r) {
      plan.inputs[r] = Value::of_int(fp.inputs[r]);
    }
    for (ReplicaId r = 0; r < s.sim.n; ++r) {
      if (!plan.byzantine[r]) {
        (fp.split.count(r) ? plan.to_x : plan.to_y).insert(r);
      }
    }
    if (fp.links) plan.links = fp.links;
    if (fp.sluggish) plan.sluggish = fp.sluggish;
    return plan;
  }
  plan.error = "unknown strategy: " + s.strategy;
  return plan;
}

std::unique_ptr<Replica> make_byzantine(const Scenario& s, const Plan& plan, ReplicaId r) {
  const int strat = plan.strategy.at(r);
  if (strat == 0) return std::make_unique<SilentReplica>();
  if (strat == 2) {
    return std::make_unique<DelayMaxReplica>(s.sim.n, make_honest(s, r, plan.inputs[r]),
                                             s.sim.Delta);
  }
  // Equivocate. Recipient sets exclude the equivocator itself.
  auto to_x = plan.to_x, to_y = plan.to_y;
  to_x.erase(r);
  to_y.erase(r);
  const Value x = Value::of_int(0), y = Value::of_int(1);
  const std::string base = s.base_protocol();
  BaParams bp{s.sim.n, s.sim.f, s.sim.Delta, s.sim.sigma, s.scale()};
  if (base == "1d-ba") return make_ba_equivocator(bp, x, y, to_x, to_y);
  if (base == "1d-bb") return make_bb_equivocator(bp, r, x, y, to_x, to_y);
  SmrParams sp{s.sim.n, s.sim.f, s.sim.Delta, s.alpha, s.scale(), s.blocks};
  return make_smr_equivocator(sp, base == "1d-smr-msf", to_x, to_y);
}

void append(Violations& into, Violations more) {
  for (auto& v : more) into.push_back(std::move(v));
}

// Commit bound checks and latency extraction.
void measure(const Scenario& s, RunOutcome& o) {
  for (const auto& cr : o.trace.commits) {
    if (!o.check.honest(cr.replica)) continue;
    o.last_commit = std::max(o.last_commit, cr.global_time);
  }
  const Tick bound = s.expected_bound_value();
  if (s.is_smr()) {
    // Per-block: commit at each honest replica exactly bound after the
    // proposal (good-case scenarios only care when bound_exact is read).
    std::map<Digest, Tick> proposed;
    for (const auto& n : o.trace.notes) {
      if (n.kind == "propose" && n.args.size() >= 3) {
        proposed.emplace(std::stoull(n.args[2]), n.time);
      }
    }
    for (const auto& cr : o.trace.commits) {
      if (!o.check.honest(cr.replica)) continue;
      auto it = proposed.find(cr.digest);
      if (it == proposed.end() || cr.global_time - it->second != bound) o.bound_exact = false;
    }
    if (o.trace.commits.empty()) o.bound_exact = false;
  } else {
    std::uint32_t honest_committed = 0;
    Tick start = 0;
    for (ReplicaId r = 0; r < s.sim.n; ++r) start = std::max(start, o.check.offset(r));
    for (const auto& cr : o.trace.commits) {
      if (!o.check.honest(cr.replica)) continue;
      ++honest_committed;
      if (cr.global_time - start != bound) o.bound_exact = false;
    }
    std::uint32_t honest_total = 0;
    for (ReplicaId r = 0; r < s.sim.n; ++r) honest_total += o.check.honest(r) ? 1 : 0;
    if (honest_committed != honest_total) o.bound_exact = false;
  }
}

}  // namespace

RunOutcome execute(const Scenario& s, std::uint64_t seed) {
  RunOutcome o;
  o.seed = seed;

  SimConfig cfg = s.sim;
  cfg.seed = seed;

  Plan plan = resolve_plan(s, seed);
  if (plan.error) {
    o.violations.push_back(*plan.error);
    return o;
  }
  if (plan.links) {
    if (auto v = check_link_budget(*plan.links, cfg)) {
      o.violations.push_back("link schedule rejected: " + *v);
      return o;
    }
  }
  if (plan.sluggish) {
    if (auto v = check_sluggish_budget(*plan.sluggish, cfg, plan.byzantine)) {
      o.violations.push_back("sluggish schedule rejected: " + *v);
      return o;
    }
  }

  std::vector<std::unique_ptr<Replica>> replicas;
  for (ReplicaId r = 0; r < cfg.n; ++r) {
    auto rep = plan.byzantine[r] ? make_byzantine(s, plan, r) : make_honest(s, r, plan.inputs[r]);
    if (s.mlf()) rep = std::make_unique<RelayReplica>(cfg.n, std::move(rep));
    replicas.push_back(std::move(rep));
  }

  NetworkFaults faults;
  faults.links = plan.links;
  faults.sluggish = plan.sluggish;
  faults.start_offsets = plan.offsets;
  faults.byzantine = plan.byzantine;

  Simulation sim(cfg, std::move(replicas), faults);
  o.trace = sim.run();

  o.check.trace = &o.trace;
  o.check.cfg = cfg;
  o.check.byzantine = plan.byzantine;
  o.check.start_offsets = plan.offsets;
  o.check.scale = s.scale();
  o.check.alpha = s.alpha;
  // Liveness checkpoints: one per block when the chain is capped.
  if (s.is_smr()) o.check.max_p = s.blocks ? static_cast<std::uint32_t>(s.blocks) : 3;

  const std::string base = s.base_protocol();
  if (base == "1d-ba" || base == "1d-bb") {
    // Good case: all honest inputs equal (BA) / honest sender (BB).
    bool good = s.strategy == "none";
    Value expected = plan.inputs.empty() ? Value::bottom() : plan.inputs[0];
    if (base == "1d-ba") {
      for (ReplicaId r = 0; r < cfg.n; ++r) {
        if (o.check.honest(r) && !(plan.inputs[r] == expected)) good = false;
      }
    } else {
      good = good && !plan.byzantine[s.sender];
      expected = plan.inputs[s.sender];
    }
    if (good) o.check.expected = expected;

    append(o.violations, check_agreement(o.check));
    append(o.violations, check_lemma1(o.check));
    if (good) append(o.violations, check_validity(o.check, /*require_step4=*/false));
    const Tick term_bound = ((4 * cfg.Delta + cfg.sigma) +
                             static_cast<Tick>(cfg.f + 2) * 2 * cfg.Delta) *
                                s.scale() +
                            cfg.sigma + cfg.Delta;
    if (cfg.horizon >= term_bound) append(o.violations, check_termination(o.check));
  } else {
    append(o.violations, check_smr_safety(o.check));
    append(o.violations, check_lemma2(o.check));
  }
  for (const auto& v : o.trace.violations) o.violations.push_back(v);

  measure(s, o);
  return o;
}

std::string trace_file_text(const Scenario& s, const RunOutcome& o) {
  std::ostringstream os;
  std::istringstream raw(s.raw);
  std::string line;
  while (std::getline(raw, line)) os << "s " << line << "\n";
  os << "run " << o.seed << "\n";
  os << o.trace.serialize();
  return os.str();
}

std::optional<std::string> replay_trace_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::ostringstream scenario_text;
  std::optional<std::uint64_t> seed;
  std::ostringstream rest;
  while (std::getline(is, line)) {
    if (line.rfind("s ", 0) == 0) {
      scenario_text << line.substr(2) << "\n";
    } else if (line == "s") {
      scenario_text << "\n";
    } else if (line.rfind("run ", 0) == 0) {
      seed = std::stoull(line.substr(4));
    } else {
      rest << line << "\n";
    }
  }
  if (!seed) return "trace file has no run line";
  std::string err;
  auto s = Scenario::parse(scenario_text.str(), &err);
  if (!s) return "embedded scenario invalid: " + err;
  RunOutcome o = execute(*s, *seed);
  const std::string replayed = o.trace.serialize();
  const std::string original = rest.str();
  if (replayed == original) return std::nullopt;
  // Locate the first diverging line for the diagnostic.
  std::istringstream a(original), b(replayed);
  std::string la, lb;
  int n = 0;
  while (true) {
    const bool ga = static_cast<bool>(std::getline(a, la));
    const bool gb = static_cast<bool>(std::getline(b, lb));
    ++n;
    if (!ga && !gb) break;
    if (!ga || !gb || la != lb) {
      return "divergence at line " + std::to_string(n) + ": '" + (ga ? la : "<eof>") +
             "' vs '" + (gb ? lb : "<eof>") + "'";
    }
  }
  return "traces differ";
}

std::string csv_header() {
  return "seed,protocol,n,f,Delta,delta,sigma,mode,strategy,latency,expected,expected_value,"
         "bound_exact,violations";
}

std::string csv_row(const Scenario& s, const RunOutcome& o) {
  std::ostringstream os;
  const char* mode = s.sim.mode == DeliveryMode::Synchronous      ? "sync"
                     : s.sim.mode == DeliveryMode::MobileLink     ? "mobile-link"
                                                                  : "mobile-sluggish";
  os << o.seed << ',' << s.protocol << ',' << s.sim.n << ',' << s.sim.f << ',' << s.sim.Delta
     << ',' << s.sim.delta << ',' << s.sim.sigma << ',' << mode << ',' << s.strategy << ','
     << o.last_commit << ',' << s.expected_bound() << ',' << s.expected_bound_value() << ','
     << (o.bound_exact ? 1 : 0) << ',' << o.violations.size();
  return os.str();
}

}  // namespace onedelta
