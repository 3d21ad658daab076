#include "onedelta/checks.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace onedelta {

namespace {

std::uint64_t arg_u64(const Note& n, std::size_t i) {
  return i < n.args.size() ? std::stoull(n.args[i]) : 0;
}
std::int64_t arg_i64(const Note& n, std::size_t i) {
  return i < n.args.size() ? std::stoll(n.args[i]) : 0;
}

template <typename F>
void for_notes(const CheckContext& c, const std::string& kind, F&& fn) {
  for (const auto& n : c.trace->notes) {
    if (n.kind == kind && c.honest(n.replica)) fn(n);
  }
}

std::string vio(const std::string& what) { return what; }

// Parent map rebuilt from honest "block" notes: id -> (height, parent).
struct ChainIndex {
  std::map<Digest, std::pair<Height, Digest>> parent;

  explicit ChainIndex(const CheckContext& c) {
    for_notes(c, "block", [&](const Note& n) {
      parent.emplace(arg_u64(n, 0), std::make_pair(arg_u64(n, 1), arg_u64(n, 2)));
    });
  }

  // Ancestors of id with height >= 1, id first; empty second on a gap.
  std::pair<std::vector<Digest>, bool> chain(Digest id) const {
    std::vector<Digest> out;
    Digest cur = id;
    const Digest genesis = Block::genesis().id();
    while (cur != genesis) {
      auto it = parent.find(cur);
      if (it == parent.end()) return {out, false};
      out.push_back(cur);
      if (it->second.first <= 1) break;
      cur = it->second.second;
    }
    return {out, true};
  }

  // True iff `anc` is id or an ancestor of id (walk fully known).
  std::optional<bool> extends(Digest id, Digest anc) const {
    Digest cur = id;
    const Digest genesis = Block::genesis().id();
    while (true) {
      if (cur == anc) return true;
      if (cur == genesis) return false;
      auto it = parent.find(cur);
      if (it == parent.end()) return std::nullopt;
      if (it->second.first <= 1) {
        cur = genesis;
        continue;
      }
      cur = it->second.second;
    }
  }
};

}  // namespace

Violations check_agreement(const CheckContext& c) {
  Violations v;
  std::optional<Digest> committed;
  std::map<ReplicaId, int> count;
  for (const auto& cr : c.trace->commits) {
    if (!c.honest(cr.replica)) continue;
    if (++count[cr.replica] > 1) {
      v.push_back(vio("replica " + std::to_string(cr.replica) + " committed twice"));
    }
    if (!committed) {
      committed = cr.digest;
    } else if (*committed != cr.digest) {
      v.push_back(vio("agreement violated: replica " + std::to_string(cr.replica) +
                      " committed " + cr.payload + " against " + std::to_string(*committed)));
    }
  }
  return v;
}

Violations check_validity(const CheckContext& c, bool require_step4) {
  Violations v;
  if (!c.expected) return {vio("validity check requires an expected value")};
  const std::string want = c.expected->to_string();
  const Tick deadline = (3 * c.cfg.Delta + c.cfg.sigma) * c.scale;
  std::set<ReplicaId> seen;
  for (const auto& cr : c.trace->commits) {
    if (!c.honest(cr.replica)) continue;
    seen.insert(cr.replica);
    if (cr.payload != want) {
      v.push_back(vio("validity violated: replica " + std::to_string(cr.replica) +
                      " committed " + cr.payload + " expected " + want));
    }
    if (require_step4 && cr.local_time > deadline) {
      v.push_back(vio("commit after the Step-4 deadline at replica " +
                      std::to_string(cr.replica) + " local t=" + std::to_string(cr.local_time)));
    }
  }
  for (ReplicaId r = 0; r < c.cfg.n; ++r) {
    if (c.honest(r) && !seen.count(r)) {
      v.push_back(vio("replica " + std::to_string(r) + " never committed"));
    }
  }
  if (require_step4) {
    std::set<ReplicaId> step4;
    for_notes(c, "step4_commit", [&](const Note& n) { step4.insert(n.replica); });
    for (ReplicaId r = 0; r < c.cfg.n; ++r) {
      if (c.honest(r) && !step4.count(r)) {
        v.push_back(vio("replica " + std::to_string(r) + " did not commit at Step 4"));
      }
    }
  }
  return v;
}

Violations check_termination(const CheckContext& c) {
  Violations v;
  if (c.trace->non_terminating) v.push_back(vio("run flagged non-terminating"));
  const Tick bound =
      (4 * c.cfg.Delta + c.cfg.sigma) * c.scale +
      static_cast<Tick>(c.cfg.f + 2) * 2 * c.cfg.Delta * c.scale;
  std::set<ReplicaId> done;
  for_notes(c, "terminate", [&](const Note& n) {
    done.insert(n.replica);
    const Tick local = n.time - c.offset(n.replica);
    if (local > bound) {
      v.push_back(vio("replica " + std::to_string(n.replica) + " terminated late, local t=" +
                      std::to_string(local) + " > " + std::to_string(bound)));
    }
  });
  for (ReplicaId r = 0; r < c.cfg.n; ++r) {
    if (c.honest(r) && !done.count(r)) {
      v.push_back(vio("replica " + std::to_string(r) + " never terminated"));
    }
  }
  return v;
}

Violations check_lemma1(const CheckContext& c) {
  Violations v;
  std::optional<std::string> step4_digest;
  for_notes(c, "step4_commit", [&](const Note& n) {
    if (n.args.size() < 2) return;
    if (!step4_digest) {
      step4_digest = n.args[1];
    } else if (*step4_digest != n.args[1]) {
      v.push_back(vio("two different Step-4 commits: " + *step4_digest + " vs " + n.args[1]));
    }
  });
  if (!step4_digest) return v;
  for_notes(c, "fallback_input", [&](const Note& n) {
    if (n.args.size() < 2) return;
    if (n.args[1] != *step4_digest) {
      v.push_back(vio("replica " + std::to_string(n.replica) +
                      " entered fallback with lock " + n.args[0] +
                      " despite a Step-4 commit elsewhere"));
    }
  });
  return v;
}

Violations check_smr_safety(const CheckContext& c) {
  Violations v;
  std::map<Height, Digest> by_height;
  for (const auto& cr : c.trace->commits) {
    if (!c.honest(cr.replica)) continue;
    auto [it, fresh] = by_height.emplace(cr.height, cr.digest);
    if (!fresh && it->second != cr.digest) {
      v.push_back(vio("safety violated at height " + std::to_string(cr.height) + ": " +
                      std::to_string(it->second) + " vs " + std::to_string(cr.digest)));
    }
  }
  return v;
}

Violations check_lemma2(const CheckContext& c) {
  Violations v;
  ChainIndex idx(c);
  // (view, height, block) of every certificate any honest replica formed.
  std::set<std::tuple<View, Height, Digest>> certs;
  for_notes(c, "cert_formed", [&](const Note& n) {
    certs.insert({arg_i64(n, 0), arg_u64(n, 1), arg_u64(n, 2)});
  });
  std::set<std::tuple<View, Height, Digest>> commits;
  for_notes(c, "direct_commit", [&](const Note& n) {
    commits.insert({arg_i64(n, 0), arg_u64(n, 1), arg_u64(n, 2)});
  });
  for (const auto& [cv, ch, cb] : commits) {
    for (const auto& [xv, xh, xb] : certs) {
      if (std::make_pair(xv, xh) < std::make_pair(cv, ch)) continue;
      auto ext = idx.extends(xb, cb);
      if (!ext.has_value() || !*ext) {
        v.push_back(vio("certificate (" + std::to_string(xv) + "," + std::to_string(xh) +
                        ") does not extend block " + std::to_string(cb) +
                        " directly committed at (" + std::to_string(cv) + "," +
                        std::to_string(ch) + ")"));
      }
    }
  }
  return v;
}

Violations check_lemma4(const CheckContext& c, std::uint32_t min_holders) {
  Violations v;
  ChainIndex idx(c);
  // First time each honest replica learned each block.
  std::map<ReplicaId, std::map<Digest, Tick>> learned;
  for_notes(c, "block", [&](const Note& n) {
    learned[n.replica].emplace(arg_u64(n, 0), n.time);
  });
  // First time each honest replica entered each view.
  std::map<ReplicaId, std::map<View, Tick>> entered;
  for_notes(c, "enter_view", [&](const Note& n) {
    entered[n.replica].emplace(arg_i64(n, 0), n.time);
  });
  std::set<std::pair<View, Digest>> certs;
  for_notes(c, "cert_formed", [&](const Note& n) {
    certs.insert({arg_i64(n, 0), arg_u64(n, 2)});
  });

  std::uint32_t honest_total = 0;
  for (ReplicaId r = 0; r < c.cfg.n; ++r) honest_total += c.honest(r) ? 1 : 0;
  min_holders = std::min(min_holders, honest_total);

  for (const auto& [cv, cb] : certs) {
    auto [chain, complete] = idx.chain(cb);
    if (!complete) {
      v.push_back(vio("no honest replica recorded the full chain of certified block " +
                      std::to_string(cb)));
      continue;
    }
    std::uint32_t holders = 0;
    for (ReplicaId r = 0; r < c.cfg.n; ++r) {
      if (!c.honest(r)) continue;
      // Earliest entry into any view > cv; none means the constraint is vacuous.
      Tick cutoff = std::numeric_limits<Tick>::max();
      auto er = entered.find(r);
      if (er != entered.end()) {
        for (const auto& [view, t] : er->second) {
          if (view > cv) cutoff = std::min(cutoff, t);
        }
      }
      bool holds = true;
      auto lr = learned.find(r);
      for (Digest b : chain) {
        if (lr == learned.end()) {
          holds = false;
          break;
        }
        auto it = lr->second.find(b);
        if (it == lr->second.end() || it->second > cutoff) {
          holds = false;
          break;
        }
      }
      holders += holds ? 1 : 0;
    }
    if (holders < min_holders) {
      v.push_back(vio("only " + std::to_string(holders) + " honest replicas held the chain of " +
                      std::to_string(cb) + " certified in view " + std::to_string(cv) +
                      " before entering the next view (need " + std::to_string(min_holders) +
                      ")"));
    }
  }
  return v;
}

Violations check_lemma5(const CheckContext& c) {
  Violations v;
  // Receipt times per (origin, inner digest) per honest replica.
  std::map<std::pair<ReplicaId, Digest>, std::map<ReplicaId, Tick>> recv;
  for_notes(c, "inner_recv", [&](const Note& n) {
    recv[{static_cast<ReplicaId>(arg_u64(n, 0)), arg_u64(n, 1)}].emplace(n.replica, n.time);
  });
  Tick last_event = 0;
  for (const auto& e : c.trace->events) last_event = std::max(last_event, e.time);

  for_notes(c, "inner_sent", [&](const Note& n) {
    const Tick deadline = n.time + 2 * c.cfg.delta;
    // Sends whose window outlives the processed trace can't be judged.
    if (deadline >= last_event || deadline > c.cfg.horizon) return;
    const auto key = std::make_pair(n.replica, arg_u64(n, 0));
    auto it = recv.find(key);
    for (ReplicaId r = 0; r < c.cfg.n; ++r) {
      if (!c.honest(r) || r == n.replica) continue;
      Tick got = std::numeric_limits<Tick>::max();
      if (it != recv.end()) {
        auto rr = it->second.find(r);
        if (rr != it->second.end()) got = rr->second;
      }
      if (got > deadline) {
        v.push_back(vio("message " + n.args[0] + " from " + std::to_string(n.replica) +
                        " sent at t=" + std::to_string(n.time) + " not at replica " +
                        std::to_string(r) + " by t=" + std::to_string(deadline)));
      }
    }
  });
  return v;
}

Violations check_liveness_smr(const CheckContext& c, bool msf_base) {
  Violations v;
  if (c.max_p == 0) return {vio("liveness check requires max_p > 0")};
  const Tick base = (msf_base ? 8 : 6) * c.cfg.Delta * c.scale;
  for (ReplicaId r = 0; r < c.cfg.n; ++r) {
    if (!c.honest(r)) continue;
    const Tick t0 = c.offset(r);  // view-0 entry
    std::vector<Tick> commit_times;
    for (const auto& cr : c.trace->commits) {
      if (cr.replica == r) commit_times.push_back(cr.global_time);
    }
    std::sort(commit_times.begin(), commit_times.end());
    for (std::uint32_t p = 1; p <= c.max_p; ++p) {
      const Tick deadline = t0 + base + static_cast<Tick>(p - 1) * c.alpha * c.scale;
      const auto done = static_cast<std::uint32_t>(
          std::upper_bound(commit_times.begin(), commit_times.end(), deadline) -
          commit_times.begin());
      if (done < p) {
        v.push_back(vio("replica " + std::to_string(r) + " committed " + std::to_string(done) +
                        " < " + std::to_string(p) + " blocks by view-local t=" +
                        std::to_string(deadline - t0)));
      }
    }
  }
  return v;
}

Violations check_no_honest_blame(const CheckContext& c) {
  Violations v;
  for_notes(c, "blame", [&](const Note& n) {
    v.push_back(vio("honest replica " + std::to_string(n.replica) + " blamed view " +
                    n.args[0] + " (" + (n.args.size() > 1 ? n.args[1] : "") + ")"));
  });
  return v;
}

Violations run_suite(const std::string& name, const CheckContext& c) {
  if (name == "agreement") return check_agreement(c);
  if (name == "validity") return check_validity(c, /*require_step4=*/false);
  if (name == "safety") return check_smr_safety(c);
  if (name == "liveness") return check_liveness_smr(c, /*msf_base=*/false);
  if (name == "lemma1") return check_lemma1(c);
  if (name == "lemma2") return check_lemma2(c);
  if (name == "lemma4") {
    std::uint32_t honest = 0;
    for (ReplicaId r = 0; r < c.cfg.n; ++r) honest += c.honest(r) ? 1 : 0;
    return check_lemma4(c, honest);
  }
  if (name == "lemma5") return check_lemma5(c);
  if (name == "lemma6") return check_lemma4(c, c.cfg.f + 1);
  if (name == "lemma7") return check_lemma2(c);
  return {vio("unknown suite: " + name)};
}

}  // namespace onedelta
