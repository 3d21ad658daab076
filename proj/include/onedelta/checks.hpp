#pragma once

#include "onedelta/sim.hpp"

namespace onedelta {

// Per-trace assertion inputs. Checkers consume the structured notes the
// replicas emit plus the commit records; they never inspect replica state.
struct CheckContext {
  const SimTrace* trace = nullptr;
  SimConfig cfg;
  std::vector<bool> byzantine;      // empty = all honest
  std::vector<Tick> start_offsets;  // empty = all 0
  Tick scale = 1;                   // 2 under the relay transform
  std::optional<Value> expected;    // good-case expected commit value
  Tick alpha = 0;                   // SMR cadence, for liveness checks
  std::uint32_t max_p = 0;          // liveness checkpoints to test

  bool honest(ReplicaId r) const { return !(r < byzantine.size() && byzantine[r]); }
  Tick offset(ReplicaId r) const { return r < start_offsets.size() ? start_offsets[r] : 0; }
};

using Violations = std::vector<std::string>;

// Single-shot value agreement: honest replicas commit at most once, all
// committed values equal.
Violations check_agreement(const CheckContext& c);
// All honest commit the expected value; with require_step4, each commit
// happens at Step 4 by local (3*Delta+sigma)*scale.
Violations check_validity(const CheckContext& c, bool require_step4);
// Every honest replica terminates, within the fallback decision deadline.
Violations check_termination(const CheckContext& c);
// Lemma 1(i)/(ii) over step4_commit and fallback_input notes.
Violations check_lemma1(const CheckContext& c);
// SMR safety: one committed block per height across honest replicas.
Violations check_smr_safety(const CheckContext& c);
// Direct commit at rank (v,l) implies every >=-ranked certificate extends
// the committed block (Lemma 2; identical statement is Lemma 7 for MSF).
Violations check_lemma2(const CheckContext& c);
// A block certified in view v implies >= min_holders honest replicas hold
// its whole chain before entering v+1 (all honest: Lemma 4; f+1: Lemma 6).
Violations check_lemma4(const CheckContext& c, std::uint32_t min_holders);
// Relay transform: an honest send at t reaches every honest replica by
// t + 2*delta.
Violations check_lemma5(const CheckContext& c);
// Honest-leader view 0 commits >= p blocks by view-local 6*Delta+(p-1)*alpha
// (8*Delta base when msf_base is set) for p = 1..max_p.
Violations check_liveness_smr(const CheckContext& c, bool msf_base);
// No honest replica ever blames (honest-leader runs only).
Violations check_no_honest_blame(const CheckContext& c);

// Dispatch by suite name: agreement, validity, safety, liveness, lemma1,
// lemma2, lemma4, lemma5, lemma6, lemma7. Unknown names yield a violation.
Violations run_suite(const std::string& name, const CheckContext& c);

}  // namespace onedelta
