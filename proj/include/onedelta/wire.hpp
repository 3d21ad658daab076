#pragma once

#include <memory>
#include <optional>
#include <variant>

#include "onedelta/types.hpp"

namespace onedelta {

// --- BA / BB ---------------------------------------------------------------

// Step-1 input exchange: a signed input value.
struct MsgInput {
  Value value;
  Signature sig;
};

// A forwarded BA proposal (f+1 signed inputs over one value).
struct MsgBaProposal {
  Proposal proposal;
};

// ⟨vote, B⟩_i, keyed by the proposal's value.
struct MsgBaVote {
  Value value;
  Signature sig;
};

// The f+1 votes rebroadcast at commit time.
struct MsgBaVoteSet {
  Value value;
  std::vector<Signature> votes;
};

// One relay step of a Dolev-Strong broadcast instance. `chain` holds
// distinct-signer signatures over (instance, value); chain[0] is the
// instance owner.
struct MsgDolevStrong {
  ReplicaId instance = 0;
  Value value;
  std::vector<Signature> chain;
};

// ⟨propose, b⟩_L from the designated BB sender.
struct MsgBbProposal {
  Value value;
  Signature sig;
};

// --- SMR / MSF -------------------------------------------------------------

// Highest certified block reported to the new leader on view entry.
struct MsgStatus {
  Digest block = 0;
  VoteCert cert;
  View view = 0;  // the view being entered
  Signature sig;
};

// ⟨propose, B_k, S, v⟩_L. `status` is the S set; absent means S = ⊥.
struct MsgSmrPropose {
  Block block;
  View view = 0;
  std::optional<std::vector<MsgStatus>> status;
  Signature sig;

  Digest signed_digest() const;
};

// A chain block rebroadcast so receivers can complete the chain.
struct MsgBlockData {
  Block block;
};

// ⟨vote, B_k, v⟩_i (also MSF vote1 with dom = kSmrVote).
struct MsgSmrVote {
  Digest block = 0;
  Height height = 0;
  View view = 0;
  Signature sig;
};

struct MsgVoteCert {
  VoteCert cert;
  Height height = 0;
};

// ⟨blame, v⟩_i (also MSF blame1).
struct MsgBlame {
  View view = 0;
  Signature sig;
};

struct MsgBlameCert {
  BlameCert cert;
};

// The two equivocating leader proposals attached to a blame.
struct MsgEquivEvidence {
  std::shared_ptr<MsgSmrPropose> a;
  std::shared_ptr<MsgSmrPropose> b;
};

// --- MSF extra rounds --------------------------------------------------------

struct MsgAck {
  Digest block = 0;
  Height height = 0;
  View view = 0;
  Signature sig;
};

struct MsgVote2 {
  Digest block = 0;
  Height height = 0;
  View view = 0;
  Signature sig;
};

struct MsgVote2Set {
  std::vector<MsgVote2> votes;
};

struct MsgBlame2 {
  View view = 0;
  Signature sig;
};

struct MsgBlame2Set {
  std::vector<MsgBlame2> blames;
};

// --- Mobile link failure transform -------------------------------------------

struct WireMessage;

// Envelope used by the relay transform. `relay` marks one-hop copies;
// relayed copies are never re-relayed.
struct MsgRelay {
  ReplicaId origin = 0;
  bool relay = false;
  std::shared_ptr<WireMessage> inner;
};

using WireVariant =
    std::variant<MsgInput, MsgBaProposal, MsgBaVote, MsgBaVoteSet, MsgDolevStrong,
                 MsgBbProposal, MsgStatus, MsgSmrPropose, MsgBlockData, MsgSmrVote,
                 MsgVoteCert, MsgBlame, MsgBlameCert, MsgEquivEvidence, MsgAck,
                 MsgVote2, MsgVote2Set, MsgBlame2, MsgBlame2Set, MsgRelay>;

struct WireMessage : WireVariant {
  using WireVariant::WireVariant;
  const WireVariant& v() const { return *this; }
};

// Canonical byte encoding: one tag byte, then length-prefixed fields in
// fixed order. Round-trips losslessly; traces key on its digest.
std::vector<std::uint8_t> encode(const WireMessage& m);
std::optional<WireMessage> decode(const std::vector<std::uint8_t>& bytes);

inline Digest message_digest(const WireMessage& m) {
  auto b = encode(m);
  return fnv1a(b.data(), b.size());
}

}  // namespace onedelta
