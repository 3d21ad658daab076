#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace onedelta {

using Tick = std::int64_t;
using ReplicaId = std::uint32_t;
using Digest = std::uint64_t;
using View = std::int64_t;
using Height = std::uint64_t;

// FNV-1a, used for all content digests at desk scale.
inline Digest fnv1a(const std::uint8_t* data, std::size_t size,
                    Digest seed = 0xcbf29ce484222325ull) {
  Digest h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x00000100000001b3ull;
  }
  return h;
}

class DigestBuilder {
 public:
  DigestBuilder& bytes(const std::uint8_t* p, std::size_t n) {
    h_ = fnv1a(p, n, h_);
    return *this;
  }
  DigestBuilder& u64(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return bytes(b, 8);
  }
  DigestBuilder& str(const std::string& s) {
    u64(s.size());
    return bytes(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
  }
  DigestBuilder& vec(const std::vector<std::uint8_t>& v) {
    u64(v.size());
    return v.empty() ? *this : bytes(v.data(), v.size());
  }
  Digest get() const { return h_; }

 private:
  Digest h_ = 0xcbf29ce484222325ull;
};

// An agreement value. The distinguished default ⊥ is reserved and never
// equals a client-supplied payload.
struct Value {
  bool bot = true;
  std::vector<std::uint8_t> payload;

  static Value bottom() { return Value{}; }
  static Value of_bytes(std::vector<std::uint8_t> b) {
    Value v;
    v.bot = false;
    v.payload = std::move(b);
    return v;
  }
  static Value of_int(std::uint64_t x) {
    std::vector<std::uint8_t> b(8);
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(x >> (8 * i));
    return of_bytes(std::move(b));
  }
  bool is_bottom() const { return bot; }

  Digest digest() const {
    DigestBuilder d;
    d.u64(bot ? 1 : 0).vec(payload);
    return d.get();
  }
  std::string to_string() const;

  friend bool operator==(const Value& a, const Value& b) {
    return a.bot == b.bot && a.payload == b.payload;
  }
  friend auto operator<=>(const Value& a, const Value& b) = default;
};

// A simulated signature: (signer, digest of signed content). It verifies
// only if the run authenticator recorded it, so honest signatures cannot
// be fabricated by the adversary.
struct Signature {
  ReplicaId signer = 0;
  Digest digest = 0;

  friend bool operator==(const Signature&, const Signature&) = default;
  friend auto operator<=>(const Signature&, const Signature&) = default;
};

// Per-run signing facility. Single-threaded by the simulator contract.
class Authenticator {
 public:
  Signature sign(ReplicaId signer, Digest digest) {
    signed_.insert({signer, digest});
    return Signature{signer, digest};
  }
  bool verify(const Signature& sig, Digest expected) const {
    if (sig.digest != expected) return false;
    return signed_.count({sig.signer, sig.digest}) != 0;
  }

 private:
  std::set<std::pair<ReplicaId, Digest>> signed_;
};

// Signing domains, mixed into every digest so messages of different kinds
// can never alias.
namespace domain {
inline constexpr std::uint64_t kInput = 1;    // BA input exchange
inline constexpr std::uint64_t kBaVote = 2;   // BA/BB vote over a value
inline constexpr std::uint64_t kBbPropose = 3;
inline constexpr std::uint64_t kDolevStrong = 4;
inline constexpr std::uint64_t kSmrPropose = 5;
inline constexpr std::uint64_t kSmrVote = 6;  // also MSF vote1
inline constexpr std::uint64_t kBlame = 7;    // also MSF blame1
inline constexpr std::uint64_t kStatus = 8;
inline constexpr std::uint64_t kAck = 9;
inline constexpr std::uint64_t kVote2 = 10;
inline constexpr std::uint64_t kBlame2 = 11;
}  // namespace domain

inline Digest input_digest(const Value& v) {
  return DigestBuilder().u64(domain::kInput).u64(v.digest()).get();
}
inline Digest ba_vote_digest(const Value& v) {
  return DigestBuilder().u64(domain::kBaVote).u64(v.digest()).get();
}
inline Digest bb_propose_digest(const Value& v) {
  return DigestBuilder().u64(domain::kBbPropose).u64(v.digest()).get();
}
inline Digest ds_digest(ReplicaId instance, const Value& v) {
  return DigestBuilder().u64(domain::kDolevStrong).u64(instance).u64(v.digest()).get();
}
inline Digest smr_vote_digest(Digest block, Height height, View view,
                              std::uint64_t dom = domain::kSmrVote) {
  return DigestBuilder()
      .u64(dom)
      .u64(block)
      .u64(height)
      .u64(static_cast<std::uint64_t>(view))
      .get();
}
inline Digest blame_digest(View view, std::uint64_t dom = domain::kBlame) {
  return DigestBuilder().u64(dom).u64(static_cast<std::uint64_t>(view)).get();
}
inline Digest status_digest(Digest block, View view) {
  return DigestBuilder().u64(domain::kStatus).u64(block).u64(static_cast<std::uint64_t>(view)).get();
}

// A BA proposal: f+1 distinct-signer signatures over one value.
struct Proposal {
  Value value;
  std::vector<Signature> signatures;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

bool verify_proposal(const Proposal& p, std::uint32_t n, std::uint32_t f,
                     const Authenticator& auth);

// A hash-chained block. Genesis has height 0 and a zero parent.
struct Block {
  Height height = 0;
  std::vector<std::uint8_t> batch;
  Digest parent = 0;

  static Block genesis() { return Block{}; }
  Digest id() const {
    return DigestBuilder().u64(height).vec(batch).u64(parent).get();
  }
  friend bool operator==(const Block&, const Block&) = default;
};

class BlockStore {
 public:
  BlockStore() { add(Block::genesis()); }
  void add(const Block& b) { blocks_.emplace(b.id(), b); }
  bool has(Digest id) const { return blocks_.count(id) != 0; }
  const Block* get(Digest id) const {
    auto it = blocks_.find(id);
    return it == blocks_.end() ? nullptr : &it->second;
  }
  // True iff `descendant` is reachable from the block with id `ancestor`
  // by repeated parent dereference (reflexive).
  bool extends(Digest descendant, Digest ancestor) const;
  // Tri-state extends for equivocation checks: nullopt when the chain
  // between the two blocks is not fully known yet.
  std::optional<bool> extends_known(Digest descendant, Digest ancestor) const;
  // Ancestor of `id` at height h, if the chain that deep is known.
  std::optional<Digest> ancestor_at(Digest id, Height h) const;
  // All ancestors of `id` down to (excluding) genesis are present.
  bool chain_known(Digest id) const;
  // Ancestor ids of `id` strictly above `above_height`, lowest first.
  std::vector<Digest> chain_of(Digest id, Height above_height) const;

 private:
  std::map<Digest, Block> blocks_;
};

// Vote certificate: f+1 distinct-signer votes on (block, view), ranked
// lexicographically by (view, height). The genesis certificate has rank
// (-1, 0) so any real certificate outranks it.
struct VoteCert {
  View view = -1;
  Digest block = Block::genesis().id();
  Height height = 0;
  std::vector<Signature> votes;

  static VoteCert genesis_cert() { return VoteCert{}; }

  std::pair<View, Height> rank() const { return {view, height}; }
  friend bool operator==(const VoteCert&, const VoteCert&) = default;
};

// -1, 0, +1 ordering of certificate ranks.
inline int rank_cert(const VoteCert& a, const VoteCert& b) {
  auto ra = a.rank(), rb = b.rank();
  if (ra < rb) return -1;
  if (rb < ra) return 1;
  return 0;
}

bool verify_vote_cert(const VoteCert& c, std::uint32_t f, const Authenticator& auth,
                      std::uint64_t dom = domain::kSmrVote);

struct BlameCert {
  View view = 0;
  std::vector<Signature> blames;

  friend bool operator==(const BlameCert&, const BlameCert&) = default;
};

bool verify_blame_cert(const BlameCert& c, std::uint32_t f, const Authenticator& auth,
                       std::uint64_t dom = domain::kBlame);

// Distinct-signer check shared by all certificate validation.
bool distinct_signers(const std::vector<Signature>& sigs);

// Equivocation between two blocks: not equal and neither extends the other.
bool equivocates(const BlockStore& store, Digest a, Digest b);

}  // namespace onedelta
