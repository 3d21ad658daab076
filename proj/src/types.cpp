#include "onedelta/types.hpp"

#include <algorithm>

namespace onedelta {

std::string Value::to_string() const {
  if (bot) return "bot";
  if (payload.size() == 8) {
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(payload[i]) << (8 * i);
    return std::to_string(x);
  }
  std::string s = "0x";
  static const char* hex = "0123456789abcdef";
  for (auto b : payload) {
    s.push_back(hex[b >> 4]);
    s.push_back(hex[b & 0xf]);
  }
  return s;
}

bool distinct_signers(const std::vector<Signature>& sigs) {
  std::set<ReplicaId> seen;
  for (const auto& s : sigs) {
    if (!seen.insert(s.signer).second) return false;
  }
  return true;
}

bool verify_proposal(const Proposal& p, std::uint32_t /*n*/, std::uint32_t f,
                     const Authenticator& auth) {
  if (p.signatures.size() != f + 1) return false;
  if (!distinct_signers(p.signatures)) return false;
  const Digest d = input_digest(p.value);
  return std::all_of(p.signatures.begin(), p.signatures.end(),
                     [&](const Signature& s) { return auth.verify(s, d); });
}

bool verify_vote_cert(const VoteCert& c, std::uint32_t f, const Authenticator& auth,
                      std::uint64_t dom) {
  if (c.votes.size() != f + 1) return false;
  if (!distinct_signers(c.votes)) return false;
  const Digest d = smr_vote_digest(c.block, c.height, c.view, dom);
  return std::all_of(c.votes.begin(), c.votes.end(),
                     [&](const Signature& s) { return auth.verify(s, d); });
}

bool verify_blame_cert(const BlameCert& c, std::uint32_t f, const Authenticator& auth,
                       std::uint64_t dom) {
  if (c.blames.size() != f + 1) return false;
  if (!distinct_signers(c.blames)) return false;
  const Digest d = blame_digest(c.view, dom);
  return std::all_of(c.blames.begin(), c.blames.end(),
                     [&](const Signature& s) { return auth.verify(s, d); });
}

bool BlockStore::extends(Digest descendant, Digest ancestor) const {
  Digest cur = descendant;
  const Block* a = get(ancestor);
  if (a == nullptr) return false;
  while (true) {
    if (cur == ancestor) return true;
    const Block* b = get(cur);
    if (b == nullptr || b->height == 0 || b->height <= a->height) return false;
    cur = b->parent;
  }
}

std::optional<bool> BlockStore::extends_known(Digest descendant, Digest ancestor) const {
  const Block* a = get(ancestor);
  const Block* d = get(descendant);
  if (a == nullptr || d == nullptr) return std::nullopt;
  if (d->height < a->height) return false;
  Digest cur = descendant;
  while (true) {
    const Block* b = get(cur);
    if (b == nullptr) return std::nullopt;  // gap in the chain
    if (b->height == a->height) return cur == ancestor;
    if (b->height == 0) return false;
    cur = b->parent;
  }
}

std::optional<Digest> BlockStore::ancestor_at(Digest id, Height h) const {
  Digest cur = id;
  while (true) {
    const Block* b = get(cur);
    if (b == nullptr) return std::nullopt;
    if (b->height == h) return cur;
    if (b->height < h || b->height == 0) return std::nullopt;
    cur = b->parent;
  }
}

bool BlockStore::chain_known(Digest id) const {
  Digest cur = id;
  while (true) {
    const Block* b = get(cur);
    if (b == nullptr) return false;
    if (b->height == 0) return true;
    cur = b->parent;
  }
}

std::vector<Digest> BlockStore::chain_of(Digest id, Height above_height) const {
  std::vector<Digest> out;
  Digest cur = id;
  while (true) {
    const Block* b = get(cur);
    if (b == nullptr) break;
    if (b->height <= above_height) break;
    out.push_back(cur);
    if (b->height == 0) break;
    cur = b->parent;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

bool equivocates(const BlockStore& store, Digest a, Digest b) {
  if (a == b) return false;
  auto ab = store.extends_known(a, b);
  auto ba = store.extends_known(b, a);
  // Unknown linkage is not evidence.
  if (ab.has_value() && *ab) return false;
  if (ba.has_value() && *ba) return false;
  return ab.has_value() && ba.has_value();
}

}  // namespace onedelta
