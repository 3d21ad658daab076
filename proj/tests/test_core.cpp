#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "onedelta/types.hpp"

using namespace onedelta;

namespace {

// Independent oracle: a signature set certifies a value iff some subset of
// exactly f+1 signatures has pairwise-distinct signers and every signature in
// the whole set verifies. Enumerates all subsets, no shortcuts.
bool proposal_oracle(const Proposal& p, std::uint32_t f, const Authenticator& auth) {
  const std::size_t k = p.signatures.size();
  if (k != static_cast<std::size_t>(f) + 1) return false;
  const Digest d = input_digest(p.value);
  for (const auto& s : p.signatures) {
    if (!auth.verify(s, d)) return false;
  }
  for (std::uint64_t mask = 0; mask < (1ull << k); ++mask) {
    if (static_cast<std::uint32_t>(__builtin_popcountll(mask)) != f + 1) continue;
    std::set<ReplicaId> signers;
    bool distinct = true;
    for (std::size_t i = 0; i < k; ++i) {
      if ((mask >> i) & 1) {
        if (!signers.insert(p.signatures[i].signer).second) distinct = false;
      }
    }
    if (distinct) return true;
  }
  return false;
}

Block make_block(Height h, Digest parent, std::uint8_t tag) {
  Block b;
  b.height = h;
  b.parent = parent;
  b.batch = {tag};
  return b;
}

}  // namespace

TEST_CASE("digest builder is order sensitive and deterministic") {
  Digest a = DigestBuilder().u64(1).u64(2).get();
  Digest b = DigestBuilder().u64(2).u64(1).get();
  Digest c = DigestBuilder().u64(1).u64(2).get();
  CHECK(a != b);
  CHECK(a == c);
}

TEST_CASE("domain separation keeps digests of one value apart") {
  Value v = Value::of_int(42);
  std::set<Digest> ds = {input_digest(v), ba_vote_digest(v), bb_propose_digest(v),
                         ds_digest(0, v)};
  CHECK(ds.size() == 4);
  CHECK(input_digest(Value::bottom()) != input_digest(Value::of_int(0)));
}

TEST_CASE("smr vote digest binds block, height and view") {
  Digest base = smr_vote_digest(7, 3, 2);
  CHECK(base != smr_vote_digest(8, 3, 2));
  CHECK(base != smr_vote_digest(7, 4, 2));
  CHECK(base != smr_vote_digest(7, 3, 3));
  CHECK(base != smr_vote_digest(7, 3, 2, domain::kAck));
}

TEST_CASE("authenticator accepts only recorded signatures") {
  Authenticator auth;
  Signature s = auth.sign(1, 99);
  CHECK(auth.verify(s, 99));
  CHECK_FALSE(auth.verify(s, 98));
  // A fabricated signature with the right shape but never signed.
  CHECK_FALSE(auth.verify(Signature{2, 99}, 99));
}

TEST_CASE("proposal verification matches subset-enumeration oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    Authenticator auth;
    const std::uint32_t f = 1 + static_cast<std::uint32_t>(rng() % 3);  // f in 1..3
    const std::uint32_t n = 2 * f + 1;
    Value v = Value::of_int(rng() % 4);
    Proposal p;
    p.value = v;
    const std::size_t count = rng() % (f + 3);  // sometimes wrong size
    for (std::size_t i = 0; i < count; ++i) {
      ReplicaId signer = static_cast<ReplicaId>(rng() % n);
      switch (rng() % 4) {
        case 0:  // honest signature over the right digest
          p.signatures.push_back(auth.sign(signer, input_digest(v)));
          break;
        case 1:  // signature over the wrong value
          p.signatures.push_back(auth.sign(signer, input_digest(Value::of_int(rng() % 4))));
          break;
        case 2:  // wrong domain
          p.signatures.push_back(auth.sign(signer, ba_vote_digest(v)));
          break;
        default:  // never signed at all
          p.signatures.push_back(Signature{signer, input_digest(v)});
          break;
      }
    }
    CHECK(verify_proposal(p, n, f, auth) == proposal_oracle(p, f, auth));
  }
}

TEST_CASE("vote cert verification requires exactly f+1 distinct signers") {
  Authenticator auth;
  const std::uint32_t f = 1;
  VoteCert c;
  c.view = 2;
  c.height = 5;
  c.block = 1234;
  const Digest d = smr_vote_digest(c.block, c.height, c.view);
  c.votes = {auth.sign(0, d), auth.sign(1, d)};
  CHECK(verify_vote_cert(c, f, auth));

  VoteCert dup = c;
  dup.votes = {auth.sign(0, d), auth.sign(0, d)};
  CHECK_FALSE(verify_vote_cert(dup, f, auth));

  VoteCert lying_height = c;
  lying_height.height = 6;  // votes no longer match the signed digest
  CHECK_FALSE(verify_vote_cert(lying_height, f, auth));

  VoteCert big = c;
  big.votes.push_back(auth.sign(2, d));
  CHECK_FALSE(verify_vote_cert(big, f, auth));
}

TEST_CASE("blame cert verification distinguishes blame domains") {
  Authenticator auth;
  BlameCert bc;
  bc.view = 3;
  bc.blames = {auth.sign(0, blame_digest(3)), auth.sign(2, blame_digest(3))};
  CHECK(verify_blame_cert(bc, 1, auth));
  CHECK_FALSE(verify_blame_cert(bc, 1, auth, domain::kBlame2));
}

TEST_CASE("block store extends is reflexive and follows parents only") {
  BlockStore store;
  const Digest g = Block::genesis().id();
  Block b1 = make_block(1, g, 1);
  Block b2 = make_block(2, b1.id(), 2);
  Block c1 = make_block(1, g, 3);  // sibling fork
  store.add(b1);
  store.add(b2);
  store.add(c1);

  CHECK(store.extends(b2.id(), b2.id()));
  CHECK(store.extends(b2.id(), b1.id()));
  CHECK(store.extends(b2.id(), g));
  CHECK_FALSE(store.extends(b1.id(), b2.id()));
  CHECK_FALSE(store.extends(b2.id(), c1.id()));
  CHECK_FALSE(store.extends(c1.id(), b1.id()));
}

TEST_CASE("extends_known reports unknown when the chain has a gap") {
  BlockStore store;
  const Digest g = Block::genesis().id();
  Block b1 = make_block(1, g, 1);
  Block b2 = make_block(2, b1.id(), 2);
  store.add(b2);  // b1 never added
  CHECK(store.extends_known(b2.id(), g) == std::nullopt);
  CHECK_FALSE(store.chain_known(b2.id()));
  store.add(b1);
  CHECK(store.extends_known(b2.id(), g) == std::optional<bool>(true));
  CHECK(store.chain_known(b2.id()));
}

TEST_CASE("chain_of lists ancestors above a height, lowest first") {
  BlockStore store;
  const Digest g = Block::genesis().id();
  Block b1 = make_block(1, g, 1);
  Block b2 = make_block(2, b1.id(), 2);
  Block b3 = make_block(3, b2.id(), 3);
  store.add(b1);
  store.add(b2);
  store.add(b3);
  auto chain = store.chain_of(b3.id(), 1);
  REQUIRE(chain.size() == 2);
  CHECK(chain[0] == b2.id());
  CHECK(chain[1] == b3.id());
  CHECK(store.ancestor_at(b3.id(), 1) == std::optional<Digest>(b1.id()));
  CHECK(store.ancestor_at(b3.id(), 4) == std::nullopt);
}

TEST_CASE("certificate ranking is lexicographic on (view, height)") {
  VoteCert g = VoteCert::genesis_cert();
  VoteCert a;
  a.view = 0;
  a.height = 1;
  VoteCert b;
  b.view = 1;
  b.height = 0;
  CHECK(rank_cert(a, g) > 0);
  CHECK(rank_cert(b, a) > 0);
  CHECK(rank_cert(a, a) == 0);
  CHECK(rank_cert(g, b) < 0);
}

TEST_CASE("equivocation needs two known chains that diverge") {
  BlockStore store;
  const Digest g = Block::genesis().id();
  Block b1 = make_block(1, g, 1);
  Block c1 = make_block(1, g, 2);
  Block b2 = make_block(2, b1.id(), 3);
  store.add(b1);
  store.add(c1);
  store.add(b2);
  CHECK(equivocates(store, b1.id(), c1.id()));
  CHECK_FALSE(equivocates(store, b1.id(), b2.id()));
  CHECK_FALSE(equivocates(store, b1.id(), b1.id()));

  // Unknown linkage is not evidence.
  Block d2 = make_block(2, 999999, 4);
  store.add(d2);
  CHECK_FALSE(equivocates(store, b1.id(), d2.id()));
}
