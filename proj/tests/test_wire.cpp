#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "onedelta/wire.hpp"

using namespace onedelta;

namespace {

void roundtrip(const WireMessage& m) {
  auto bytes = encode(m);
  auto back = decode(bytes);
  REQUIRE(back.has_value());
  CHECK(encode(*back) == bytes);
  CHECK(message_digest(*back) == message_digest(m));
}

Proposal sample_proposal() {
  Proposal p;
  p.value = Value::of_int(17);
  p.signatures = {Signature{0, 1}, Signature{2, 1}};
  return p;
}

std::shared_ptr<MsgSmrPropose> sample_propose() {
  auto p = std::make_shared<MsgSmrPropose>();
  p->block.height = 3;
  p->block.batch = {9, 9};
  p->block.parent = 42;
  p->view = 2;
  MsgStatus st;
  st.block = 7;
  st.cert.view = 1;
  st.cert.height = 2;
  st.cert.block = 7;
  st.cert.votes = {Signature{1, 5}};
  st.view = 2;
  st.sig = Signature{1, 6};
  p->status = std::vector<MsgStatus>{st};
  p->sig = Signature{2, p->signed_digest()};
  return p;
}

}  // namespace

TEST_CASE("every message kind round-trips through the canonical encoding") {
  roundtrip(MsgInput{Value::of_int(5), Signature{1, 2}});
  roundtrip(MsgInput{Value::bottom(), Signature{0, 0}});
  roundtrip(MsgBaProposal{sample_proposal()});
  roundtrip(MsgBaVote{Value::of_int(5), Signature{3, 4}});
  roundtrip(MsgBaVoteSet{Value::of_int(5), {Signature{0, 1}, Signature{1, 1}}});
  roundtrip(MsgDolevStrong{2, Value::of_int(9), {Signature{2, 8}, Signature{0, 8}}});
  roundtrip(MsgBbProposal{Value::of_bytes({1, 2, 3}), Signature{0, 7}});

  MsgStatus st;
  st.block = 11;
  st.cert = VoteCert::genesis_cert();
  st.view = 4;
  st.sig = Signature{2, 3};
  roundtrip(st);

  roundtrip(*sample_propose());
  MsgSmrPropose no_status = *sample_propose();
  no_status.status.reset();
  roundtrip(no_status);

  Block b;
  b.height = 1;
  b.batch = {};
  b.parent = Block::genesis().id();
  roundtrip(MsgBlockData{b});
  roundtrip(MsgSmrVote{99, 1, 0, Signature{1, 2}});
  VoteCert c;
  c.view = 0;
  c.height = 1;
  c.block = 99;
  c.votes = {Signature{0, 1}, Signature{1, 1}};
  roundtrip(MsgVoteCert{c, 1});
  roundtrip(MsgBlame{3, Signature{0, 5}});
  roundtrip(MsgBlameCert{BlameCert{3, {Signature{0, 5}, Signature{1, 5}}}});
  roundtrip(MsgEquivEvidence{sample_propose(), sample_propose()});
  roundtrip(MsgAck{99, 1, 0, Signature{2, 6}});
  roundtrip(MsgVote2{99, 1, 0, Signature{2, 7}});
  roundtrip(MsgVote2Set{{MsgVote2{99, 1, 0, Signature{0, 7}}, MsgVote2{99, 1, 0, Signature{1, 7}}}});
  roundtrip(MsgBlame2{3, Signature{0, 9}});
  roundtrip(MsgBlame2Set{{MsgBlame2{3, Signature{0, 9}}}});
}

TEST_CASE("relay envelopes nest arbitrarily and round-trip") {
  auto inner = std::make_shared<WireMessage>(MsgBaVote{Value::of_int(1), Signature{2, 2}});
  MsgRelay r;
  r.origin = 2;
  r.relay = true;
  r.inner = inner;
  roundtrip(r);

  // A relay of a relay (never produced by honest code, still encodable).
  MsgRelay outer;
  outer.origin = 0;
  outer.relay = false;
  outer.inner = std::make_shared<WireMessage>(r);
  roundtrip(outer);
}

TEST_CASE("distinct messages get distinct encodings") {
  auto a = encode(MsgBaVote{Value::of_int(1), Signature{0, 1}});
  auto b = encode(MsgBaVote{Value::of_int(2), Signature{0, 1}});
  auto c = encode(MsgInput{Value::of_int(1), Signature{0, 1}});
  CHECK(a != b);
  CHECK(a != c);
}

TEST_CASE("truncated and corrupted buffers are rejected") {
  auto bytes = encode(WireMessage{*sample_propose()});
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    std::vector<std::uint8_t> prefix(bytes.begin(), bytes.begin() + cut);
    CHECK_FALSE(decode(prefix).has_value());
  }
  std::vector<std::uint8_t> bad_tag = bytes;
  bad_tag[0] = 0xff;
  CHECK_FALSE(decode(bad_tag).has_value());
  CHECK_FALSE(decode({}).has_value());
}

TEST_CASE("trailing garbage is rejected") {
  auto bytes = encode(MsgBlame{1, Signature{0, 2}});
  bytes.push_back(0);
  CHECK_FALSE(decode(bytes).has_value());
}
