#include "onedelta/wire.hpp"

namespace onedelta {
namespace {

enum Tag : std::uint8_t {
  kTagInput = 1,
  kTagBaProposal,
  kTagBaVote,
  kTagBaVoteSet,
  kTagDolevStrong,
  kTagBbProposal,
  kTagStatus,
  kTagSmrPropose,
  kTagBlockData,
  kTagSmrVote,
  kTagVoteCert,
  kTagBlame,
  kTagBlameCert,
  kTagEquivEvidence,
  kTagAck,
  kTagVote2,
  kTagVote2Set,
  kTagBlame2,
  kTagBlame2Set,
  kTagRelay,
};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void bytes(const std::vector<std::uint8_t>& b) {
    u32(static_cast<std::uint32_t>(b.size()));
    out_.insert(out_.end(), b.begin(), b.end());
  }
  void value(const Value& v) {
    u8(v.bot ? 1 : 0);
    bytes(v.payload);
  }
  void sig(const Signature& s) {
    u32(s.signer);
    u64(s.digest);
  }
  void sigs(const std::vector<Signature>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& s : v) sig(s);
  }
  void block(const Block& b) {
    u64(b.height);
    bytes(b.batch);
    u64(b.parent);
  }
  void vote_cert(const VoteCert& c) {
    i64(c.view);
    u64(c.block);
    u64(c.height);
    sigs(c.votes);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}
  bool ok() const { return ok_; }
  bool done() const { return ok_ && pos_ == b_.size(); }

  std::uint8_t u8() {
    if (pos_ + 1 > b_.size()) return fail<std::uint8_t>();
    return b_[pos_++];
  }
  std::uint32_t u32() {
    if (pos_ + 4 > b_.size()) return fail<std::uint32_t>();
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    if (pos_ + 8 > b_.size()) return fail<std::uint64_t>();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  std::vector<std::uint8_t> bytes() {
    std::uint32_t n = u32();
    if (!ok_ || pos_ + n > b_.size()) return fail<std::vector<std::uint8_t>>();
    std::vector<std::uint8_t> v(b_.begin() + pos_, b_.begin() + pos_ + n);
    pos_ += n;
    return v;
  }
  Value value() {
    Value v;
    v.bot = u8() != 0;
    v.payload = bytes();
    return v;
  }
  Signature sig() {
    Signature s;
    s.signer = u32();
    s.digest = u64();
    return s;
  }
  std::vector<Signature> sigs() {
    std::uint32_t n = u32();
    if (!ok_ || n > kMaxVec) return fail<std::vector<Signature>>();
    std::vector<Signature> v;
    v.reserve(n);
    for (std::uint32_t i = 0; i < n && ok_; ++i) v.push_back(sig());
    return v;
  }
  Block block() {
    Block b;
    b.height = u64();
    b.batch = bytes();
    b.parent = u64();
    return b;
  }
  VoteCert vote_cert() {
    VoteCert c;
    c.view = i64();
    c.block = u64();
    c.height = u64();
    c.votes = sigs();
    return c;
  }

  static constexpr std::uint32_t kMaxVec = 1u << 16;

 private:
  template <typename T>
  T fail() {
    ok_ = false;
    return T{};
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
  bool ok_ = true;
};

void encode_status(Writer& w, const MsgStatus& m) {
  w.u64(m.block);
  w.vote_cert(m.cert);
  w.i64(m.view);
  w.sig(m.sig);
}

MsgStatus decode_status(Reader& r) {
  MsgStatus m;
  m.block = r.u64();
  m.cert = r.vote_cert();
  m.view = r.i64();
  m.sig = r.sig();
  return m;
}

void encode_propose(Writer& w, const MsgSmrPropose& m) {
  w.block(m.block);
  w.i64(m.view);
  w.u8(m.status.has_value() ? 1 : 0);
  if (m.status) {
    w.u32(static_cast<std::uint32_t>(m.status->size()));
    for (const auto& s : *m.status) encode_status(w, s);
  }
  w.sig(m.sig);
}

MsgSmrPropose decode_propose(Reader& r) {
  MsgSmrPropose m;
  m.block = r.block();
  m.view = r.i64();
  if (r.u8() != 0) {
    std::uint32_t n = r.u32();
    if (n > Reader::kMaxVec) n = 0;
    std::vector<MsgStatus> v;
    for (std::uint32_t i = 0; i < n && r.ok(); ++i) v.push_back(decode_status(r));
    m.status = std::move(v);
  }
  m.sig = r.sig();
  return m;
}

}  // namespace

Digest MsgSmrPropose::signed_digest() const {
  DigestBuilder d;
  d.u64(domain::kSmrPropose).u64(block.id()).u64(static_cast<std::uint64_t>(view));
  if (status) {
    d.u64(1).u64(status->size());
    for (const auto& s : *status) {
      d.u64(s.block).u64(static_cast<std::uint64_t>(s.view)).u64(s.sig.signer).u64(s.sig.digest);
      d.u64(static_cast<std::uint64_t>(s.cert.view)).u64(s.cert.block).u64(s.cert.height);
    }
  } else {
    d.u64(0);
  }
  return d.get();
}

std::vector<std::uint8_t> encode(const WireMessage& m) {
  Writer w;
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, MsgInput>) {
          w.u8(kTagInput);
          w.value(msg.value);
          w.sig(msg.sig);
        } else if constexpr (std::is_same_v<T, MsgBaProposal>) {
          w.u8(kTagBaProposal);
          w.value(msg.proposal.value);
          w.sigs(msg.proposal.signatures);
        } else if constexpr (std::is_same_v<T, MsgBaVote>) {
          w.u8(kTagBaVote);
          w.value(msg.value);
          w.sig(msg.sig);
        } else if constexpr (std::is_same_v<T, MsgBaVoteSet>) {
          w.u8(kTagBaVoteSet);
          w.value(msg.value);
          w.sigs(msg.votes);
        } else if constexpr (std::is_same_v<T, MsgDolevStrong>) {
          w.u8(kTagDolevStrong);
          w.u32(msg.instance);
          w.value(msg.value);
          w.sigs(msg.chain);
        } else if constexpr (std::is_same_v<T, MsgBbProposal>) {
          w.u8(kTagBbProposal);
          w.value(msg.value);
          w.sig(msg.sig);
        } else if constexpr (std::is_same_v<T, MsgStatus>) {
          w.u8(kTagStatus);
          encode_status(w, msg);
        } else if constexpr (std::is_same_v<T, MsgSmrPropose>) {
          w.u8(kTagSmrPropose);
          encode_propose(w, msg);
        } else if constexpr (std::is_same_v<T, MsgBlockData>) {
          w.u8(kTagBlockData);
          w.block(msg.block);
        } else if constexpr (std::is_same_v<T, MsgSmrVote>) {
          w.u8(kTagSmrVote);
          w.u64(msg.block);
          w.u64(msg.height);
          w.i64(msg.view);
          w.sig(msg.sig);
        } else if constexpr (std::is_same_v<T, MsgVoteCert>) {
          w.u8(kTagVoteCert);
          w.vote_cert(msg.cert);
          w.u64(msg.height);
        } else if constexpr (std::is_same_v<T, MsgBlame>) {
          w.u8(kTagBlame);
          w.i64(msg.view);
          w.sig(msg.sig);
        } else if constexpr (std::is_same_v<T, MsgBlameCert>) {
          w.u8(kTagBlameCert);
          w.i64(msg.cert.view);
          w.sigs(msg.cert.blames);
        } else if constexpr (std::is_same_v<T, MsgEquivEvidence>) {
          w.u8(kTagEquivEvidence);
          encode_propose(w, *msg.a);
          encode_propose(w, *msg.b);
        } else if constexpr (std::is_same_v<T, MsgAck>) {
          w.u8(kTagAck);
          w.u64(msg.block);
          w.u64(msg.height);
          w.i64(msg.view);
          w.sig(msg.sig);
        } else if constexpr (std::is_same_v<T, MsgVote2>) {
          w.u8(kTagVote2);
          w.u64(msg.block);
          w.u64(msg.height);
          w.i64(msg.view);
          w.sig(msg.sig);
        } else if constexpr (std::is_same_v<T, MsgVote2Set>) {
          w.u8(kTagVote2Set);
          w.u32(static_cast<std::uint32_t>(msg.votes.size()));
          for (const auto& v : msg.votes) {
            w.u64(v.block);
            w.u64(v.height);
            w.i64(v.view);
            w.sig(v.sig);
          }
        } else if constexpr (std::is_same_v<T, MsgBlame2>) {
          w.u8(kTagBlame2);
          w.i64(msg.view);
          w.sig(msg.sig);
        } else if constexpr (std::is_same_v<T, MsgBlame2Set>) {
          w.u8(kTagBlame2Set);
          w.u32(static_cast<std::uint32_t>(msg.blames.size()));
          for (const auto& b : msg.blames) {
            w.i64(b.view);
            w.sig(b.sig);
          }
        } else if constexpr (std::is_same_v<T, MsgRelay>) {
          w.u8(kTagRelay);
          w.u32(msg.origin);
          w.u8(msg.relay ? 1 : 0);
          w.bytes(msg.inner ? encode(*msg.inner) : std::vector<std::uint8_t>{});
        }
      },
      m.v());
  return w.take();
}

std::optional<WireMessage> decode(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  std::uint8_t tag = r.u8();
  if (!r.ok()) return std::nullopt;
  WireMessage out = MsgInput{};
  switch (tag) {
    case kTagInput: {
      MsgInput m;
      m.value = r.value();
      m.sig = r.sig();
      out = m;
      break;
    }
    case kTagBaProposal: {
      MsgBaProposal m;
      m.proposal.value = r.value();
      m.proposal.signatures = r.sigs();
      out = m;
      break;
    }
    case kTagBaVote: {
      MsgBaVote m;
      m.value = r.value();
      m.sig = r.sig();
      out = m;
      break;
    }
    case kTagBaVoteSet: {
      MsgBaVoteSet m;
      m.value = r.value();
      m.votes = r.sigs();
      out = m;
      break;
    }
    case kTagDolevStrong: {
      MsgDolevStrong m;
      m.instance = r.u32();
      m.value = r.value();
      m.chain = r.sigs();
      out = m;
      break;
    }
    case kTagBbProposal: {
      MsgBbProposal m;
      m.value = r.value();
      m.sig = r.sig();
      out = m;
      break;
    }
    case kTagStatus:
      out = decode_status(r);
      break;
    case kTagSmrPropose:
      out = decode_propose(r);
      break;
    case kTagBlockData: {
      MsgBlockData m;
      m.block = r.block();
      out = m;
      break;
    }
    case kTagSmrVote: {
      MsgSmrVote m;
      m.block = r.u64();
      m.height = r.u64();
      m.view = r.i64();
      m.sig = r.sig();
      out = m;
      break;
    }
    case kTagVoteCert: {
      MsgVoteCert m;
      m.cert = r.vote_cert();
      m.height = r.u64();
      out = m;
      break;
    }
    case kTagBlame: {
      MsgBlame m;
      m.view = r.i64();
      m.sig = r.sig();
      out = m;
      break;
    }
    case kTagBlameCert: {
      MsgBlameCert m;
      m.cert.view = r.i64();
      m.cert.blames = r.sigs();
      out = m;
      break;
    }
    case kTagEquivEvidence: {
      MsgEquivEvidence m;
      m.a = std::make_shared<MsgSmrPropose>(decode_propose(r));
      m.b = std::make_shared<MsgSmrPropose>(decode_propose(r));
      out = m;
      break;
    }
    case kTagAck: {
      MsgAck m;
      m.block = r.u64();
      m.height = r.u64();
      m.view = r.i64();
      m.sig = r.sig();
      out = m;
      break;
    }
    case kTagVote2: {
      MsgVote2 m;
      m.block = r.u64();
      m.height = r.u64();
      m.view = r.i64();
      m.sig = r.sig();
      out = m;
      break;
    }
    case kTagVote2Set: {
      MsgVote2Set m;
      std::uint32_t n = r.u32();
      if (n > Reader::kMaxVec) return std::nullopt;
      for (std::uint32_t i = 0; i < n && r.ok(); ++i) {
        MsgVote2 v;
        v.block = r.u64();
        v.height = r.u64();
        v.view = r.i64();
        v.sig = r.sig();
        m.votes.push_back(v);
      }
      out = m;
      break;
    }
    case kTagBlame2: {
      MsgBlame2 m;
      m.view = r.i64();
      m.sig = r.sig();
      out = m;
      break;
    }
    case kTagBlame2Set: {
      MsgBlame2Set m;
      std::uint32_t n = r.u32();
      if (n > Reader::kMaxVec) return std::nullopt;
      for (std::uint32_t i = 0; i < n && r.ok(); ++i) {
        MsgBlame2 b;
        b.view = r.i64();
        b.sig = r.sig();
        m.blames.push_back(b);
      }
      out = m;
      break;
    }
    case kTagRelay: {
      MsgRelay m;
      m.origin = r.u32();
      m.relay = r.u8() != 0;
      auto inner_bytes = r.bytes();
      if (!r.ok()) return std::nullopt;
      auto inner = decode(inner_bytes);
      if (!inner) return std::nullopt;
      m.inner = std::make_shared<WireMessage>(std::move(*inner));
      out = m;
      break;
    }
    default:
      return std::nullopt;
  }
  if (!r.done()) return std::nullopt;
  return out;
}

}  // namespace onedelta
