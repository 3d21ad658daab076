#pragma once

#include "onedelta/ba.hpp"
#include "onedelta/protocol.hpp"

namespace onedelta {

struct SmrParams {
  std::uint32_t n = 4;
  std::uint32_t f = 1;
  Tick Delta = 10;
  Tick alpha = 10;  // leader proposal cadence
  // 2 under the mobile-link relay transform: every wait is doubled.
  Tick scale = 1;
  // Leader stops extending the chain past this height; 0 = unbounded.
  Height max_height = 0;

  Tick D() const { return Delta * scale; }
  Tick A() const { return alpha * scale; }
  ReplicaId leader_of(View v) const {
    return static_cast<ReplicaId>(static_cast<std::uint64_t>(v) % n);
  }
};

// Rotating-leader chained SMR. With msf=false this is the base protocol:
// forward the leader proposal, wait one Delta, vote, and commit on f+1
// votes unless the leader equivocated or a blame certificate formed. With
// msf=true an ack round gates the vote timer and a second vote/blame round
// gates commit and view change, which buys tolerance to sluggish replicas.
class SmrReplica : public Replica {
 public:
  SmrReplica(SmrParams params, bool msf) : params_(params), msf_(msf) {}

  void on_start(Context& ctx) override;
  void on_message(Context& ctx, ReplicaId from, const WireMessage& msg) override;
  void on_timer(Context& ctx, const TimerTag& tag) override;
  bool terminated() const override { return false; }  // open-ended

  Height committed_height() const { return committed_height_; }
  View view() const { return view_; }

 private:
  enum class Phase { Steady, ViewChangeWait };
  using Key = std::pair<View, Digest>;

  Tick progress_base() const { return (msf_ ? 8 : 6) * params_.D(); }
  bool in_view_steady(View v) const { return v == view_ && phase_ == Phase::Steady; }
  // Voting / committing in view v is disabled once the leader is caught
  // equivocating or a blame certificate for v is known.
  bool view_clean(View v) const {
    return equiv_views_.count(v) == 0 && blame_cert_views_.count(v) == 0;
  }

  void add_block(Context& ctx, const Block& b);
  void process_proposal(Context& ctx, const std::shared_ptr<MsgSmrPropose>& p,
                        bool evidence_only);
  void record_leader_proposal(Context& ctx, const std::shared_ptr<MsgSmrPropose>& p);
  void try_accept(Context& ctx, const std::shared_ptr<MsgSmrPropose>& p);
  void start_vote_timer(Context& ctx, View v, Digest block);
  void add_ack(Context& ctx, const MsgAck& m);
  void add_vote(Context& ctx, View v, Digest block, Height h, const Signature& sig);
  void add_vote2(Context& ctx, const MsgVote2& m);
  void record_cert(Context& ctx, const VoteCert& c);
  void try_commit(Context& ctx, View v, Digest block, Height h);
  void add_blame(Context& ctx, View v, const Signature& sig);
  void add_blame2(Context& ctx, const MsgBlame2& m);
  void on_blame_cert(Context& ctx, const BlameCert& bc);
  void begin_view_change(Context& ctx, View v);
  void enter_view(Context& ctx, View v);
  void send_blame(Context& ctx, View v, const char* reason);
  bool status_ok(const MsgStatus& s, View entering, const Authenticator& auth) const;
  void make_first_proposal(Context& ctx);
  void propose_block(Context& ctx, const Block& b,
                     std::optional<std::vector<MsgStatus>> status);
  void retry_pending(Context& ctx);

  SmrParams params_;
  bool msf_ = false;

  View view_ = 0;
  Phase phase_ = Phase::Steady;
  // Certificates from views below this floor no longer move highest_cert_.
  View entry_floor_ = 0;
  VoteCert highest_cert_ = VoteCert::genesis_cert();
  BlockStore store_;
  Height committed_height_ = 0;

  std::set<Digest> proposals_forwarded_;  // by signed digest
  std::set<Digest> blocks_forwarded_;
  std::set<Digest> accepted_;  // proposals, by signed digest
  std::set<Key> accepted_blocks_;
  std::map<View, std::vector<std::shared_ptr<MsgSmrPropose>>> leader_props_;
  std::set<Digest> recorded_props_;  // by signed digest
  std::vector<std::shared_ptr<MsgSmrPropose>> pending_props_;
  std::vector<std::tuple<View, Digest, Height>> pending_commits_;

  std::set<View> equiv_views_;
  std::set<View> blame_cert_views_;
  std::set<View> blamed_views_;
  std::set<View> evidence_sent_;

  std::map<Key, std::map<ReplicaId, Signature>> votes_;
  std::set<Key> vote_quorum_done_;
  std::map<Key, std::map<ReplicaId, Signature>> acks_;
  std::set<Key> ack_ready_;
  std::map<Key, std::map<ReplicaId, MsgVote2>> vote2s_;
  std::set<Key> vote2_done_;
  std::map<View, std::map<ReplicaId, Signature>> blames_;
  std::map<View, std::map<ReplicaId, MsgBlame2>> blame2s_;
  std::set<View> blame2_done_;
  std::map<Key, VoteCert> certs_;
  std::map<Key, TimerId> vote_timers_;
  std::set<Key> timer_started_;

  std::map<View, std::map<ReplicaId, MsgStatus>> statuses_;
  std::set<View> status_deadline_passed_;
  bool pending_first_ = false;  // leader: first proposal of the view owes S
  Digest last_proposed_ = Block::genesis().id();
  Height last_height_ = 0;
  std::uint64_t batch_seq_ = 0;
  std::uint64_t committed_in_view_ = 0;
};

}  // namespace onedelta
