#include <gtest/gtest.h>

#include "semcommit/protocol.hpp"

using namespace semcommit;

namespace {

const ActionId alpha{1, 1}, beta{1, 2}, gamma_{2, 1};

std::shared_ptr<const ConstraintOracle> calendar_oracle() {
  return std::make_shared<const ConstraintOracle>(
      ConstraintOracle::calendar({{EdgeKind::not_after, "alpha", "beta"},
                                  {EdgeKind::enables, "alpha", "beta"},
                                  {EdgeKind::not_after, "beta", "gamma"},
                                  {EdgeKind::not_after, "gamma", "beta"}}));
}

std::vector<Weight> thirds() { return {Weight(1, 3), Weight(1, 3), Weight(1, 3)}; }

Multilog merged() {
  Multilog m;
  for (auto a : {alpha, beta, gamma_}) m.add_action(a);
  m.add_not_after(alpha, beta);
  m.add_enables(alpha, beta);
  m.add_not_after(beta, gamma_);
  m.add_not_after(gamma_, beta);
  return m;
}

Multilog with(Multilog m, std::initializer_list<ActionId> guaranteed) {
  for (auto a : guaranteed) m.add_enables(a, kInit);
  return m;
}

// Site 1 after everyone has seen all three actions.
SiteState informed_site(SiteId id) {
  SiteState st(id, thirds(), calendar_oracle());
  st.m = merged();
  st.known[alpha] = Action{alpha, "alpha", std::nullopt, {}};
  st.known[beta] = Action{beta, "beta", std::nullopt, {}};
  st.known[gamma_] = Action{gamma_, "gamma", std::nullopt, {}};
  VersionVector all;
  all.set(1, 2);
  all.set(2, 1);
  for (auto& vv : st.acks) vv = all;
  return st;
}

}  // namespace

TEST(Vote, ArithmeticAndTieBreak) {
  const auto a = parse_vote("2/3@3");
  const auto b = parse_vote("1/3@2");
  const auto z = parse_vote("0/1@0");
  ASSERT_TRUE(a && b && z);
  EXPECT_GT(*a, *b + *z);
  EXPECT_EQ(to_string(*b + *b), "2/3@2");
  // Equal weight: the higher site id wins.
  EXPECT_GT((Vote{Weight(1, 3), 3}), (Vote{Weight(1, 3), 2}));
  EXPECT_FALSE(parse_vote("1/3"));
  EXPECT_EQ(parse_weight("2/6"), Weight(1, 3));
  EXPECT_FALSE(parse_weight("1/0"));
}

TEST(ClientActions, CalendarRulesAddEdges) {
  SiteState st(1, thirds(), calendar_oracle());
  const auto a = new_action(st, "alpha");
  EXPECT_EQ(a.id, alpha);
  EXPECT_TRUE(client_actions_constraints(st, {a}));
  const auto b = new_action(st, "beta");
  EXPECT_EQ(b.id, beta);
  EXPECT_TRUE(client_actions_constraints(st, {b}));
  EXPECT_TRUE(st.m.has_not_after(alpha, beta));
  EXPECT_TRUE(st.m.has_enables(alpha, beta));
  EXPECT_THROW(client_actions_constraints(st, {a}), DuplicateAction);
}

TEST(ReceiveAndCompare, AddsAntagonismBetweenSites) {
  SiteState one(1, thirds(), calendar_oracle());
  const auto a = new_action(one, "alpha");
  client_actions_constraints(one, {a});
  const auto b = new_action(one, "beta");
  client_actions_constraints(one, {b});
  SiteState two(2, thirds(), calendar_oracle());
  const auto g = new_action(two, "gamma");
  client_actions_constraints(two, {g});
  EXPECT_TRUE(receive_and_compare(two, one.m, {a, b}));
  EXPECT_EQ(two.m, merged());
  EXPECT_FALSE(receive_and_compare(two, one.m, {a, b}));
}

TEST(Proposals, MergeKeepsNewest) {
  SiteState st(1, thirds(), calendar_oracle());
  Proposal p{with(merged(), {alpha}), 3, 2};
  EXPECT_TRUE(merge_proposals(st, {Proposal{}, p, Proposal{}}));
  Proposal older{with(merged(), {gamma_}), 2, 2};
  EXPECT_FALSE(merge_proposals(st, {Proposal{}, older, Proposal{}}));
  EXPECT_EQ(st.proposals[1].m, p.m);
}

TEST(Proposals, UpdateDropsDecidedActions) {
  auto st = informed_site(1);
  st.own().m = with(merged(), {alpha, beta});
  st.m = with(merged(), {alpha});
  update_proposal(st);
  EXPECT_EQ(st.own().m.actions(), (ActionSet{beta, gamma_}));
  EXPECT_TRUE(st.own().m.has_enables(beta, kInit));
}

TEST(Proposals, MakeProposalIsAdmissible) {
  auto st = informed_site(2);
  make_proposal(st, Conservative{});
  EXPECT_EQ(st.own().ts, 1u);
  EXPECT_EQ(st.own().proposer, 2u);
  const auto c = classify(union_of(st.m, st.own().m));
  EXPECT_EQ(c.decided, (ActionSet{kInit, alpha, beta, gamma_}));
}

TEST(Election, WorkedExampleTallies) {
  auto st = informed_site(1);
  const auto x = with(merged(), {beta});
  st.proposals[0] = {x, 3, 1};
  st.proposals[1] = {with(merged(), {alpha, gamma_}), 2, 2};
  st.proposals[2] = {x, 1, 3};
  EXPECT_TRUE(eligible(x, st));
  EXPECT_EQ(to_string(tally(x, st)), "2/3@3");
  EXPECT_EQ(to_string(cotally(x, st)), "0/1@0");
  const auto opp = opponents(x, st);
  ASSERT_EQ(opp.size(), 1u);
  EXPECT_EQ(opp[0].candidate.source, 2u);
  EXPECT_EQ(to_string(opp[0].tally), "1/3@2");

  // Site 2's {alpha} prefix is smaller, but sites 1 and 3 hold no
  // comparable prefix of it, so their weight is cotally and X wins first.
  Multilog only_alpha;
  only_alpha.add_action(alpha);
  only_alpha.add_enables(alpha, kInit);
  EXPECT_EQ(to_string(tally(only_alpha, st)), "1/3@2");
  EXPECT_EQ(to_string(cotally(only_alpha, st)), "2/3@3");
  const auto rec = elect(st);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->winner.x, x);
  EXPECT_EQ(to_string(rec->tally), "2/3@3");
  ASSERT_EQ(rec->opponents.size(), 1u);
  EXPECT_EQ(to_string(rec->opponents[0].tally), "1/3@2");
  EXPECT_EQ(to_string(rec->cotally), "0/1@0");
  EXPECT_EQ(to_string(rec->against), "1/3@2");
  EXPECT_TRUE(x.subset_of(st.m));
  EXPECT_EQ(dead(st.m), ActionSet{gamma_});
}

TEST(Election, SplitVoteWithSilentSiteElectsNothing) {
  auto st = informed_site(1);
  st.proposals[0] = {with(merged(), {beta}), 1, 1};
  st.proposals[1] = {with(merged(), {alpha, gamma_}), 1, 2};
  // Site 3 has proposed nothing covering these actions.
  const auto x = with(merged(), {beta});
  EXPECT_EQ(to_string(cotally(x, st)), "1/3@3");
  const auto rec = elect(st);
  // Only the common prefix {alpha} could win, and it is not offered alone
  // by site 1's proposal.
  if (rec) EXPECT_EQ(rec->winner.x.actions(), ActionSet{alpha});
  EXPECT_FALSE(guaranteed(st.m).contains(beta));
  EXPECT_FALSE(guaranteed(st.m).contains(gamma_));
}

TEST(Eligibility, NeedsEveryAck) {
  auto st = informed_site(1);
  const auto x = with(merged(), {beta});
  EXPECT_TRUE(eligible(x, st));
  st.acks[2] = VersionVector{};
  EXPECT_FALSE(eligible(x, st));
}

TEST(Eligibility, NeedsEveryPredecessor) {
  auto st = informed_site(1);
  Multilog only_beta;
  only_beta.add_action(beta);
  only_beta.add_enables(beta, kInit);
  EXPECT_FALSE(eligible(only_beta, st));
}

TEST(Candidates, SmallestFirst) {
  auto st = informed_site(1);
  st.proposals[0] = {with(merged(), {alpha, beta}), 1, 1};
  const auto cands = extract_candidates(st);
  ASSERT_FALSE(cands.empty());
  for (std::size_t i = 1; i < cands.size(); ++i)
    EXPECT_FALSE(canonical_less(cands[i].x, cands[i - 1].x));
  EXPECT_EQ(cands.front().x.actions(), ActionSet{alpha});
}
