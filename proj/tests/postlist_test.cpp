#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "asynchp/postlist.hpp"

namespace asynchp {
namespace {

AsynchNode node(std::string name, Priority p, std::uint64_t seq) {
  return AsynchNode{std::move(name), make_int(0), static_cast<std::int64_t>(seq), p, seq};
}

std::vector<std::string> names(const std::vector<AsynchNode>& nodes) {
  std::vector<std::string> out;
  for (const auto& n : nodes) out.push_back(n.method);
  return out;
}

// Brute-force reference: stable sort by (rank, seq).
std::vector<std::string> sorted_names(std::vector<AsynchNode> nodes) {
  std::stable_sort(nodes.begin(), nodes.end(), [](const AsynchNode& a, const AsynchNode& b) {
    return std::pair(rank(a.priority), a.seq) < std::pair(rank(b.priority), b.seq);
  });
  return names(nodes);
}

AsynchList build(const std::vector<AsynchNode>& posts) {
  AsynchList li;
  for (const auto& n : posts) li = add_A(n, n.priority, li);
  return li;
}

TEST(AddA, SingletonHigh) {
  AsynchList li = add_A(node("n1", Priority::high, 1), Priority::high, AsynchList{});
  EXPECT_EQ(names(to_sequence(li)), std::vector<std::string>{"n1"});
  EXPECT_EQ(li.first_marker(), 0u);
  EXPECT_EQ(li.current_marker(), 0u);
  EXPECT_EQ(li.high_tail(), 0u);
  EXPECT_EQ(li.medium_tail(), std::nullopt);
  EXPECT_TRUE(check_invariants(li).empty());
}

TEST(AddA, HighGoesAfterHighTail) {
  AsynchList li = build({node("H1", Priority::high, 1), node("M1", Priority::medium, 2),
                         node("L1", Priority::low, 3)});
  AsynchList out = add_A(node("H2", Priority::high, 4), Priority::high, li);
  EXPECT_EQ(names(to_sequence(out)), (std::vector<std::string>{"H1", "H2", "M1", "L1"}));
  EXPECT_EQ(out.high_tail(), 1u);
  EXPECT_EQ(out.medium_tail(), 2u);
  // Oracle agrees.
  EXPECT_EQ(names(to_sequence(out)), sorted_names(to_sequence(out)));
  // The input list is unchanged.
  EXPECT_EQ(names(to_sequence(li)), (std::vector<std::string>{"H1", "M1", "L1"}));
}

TEST(AddA, MediumIntoEmptyMediumRegion) {
  AsynchList li = build({node("H1", Priority::high, 1), node("L1", Priority::low, 2)});
  AsynchList out = add_A(node("M1", Priority::medium, 3), Priority::medium, li);
  EXPECT_EQ(names(to_sequence(out)), (std::vector<std::string>{"H1", "M1", "L1"}));
  EXPECT_EQ(out.medium_tail(), 1u);
  EXPECT_TRUE(check_invariants(out).empty());
}

TEST(AddA, MediumAtFrontWhenNoHigh) {
  AsynchList li = build({node("L1", Priority::low, 1), node("M1", Priority::medium, 2)});
  EXPECT_EQ(names(to_sequence(li)), (std::vector<std::string>{"M1", "L1"}));
  EXPECT_EQ(li.medium_tail(), 0u);
  EXPECT_EQ(li.high_tail(), std::nullopt);
}

TEST(AddA, MismatchedPriorityIsRejected) {
  EXPECT_THROW(add_A(node("x", Priority::low, 1), Priority::high, AsynchList{}),
               std::invalid_argument);
}

TEST(RemoveA, TakesHead) {
  AsynchList li = build({node("n1", Priority::low, 1), node("n2", Priority::low, 2)});
  auto [head, rest] = remove_A(li);
  EXPECT_EQ(head.method, "n1");
  EXPECT_EQ(names(to_sequence(rest)), std::vector<std::string>{"n2"});
  EXPECT_EQ(li.size(), 2u);
}

TEST(RemoveA, SingletonIdentityForEveryPriority) {
  for (Priority p : {Priority::high, Priority::medium, Priority::low}) {
    auto [head, rest] = remove_A(add_A(node("n", p, 1), p, AsynchList{}));
    EXPECT_EQ(head.method, "n");
    EXPECT_EQ(head.priority, p);
    EXPECT_TRUE(is_empty(rest));
    EXPECT_TRUE(check_invariants(rest).empty());
    EXPECT_EQ(rest.first_marker(), std::nullopt);
    EXPECT_EQ(rest.high_tail(), std::nullopt);
    EXPECT_EQ(rest.medium_tail(), std::nullopt);
  }
}

TEST(RemoveA, EmptyListThrows) { EXPECT_THROW(remove_A(AsynchList{}), EmptyList); }

TEST(RemoveA, DrainFollowsPriorityThenPostOrder) {
  std::vector<AsynchNode> posts = {node("L1", Priority::low, 1), node("H1", Priority::high, 2),
                                   node("M1", Priority::medium, 3), node("H2", Priority::high, 4)};
  AsynchList li = build(posts);
  const std::vector<std::string> expected = {"H1", "H2", "M1", "L1"};
  ASSERT_EQ(sorted_names(posts), expected);
  EXPECT_EQ(names(to_sequence(li)), expected);
  std::vector<std::string> drained;
  while (!is_empty(li)) {
    auto [n, rest] = remove_A(std::move(li));
    drained.push_back(n.method);
    li = std::move(rest);
    EXPECT_TRUE(check_invariants(li).empty());
  }
  EXPECT_EQ(drained, expected);
}

TEST(RemoveA, RegionTailResetWhenLastHighLeaves) {
  AsynchList li = build({node("H1", Priority::high, 1), node("M1", Priority::medium, 2),
                         node("M2", Priority::medium, 3)});
  li.pop_front();
  EXPECT_EQ(li.high_tail(), std::nullopt);
  EXPECT_EQ(li.medium_tail(), 1u);
  li.pop_front();
  EXPECT_EQ(li.medium_tail(), 0u);
  // A high post now lands in front of the remaining medium node.
  li.insert(node("H2", Priority::high, 4));
  EXPECT_EQ(names(to_sequence(li)), (std::vector<std::string>{"H2", "M2"}));
  EXPECT_TRUE(check_invariants(li).empty());
}

TEST(Basics, EmptyList) {
  AsynchList li;
  EXPECT_TRUE(is_empty(li));
  EXPECT_TRUE(to_sequence(li).empty());
  EXPECT_TRUE(check_invariants(li).empty());
}

// Random interleavings of posts and removals, checked after every single
// operation against the brute-force reference.
TEST(Property, MatchesStableSortUnderRandomOperations) {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 2000; ++round) {
    AsynchList li;
    std::vector<AsynchNode> reference;
    std::uint64_t seq = 0;
    int ops = static_cast<int>(rng() % 100) + 1;
    for (int k = 0; k < ops; ++k) {
      if (reference.empty() || rng() % 3 != 0) {
        auto p = static_cast<Priority>(rng() % 3 + 1);
        ++seq;
        auto n = node("n" + std::to_string(seq), p, seq);
        li = add_A(n, p, std::move(li));
        reference.push_back(n);
      } else {
        auto [head, rest] = remove_A(std::move(li));
        li = std::move(rest);
        auto order = sorted_names(reference);
        ASSERT_EQ(head.method, order.front());
        reference.erase(std::find_if(reference.begin(), reference.end(),
                                     [&](const AsynchNode& x) { return x.method == head.method; }));
      }
      ASSERT_TRUE(check_invariants(li).empty());
      ASSERT_EQ(names(to_sequence(li)), sorted_names(reference));
    }
  }
}

TEST(Oracle, DequeuesByRankThenSeq) {
  OracleQueue q;
  for (const auto& n : {node("L1", Priority::low, 1), node("H1", Priority::high, 2),
                        node("M1", Priority::medium, 3), node("H2", Priority::high, 4)})
    q.insert(n);
  EXPECT_EQ(names(q.to_sequence()), (std::vector<std::string>{"H1", "H2", "M1", "L1"}));
  EXPECT_EQ(q.pop_front().method, "H1");
  EXPECT_EQ(q.pop_front().method, "H2");
  EXPECT_EQ(q.pop_front().method, "M1");
  EXPECT_EQ(q.pop_front().method, "L1");
  EXPECT_THROW(q.pop_front(), EmptyList);
}

}  // namespace
}  // namespace asynchp
