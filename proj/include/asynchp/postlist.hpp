#pragma once

// The asynchronous post list: a singly linked list split into a high, a
// medium and a low region. Markers point at the first node, the current
// node, and the last node of the high and medium regions; a new post goes
// right after the tail of its own region, so each region stays FIFO and the
// head is always the next call to dispatch.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "asynchp/syntax.hpp"

namespace asynchp {

// A posted call: target method, the argument expression as written, the
// argument value captured when the post executed, and its priority.
struct AsynchNode {
  std::string method;
  ExprRef arg_expr;
  std::int64_t arg_value = 0;
  Priority priority = Priority::low;
  std::uint64_t seq = 0;
};

class EmptyList : public std::out_of_range {
 public:
  EmptyList() : std::out_of_range("remove from an empty post list") {}
};

class AsynchList {
 public:
  using Position = std::optional<std::size_t>;

  bool empty() const { return first_ == npos; }
  std::size_t size() const { return size_; }

  const AsynchNode& front() const {
    if (empty()) throw EmptyList();
    return slots_[first_].node;
  }

  // Links `n` in after the tail of its priority region. A low post goes
  // after the last node of the whole list.
  void insert(AsynchNode n) {
    const Priority p = n.priority;
    std::uint32_t anchor = npos;
    switch (p) {
      case Priority::high:
        anchor = high_tail_;
        break;
      case Priority::medium:
        anchor = medium_tail_ != npos ? medium_tail_ : high_tail_;
        break;
      case Priority::low:
        anchor = last_;
        break;
    }

    std::uint32_t slot = allocate(std::move(n));
    if (anchor == npos) {
      slots_[slot].next = first_;
      first_ = slot;
    } else {
      slots_[slot].next = slots_[anchor].next;
      slots_[anchor].next = slot;
    }
    if (slots_[slot].next == npos) last_ = slot;
    if (p == Priority::high) high_tail_ = slot;
    if (p == Priority::medium) medium_tail_ = slot;
    current_ = first_;
    ++size_;
  }

  AsynchNode pop_front() {
    if (empty()) throw EmptyList();
    const std::uint32_t slot = first_;
    first_ = slots_[slot].next;
    // The head is the first node of the leading non-empty region, so it can
    // only coincide with a region tail when that region held one node.
    if (high_tail_ == slot) high_tail_ = npos;
    else if (medium_tail_ == slot) medium_tail_ = npos;
    if (last_ == slot) last_ = npos;
    current_ = first_;
    --size_;
    AsynchNode out = std::move(slots_[slot].node);
    release(slot);
    return out;
  }

  std::vector<AsynchNode> to_sequence() const {
    std::vector<AsynchNode> out;
    out.reserve(size_);
    for (std::uint32_t s = first_; s != npos; s = slots_[s].next) out.push_back(slots_[s].node);
    return out;
  }

  // Marker positions, counted from the head.
  Position first_marker() const { return position_of(first_); }
  Position current_marker() const { return position_of(current_); }
  Position high_tail() const { return position_of(high_tail_); }
  Position medium_tail() const { return position_of(medium_tail_); }
  Position last_node() const { return position_of(last_); }

 private:
  static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

  struct Slot {
    AsynchNode node;
    std::uint32_t next = npos;
  };

  std::uint32_t allocate(AsynchNode n) {
    if (!free_.empty()) {
      std::uint32_t s = free_.back();
      free_.pop_back();
      slots_[s] = Slot{std::move(n), npos};
      return s;
    }
    slots_.push_back(Slot{std::move(n), npos});
    return static_cast<std::uint32_t>(slots_.size() - 1);
  }

  void release(std::uint32_t s) {
    slots_[s] = Slot{};
    free_.push_back(s);
  }

  Position position_of(std::uint32_t target) const {
    if (target == npos) return std::nullopt;
    std::size_t i = 0;
    for (std::uint32_t s = first_; s != npos; s = slots_[s].next, ++i)
      if (s == target) return i;
    return std::nullopt;  // dangling marker; reported by check_invariants
  }

  std::vector<Slot> slots_;
  std::vector<std::uint32_t> free_;
  std::uint32_t first_ = npos;
  std::uint32_t current_ = npos;
  std::uint32_t high_tail_ = npos;
  std::uint32_t medium_tail_ = npos;
  std::uint32_t last_ = npos;
  std::size_t size_ = 0;
};

// Pure forms of the two list operations: the argument list is taken by value
// and left untouched from the caller's point of view.
inline AsynchList add_A(AsynchNode n, Priority p, AsynchList li) {
  if (n.priority != p) throw std::invalid_argument("node priority does not match posting priority");
  li.insert(std::move(n));
  return li;
}

inline std::pair<AsynchNode, AsynchList> remove_A(AsynchList li) {
  AsynchNode head = li.pop_front();
  return {std::move(head), std::move(li)};
}

inline bool is_empty(const AsynchList& li) { return li.empty(); }

inline std::vector<AsynchNode> to_sequence(const AsynchList& li) { return li.to_sequence(); }

// Checks region partition, FIFO order inside each region and marker
// coherence. Returns one message per violation.
inline std::vector<std::string> check_invariants(const AsynchList& li) {
  std::vector<std::string> bad;
  const auto nodes = li.to_sequence();
  if (nodes.size() != li.size()) bad.push_back("size does not match node count");

  std::optional<std::size_t> last_high, last_medium;
  int prev_rank = 0;
  std::uint64_t prev_seq = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int r = rank(nodes[i].priority);
    if (r < prev_rank) bad.push_back("priority regions out of order at position " + std::to_string(i));
    if (r == prev_rank && nodes[i].seq <= prev_seq)
      bad.push_back("FIFO order broken at position " + std::to_string(i));
    prev_rank = r;
    prev_seq = nodes[i].seq;
    if (nodes[i].priority == Priority::high) last_high = i;
    if (nodes[i].priority == Priority::medium) last_medium = i;
  }

  const AsynchList::Position head =
      nodes.empty() ? AsynchList::Position{} : AsynchList::Position{0};
  const AsynchList::Position tail =
      nodes.empty() ? AsynchList::Position{} : AsynchList::Position{nodes.size() - 1};
  if (li.first_marker() != head) bad.push_back("first marker is not the head");
  if (li.current_marker() != li.first_marker()) bad.push_back("current marker differs from first");
  if (li.high_tail() != last_high) bad.push_back("high tail marker misplaced");
  if (li.medium_tail() != last_medium) bad.push_back("medium tail marker misplaced");
  if (li.last_node() != tail) bad.push_back("last node marker misplaced");
  return bad;
}

// Flat reference queue: dequeue order is the stable sort by (rank, seq).
class OracleQueue {
 public:
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  void insert(AsynchNode n) { entries_.push_back(std::move(n)); }

  AsynchNode pop_front() {
    if (entries_.empty()) throw EmptyList();
    auto it = std::min_element(entries_.begin(), entries_.end(), before);
    AsynchNode out = std::move(*it);
    entries_.erase(it);
    return out;
  }

  std::vector<AsynchNode> to_sequence() const {
    std::vector<AsynchNode> out = entries_;
    std::stable_sort(out.begin(), out.end(), before);
    return out;
  }

 private:
  static bool before(const AsynchNode& a, const AsynchNode& b) {
    if (rank(a.priority) != rank(b.priority)) return rank(a.priority) < rank(b.priority);
    return a.seq < b.seq;
  }

  std::vector<AsynchNode> entries_;
};

template <class Q>
concept PostQueue = requires(Q q, const Q cq, AsynchNode n) {
  q.insert(std::move(n));
  { q.pop_front() } -> std::same_as<AsynchNode>;
  { cq.empty() } -> std::convertible_to<bool>;
  { cq.size() } -> std::convertible_to<std::size_t>;
  { cq.to_sequence() } -> std::same_as<std::vector<AsynchNode>>;
};

static_assert(PostQueue<AsynchList>);
static_assert(PostQueue<OracleQueue>);

}  // namespace asynchp
