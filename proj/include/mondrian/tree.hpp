#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mondrian/box.hpp"
#include "mondrian/rng.hpp"

namespace mondrian {

inline constexpr std::int32_t kNoNode = -1;
inline constexpr std::int32_t kNoDim = -1;

/**
 * One node of a guillotine partition, k-d-tree shaped. A node is either a
 * leaf (left < 0, cut fields meaningless) or internal (both children set,
 * cut_time/cut_dim/cut_loc valid).
 *
 * Invariants: cut_loc lies strictly inside the node box along cut_dim;
 * children's birth_time equals this node's cut_time; cut_time > birth_time.
 */
struct MondrianNode {
  BoundedBox box;
  double birth_time = 0.0;
  double cut_time = 0.0;
  std::int32_t cut_dim = kNoDim;
  double cut_loc = 0.0;
  std::int32_t left = kNoNode;
  std::int32_t right = kNoNode;

  bool is_leaf() const { return left == kNoNode; }
};

/// Guillotine partition of a box with all cut times <= lifetime, stored as a
/// node arena. nodes[root] is the whole box.
struct MondrianTree {
  std::int32_t root = kNoNode;
  std::vector<MondrianNode> nodes;
  double lifetime = 0.0;

  const MondrianNode& node(std::int32_t id) const { return nodes[static_cast<std::size_t>(id)]; }
  std::size_t leaf_count() const;
  std::size_t cut_count() const { return (nodes.size() - 1) / 2; }
};

struct FirstCut {
  double delta_t = 0.0;  // waiting time, Exp(LD) distributed
  std::int32_t dim = kNoDim;
  double loc = 0.0;
};

/// Nodes exceeding this budget abort sampling; the process is a.s.
/// non-exploding but pathological inputs must fail loudly.
inline constexpr std::size_t kMaxTreeNodes = 10'000'000;

/// Waiting time ~ Exp(rate); thin wrapper kept for symmetry with the other
/// sampling primitives.
double sample_exp(double rate, RngStream& rng);

/// First-cut proposal for a box: waiting time Exp(LD), dimension chosen
/// proportionally to side length (cumulative scan in ascending dimension
/// order), location uniform strictly inside the chosen side.
FirstCut sample_first_cut(const BoundedBox& box, RngStream& rng);

/// Sample a Mondrian partition of `box` up to `lifetime`. Iterative
/// work-queue implementation; tree depth is unbounded in principle.
MondrianTree sample_mondrian(const BoundedBox& box, double lifetime, RngStream& rng);

/// Marginal cut locations of a 1D Mondrian on [a, b]: Poisson count, then
/// i.i.d. uniform locations, returned sorted.
std::vector<double> cuts_1d(double a, double b, double lifetime, RngStream& rng);

/// Restriction of the partition to a sub-box: keeps cuts whose hyperplane
/// crosses the (shrinking) restricted box, splices out the rest. Birth and
/// cut times are preserved.
MondrianTree restrict_to_box(const MondrianTree& tree, const BoundedBox& sub);

/// Conditional extension of a sample on its box Phi to a larger box Theta;
/// the output is marginally a Mondrian on Theta with the same lifetime.
MondrianTree extend_conditional(const MondrianTree& tree, const BoundedBox& target,
                                RngStream& rng);

/// Drop all cuts born after `lifetime`; pruned internal nodes become leaves.
MondrianTree truncate_tree(const MondrianTree& tree, double lifetime);

/// Leaf containing `point` (must lie in the root box). Points exactly on a
/// cut hyperplane go to the <= child.
std::int32_t leaf_of(const MondrianTree& tree, std::span<const double> point);

/// Leaf ids in arena order.
std::vector<std::int32_t> leaf_ids(const MondrianTree& tree);

struct CutEvent {
  double time = 0.0;
  std::int32_t tree = 0;
  std::int32_t node = kNoNode;
};

/// All cuts of a forest, globally sorted by ascending birth time
/// (ties broken by tree then node id).
std::vector<CutEvent> cut_schedule(std::span<const MondrianTree> trees);

}  // namespace mondrian
