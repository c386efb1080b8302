#include "mondrian/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mondrian {
namespace {

void require_positive_ld(const BoundedBox& box) {
  if (!(linear_dimension(box) > 0.0))
    throw std::invalid_argument("degenerate box: linear dimension must be > 0");
}

/// Dimension index drawn with probability proportional to side length.
/// Cumulative scan in ascending index order; zero-length sides carry no mass.
std::int32_t sample_cut_dim(const BoundedBox& box, double ld, RngStream& rng) {
  const double u = rng.u01();
  double acc = 0.0;
  std::int32_t last_positive = kNoDim;
  for (std::size_t d = 0; d < box.dims(); ++d) {
    const double len = box.side(d);
    if (len <= 0.0) continue;
    last_positive = static_cast<std::int32_t>(d);
    acc += len / ld;
    if (u < acc) return last_positive;
  }
  // Rounding can leave acc slightly below 1; fall back to the last side
  // with positive length.
  return last_positive;
}

/// Where a freshly created node should be attached.
struct Slot {
  std::int32_t parent = kNoNode;  // kNoNode means the tree root
  bool left = false;
};

void attach(MondrianTree& tree, Slot slot, std::int32_t id) {
  if (slot.parent == kNoNode) {
    tree.root = id;
  } else if (slot.left) {
    tree.nodes[slot.parent].left = id;
  } else {
    tree.nodes[slot.parent].right = id;
  }
}

}  // namespace

std::size_t MondrianTree::leaf_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes)
    if (node.is_leaf()) ++n;
  return n;
}

double sample_exp(double rate, RngStream& rng) { return rng.exponential(rate); }

FirstCut sample_first_cut(const BoundedBox& box, RngStream& rng) {
  require_positive_ld(box);
  const double ld = linear_dimension(box);
  FirstCut cut;
  cut.delta_t = rng.exponential(ld);
  cut.dim = sample_cut_dim(box, ld, rng);
  cut.loc = rng.uniform_open(box.lower[cut.dim], box.upper[cut.dim]);
  return cut;
}

MondrianTree sample_mondrian(const BoundedBox& box, double lifetime, RngStream& rng) {
  require_positive_ld(box);
  if (!(lifetime >= 0.0) || !std::isfinite(lifetime))
    throw std::invalid_argument("sample_mondrian: lifetime must be finite and >= 0");

  MondrianTree tree;
  tree.lifetime = lifetime;
  tree.nodes.push_back(MondrianNode{box, 0.0, 0.0, kNoDim, 0.0, kNoNode, kNoNode});
  tree.root = 0;

  // LIFO work queue; left child pushed last so it is expanded first, matching
  // the recursive order.
  std::vector<std::int32_t> pending{0};
  while (!pending.empty()) {
    const std::int32_t id = pending.back();
    pending.pop_back();

    // Copy out: references into the arena are invalidated by push_back below.
    const BoundedBox node_box = tree.nodes[id].box;
    const double birth = tree.nodes[id].birth_time;
    const double ld = linear_dimension(node_box);
    if (ld <= 0.0) continue;  // point box, can never be cut

    const double wait = rng.exponential(ld);
    const double cut_time = birth + wait;
    if (cut_time > lifetime) continue;  // stays a leaf

    const std::int32_t dim = sample_cut_dim(node_box, ld, rng);
    const double loc = rng.uniform_open(node_box.lower[dim], node_box.upper[dim]);
    auto [left_box, right_box] = node_box.split(dim, loc);

    if (tree.nodes.size() + 2 > kMaxTreeNodes)
      throw std::runtime_error("sample_mondrian: node budget exceeded");

    const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
    const auto right_id = left_id + 1;
    tree.nodes.push_back(
        MondrianNode{std::move(left_box), cut_time, 0.0, kNoDim, 0.0, kNoNode, kNoNode});
    tree.nodes.push_back(
        MondrianNode{std::move(right_box), cut_time, 0.0, kNoDim, 0.0, kNoNode, kNoNode});

    MondrianNode& node = tree.nodes[id];
    node.cut_time = cut_time;
    node.cut_dim = dim;
    node.cut_loc = loc;
    node.left = left_id;
    node.right = right_id;

    pending.push_back(right_id);
    pending.push_back(left_id);
  }
  return tree;
}

std::vector<double> cuts_1d(double a, double b, double lifetime, RngStream& rng) {
  if (!(a < b)) throw std::invalid_argument("cuts_1d: requires a < b");
  if (!(lifetime >= 0.0)) throw std::invalid_argument("cuts_1d: lifetime must be >= 0");

  // Stage 1: N ~ Poisson(lifetime * (b - a)), realized as the number of
  // Exp(b - a) arrivals within the lifetime.
  const double rate = b - a;
  std::size_t count = 0;
  double t = rng.exponential(rate);
  while (t <= lifetime) {
    ++count;
    t += rng.exponential(rate);
  }
  // Stage 2: locations i.i.d. uniform, sorted.
  std::vector<double> locs(count);
  for (auto& x : locs) x = rng.uniform(a, b);
  std::sort(locs.begin(), locs.end());
  return locs;
}

namespace {

/// True when the hyperplane (dim, loc) crosses the interior of `box` in that
/// dimension. Boundary touches do not split.
bool cut_crosses(const BoundedBox& box, std::int32_t dim, double loc) {
  return loc > box.lower[dim] && loc < box.upper[dim];
}

}  // namespace

MondrianTree restrict_to_box(const MondrianTree& tree, const BoundedBox& sub) {
  if (!tree.node(tree.root).box.contains(sub))
    throw std::invalid_argument("restrict_to_box: sub-box not contained in root box");

  MondrianTree out;
  out.lifetime = tree.lifetime;
  out.nodes.reserve(tree.nodes.size());

  struct Item {
    std::int32_t src;  // node in the original tree
    BoundedBox box;    // restricted box for the output node
    double birth;
    Slot slot;
  };

  std::vector<Item> stack;
  stack.push_back(Item{tree.root, sub, 0.0, Slot{}});
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();

    // Splice through cuts that miss the restricted box.
    std::int32_t src = item.src;
    while (!tree.node(src).is_leaf() &&
           !cut_crosses(item.box, tree.node(src).cut_dim, tree.node(src).cut_loc)) {
      const MondrianNode& n = tree.node(src);
      // The restricted box lies entirely on one side; descend there.
      src = (item.box.lower[n.cut_dim] >= n.cut_loc) ? n.right : n.left;
    }

    const auto id = static_cast<std::int32_t>(out.nodes.size());
    const MondrianNode& n = tree.node(src);
    out.nodes.push_back(
        MondrianNode{item.box, item.birth, 0.0, kNoDim, 0.0, kNoNode, kNoNode});
    attach(out, item.slot, id);
    if (n.is_leaf()) continue;

    auto [left_box, right_box] = out.nodes[id].box.split(n.cut_dim, n.cut_loc);
    MondrianNode& dst = out.nodes[id];
    dst.cut_time = n.cut_time;
    dst.cut_dim = n.cut_dim;
    dst.cut_loc = n.cut_loc;
    stack.push_back(Item{n.right, std::move(right_box), n.cut_time, Slot{id, false}});
    stack.push_back(Item{n.left, std::move(left_box), n.cut_time, Slot{id, true}});
  }
  return out;
}

namespace {

/// Uniform location over the parts of `theta`'s linear dimension not covered
/// by `phi`: segments [theta.lo, phi.lo] and [phi.hi, theta.hi] per
/// dimension, scanned in ascending order. Returns (dim, loc) with loc
/// strictly inside theta's side and outside phi's interior.
std::pair<std::int32_t, double> sample_missing_location(const BoundedBox& theta,
                                                        const BoundedBox& phi,
                                                        double total, RngStream& rng) {
  for (;;) {
    const double target = rng.u01() * total;
    double acc = 0.0;
    std::int32_t dim = kNoDim;
    double lo = 0.0, hi = 0.0;
    for (std::size_t d = 0; d < theta.dims() && dim == kNoDim; ++d) {
      const double left_len = phi.lower[d] - theta.lower[d];
      if (left_len > 0.0) {
        acc += left_len;
        if (target < acc) {
          dim = static_cast<std::int32_t>(d);
          lo = theta.lower[d];
          hi = phi.lower[d];
          break;
        }
      }
      const double right_len = theta.upper[d] - phi.upper[d];
      if (right_len > 0.0) {
        acc += right_len;
        if (target < acc) {
          dim = static_cast<std::int32_t>(d);
          lo = phi.upper[d];
          hi = theta.upper[d];
          break;
        }
      }
    }
    if (dim == kNoDim) continue;  // rounding fell off the end; redraw
    const double loc = rng.uniform(lo, hi);
    if (loc > theta.lower[dim] && loc < theta.upper[dim] &&
        !(loc > phi.lower[dim] && loc < phi.upper[dim]))
      return {dim, loc};
  }
}

}  // namespace

MondrianTree extend_conditional(const MondrianTree& tree, const BoundedBox& target,
                                RngStream& rng) {
  const BoundedBox& phi_root = tree.node(tree.root).box;
  if (!target.contains(phi_root))
    throw std::invalid_argument("extend_conditional: target must contain the sample's box");
  const double lifetime = tree.lifetime;

  MondrianTree out;
  out.lifetime = lifetime;

  struct Item {
    BoundedBox theta;   // box of the output node
    BoundedBox phi;     // box of the conditioning restriction inside theta
    std::int32_t cond;  // node of the given sample; kNoNode when this branch
                        // is unconditioned
    double birth;
    Slot slot;
  };

  std::vector<Item> stack;
  stack.push_back(Item{target, phi_root, tree.root, 0.0, Slot{}});
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();

    const auto id = static_cast<std::int32_t>(out.nodes.size());
    if (out.nodes.size() >= kMaxTreeNodes)
      throw std::runtime_error("extend_conditional: node budget exceeded");
    out.nodes.push_back(
        MondrianNode{item.theta, item.birth, 0.0, kNoDim, 0.0, kNoNode, kNoNode});
    attach(out, item.slot, id);
    const BoundedBox& theta = out.nodes[id].box;

    if (item.cond == kNoNode) {
      // No conditioning in this branch: plain Mondrian started at item.birth.
      const double ld = linear_dimension(theta);
      if (ld <= 0.0) continue;
      const double cut_time = item.birth + rng.exponential(ld);
      if (cut_time > lifetime) continue;
      const std::int32_t dim = sample_cut_dim(theta, ld, rng);
      const double loc = rng.uniform_open(theta.lower[dim], theta.upper[dim]);
      auto [lb, rb] = theta.split(dim, loc);
      MondrianNode& dst = out.nodes[id];
      dst.cut_time = cut_time;
      dst.cut_dim = dim;
      dst.cut_loc = loc;
      stack.push_back(
          Item{std::move(rb), BoundedBox{}, kNoNode, cut_time, Slot{id, false}});
      stack.push_back(
          Item{std::move(lb), BoundedBox{}, kNoNode, cut_time, Slot{id, true}});
      continue;
    }

    const MondrianNode& cond = tree.node(item.cond);
    const double extra =
        std::max(0.0, linear_dimension(theta) - linear_dimension(item.phi));
    // Window in which an extra cut (one missing phi) can claim first place:
    // up to the restriction's first cut, or the lifetime when the
    // restriction is trivial.
    const double deadline = cond.is_leaf() ? lifetime : cond.cut_time;
    const double extra_time = extra > 0.0
                                  ? item.birth + rng.exponential(extra)
                                  : std::numeric_limits<double>::infinity();

    if (extra_time > deadline) {
      // Extra clock stayed silent: the restriction's first cut (if any)
      // extends through theta.
      if (cond.is_leaf()) continue;
      auto [theta_l, theta_r] = theta.split(cond.cut_dim, cond.cut_loc);
      auto [phi_l, phi_r] = item.phi.split(cond.cut_dim, cond.cut_loc);
      MondrianNode& dst = out.nodes[id];
      dst.cut_time = cond.cut_time;
      dst.cut_dim = cond.cut_dim;
      dst.cut_loc = cond.cut_loc;
      stack.push_back(Item{std::move(theta_r), std::move(phi_r), cond.right,
                           cond.cut_time, Slot{id, false}});
      stack.push_back(Item{std::move(theta_l), std::move(phi_l), cond.left,
                           cond.cut_time, Slot{id, true}});
    } else {
      // A cut missing phi appears first, at the truncated-exponential time.
      auto [dim, loc] = sample_missing_location(theta, item.phi, extra, rng);
      auto [theta_l, theta_r] = theta.split(dim, loc);
      MondrianNode& dst = out.nodes[id];
      dst.cut_time = extra_time;
      dst.cut_dim = dim;
      dst.cut_loc = loc;
      // phi lies entirely on one side; that side stays conditioned, the
      // other becomes a fresh unconditional Mondrian.
      const bool phi_on_left = item.phi.upper[dim] <= loc;
      if (phi_on_left) {
        stack.push_back(
            Item{std::move(theta_r), BoundedBox{}, kNoNode, extra_time, Slot{id, false}});
        stack.push_back(Item{std::move(theta_l), std::move(item.phi), item.cond,
                             extra_time, Slot{id, true}});
      } else {
        stack.push_back(Item{std::move(theta_r), std::move(item.phi), item.cond,
                             extra_time, Slot{id, false}});
        stack.push_back(
            Item{std::move(theta_l), BoundedBox{}, kNoNode, extra_time, Slot{id, true}});
      }
    }
  }
  return out;
}

MondrianTree truncate_tree(const MondrianTree& tree, double lifetime) {
  MondrianTree out;
  out.lifetime = lifetime;
  out.nodes.reserve(tree.nodes.size());

  struct Item {
    std::int32_t src;
    Slot slot;
  };
  std::vector<Item> stack{{tree.root, Slot{}}};
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    const MondrianNode& n = tree.node(item.src);
    const auto id = static_cast<std::int32_t>(out.nodes.size());
    out.nodes.push_back(
        MondrianNode{n.box, n.birth_time, 0.0, kNoDim, 0.0, kNoNode, kNoNode});
    attach(out, item.slot, id);
    if (n.is_leaf() || n.cut_time > lifetime) continue;
    MondrianNode& dst = out.nodes[id];
    dst.cut_time = n.cut_time;
    dst.cut_dim = n.cut_dim;
    dst.cut_loc = n.cut_loc;
    stack.push_back(Item{n.right, Slot{id, false}});
    stack.push_back(Item{n.left, Slot{id, true}});
  }
  return out;
}

std::int32_t leaf_of(const MondrianTree& tree, std::span<const double> point) {
  std::int32_t id = tree.root;
  while (!tree.node(id).is_leaf()) {
    const MondrianNode& n = tree.node(id);
    id = (point[n.cut_dim] <= n.cut_loc) ? n.left : n.right;
  }
  return id;
}

std::vector<std::int32_t> leaf_ids(const MondrianTree& tree) {
  std::vector<std::int32_t> ids;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    if (tree.nodes[i].is_leaf()) ids.push_back(static_cast<std::int32_t>(i));
  return ids;
}

std::vector<CutEvent> cut_schedule(std::span<const MondrianTree> trees) {
  std::vector<CutEvent> events;
  for (std::size_t m = 0; m < trees.size(); ++m)
    for (std::size_t i = 0; i < trees[m].nodes.size(); ++i)
      if (!trees[m].nodes[i].is_leaf())
        events.push_back(CutEvent{trees[m].nodes[i].cut_time, static_cast<std::int32_t>(m),
                                  static_cast<std::int32_t>(i)});
  std::sort(events.begin(), events.end(), [](const CutEvent& a, const CutEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.tree != b.tree) return a.tree < b.tree;
    return a.node < b.node;
  });
  return events;
}

}  // namespace mondrian
