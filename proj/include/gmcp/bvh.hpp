// Static AABB tree for broadphase overlap queries and nearest-primitive
// searches. Construction and traversal are deterministic.
#pragma once

#include "gmcp/core.hpp"

#include <algorithm>
#include <numeric>

namespace gmcp {

class AabbTree {
 public:
  AabbTree() = default;

  explicit AabbTree(std::vector<Aabb> boxes) : boxes_(std::move(boxes)) {
    if (boxes_.empty()) return;
    items_.resize(boxes_.size());
    std::iota(items_.begin(), items_.end(), 0);
    nodes_.reserve(2 * boxes_.size());
    build(0, static_cast<int>(items_.size()));
  }

  bool empty() const { return nodes_.empty(); }

  // Calls f(item_id) for every stored box overlapping q, in deterministic order.
  template <class F>
  void for_each_overlap(const Aabb& q, F&& f) const {
    if (nodes_.empty()) return;
    int stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (!node.box.overlaps(q)) continue;
      if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i)
          if (boxes_[items_[i]].overlaps(q)) f(items_[i]);
      } else {
        stack[top++] = node.right;  // left is processed first (LIFO)
        stack[top++] = node.left;
      }
    }
  }

  // Nearest item to p under the exact squared-distance functor. Ties resolve
  // to the lowest item id, matching a brute-force scan.
  template <class SqDistF>
  std::pair<int, Real> nearest(const Vec3& p, SqDistF&& sq_dist) const {
    int best = -1;
    Real best_d2 = std::numeric_limits<Real>::max();
    if (nodes_.empty()) return {best, best_d2};
    visit_nearest(0, p, sq_dist, best, best_d2);
    return {best, best_d2};
  }

 private:
  struct Node {
    Aabb box;
    int left = -1, right = -1;  // children; leaf when left < 0
    int begin = 0, end = 0;     // item range for leaves
  };

  static constexpr int kLeafSize = 4;

  int build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    Aabb box;
    for (int i = begin; i < end; ++i) box.extend(boxes_[items_[i]]);
    nodes_[id].box = box;
    if (end - begin <= kLeafSize) {
      // Ascending ids inside each leaf keep query callback order deterministic.
      std::sort(items_.begin() + begin, items_.begin() + end);
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }
    int axis = 0;
    const Vec3 extent = box.hi - box.lo;
    if (extent.y() > extent.x()) axis = 1;
    if (extent.z() > extent[axis]) axis = 2;
    const int mid = (begin + end) / 2;
    std::nth_element(items_.begin() + begin, items_.begin() + mid, items_.begin() + end,
                     [&](int a, int b) {
                       const Real ca = boxes_[a].center()[axis], cb = boxes_[b].center()[axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  template <class SqDistF>
  void visit_nearest(int node_id, const Vec3& p, SqDistF& sq_dist, int& best,
                     Real& best_d2) const {
    const Node& node = nodes_[node_id];
    // Equal lower bounds must still be visited so index ties break correctly.
    if (node.box.sq_dist(p) > best_d2) return;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int item = items_[i];
        const Real d2 = sq_dist(item);
        if (d2 < best_d2 || (d2 == best_d2 && item < best)) {
          best_d2 = d2;
          best = item;
        }
      }
      return;
    }
    const Real dl = nodes_[node.left].box.sq_dist(p);
    const Real dr = nodes_[node.right].box.sq_dist(p);
    // Descend into the closer child first; prefer the left child on ties so
    // lower ids are examined before equal-distance alternatives.
    if (dl <= dr) {
      visit_nearest(node.left, p, sq_dist, best, best_d2);
      visit_nearest(node.right, p, sq_dist, best, best_d2);
    } else {
      visit_nearest(node.right, p, sq_dist, best, best_d2);
      visit_nearest(node.left, p, sq_dist, best, best_d2);
    }
  }

  std::vector<Aabb> boxes_;
  std::vector<int> items_;
  std::vector<Node> nodes_;
};

}  // namespace gmcp
