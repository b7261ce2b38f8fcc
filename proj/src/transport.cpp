#include "lcurtain/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lcurtain/error.hpp"

namespace lcurtain {

std::vector<double> cost_matrix_serial(const std::vector<WeightedPoint>& src,
                                       const std::vector<WeightedPoint>& dst) {
  const std::size_t n = src.size(), m = dst.size();
  std::vector<double> c(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      c[i * m + j] = std::hypot(src[i].x - dst[j].x, src[i].y - dst[j].y);
    }
  }
  return c;
}

std::vector<double> cost_matrix(const std::vector<WeightedPoint>& src, const std::vector<WeightedPoint>& dst) {
  const std::size_t m = dst.size();
  const auto n = static_cast<std::ptrdiff_t>(src.size());
  std::vector<double> c(src.size() * m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < m; ++j) {
      c[row * m + j] = std::hypot(src[row].x - dst[j].x, src[row].y - dst[j].y);
    }
  }
  return c;
}

namespace {

// Primal network simplex on the bipartite transportation graph plus a root
// node joined to every node by an expensive artificial arc. The spanning tree
// is stored as parent pointers; depths and potentials are rebuilt after each
// pivot. Leaving arcs follow the strongly feasible rule, which rules out
// cycling on degenerate pivots.
class NetworkSimplex {
 public:
  NetworkSimplex(const std::vector<double>& supply, const std::vector<double>& demand,
                 const std::vector<double>& cost)
      : n_(supply.size()), m_(demand.size()), cost_(cost) {
    root_ = n_ + m_;
    nodes_ = n_ + m_ + 1;
    real_arcs_ = n_ * m_;
    arcs_ = real_arcs_ + n_ + m_;
    double max_cost = 0.0;
    for (double c : cost_) max_cost = std::max(max_cost, std::abs(c));
    art_cost_ = (max_cost + 1.0) * static_cast<double>(nodes_);
    eps_ = 1e-12 * art_cost_;

    flow_.assign(arcs_, 0.0);
    parent_.assign(nodes_, kNone);
    pred_.assign(nodes_, kNone);
    up_.assign(nodes_, false);
    depth_.assign(nodes_, 0);
    pi_.assign(nodes_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      parent_[i] = root_;
      pred_[i] = real_arcs_ + i;
      up_[i] = true;
      flow_[real_arcs_ + i] = supply[i];
    }
    for (std::size_t j = 0; j < m_; ++j) {
      parent_[n_ + j] = root_;
      pred_[n_ + j] = real_arcs_ + n_ + j;
      up_[n_ + j] = false;
      flow_[real_arcs_ + n_ + j] = demand[j];
    }
    rebuild();
  }

  std::size_t run() {
    std::size_t pivots = 0;
    const std::size_t block = std::max<std::size_t>(
        10, static_cast<std::size_t>(std::sqrt(static_cast<double>(arcs_))));
    std::size_t next = 0;
    while (true) {
      std::size_t entering = kNone;
      double best = -eps_;
      std::size_t scanned = 0;
      while (scanned < arcs_) {
        const std::size_t stop = std::min(arcs_ - scanned, block);
        for (std::size_t k = 0; k < stop; ++k) {
          const std::size_t e = next;
          next = next + 1 == arcs_ ? 0 : next + 1;
          const double rc = reduced_cost(e);
          if (rc < best) {
            best = rc;
            entering = e;
          }
        }
        scanned += stop;
        if (entering != kNone) break;
      }
      if (entering == kNone) break;
      pivot(entering);
      ++pivots;
    }
    return pivots;
  }

  double flow(std::size_t e) const { return flow_[e]; }
  double artificial_flow() const {
    double s = 0.0;
    for (std::size_t e = real_arcs_; e < arcs_; ++e) s += flow_[e];
    return s;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t tail(std::size_t e) const {
    if (e < real_arcs_) return e / m_;
    if (e < real_arcs_ + n_) return e - real_arcs_;
    return root_;
  }
  std::size_t head(std::size_t e) const {
    if (e < real_arcs_) return n_ + e % m_;
    if (e < real_arcs_ + n_) return root_;
    return n_ + (e - real_arcs_ - n_);
  }
  double arc_cost(std::size_t e) const { return e < real_arcs_ ? cost_[e] : art_cost_; }
  double reduced_cost(std::size_t e) const { return arc_cost(e) + pi_[tail(e)] - pi_[head(e)]; }

  void rebuild() {
    // Children lists via counting sort on parents, then a breadth-first pass.
    child_start_.assign(nodes_ + 1, 0);
    for (std::size_t v = 0; v < nodes_; ++v)
      if (parent_[v] != kNone) ++child_start_[parent_[v] + 1];
    for (std::size_t v = 0; v < nodes_; ++v) child_start_[v + 1] += child_start_[v];
    children_.resize(nodes_);
    fill_.assign(child_start_.begin(), child_start_.end() - 1);
    for (std::size_t v = 0; v < nodes_; ++v)
      if (parent_[v] != kNone) children_[fill_[parent_[v]]++] = v;
    order_.clear();
    order_.push_back(root_);
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    for (std::size_t k = 0; k < order_.size(); ++k) {
      const std::size_t u = order_[k];
      for (std::size_t c = child_start_[u]; c < child_start_[u + 1]; ++c) {
        const std::size_t v = children_[c];
        depth_[v] = depth_[u] + 1;
        const double c_arc = arc_cost(pred_[v]);
        pi_[v] = up_[v] ? pi_[u] - c_arc : pi_[u] + c_arc;
        order_.push_back(v);
      }
    }
  }

  void pivot(std::size_t e) {
    const std::size_t i = tail(e), j = head(e);
    std::size_t a = i, b = j;
    while (a != b) {
      if (depth_[a] > depth_[b]) {
        a = parent_[a];
      } else if (depth_[b] > depth_[a]) {
        b = parent_[b];
      } else {
        a = parent_[a];
        b = parent_[b];
      }
    }
    const std::size_t join = a;

    // The cycle is oriented along e. Walking it from join, the tail side
    // comes first and the head side last; ties go to the last blocking arc.
    double delta = std::numeric_limits<double>::infinity();
    std::size_t leave = kNone;
    bool leave_on_tail_side = false;
    for (std::size_t v = i; v != join; v = parent_[v]) {
      if (up_[v] && flow_[pred_[v]] < delta) {
        delta = flow_[pred_[v]];
        leave = v;
        leave_on_tail_side = true;
      }
    }
    for (std::size_t v = j; v != join; v = parent_[v]) {
      if (!up_[v] && flow_[pred_[v]] <= delta) {
        delta = flow_[pred_[v]];
        leave = v;
        leave_on_tail_side = false;
      }
    }
    if (leave == kNone) throw Error(ErrorKind::Domain, "transport problem is unbounded");

    flow_[e] += delta;
    for (std::size_t v = i; v != join; v = parent_[v]) {
      double& f = flow_[pred_[v]];
      f = up_[v] ? f - delta : f + delta;
      if (f < 0.0) f = 0.0;
    }
    for (std::size_t v = j; v != join; v = parent_[v]) {
      double& f = flow_[pred_[v]];
      f = up_[v] ? f + delta : f - delta;
      if (f < 0.0) f = 0.0;
    }
    flow_[pred_[leave]] = 0.0;

    // Reverse the tree path from the entering endpoint up to the leaving node.
    std::size_t v = leave_on_tail_side ? i : j;
    std::size_t new_parent = leave_on_tail_side ? j : i;
    std::size_t new_arc = e;
    bool new_up = leave_on_tail_side;
    while (true) {
      const std::size_t old_parent = parent_[v];
      const std::size_t old_arc = pred_[v];
      const bool old_up = up_[v];
      parent_[v] = new_parent;
      pred_[v] = new_arc;
      up_[v] = new_up;
      if (v == leave) break;
      new_parent = v;
      new_arc = old_arc;
      new_up = !old_up;
      v = old_parent;
    }
    rebuild();
  }

  std::size_t n_, m_;
  const std::vector<double>& cost_;
  std::size_t root_ = 0, nodes_ = 0, real_arcs_ = 0, arcs_ = 0;
  double art_cost_ = 0.0;
  double eps_ = 0.0;
  std::vector<double> flow_;
  std::vector<std::size_t> parent_, pred_, depth_;
  std::vector<bool> up_;
  std::vector<double> pi_;
  std::vector<std::size_t> child_start_, children_, fill_, order_;
};

}  // namespace

TransportSolution solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                  const std::vector<double>& cost) {
  if (cost.size() != supply.size() * demand.size()) {
    throw Error(ErrorKind::Domain, "cost matrix shape does not match supply x demand");
  }
  TransportSolution sol;
  if (supply.empty() || demand.empty()) return sol;
  const double ms = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double md = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(ms - md) > 1e-9 * std::max(1.0, ms)) {
    std::ostringstream os;
    os << "unbalanced transport problem: supply " << ms << " vs demand " << md;
    throw Error(ErrorKind::Domain, os.str());
  }
  std::vector<double> d = demand;
  for (double& x : d) x *= ms / md;

  NetworkSimplex ns(supply, d, cost);
  sol.pivots = ns.run();
  const std::size_t m = demand.size();
  for (std::size_t e = 0; e < cost.size(); ++e) {
    const double f = ns.flow(e);
    if (f > 0.0) {
      sol.cost += f * cost[e];
      sol.plan.push_back({e / m, e % m, f});
    }
  }
  if (ns.artificial_flow() > 1e-9 * std::max(1.0, ms)) {
    throw Error(ErrorKind::Domain, "transport solver left mass on artificial arcs");
  }
  return sol;
}

double wasserstein1(const std::vector<WeightedPoint>& a, const std::vector<WeightedPoint>& b) {
  std::vector<double> sa, sb;
  for (const auto& p : a) sa.push_back(p.mass);
  for (const auto& p : b) sb.push_back(p.mass);
  return solve_transport(sa, sb, cost_matrix(a, b)).cost;
}

double wasserstein1(const JointLaw& a, const JointLaw& b) {
  std::vector<WeightedPoint> pa, pb;
  for (const JointAtom& j : a.atoms) pa.push_back({j.x, j.y, j.mass});
  for (const JointAtom& j : b.atoms) pb.push_back({j.x, j.y, j.mass});
  return wasserstein1(pa, pb);
}

}  // namespace lcurtain
