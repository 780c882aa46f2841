#include "oodt/ot_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oodt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kReducedCostTol = 1e-9;
constexpr double kCertifyTol = 1e-7;

struct BasisArc {
  int source = 0;
  int sink = 0;
  double flow = 0.0;
};

// Spanning-tree basis over k1 source + k2 sink nodes. Node ids: sources
// 0..k1-1, sinks k1..k1+k2-1.
class SimplexState {
 public:
  SimplexState(std::vector<double> supply, std::vector<double> demand,
               const Eigen::MatrixXd& cost)
      : k1_(static_cast<int>(supply.size())),
        k2_(static_cast<int>(demand.size())),
        cost_(cost),
        supply_(std::move(supply)),
        demand_(std::move(demand)) {
    northwest_corner();
  }

  int run() {
    int pivots = 0;
    int degenerate_streak = 0;
    bool bland = false;
    const int streak_limit = 4 * (k1_ + k2_) + 16;
    for (;;) {
      compute_potentials();
      const int entering = find_entering(bland);
      if (entering < 0) break;
      const double moved = pivot(entering);
      ++pivots;
      if (moved <= 0.0) {
        if (++degenerate_streak > streak_limit) bland = true;
      } else {
        degenerate_streak = 0;
      }
    }
    return pivots;
  }

  TransportPlan extract() const {
    TransportPlan result;
    result.plan = Eigen::MatrixXd::Zero(k1_, k2_);
    for (const BasisArc& arc : basis_) {
      result.plan(arc.source, arc.sink) = arc.flow;
    }
    double total = 0.0;
    for (int i = 0; i < k1_; ++i) {
      for (int j = 0; j < k2_; ++j) {
        total += result.plan(i, j) * cost_(i, j);
      }
    }
    result.cost = total;
    result.source_potential =
        Eigen::Map<const Eigen::VectorXd>(u_.data(), k1_);
    result.sink_potential = Eigen::Map<const Eigen::VectorXd>(v_.data(), k2_);
    return result;
  }

 private:
  void northwest_corner() {
    std::vector<double> a = supply_;
    std::vector<double> b = demand_;
    basis_.reserve(k1_ + k2_ - 1);
    int i = 0;
    int j = 0;
    for (;;) {
      const double alloc = std::min(a[i], b[j]);
      basis_.push_back({i, j, alloc});
      a[i] -= alloc;
      b[j] -= alloc;
      if (i == k1_ - 1 && j == k2_ - 1) break;
      if (a[i] <= b[j] && i < k1_ - 1) {
        ++i;
      } else if (j < k2_ - 1) {
        ++j;
      } else {
        ++i;
      }
    }
  }

  void compute_potentials() {
    const int nodes = k1_ + k2_;
    adjacency_.assign(nodes, {});
    for (std::size_t a = 0; a < basis_.size(); ++a) {
      adjacency_[basis_[a].source].push_back(static_cast<int>(a));
      adjacency_[k1_ + basis_[a].sink].push_back(static_cast<int>(a));
    }
    u_.assign(k1_, 0.0);
    v_.assign(k2_, 0.0);
    std::vector<char> seen(nodes, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (int a : adjacency_[node]) {
        const BasisArc& arc = basis_[static_cast<std::size_t>(a)];
        const int other = node < k1_ ? k1_ + arc.sink : arc.source;
        if (seen[other]) continue;
        seen[other] = 1;
        if (node < k1_) {
          v_[arc.sink] = cost_(arc.source, arc.sink) - u_[arc.source];
        } else {
          u_[arc.source] = cost_(arc.source, arc.sink) - v_[arc.sink];
        }
        stack.push_back(other);
      }
    }
  }

  // Most negative reduced cost, ties broken by lowest flat index; Bland mode
  // takes the lowest-index negative arc outright (guaranteed termination).
  int find_entering(bool bland) const {
    double best = -kReducedCostTol;
    int best_index = -1;
    for (int i = 0; i < k1_; ++i) {
      for (int j = 0; j < k2_; ++j) {
        const double rc = cost_(i, j) - u_[i] - v_[j];
        if (rc < best) {
          best = rc;
          best_index = i * k2_ + j;
          if (bland) return best_index;
        }
      }
    }
    return best_index;
  }

  // Adds the entering arc, shifts flow around the unique tree cycle, drops
  // the limiting arc. Returns the amount of flow moved.
  double pivot(int entering) {
    const int ei = entering / k2_;
    const int ej = entering % k2_;
    const std::vector<int> path = tree_path(ei, k1_ + ej);
    // Path arcs from sink ej back toward source ei alternate -, +, -, ...
    // theta is the least flow on the minus arcs; ties on the leaving arc are
    // broken by lowest flat index for reproducible pivots.
    double theta = kInf;
    for (std::size_t pos = 0; pos < path.size(); pos += 2) {
      theta = std::min(theta, basis_[static_cast<std::size_t>(path[pos])].flow);
    }
    int leaving_pos = -1;
    std::int64_t leaving_index = std::numeric_limits<std::int64_t>::max();
    for (std::size_t pos = 0; pos < path.size(); pos += 2) {
      const BasisArc& arc = basis_[static_cast<std::size_t>(path[pos])];
      if (arc.flow == theta && arc_index(arc) < leaving_index) {
        leaving_index = arc_index(arc);
        leaving_pos = static_cast<int>(pos);
      }
    }
    for (std::size_t pos = 0; pos < path.size(); ++pos) {
      BasisArc& arc = basis_[static_cast<std::size_t>(path[pos])];
      arc.flow += (pos % 2 == 0) ? -theta : theta;
      if (arc.flow < 0.0) arc.flow = 0.0;
    }
    basis_[static_cast<std::size_t>(path[static_cast<std::size_t>(
        leaving_pos)])] = BasisArc{ei, ej, theta};
    return theta;
  }

  // Arc indices along the tree path from node `to` (a sink) back to node
  // `from` (a source); element 0 is the arc incident to `to`.
  std::vector<int> tree_path(int from_source, int to_sink) const {
    const int nodes = k1_ + k2_;
    std::vector<int> parent_arc(nodes, -1);
    std::vector<int> parent_node(nodes, -1);
    std::vector<char> seen(nodes, 0);
    std::vector<int> stack = {from_source};
    seen[from_source] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node == to_sink) break;
      for (int a : adjacency_[node]) {
        const BasisArc& arc = basis_[static_cast<std::size_t>(a)];
        const int other = node < k1_ ? k1_ + arc.sink : arc.source;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_arc[other] = a;
        parent_node[other] = node;
        stack.push_back(other);
      }
    }
    if (!seen[to_sink]) {
      throw std::runtime_error("exact_ot: basis lost tree connectivity");
    }
    std::vector<int> path;
    for (int node = to_sink; node != from_source; node = parent_node[node]) {
      path.push_back(parent_arc[node]);
    }
    return path;
  }

  std::int64_t arc_index(const BasisArc& arc) const {
    return static_cast<std::int64_t>(arc.source) * k2_ + arc.sink;
  }

  int k1_;
  int k2_;
  const Eigen::MatrixXd& cost_;
  std::vector<double> supply_;
  std::vector<double> demand_;
  std::vector<BasisArc> basis_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<double> u_;
  std::vector<double> v_;
};

void certify(const TransportPlan& plan, const std::vector<double>& supply,
             const std::vector<double>& demand, const Eigen::MatrixXd& cost) {
  const auto k1 = static_cast<int>(supply.size());
  const auto k2 = static_cast<int>(demand.size());
  for (int i = 0; i < k1; ++i) {
    const double row = plan.plan.row(i).sum();
    if (std::abs(row - supply[static_cast<std::size_t>(i)]) > 1e-9) {
      throw std::runtime_error("exact_ot: row marginal violated");
    }
  }
  for (int j = 0; j < k2; ++j) {
    const double col = plan.plan.col(j).sum();
    if (std::abs(col - demand[static_cast<std::size_t>(j)]) > 1e-9) {
      throw std::runtime_error("exact_ot: column marginal violated");
    }
  }
  for (int i = 0; i < k1; ++i) {
    for (int j = 0; j < k2; ++j) {
      const double rc =
          cost(i, j) - plan.source_potential(i) - plan.sink_potential(j);
      if (rc < -kCertifyTol) {
        throw std::runtime_error("exact_ot: dual feasibility violated");
      }
      if (plan.plan(i, j) > 1e-12 && std::abs(rc) > kCertifyTol) {
        throw std::runtime_error("exact_ot: complementary slackness violated");
      }
    }
  }
}

}  // namespace

TransportPlan exact_ot(const DiscretePmf& p, const DiscretePmf& q,
                       const Eigen::MatrixXd& cost) {
  const auto k1 = static_cast<Eigen::Index>(p.size());
  const auto k2 = static_cast<Eigen::Index>(q.size());
  if (cost.rows() != k1 || cost.cols() != k2) {
    throw std::invalid_argument("exact_ot: cost matrix shape mismatch");
  }
  if (k1 * k2 > (Eigen::Index{1} << 18)) {
    throw std::invalid_argument("exact_ot: instance exceeds 2^18 cells");
  }
  if (!cost.allFinite() || cost.minCoeff() < 0.0) {
    throw std::invalid_argument("exact_ot: cost must be finite, nonnegative");
  }
  // DiscretePmf guarantees unit mass within 1e-9; rescale so supply and
  // demand balance exactly.
  std::vector<double> supply = p.weights();
  std::vector<double> demand = q.weights();
  double sp = 0.0;
  double sq = 0.0;
  for (double w : supply) sp += w;
  for (double w : demand) sq += w;
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9) {
    throw std::invalid_argument("exact_ot: marginals do not sum to 1");
  }
  for (double& w : supply) w /= sp;
  for (double& w : demand) w /= sq;

  SimplexState state(supply, demand, cost);
  const int pivots = state.run();
  TransportPlan plan = state.extract();
  plan.pivots = pivots;
  certify(plan, supply, demand, cost);
  return plan;
}

double wasserstein_via_assignment(const std::vector<double>& a,
                                  const std::vector<double>& b, double order) {
  if (a.empty() || a.size() != b.size()) {
    throw std::invalid_argument(
        "wasserstein_via_assignment: inputs must be nonempty and equal size");
  }
  if (a.size() > 256) {
    throw std::invalid_argument(
        "wasserstein_via_assignment: instance exceeds 256 points");
  }
  if (!(order >= 1.0 && order <= 2.0)) {
    throw std::invalid_argument(
        "wasserstein_via_assignment: order must lie in [1, 2]");
  }
  const int n = static_cast<int>(a.size());
  Eigen::MatrixXd cost(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cost(i, j) = std::pow(std::abs(a[static_cast<std::size_t>(i)] -
                                     b[static_cast<std::size_t>(j)]),
                            order);
    }
  }
  // Jonker-Volgenant shortest augmenting paths with potentials.
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> min_slack(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < min_slack[static_cast<std::size_t>(j)]) {
          min_slack[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (min_slack[static_cast<std::size_t>(j)] < delta) {
          delta = min_slack[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] +=
              delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          min_slack[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    total += cost(match[static_cast<std::size_t>(j)] - 1, j - 1);
  }
  return std::pow(total / static_cast<double>(n), 1.0 / order);
}

}  // namespace oodt
