// Randomized property suites shared by the unit tests and the acceptance
// runner. Each suite returns how many instances it ran and how many failed.
#pragma once

#include "chainrec/chain_graph.hpp"
#include "chainrec/cocycle.hpp"
#include "oracles.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

namespace props {

using namespace chainrec;

struct SuiteResult {
  std::string name;
  int instances = 0;
  int failures = 0;
  std::string first_failure;

  void record(bool ok, const std::string& what) {
    ++instances;
    if (ok) return;
    if (failures++ == 0) first_failure = what;
  }
  bool passed(int min_instances = 100) const { return failures == 0 && instances >= min_instances; }
};

inline Mat random_orthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = g(rng);
  return Eigen::HouseholderQR<Mat>(m).householderQ() * Mat::Identity(d, d);
}

/// A = Q1 diag(e^s) Q2 with |s| <= spread: invertible with condition <= e^{2 spread}.
inline Mat random_invertible(int d, std::mt19937_64& rng, double spread = 1.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Vec s(d);
  for (int i = 0; i < d; ++i) s[i] = std::exp(u(rng));
  return random_orthogonal(d, rng) * s.asDiagonal() * random_orthogonal(d, rng);
}

inline PeriodicCocycle random_cocycle(std::mt19937_64& rng) {
  const int d = 1 + static_cast<int>(rng() % 4);
  const std::size_t tau = 1 + rng() % 6;
  std::vector<Mat> mats;
  for (std::size_t i = 0; i < tau; ++i) mats.push_back(random_invertible(d, rng));
  return PeriodicCocycle(std::move(mats));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline SuiteResult spectrum_sum_rule(std::uint64_t seed, int count = 200) {
  SuiteResult r{"spectrum sum rule"};
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    const PeriodicCocycle c = random_cocycle(rng);
    const double lhs = exponents_periodic(c).sum();
    const double rhs = std::log(std::abs(c.period_product().determinant())) / static_cast<double>(c.period());
    r.record(std::abs(lhs - rhs) <= 1e-10, "instance " + std::to_string(k));
  }
  return r;
}

inline SuiteResult cyclic_invariance(std::uint64_t seed, int count = 200) {
  SuiteResult r{"cyclic invariance"};
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    const PeriodicCocycle c = random_cocycle(rng);
    const auto base = exponents_periodic(c).exponents;
    double worst = 0;
    for (std::size_t s = 1; s < c.period(); ++s) {
      // rotation built by hand so the library's rotated() is checked too
      std::vector<Mat> m;
      for (std::size_t i = 0; i < c.period(); ++i) m.push_back(c.matrices()[(i + s) % c.period()]);
      worst = std::max(worst, max_abs_diff(base, exponents_periodic(PeriodicCocycle(m)).exponents));
      worst = std::max(worst, max_abs_diff(base, exponents_periodic(c.rotated(s)).exponents));
    }
    r.record(worst <= 1e-10, "instance " + std::to_string(k));
  }
  return r;
}

inline SuiteResult inversion_antisymmetry(std::uint64_t seed, int count = 200) {
  SuiteResult r{"inversion anti-symmetry"};
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    const PeriodicCocycle c = random_cocycle(rng);
    std::vector<Mat> inv;
    for (std::size_t i = c.period(); i-- > 0;) inv.push_back(c.matrices()[i].inverse());
    auto expected = exponents_periodic(c).exponents;
    for (double& l : expected) l = -l;
    std::reverse(expected.begin(), expected.end());
    const double d1 = max_abs_diff(expected, exponents_periodic(PeriodicCocycle(inv)).exponents);
    const double d2 = max_abs_diff(expected, exponents_periodic(c.inverse()).exponents);
    r.record(d1 <= 1e-10 && d2 <= 1e-10, "instance " + std::to_string(k));
  }
  return r;
}

/// Cocycles A_i = P_{i+1} diag(s_i, u_i) P_i^{-1} with known invariant lines
/// E_i = P_i e_1 and F_i = P_i e_2. Whenever domination holds at some N it
/// must hold at 2N and 3N.
inline SuiteResult domination_blocking(std::uint64_t seed, int count = 120) {
  SuiteResult r{"domination under blocking"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int attempts = 0;
  while (r.instances < count && attempts < 50 * count) {
    ++attempts;
    const std::size_t tau = 1 + rng() % 5;
    std::vector<Mat> p(tau);
    for (Mat& m : p) m = random_invertible(2, rng, 0.7);
    std::vector<Mat> mats;
    SplittingSpec split;
    split.dim_e = split.dim_f = 1;
    for (std::size_t i = 0; i < tau; ++i) {
      Mat d = Mat::Zero(2, 2);
      d(0, 0) = std::exp(-2.0 * u(rng));
      d(1, 1) = std::exp(2.0 * u(rng) - 0.5);
      mats.push_back(p[(i + 1) % tau] * d * p[i].inverse());
      split.e.push_back(p[i].col(0).normalized());
      split.f.push_back(p[i].col(1).normalized());
    }
    const PeriodicCocycle c(mats);
    int first = 0;
    for (int n = 1; n <= 6 && first == 0; ++n)
      if (check_domination(c, split, n).holds) first = n;
    if (first == 0) continue;
    const bool ok = check_domination(c, split, 2 * first).holds && check_domination(c, split, 3 * first).holds;
    r.record(ok, "attempt " + std::to_string(attempts) + " N=" + std::to_string(first));
  }
  return r;
}

/// Random return list of 2..50 points in [0,1]^2 with the first and last
/// entries inside c0; most intermediate points cluster near c0 so the nested
/// recursion is exercised.
inline std::vector<Return> random_returns(std::mt19937_64& rng, const Cube& c0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 2 + static_cast<int>(rng() % 49);
  auto near = [&](double scale) {
    Vec p(2);
    for (int i = 0; i < 2; ++i) p[i] = c0.center[i] + scale * c0.radius * (2 * u(rng) - 1);
    return p;
  };
  std::vector<Return> out;
  std::int64_t it = 0;
  out.push_back({near(1.0), it});
  for (int k = 1; k < n - 1; ++k) {
    it += 1 + static_cast<std::int64_t>(rng() % 3);
    out.push_back({u(rng) < 0.7 ? near(1.6) : Vec{{u(rng), u(rng)}}, it});
  }
  out.push_back({near(1.0), it + 1});
  return out;
}

/// select_closing_pair output checked by the exhaustive scan of all returns.
inline SuiteResult closing_pair_scan(std::uint64_t seed, int count = 100) {
  SuiteResult r{"closing-pair exhaustive scan"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double e = max_closing_expansion(2);
  for (int k = 0; k < count; ++k) {
    const Cube c0{Vec{{0.2 + 0.6 * u(rng), 0.2 + 0.6 * u(rng)}}, 0.01 + 0.09 * u(rng)};
    const auto returns = random_returns(rng, c0);
    const ClosingTriple t = select_closing_pair(returns, c0, e);
    bool ok = oracle::closing_triple_valid(returns, t) && t.nested.size() <= returns.size();
    for (std::size_t j = 1; j < t.nested.size(); ++j) ok = ok && t.nested[j].radius == t.nested[j - 1].radius / 2;
    r.record(ok, "return set " + std::to_string(k) + " (" + std::to_string(returns.size()) + " returns)");
  }
  return r;
}

/// Pliss indices against a direct scan of block products over two padded
/// periods; cocycles whose period product is at most e^{-tau} must have a
/// nonempty Pliss set at N = 1.
inline SuiteResult pliss_rescan(std::uint64_t seed, int count = 150) {
  SuiteResult r{"Pliss indices rescan"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 1.2);
  for (int k = 0; k < count; ++k) {
    const std::size_t tau = 1 + rng() % 8;
    const int n = 1 + static_cast<int>(rng() % 3);
    std::vector<double> logs(tau);
    for (double& l : logs) l = u(rng);
    const bool contracting = k % 2 == 0;
    if (contracting) {
      double sum = 0;
      for (double l : logs) sum += l;
      const double shift = std::min(0.0, (-static_cast<double>(tau) - sum) / static_cast<double>(tau)) - 1e-9;
      for (double& l : logs) l += shift;
    }
    std::vector<Mat> mats;
    for (double l : logs) mats.push_back(Mat::Constant(1, 1, std::exp(l)));
    const PeriodicCocycle c(mats);
    const PlissReport rep = pliss_points(c, contracting ? 1 : n);
    const int nn = contracting ? 1 : n;
    const std::size_t padded = std::lcm(tau, static_cast<std::size_t>(nn));
    const std::size_t blocks = 2 * padded / static_cast<std::size_t>(nn);
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < tau; ++i) {
      double acc = 0;
      bool ok = true;
      for (std::size_t b = 0; b < blocks && ok; ++b) {
        double block = 0;
        for (int j = 0; j < nn; ++j) block += logs[(i + b * static_cast<std::size_t>(nn) + static_cast<std::size_t>(j)) % tau];
        acc += block;
        ok = acc <= -static_cast<double>(b + 1) + 1e-12;
      }
      if (ok) expected.push_back(i);
    }
    bool ok = rep.indices == expected &&
              rep.proportion == static_cast<double>(expected.size()) / static_cast<double>(tau);
    if (contracting) ok = ok && !rep.indices.empty();
    r.record(ok, "cocycle " + std::to_string(k) + " tau=" + std::to_string(tau) + " N=" + std::to_string(nn));
  }
  return r;
}

inline System random_system(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (rng() % 4) {
    case 0:
      return make_system("morse_gradient_t1", {{"steps_per_unit", 16}});
    case 1:
      return make_system("rotation", {{"angle", {u(rng), u(rng)}}});
    case 2:
      return make_system("cat_map");
    default: {
      std::ostringstream x, y;
      x.precision(17);
      y.precision(17);
      x << "x + " << 0.2 * u(rng) << "*sin(2*pi*y) + " << 0.1 * u(rng);
      y << "y + " << 0.2 * u(rng) << "*sin(2*pi*x)";
      return make_system("user_defined", {{"map", {x.str(), y.str()}}});
    }
  }
}

/// Recurrent boxes at eps1 are recurrent at every eps2 >= eps1.
inline SuiteResult epsilon_monotonicity(std::uint64_t seed, int count = 100) {
  SuiteResult r{"epsilon monotonicity of the recurrent set"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    const System sys = random_system(rng);
    const BoxGrid grid(sys.ambient(), 3 + static_cast<int>(rng() % 2));
    GraphOptions o1, o2;
    o1.epsilon = 0.1 * u(rng);
    o2.epsilon = o1.epsilon + 0.1 * u(rng);
    const TransitionGraph g1 = build_transition_graph(sys, grid, o1);
    const TransitionGraph g2 = build_transition_graph(sys, grid, o2);
    const auto r1 = chain_recurrence_classes(g1).recurrent_boxes();
    const auto r2 = chain_recurrence_classes(g2).recurrent_boxes();
    bool edges_ok = true;
    for (BoxId v = 0; v < g1.size(); ++v)
      for (BoxId w : g1.successors(v)) edges_ok = edges_ok && g2.has_edge(v, w);
    r.record(edges_ok && std::includes(r2.begin(), r2.end(), r1.begin(), r1.end()),
             sys.name() + " instance " + std::to_string(k));
  }
  return r;
}

inline TransitionGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes, double p) {
  const std::size_t n = 1 + rng() % max_nodes;
  const auto e = oracle::random_digraph(n, p, rng);
  return TransitionGraph::from_edges(n, e);
}

inline bool forward_invariant_scan(const TransitionGraph& g, const BoxSet& s) {
  for (BoxId v : s)
    for (BoxId w : g.successors(v))
      if (!s.contains(w)) return false;
  return true;
}

/// Filtrations through all recurrent classes, in shuffled selection order:
/// levels are forward invariant, strictly nested, and each difference
/// isolates exactly its selected class.
inline SuiteResult filtration_attracting(std::uint64_t seed, int count = 150) {
  SuiteResult r{"filtration attracting property"};
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    const TransitionGraph g = random_graph(rng, 40, 0.06);
    const ChainDecomposition dec = chain_recurrence_classes(g);
    std::vector<int> sel = dec.order.recurrent_ids();
    std::shuffle(sel.begin(), sel.end(), rng);
    const Filtration f = build_filtration(dec, g, sel);
    bool ok = f.levels.front().size() == g.size() && f.levels.size() == sel.size() + 1 &&
              (sel.empty() || f.levels.back().empty());
    for (std::size_t i = 0; ok && i < f.levels.size(); ++i) {
      ok = forward_invariant_scan(g, f.levels[i]);
      if (i + 1 < f.levels.size()) {
        const auto& outer = f.levels[i].ids();
        const auto& inner = f.levels[i + 1].ids();
        ok = ok && inner.size() < outer.size() && std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
        for (int c : sel) {
          const auto& boxes = dec.at(c).boxes;
          const bool in_diff = f.levels[i].contains(boxes.ids().front()) && !f.levels[i + 1].contains(boxes.ids().front());
          ok = ok && (in_diff == (c == f.selected[i]));
          if (c == f.selected[i])
            for (BoxId b : boxes) ok = ok && f.levels[i].contains(b) && !f.levels[i + 1].contains(b);
        }
      }
    }
    r.record(ok, "graph " + std::to_string(k));
  }
  return r;
}

/// Conley function: constant on classes, distinct across classes, strictly
/// decreasing along every edge between different classes.
inline SuiteResult conley_decrease(std::uint64_t seed, int count = 150) {
  SuiteResult r{"Conley function strict decrease"};
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    const TransitionGraph g = random_graph(rng, 48, 0.05);
    const ChainDecomposition dec = chain_recurrence_classes(g);
    const CompleteLyapunovFunction h = conley_function(dec, g);
    bool ok = true;
    for (BoxId u = 0; u < g.size(); ++u) {
      const auto cu = static_cast<std::size_t>(dec.class_of_box[u]);
      ok = ok && h.box_value[u] == h.class_value[cu];
      for (BoxId v : g.successors(u)) {
        const auto cv = static_cast<std::size_t>(dec.class_of_box[v]);
        ok = ok && (cu == cv ? h.box_value[u] == h.box_value[v] : h.box_value[v] < h.box_value[u]);
      }
    }
    std::set<Rational> distinct(h.class_value.begin(), h.class_value.end());
    ok = ok && distinct.size() == dec.classes.size();
    r.record(ok, "graph " + std::to_string(k));
  }
  return r;
}

/// Tarjan classes against the transitive-closure oracle.
inline SuiteResult scc_oracle(std::uint64_t seed, int count = 200, std::size_t max_nodes = 64) {
  SuiteResult r{"SCC oracle equivalence"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    const std::size_t n = 1 + rng() % max_nodes;
    const double p = 0.2 * u(rng) * u(rng) + 0.005;
    const auto e = oracle::random_digraph(n, p, rng);
    const TransitionGraph g = TransitionGraph::from_edges(n, e);
    const ChainDecomposition dec = chain_recurrence_classes(g);
    const oracle::BruteScc brute = oracle::brute_scc(n, e);
    bool ok = true;
    for (std::size_t v = 0; v < n; ++v) {
      const ChainClass& c = dec.at(dec.class_of_box[v]);
      ok = ok && c.boxes.ids() == std::vector<BoxId>(brute.members[v].begin(), brute.members[v].end());
      ok = ok && c.recurrent == brute.recurrent[v];
    }
    r.record(ok, "graph " + std::to_string(k) + " (n=" + std::to_string(n) + ")");
  }
  return r;
}

}  // namespace props
