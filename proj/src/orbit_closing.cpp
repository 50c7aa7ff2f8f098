#include "chainrec/orbit_closing.hpp"

#include "chainrec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace chainrec {

namespace {

constexpr const char* kStage = "orbit_closing";
constexpr std::size_t kMaxShootingUnknowns = 4000;

std::size_t pow_size(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Wrapped one-step defects r_i = f(p_i) - p_{i+1}, stacked.
Vec shooting_residual(const System& sys, const std::vector<Vec>& p, bool periodic) {
  const int d = sys.dim();
  const std::size_t n = periodic ? p.size() : p.size() - 1;
  Vec r(static_cast<Eigen::Index>(n) * d);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& next = p[(i + 1) % p.size()];
    const Vec image = sys.step(sys.ambient().canonicalize(p[i]));
    r.segment(static_cast<Eigen::Index>(i) * d, d) = sys.ambient().displacement(next, image);
  }
  return r;
}

double max_block_norm(const Vec& r, int d) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.size(); i += d) worst = std::max(worst, r.segment(i, d).norm());
  return worst;
}

Mat shooting_jacobian(const System& sys, const std::vector<Vec>& p, bool periodic) {
  const int d = sys.dim();
  const std::size_t n = periodic ? p.size() : p.size() - 1;
  const auto rows = static_cast<Eigen::Index>(n) * d;
  const auto cols = static_cast<Eigen::Index>(p.size()) * d;
  Mat j = Mat::Zero(rows, cols);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i) * d;
    j.block(row, row, d, d) = sys.jacobian_at(sys.ambient().canonicalize(p[i]));
    const auto next = static_cast<Eigen::Index>((i + 1) % p.size()) * d;
    j.block(row, next, d, d) -= Mat::Identity(d, d);
  }
  return j;
}

void apply_step(std::vector<Vec>& p, const Vec& delta, double alpha, int d) {
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] += alpha * delta.segment(static_cast<Eigen::Index>(i) * d, d);
}

struct NewtonOutcome {
  std::vector<Vec> points;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton on the shooting equations. Periodic problems are square;
/// open segments use the minimum-norm correction.
template <typename Solve>
NewtonOutcome shooting_newton(const System& sys, std::vector<Vec> p, bool periodic,
                              const ClosingOptions& opt, Solve&& solve) {
  const int d = sys.dim();
  NewtonOutcome out;
  Vec r = shooting_residual(sys, p, periodic);
  double res = max_block_norm(r, d);
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (res < opt.tolerance) {
      out.converged = true;
      break;
    }
    const Vec delta = solve(shooting_jacobian(sys, p, periodic), r);
    double alpha = 1.0;
    std::vector<Vec> trial;
    double trial_res = std::numeric_limits<double>::infinity();
    Vec trial_r;
    for (int h = 0; h <= opt.max_halvings; ++h, alpha *= 0.5) {
      trial = p;
      apply_step(trial, delta, alpha, d);
      try {
        trial_r = shooting_residual(sys, trial, periodic);
        trial_res = max_block_norm(trial_r, d);
      } catch (const Error&) {
        trial_res = std::numeric_limits<double>::infinity();
      }
      if (trial_res < res) break;
    }
    if (!std::isfinite(trial_res)) break;
    p = std::move(trial);
    r = std::move(trial_r);
    res = trial_res;
    out.iterations = it + 1;
  }
  if (res < opt.tolerance) out.converged = true;
  out.points = std::move(p);
  out.residual = res;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

PseudoOrbit::PseudoOrbit(const System& sys, std::vector<Vec> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw Error(ErrorKind::config, kStage, "pseudo-orbit needs at least two points");
  for (auto& p : points_) p = sys.ambient().canonicalize(p);
  for (std::size_t i = 0; i + 1 < points_.size(); ++i)
    jump_ = std::max(jump_, sys.ambient().distance(sys.step(points_[i]), points_[i + 1]));
  periodic_ = points_.back() == points_.front();
}

PseudoOrbit PseudoOrbit::periodic(const System& sys, std::vector<Vec> cycle) {
  if (cycle.empty()) throw Error(ErrorKind::config, kStage, "empty cycle");
  cycle.push_back(cycle.front());
  for (auto& p : cycle) p = sys.ambient().canonicalize(p);
  cycle.back() = cycle.front();
  return PseudoOrbit(sys, std::move(cycle));
}

std::span<const Vec> PseudoOrbit::cycle() const {
  return {points_.data(), periodic_ ? points_.size() - 1 : points_.size()};
}

PseudoOrbit generate_pseudo_orbit(const System& sys, const Vec& start, std::size_t n, double eps,
                                  std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::config, kStage, "pseudo-orbit length must be >= 1");
  if (!(eps >= 0.0)) throw Error(ErrorKind::config, kStage, "epsilon must be >= 0");
  const Ambient& amb = sys.ambient();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int d = sys.dim();
  // Noise is drawn uniformly from the Euclidean ball, so both its sup-norm and
  // the Euclidean jump stay below eps.
  const double radius = eps * (1.0 - 1e-12);

  std::vector<Vec> pts;
  pts.reserve(n + 1);
  pts.push_back(amb.canonicalize(start));
  for (std::size_t i = 0; i < n; ++i) {
    Vec next = sys.step(pts.back());
    if (eps > 0.0) {
      Vec noise(d);
      do {
        for (int k = 0; k < d; ++k) noise[k] = unit(rng);
      } while (noise.squaredNorm() > 1.0);
      next += radius * noise;
      if (!amb.is_torus()) next = next.cwiseMax(amb.lower()).cwiseMin(amb.upper());
    }
    pts.push_back(amb.canonicalize(next));
  }
  return PseudoOrbit(sys, std::move(pts));
}

// ---------------------------------------------------------------------------

bool Cube::contains(const Vec& p, double tol) const {
  return ((p - center).cwiseAbs().array() <= radius + tol).all();
}

double max_closing_expansion(int dim) {
  const double levels = std::pow(3.0, dim);
  return std::pow(1.5, 1.0 / levels) - 1.0;
}

ClosingTriple select_closing_pair(std::span<const Return> returns, const Cube& c0, double expansion) {
  if (returns.size() < 2) throw Error(ErrorKind::config, kStage, "need at least the pair (y0, x0)");
  const auto d = c0.center.size();
  for (std::size_t i = 0; i < returns.size(); ++i) {
    if (returns[i].point.size() != d)
      throw Error(ErrorKind::config, kStage, "return dimension mismatch", std::to_string(i));
    if (i > 0 && returns[i].iterate <= returns[i - 1].iterate)
      throw Error(ErrorKind::config, kStage, "returns must have strictly increasing iterates");
  }
  if (!c0.contains(returns.front().point) || !c0.contains(returns.back().point))
    throw Error(ErrorKind::config, kStage, "y0 and x0 must lie in C0");
  if (!(c0.radius > 0.0)) throw Error(ErrorKind::config, kStage, "cube radius must be positive");
  const int L = static_cast<int>(pow_size(3, static_cast<int>(d)));
  if (!(expansion > 0.0) || std::pow(1.0 + expansion, L) > 1.5 * (1.0 + 1e-12))
    throw Error(ErrorKind::config, kStage, "expansion must satisfy (1+e)^(3^d) <= 3/2");

  ClosingTriple out;
  out.expansion = expansion;
  out.nested.push_back(c0);
  std::size_t y = 0, x = returns.size() - 1;
  Cube ck = c0;

  while (true) {
    std::vector<std::size_t> z{y};
    Cube cj = ck;
    for (int j = 0; j <= L; ++j) {
      // Condition 3 for T(j) = (x, z(j), cj): no intermediate iterate in (1+e) cj.
      const Cube grown = cj.scaled(1.0 + expansion);
      std::size_t hit = x;
      for (std::size_t m = z.back() + 1; m < x; ++m)
        if (grown.contains(returns[m].point)) {
          hit = m;
          break;
        }
      if (hit == x) {
        out.x = returns[x];
        out.y = returns[z.back()];
        out.cube = cj;
        out.inner_steps = j;
        // Exhaustive post-condition scan.
        bool ok = out.cube.contains(out.x.point) && out.cube.contains(out.y.point) &&
                  out.x.iterate > out.y.iterate;
        for (std::size_t m = z.back() + 1; m < x && ok; ++m)
          if (grown.contains(returns[m].point)) ok = false;
        if (!ok) throw Error(ErrorKind::internal, kStage, "closing triple violates its conditions");
        return out;
      }
      if (j == L) break;
      z.push_back(hit);
      cj = grown;
    }

    // z(0..L) all lie in (3/2) C_k, a union of 3^d cubes of half radius:
    // two of them share one, which becomes C_{k+1}.
    const double r = ck.radius;
    auto slot = [&](const Vec& p) {
      std::size_t key = 0;
      for (Eigen::Index i = 0; i < d; ++i) {
        const double t = (p[i] - (ck.center[i] - 1.5 * r)) / r;
        const auto s = std::clamp<long>(static_cast<long>(std::floor(t)), 0, 2);
        key = key * 3 + static_cast<std::size_t>(s);
      }
      return key;
    };
    std::size_t first = 0, second = 0;
    bool found = false;
    for (std::size_t b = 1; b < z.size() && !found; ++b)
      for (std::size_t a = 0; a < b && !found; ++a)
        if (slot(returns[z[a]].point) == slot(returns[z[b]].point)) {
          first = a;
          second = b;
          found = true;
        }
    if (!found) throw Error(ErrorKind::internal, kStage, "pigeonhole selection failed");

    std::size_t key = slot(returns[z[first]].point);
    Vec center(d);
    for (Eigen::Index i = d - 1; i >= 0; --i) {
      center[i] = ck.center[i] + (static_cast<double>(key % 3) - 1.0) * r;
      key /= 3;
    }
    ck = Cube{center, 0.5 * r};
    y = z[first];
    x = z[second];
    out.nested.push_back(ck);
  }
}

// ---------------------------------------------------------------------------

std::vector<Vec> reduce_to_minimal_period(const Ambient& ambient, std::vector<Vec> cycle, double tol) {
  const std::size_t tau = cycle.size();
  for (std::size_t q = 1; q < tau; ++q) {
    if (tau % q) continue;
    bool repeats = true;
    for (std::size_t i = 0; i < tau && repeats; ++i) repeats = ambient.distance(cycle[(i + q) % tau], cycle[i]) < tol;
    if (repeats) {
      cycle.resize(q);
      break;
    }
  }
  return cycle;
}

double periodic_residual(const System& sys, std::span<const Vec> cycle) {
  double worst = 0.0;
  for (std::size_t i = 0; i < cycle.size(); ++i)
    worst = std::max(worst, sys.ambient().distance(sys.step(cycle[i]), cycle[(i + 1) % cycle.size()]));
  return worst;
}

PeriodicOrbit close_to_periodic(const System& sys, const PseudoOrbit& po, const ClosingOptions& opt) {
  if (!po.is_periodic()) throw Error(ErrorKind::config, kStage, "pseudo-orbit is not periodic");
  if (!sys.capabilities().jacobian_available)
    throw Error(ErrorKind::config, kStage, "closing needs Jacobians", sys.name());
  const auto cyc = po.cycle();
  const std::size_t tau = cyc.size();
  const int d = sys.dim();
  if (tau * static_cast<std::size_t>(d) > kMaxShootingUnknowns)
    throw Error(ErrorKind::budget, kStage, "period too long for dense shooting");

  std::vector<Vec> seed(cyc.begin(), cyc.end());
  if (sys.ambient().is_torus()) {
    for (std::size_t i = 0; i < tau; ++i) {
      const Vec jump = sys.ambient().displacement(seed[(i + 1) % tau], sys.step(seed[i]));
      if (jump.cwiseAbs().maxCoeff() > 0.25)
        throw Error(ErrorKind::config, kStage, "ambiguous lift: jump exceeds 1/4 on some axis",
                    "step " + std::to_string(i));
    }
  }

  {
    // Degenerate iff the monodromy Df^tau has an eigenvalue equal to 1.
    Mat m = Mat::Identity(d, d);
    for (const Vec& p : seed) m = sys.jacobian_at(p) * m;
    if (!m.allFinite()) throw Error(ErrorKind::numerical, kStage, "monodromy matrix is not finite");
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Mat>(m, false).eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (std::abs(ev[i] - 1.0) < 1e-9)
        throw DegeneracyError(kStage, "Df^tau - I is singular (eigenvalue 1): non-hyperbolic closing");
  }

  NewtonOutcome res = shooting_newton(sys, seed, true, opt, [](const Mat& j, const Vec& r) -> Vec {
    const Vec delta = Eigen::PartialPivLU<Mat>(j).solve(-r);
    if (!delta.allFinite()) throw DegeneracyError(kStage, "shooting Jacobian became singular during Newton");
    return delta;
  });
  if (!res.converged)
    throw ConvergenceError(kStage, "Newton did not converge (last residual " +
                                       std::to_string(res.residual) + ")",
                           res.residual);

  std::vector<Vec> pts;
  pts.reserve(tau);
  for (const Vec& p : res.points) pts.push_back(sys.ambient().canonicalize(p));

  pts = reduce_to_minimal_period(sys.ambient(), std::move(pts), std::max(1e-9, 10.0 * opt.tolerance));

  PeriodicOrbit orbit;
  orbit.period = pts.size();
  orbit.points = std::move(pts);
  orbit.residual = periodic_residual(sys, orbit.points);
  orbit.iterations = res.iterations;
  orbit.hausdorff_to_pseudo = hausdorff_distance(sys.ambient(), cyc, orbit.points);
  return orbit;
}

// ---------------------------------------------------------------------------

ShadowReport weak_shadow_check(const System& sys, const PseudoOrbit& po, double delta,
                               std::size_t budget) {
  if (!(delta > 0.0)) throw Error(ErrorKind::config, kStage, "delta must be > 0");
  const Ambient& amb = sys.ambient();
  const std::size_t n = po.length();
  ShadowReport report;
  report.delta = delta;

  auto consider = [&](OrbitSegment seg) {
    ++report.candidates_tried;
    seg.hausdorff = hausdorff_distance(amb, seg.points, po.points());
    if (!report.best || seg.hausdorff < report.best->hausdorff) report.best = seg;
    if (seg.hausdorff < delta && !report.witness) {
      report.witness = seg;
      report.found = true;
    }
  };
  auto iterate_from = [&](const Vec& start, const char* origin) {
    OrbitSegment seg;
    seg.start = amb.canonicalize(start);
    seg.steps = n;
    seg.points.push_back(seg.start);
    for (std::size_t i = 0; i < n; ++i) seg.points.push_back(sys.step(seg.points.back()));
    seg.defect = 0.0;
    seg.origin = origin;
    return seg;
  };
  auto exhausted = [&] { return report.found || report.candidates_tried >= budget; };

  // 1. The orbit of z_0 itself.
  if (!exhausted()) consider(iterate_from(po.points().front(), "forward orbit of z0"));

  // 2. Minimum-norm shooting refinement of the whole chain.
  if (!exhausted() && sys.capabilities().jacobian_available &&
      po.points().size() * static_cast<std::size_t>(sys.dim()) <= kMaxShootingUnknowns) {
    try {
      ClosingOptions opt;
      opt.tolerance = 1e-12;
      opt.max_iterations = 50;
      NewtonOutcome res = shooting_newton(
          sys, po.points(), false, opt, [](const Mat& j, const Vec& r) -> Vec {
            const Mat jjt = j * j.transpose();
            return -j.transpose() * jjt.ldlt().solve(r);
          });
      if (res.converged) {
        OrbitSegment seg;
        for (const Vec& p : res.points) seg.points.push_back(amb.canonicalize(p));
        seg.start = seg.points.front();
        seg.steps = n;
        seg.defect = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          seg.defect = std::max(seg.defect, amb.distance(sys.step(seg.points[i]), seg.points[i + 1]));
        seg.origin = "shooting refinement";
        consider(std::move(seg));
      } else {
        ++report.candidates_tried;
      }
    } catch (const Error&) {
      ++report.candidates_tried;
    }
  }

  // 3. Periodic closing when the chain is closed.
  if (!exhausted() && po.is_periodic()) {
    try {
      const PeriodicOrbit orbit = close_to_periodic(sys, po);
      OrbitSegment seg;
      for (std::size_t i = 0; i <= n; ++i) seg.points.push_back(orbit.points[i % orbit.period]);
      seg.start = seg.points.front();
      seg.steps = n;
      seg.defect = orbit.residual;
      seg.origin = "periodic closing";
      consider(std::move(seg));
    } catch (const Error&) {
      ++report.candidates_tried;
    }
  }

  // 4. Grid-sampled starts with the remaining budget.
  if (!exhausted()) {
    const std::size_t left = budget - report.candidates_tried;
    const int d = sys.dim();
    auto per_axis = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(left), 1.0 / d)));
    per_axis = std::max<std::size_t>(per_axis, 1);
    const std::size_t total = pow_size(per_axis, d);
    for (std::size_t k = 0; k < total && !exhausted(); ++k) {
      Vec start(d);
      std::size_t rest = k;
      for (int i = d - 1; i >= 0; --i) {
        const double t = (static_cast<double>(rest % per_axis) + 0.5) / static_cast<double>(per_axis);
        start[i] = amb.lower()[i] + t * (amb.upper()[i] - amb.lower()[i]);
        rest /= per_axis;
      }
      try {
        consider(iterate_from(start, "grid sample"));
      } catch (const Error&) {
        ++report.candidates_tried;
      }
    }
  }

  if (report.found) {
    report.message = "orbit segment found (" + report.witness->origin + ")";
  } else {
    report.message = "not found within budget of " + std::to_string(budget) + " candidates";
  }
  return report;
}

}  // namespace chainrec
