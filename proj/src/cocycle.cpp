#include "chainrec/cocycle.hpp"

#include "chainrec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace chainrec {

namespace {

constexpr const char* kStage = "cocycle";
constexpr double kInvarianceTol = 1e-8;

Mat thin_q(const Mat& m) {
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

double projector_gap(const Mat& a, const Mat& b) {
  return (a * a.transpose() - b * b.transpose()).norm();
}

Mat generic_frame(int d, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Mat m(d, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < d; ++i) m(i, j) = g(rng);
  return thin_q(m);
}

double sigma_min(const Mat& m) {
  return Eigen::JacobiSVD<Mat>(m).singularValues().minCoeff();
}

double sigma_max(const Mat& m) {
  return Eigen::JacobiSVD<Mat>(m).singularValues().maxCoeff();
}

/// Log operator norms of all N-blocks starting at each fiber.
std::vector<double> block_log_norms(const PeriodicCocycle& c, int n) {
  std::vector<double> out(c.period());
  for (std::size_t i = 0; i < c.period(); ++i) out[i] = std::log(operator_norm(c.product(i, n)));
  return out;
}

bool all_real(const std::vector<std::complex<double>>& ev) {
  return std::all_of(ev.begin(), ev.end(), [](const auto& s) {
    return std::abs(s.imag()) <= 1e-12 * std::max(1.0, std::abs(s));
  });
}

void require_same_shape(const PeriodicCocycle& a, const PeriodicCocycle& b) {
  if (a.period() != b.period() || a.dim() != b.dim())
    throw Error(ErrorKind::config, kStage, "cocycles differ in period or dimension");
}

}  // namespace

double operator_norm(const Mat& m) { return sigma_max(m); }

PeriodicCocycle::PeriodicCocycle(std::vector<Mat> mats) : mats_(std::move(mats)) {
  if (mats_.empty()) throw Error(ErrorKind::config, kStage, "period must be >= 1");
  const auto d = mats_.front().rows();
  if (d < 1) throw Error(ErrorKind::config, kStage, "empty matrices");
  for (std::size_t i = 0; i < mats_.size(); ++i) {
    const Mat& a = mats_[i];
    if (a.rows() != d || a.cols() != d)
      throw Error(ErrorKind::config, kStage, "matrices must be square of one size", "A_" + std::to_string(i));
    if (!a.allFinite())
      throw Error(ErrorKind::numerical, kStage, "non-finite matrix", "A_" + std::to_string(i));
    const auto sv = Eigen::JacobiSVD<Mat>(a).singularValues();
    const double inv = 1.0 / sv.minCoeff();
    if (!std::isfinite(inv))
      throw Error(ErrorKind::numerical, kStage, "singular matrix", "A_" + std::to_string(i));
    bound_ = std::max({bound_, sv.maxCoeff(), inv});
  }
}

Mat PeriodicCocycle::product(std::size_t start, std::size_t len) const {
  Mat p = Mat::Identity(dim(), dim());
  for (std::size_t j = 0; j < len; ++j) p = at(start + j) * p;
  return p;
}

PeriodicCocycle PeriodicCocycle::rotated(std::size_t k) const {
  std::vector<Mat> m;
  m.reserve(period());
  for (std::size_t i = 0; i < period(); ++i) m.push_back(at(k + i));
  return PeriodicCocycle(std::move(m));
}

PeriodicCocycle PeriodicCocycle::inverse() const {
  std::vector<Mat> m;
  m.reserve(period());
  for (std::size_t i = period(); i-- > 0;) m.push_back(mats_[i].inverse());
  return PeriodicCocycle(std::move(m));
}

// ---------------------------------------------------------------------------

SplittingSpec SplittingSpec::constant(const Mat& e_basis, const Mat& f_basis, std::size_t period) {
  if (e_basis.rows() != f_basis.rows() || e_basis.cols() + f_basis.cols() != e_basis.rows())
    throw Error(ErrorKind::config, kStage, "bundle dimensions are not complementary");
  SplittingSpec s;
  s.dim_e = static_cast<int>(e_basis.cols());
  s.dim_f = static_cast<int>(f_basis.cols());
  s.e.assign(period, thin_q(e_basis));
  s.f.assign(period, thin_q(f_basis));
  return s;
}

double invariance_residual(const PeriodicCocycle& c, const SplittingSpec& s) {
  if (s.e.size() != c.period() || s.f.size() != c.period())
    throw Error(ErrorKind::config, kStage, "splitting period does not match the cocycle");
  double worst = 0.0;
  for (std::size_t i = 0; i < c.period(); ++i) {
    const std::size_t j = (i + 1) % c.period();
    const double scale = operator_norm(c.at(i));
    for (const auto* bundle : {&s.e, &s.f}) {
      const Mat& q = (*bundle)[i];
      const Mat& qn = (*bundle)[j];
      if (q.cols() == 0) continue;
      const Mat img = c.at(i) * q;
      worst = std::max(worst, (img - qn * (qn.transpose() * img)).norm() / scale);
    }
  }
  return worst;
}

SplittingSpec eigen_splitting(const PeriodicCocycle& c, int dim_e) {
  const int d = c.dim();
  if (dim_e <= 0 || dim_e >= d) throw Error(ErrorKind::config, kStage, "dim_e must lie in (0, d)");
  const LyapunovSpectrum spec = exponents_periodic(c);
  const double gap = spec.exponents[static_cast<std::size_t>(dim_e)] -
                     spec.exponents[static_cast<std::size_t>(dim_e) - 1];
  if (!(gap > 1e-9)) throw DegeneracyError(kStage, "no exponent gap at the requested dimension");
  const std::size_t tau = c.period();
  const double per_sweep = gap * static_cast<double>(tau);
  const auto max_sweeps = static_cast<std::size_t>(std::min(2e5, std::ceil(40.0 / per_sweep) + 10.0));

  // Forward iteration converges to the strong bundle F; backward iteration
  // (through the inverses) to the weak bundle E.
  auto converge = [&](int k, bool forward) {
    Mat q = generic_frame(d, k, forward ? 0x5eedULL : 0xbeefULL);
    std::vector<Mat> fibers(tau);
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
      const Mat start = q;
      if (forward) {
        for (std::size_t i = 0; i < tau; ++i) {
          fibers[i] = q;
          q = thin_q(c.at(i) * q);
        }
      } else {
        for (std::size_t i = tau; i-- > 0;) {
          q = thin_q(c.at(i).inverse() * q);
          fibers[i] = q;
        }
      }
      if (sweep > 0 && projector_gap(start, q) < 1e-14) return fibers;
    }
    throw DegeneracyError(kStage, "invariant bundle iteration did not settle");
  };

  SplittingSpec s;
  s.dim_e = dim_e;
  s.dim_f = d - dim_e;
  s.f = converge(s.dim_f, true);
  s.e = converge(s.dim_e, false);
  return s;
}

std::optional<SplittingSpec> stable_unstable_splitting(const PeriodicCocycle& c, double tol) {
  const LyapunovSpectrum spec = exponents_periodic(c);
  int stable = 0;
  for (double l : spec.exponents) {
    if (std::abs(l) < tol) return std::nullopt;
    if (l < 0) ++stable;
  }
  if (stable == 0 || stable == c.dim()) return std::nullopt;
  return eigen_splitting(c, stable);
}

PeriodicCocycle restrict_to(const PeriodicCocycle& c, const std::vector<Mat>& bundle) {
  if (bundle.size() != c.period()) throw Error(ErrorKind::config, kStage, "bundle period mismatch");
  std::vector<Mat> m;
  m.reserve(c.period());
  for (std::size_t i = 0; i < c.period(); ++i)
    m.push_back(bundle[(i + 1) % c.period()].transpose() * c.at(i) * bundle[i]);
  return PeriodicCocycle(std::move(m));
}

PeriodicCocycle cocycle_from_orbit(const System& sys, const PeriodicOrbit& orbit) {
  if (!sys.capabilities().jacobian_available)
    throw Error(ErrorKind::config, kStage, "system has no Jacobian", sys.name());
  if (orbit.points.empty()) throw Error(ErrorKind::config, kStage, "empty orbit");
  std::vector<Mat> m;
  m.reserve(orbit.points.size());
  for (const Vec& p : orbit.points) m.push_back(sys.jacobian_at(p));
  return PeriodicCocycle(std::move(m));
}

// ---------------------------------------------------------------------------

double LyapunovSpectrum::sum() const { return std::accumulate(exponents.begin(), exponents.end(), 0.0); }

LyapunovSpectrum exponents_periodic(const PeriodicCocycle& c) {
  const Mat p = c.period_product();
  if (!p.allFinite()) throw Error(ErrorKind::numerical, kStage, "period product is not finite");
  Eigen::EigenSolver<Mat> es(p, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical, kStage, "eigenvalue solver failed");
  const auto tau = static_cast<double>(c.period());

  std::vector<std::pair<double, std::complex<double>>> rows;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> s = es.eigenvalues()[i];
    rows.emplace_back(std::log(std::abs(s)) / tau, s);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return std::arg(a.second) < std::arg(b.second);
  });
  LyapunovSpectrum out;
  out.source = SpectrumSource::exact_periodic;
  out.iterations = c.period();
  for (const auto& [l, s] : rows) {
    out.exponents.push_back(l);
    out.eigenvalues.push_back(s);
  }
  return out;
}

LyapunovSpectrum lyapunov_qr(const System& sys, const Vec& start, std::size_t n, std::size_t burn_in) {
  if (n == 0 || n < 10 * burn_in) throw Error(ErrorKind::config, kStage, "need n >= 10 * burn_in and n >= 1");
  if (!sys.capabilities().jacobian_available)
    throw Error(ErrorKind::config, kStage, "system has no Jacobian", sys.name());
  const int d = sys.dim();
  Vec x = sys.ambient().canonicalize(start);
  Mat q = Mat::Identity(d, d);
  Vec sums = Vec::Zero(d);
  Vec half = Vec::Zero(d);
  const std::size_t mid = n / 2;

  for (std::size_t k = 0; k < burn_in + n; ++k) {
    const Mat j = sys.jacobian_at(x);
    if (!j.allFinite())
      throw Error(ErrorKind::numerical, kStage, "non-finite Jacobian", "step " + std::to_string(k));
    Eigen::HouseholderQR<Mat> qr(j * q);
    q = qr.householderQ();
    if (k >= burn_in) {
      const Mat& r = qr.matrixQR();
      for (int i = 0; i < d; ++i) sums[i] += std::log(std::abs(r(i, i)));
      if (k + 1 - burn_in == mid) half = sums / static_cast<double>(mid);
    }
    x = sys.step(x);
  }

  const Vec est = sums / static_cast<double>(n);
  LyapunovSpectrum out;
  out.source = SpectrumSource::qr_estimate;
  out.iterations = n;
  out.drift = mid > 0 ? (est - half).cwiseAbs().maxCoeff() : 0.0;
  out.exponents.assign(est.data(), est.data() + d);
  std::sort(out.exponents.begin(), out.exponents.end());
  return out;
}

// ---------------------------------------------------------------------------

Verdict check_contraction_at_period(const PeriodicCocycle& c, int n, double rate) {
  const std::size_t tau = c.period();
  if (n < 1 || static_cast<std::size_t>(n) > tau) throw Error(ErrorKind::config, kStage, "need 1 <= N <= tau");
  if (!(rate > 1.0)) throw Error(ErrorKind::config, kStage, "rate constant must exceed 1");
  const auto blocks = tau / static_cast<std::size_t>(n);
  const double bound = -(static_cast<double>(tau) / n) * std::log(rate);
  const std::vector<double> b = block_log_norms(c, n);

  Verdict v;
  v.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tau; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < blocks; ++j) s += b[(i + j * n) % tau];
    if (bound - s < v.margin) {
      v.margin = bound - s;
      v.worst_offset = i;
    }
  }
  v.holds = v.margin >= -1e-12;
  return v;
}

Verdict check_domination(const PeriodicCocycle& c, const SplittingSpec& split, int n, double rate) {
  if (n < 1) throw Error(ErrorKind::config, kStage, "need N >= 1");
  if (!(rate > 1.0)) throw Error(ErrorKind::config, kStage, "rate constant must exceed 1");
  if (split.dim_e < 1 || split.dim_f < 1 || split.dim_e + split.dim_f != c.dim())
    throw Error(ErrorKind::config, kStage, "splitting must have two nontrivial complementary bundles");
  const double res = invariance_residual(c, split);
  if (res > kInvarianceTol)
    throw Error(ErrorKind::config, kStage, "splitting is not invariant (residual " + std::to_string(res) + ")");

  Verdict v;
  v.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.period(); ++i) {
    const Mat b = c.product(i, static_cast<std::size_t>(n));
    const double weak = sigma_max(b * split.e[i]);
    const double strong = sigma_min(b * split.f[i]);
    const double m = std::log(strong) - std::log(weak) - std::log(rate);
    if (m < v.margin) {
      v.margin = m;
      v.worst_offset = i;
    }
  }
  v.holds = v.margin >= -1e-12;
  return v;
}

PlissReport pliss_points(const PeriodicCocycle& c, int n, double rate) {
  if (n < 1) throw Error(ErrorKind::config, kStage, "need N >= 1");
  if (!(rate > 1.0)) throw Error(ErrorKind::config, kStage, "rate constant must exceed 1");
  const std::size_t tau = c.period();
  const auto nn = static_cast<std::size_t>(n);
  PlissReport r;
  r.n = n;
  r.padded_period = std::lcm(tau, nn);
  const std::size_t blocks = r.padded_period / nn;
  const std::vector<double> b = block_log_norms(c, n);
  const double step = std::log(rate);

  for (std::size_t i = 0; i < tau; ++i) {
    double s = 0.0;
    bool ok = true;
    // The block sequence from i repeats after `blocks` blocks, so one period
    // decides; the second period is scanned as a check.
    for (std::size_t k = 1; k <= 2 * blocks && ok; ++k) {
      s += b[(i + (k - 1) * nn) % tau];
      ok = s <= -static_cast<double>(k) * step + 1e-12;
    }
    if (ok) r.indices.push_back(i);
  }
  r.proportion = static_cast<double>(r.indices.size()) / static_cast<double>(tau);
  return r;
}

// ---------------------------------------------------------------------------

ClassClassification classify_class(const System& sys, const ChainClass& cls,
                                   const std::vector<PeriodicOrbit>& orbits, const ClassifyOptions& opt) {
  ClassClassification out;
  if (orbits.empty()) {
    out.verdict = "unclassified: no periodic data";
    return out;
  }
  (void)cls;
  const int d = sys.dim();
  bool near_zero = false;
  std::set<int> indices;
  std::vector<PeriodicCocycle> cocycles;
  for (const PeriodicOrbit& o : orbits) {
    cocycles.push_back(cocycle_from_orbit(sys, o));
    const LyapunovSpectrum spec = exponents_periodic(cocycles.back());
    OrbitClassification oc;
    oc.period = o.period;
    oc.exponents = spec.exponents;
    for (double l : spec.exponents) {
      if (std::abs(l) < opt.zero_tolerance) oc.near_zero = true;
      if (l < 0) ++oc.index;
    }
    near_zero = near_zero || oc.near_zero;
    indices.insert(oc.index);
    out.orbits.push_back(std::move(oc));
  }

  if (near_zero) {
    out.verdict = "nonuniform";
  } else if (indices.size() > 1) {
    out.verdict = "mixed-index";
  } else if (*indices.begin() == d) {
    out.verdict = "sink";
  } else if (*indices.begin() == 0) {
    out.verdict = "source";
  } else {
    bool dominated = true;
    for (std::size_t k = 0; k < cocycles.size(); ++k) {
      const auto split = stable_unstable_splitting(cocycles[k], opt.zero_tolerance);
      if (split) {
        for (int n = 1; n <= opt.n_max; ++n) {
          if (check_domination(cocycles[k], *split, n, opt.rate).holds) {
            out.orbits[k].dominated_at = n;
            break;
          }
        }
      }
      dominated = dominated && out.orbits[k].dominated_at.has_value();
    }
    out.verdict = dominated ? "saddle, index " + std::to_string(*indices.begin()) : "nonuniform";
  }
  return out;
}

// ---------------------------------------------------------------------------

double cocycle_distance(const PeriodicCocycle& a, const PeriodicCocycle& b) {
  require_same_shape(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.period(); ++i) {
    worst = std::max(worst, operator_norm(a.at(i) - b.at(i)));
    worst = std::max(worst, operator_norm(a.at(i).inverse() - b.at(i).inverse()));
  }
  return worst;
}

PerturbationCheck check_positive_exponent(const PeriodicCocycle& a, const PeriodicCocycle& b, double eps) {
  PerturbationCheck r;
  r.distance = cocycle_distance(a, b);
  r.is_perturbation = r.distance <= eps;
  r.conclusion = exponents_periodic(b).exponents.back() > 0.0;
  return r;
}

PerturbationCheck check_real_simple_spectrum(const PeriodicCocycle& a, const PeriodicCocycle& b,
                                             double eps) {
  PerturbationCheck r;
  r.distance = cocycle_distance(a, b);
  r.is_perturbation = r.distance <= eps;
  const LyapunovSpectrum sa = exponents_periodic(a);
  const LyapunovSpectrum sb = exponents_periodic(b);
  bool simple = true;
  for (std::size_t i = 0; i < sb.eigenvalues.size(); ++i)
    for (std::size_t j = i + 1; j < sb.eigenvalues.size(); ++j)
      if (std::abs(sb.eigenvalues[i] - sb.eigenvalues[j]) <=
          1e-12 * std::max(std::abs(sb.eigenvalues[i]), std::abs(sb.eigenvalues[j])))
        simple = false;
  bool close = true;
  for (std::size_t i = 0; i < sa.exponents.size(); ++i)
    close = close && std::abs(sa.exponents[i] - sb.exponents[i]) <= eps;
  r.conclusion = all_real(sb.eigenvalues) && simple && close;
  return r;
}

PerturbationCheck check_real_equal_modulus(const PeriodicCocycle& a, const PeriodicCocycle& b, double eps) {
  PerturbationCheck r;
  r.distance = cocycle_distance(a, b);
  r.is_perturbation = r.distance <= eps;
  const LyapunovSpectrum sb = exponents_periodic(b);
  r.conclusion = all_real(sb.eigenvalues) && sb.exponents.back() - sb.exponents.front() <= 1e-9;
  return r;
}

}  // namespace chainrec
