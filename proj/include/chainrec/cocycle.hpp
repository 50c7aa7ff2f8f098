#pragma once

#include "chainrec/chain_graph.hpp"
#include "chainrec/orbit_closing.hpp"
#include "chainrec/phase_space.hpp"
#include "chainrec/systems.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace chainrec {

/// tau-periodic sequence of invertible d x d matrices. at(i) is the map from
/// fiber i to fiber i+1; indices are taken mod tau.
class PeriodicCocycle {
 public:
  explicit PeriodicCocycle(std::vector<Mat> mats);

  std::size_t period() const noexcept { return mats_.size(); }
  int dim() const noexcept { return static_cast<int>(mats_.front().rows()); }
  const Mat& at(std::size_t i) const noexcept { return mats_[i % mats_.size()]; }
  const std::vector<Mat>& matrices() const noexcept { return mats_; }
  /// K = max_i max(|A_i|, |A_i^{-1}|), operator 2-norms.
  double bound() const noexcept { return bound_; }

  /// A_{start+len-1} ... A_start (identity for len = 0).
  Mat product(std::size_t start, std::size_t len) const;
  /// A_{tau-1} ... A_0.
  Mat period_product() const { return product(0, period()); }

  /// Cocycle started at fiber k.
  PeriodicCocycle rotated(std::size_t k) const;
  /// The inverse dynamics: A_{tau-1}^{-1}, ..., A_0^{-1}.
  PeriodicCocycle inverse() const;

 private:
  std::vector<Mat> mats_;
  double bound_ = 1.0;
};

double operator_norm(const Mat& m);

/// Sequence of orthonormal bases E_i, F_i (columns) of complementary
/// invariant subspaces.
struct SplittingSpec {
  int dim_e = 0;
  int dim_f = 0;
  std::vector<Mat> e;  // d x dim_e per fiber
  std::vector<Mat> f;  // d x dim_f per fiber

  /// The same pair of subspaces at every fiber (orthonormalized).
  static SplittingSpec constant(const Mat& e_basis, const Mat& f_basis, std::size_t period);
};

/// Largest residual |(I - P_{E,i+1}) A_i E_i| / |A_i| over both bundles.
double invariance_residual(const PeriodicCocycle& c, const SplittingSpec& s);

/// Splitting into the dim_e weakest and the d - dim_e strongest Oseledets
/// directions, obtained by iterating the cocycle (F) and its inverse (E).
/// Throws DegeneracyError when the exponents have no gap at dim_e.
SplittingSpec eigen_splitting(const PeriodicCocycle& c, int dim_e);

/// E = exponents < 0, F = exponents > 0; empty when some exponent is within
/// `tol` of zero or one side is trivial.
std::optional<SplittingSpec> stable_unstable_splitting(const PeriodicCocycle& c, double tol = 1e-3);

/// Restriction of the cocycle to the given bundle: B_i = Q_{i+1}^T A_i Q_i.
PeriodicCocycle restrict_to(const PeriodicCocycle& c, const std::vector<Mat>& bundle);

/// A_i = Df(p_i) along the orbit.
PeriodicCocycle cocycle_from_orbit(const System& sys, const PeriodicOrbit& orbit);

enum class SpectrumSource { exact_periodic, qr_estimate };

struct LyapunovSpectrum {
  std::vector<double> exponents;  // ascending, with multiplicity
  SpectrumSource source = SpectrumSource::exact_periodic;
  /// Eigenvalues of the period product (exact-periodic only), ordered like
  /// the exponents.
  std::vector<std::complex<double>> eigenvalues;
  std::size_t iterations = 0;
  /// qr-estimate only: max |estimate(n) - estimate(n/2)|.
  double drift = 0.0;

  double sum() const;
};

LyapunovSpectrum exponents_periodic(const PeriodicCocycle& c);

/// QR accumulation along the orbit of `start`; the first burn_in steps only
/// align the frame. Requires n >= 10 * burn_in.
LyapunovSpectrum lyapunov_qr(const System& sys, const Vec& start, std::size_t n, std::size_t burn_in = 0);

/// Base constant of the contraction and domination inequalities.
inline constexpr double kDefaultRate = 2.718281828459045;

struct Verdict {
  bool holds = false;
  /// Worst log-margin over offsets; >= 0 iff holds.
  double margin = 0.0;
  /// Offset attaining the worst margin.
  std::size_t worst_offset = 0;
};

/// For every offset i: prod_{j < floor(tau/N)} |A^N at i + jN| <= rate^{-tau/N}.
Verdict check_contraction_at_period(const PeriodicCocycle& c, int n, double rate = kDefaultRate);

/// For every i: sigma_max(A^N|E_i) <= sigma_min(A^N|F_i) / rate.
/// Throws Error(config) when the splitting is not invariant to 1e-8.
Verdict check_domination(const PeriodicCocycle& c, const SplittingSpec& split, int n,
                         double rate = kDefaultRate);

struct PlissReport {
  int n = 1;
  std::vector<std::size_t> indices;
  double proportion = 0.0;
  /// Length of the cyclic sequence actually scanned (lcm(tau, N)).
  std::size_t padded_period = 0;
};

/// Indices i in [0, tau) with prod_{j<k} |A^N at i + jN| <= rate^{-k} for all
/// k >= 1. `c` is the cocycle already restricted to the bundle.
PlissReport pliss_points(const PeriodicCocycle& c, int n, double rate = kDefaultRate);

struct OrbitClassification {
  std::size_t period = 0;
  std::vector<double> exponents;
  int index = 0;  // stable dimension
  bool near_zero = false;
  std::optional<int> dominated_at;  // smallest N <= N_max, saddles only
};

struct ClassClassification {
  std::string verdict;
  std::vector<OrbitClassification> orbits;
};

struct ClassifyOptions {
  int n_max = 8;
  double zero_tolerance = 1e-3;
  double rate = kDefaultRate;
};

ClassClassification classify_class(const System& sys, const ChainClass& cls,
                                   const std::vector<PeriodicOrbit>& orbits,
                                   const ClassifyOptions& opt = {});

// ---------------------------------------------------------------------------
// Hypothesis/conclusion checkers for perturbations of periodic cocycles.

/// sup_i max(|A_i - B_i|, |A_i^{-1} - B_i^{-1}|); cocycles must share period
/// and dimension.
double cocycle_distance(const PeriodicCocycle& a, const PeriodicCocycle& b);

struct PerturbationCheck {
  double distance = 0.0;
  bool is_perturbation = false;  // distance <= eps
  bool conclusion = false;
  bool holds() const noexcept { return is_perturbation && conclusion; }
};

/// B is an eps-perturbation of A with a positive exponent.
PerturbationCheck check_positive_exponent(const PeriodicCocycle& a, const PeriodicCocycle& b, double eps);
/// B is an eps-perturbation of A with real simple eigenvalues and i-th
/// exponents eps-close to those of A.
PerturbationCheck check_real_simple_spectrum(const PeriodicCocycle& a, const PeriodicCocycle& b,
                                             double eps);
/// B is an eps-perturbation of A whose eigenvalues are all real with one modulus.
PerturbationCheck check_real_equal_modulus(const PeriodicCocycle& a, const PeriodicCocycle& b,
                                           double eps);

}  // namespace chainrec
