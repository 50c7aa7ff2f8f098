#pragma once

#include "chainrec/phase_space.hpp"
#include "chainrec/systems.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chainrec {

/// Finite sequence z_0..z_n (n >= 1) with its jump bound
/// max_i d(f(z_i), z_{i+1}). Periodic iff z_n == z_0 exactly.
class PseudoOrbit {
 public:
  PseudoOrbit(const System& sys, std::vector<Vec> points);

  /// Closed pseudo-orbit through `cycle` (z_0..z_{tau-1}); z_0 is appended.
  static PseudoOrbit periodic(const System& sys, std::vector<Vec> cycle);

  const std::vector<Vec>& points() const noexcept { return points_; }
  std::size_t length() const noexcept { return points_.size() - 1; }
  double jump_bound() const noexcept { return jump_; }
  bool is_periodic() const noexcept { return periodic_; }
  /// Distinct points of one period (drops the closing duplicate).
  std::span<const Vec> cycle() const;

 private:
  std::vector<Vec> points_;
  double jump_ = 0.0;
  bool periodic_ = false;
};

/// z_0 = start, z_{i+1} = f(z_i) + noise drawn uniformly from the Euclidean eps-ball.
PseudoOrbit generate_pseudo_orbit(const System& sys, const Vec& start, std::size_t n, double eps,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Nested-cube return selection.

/// Axis-aligned cube in chart coordinates.
struct Cube {
  Vec center;
  double radius = 0.0;

  Cube scaled(double factor) const { return {center, radius * factor}; }
  bool contains(const Vec& p, double tol = 0.0) const;
};

/// A point of the orbit segment together with its iterate index.
struct Return {
  Vec point;
  std::int64_t iterate = 0;
};

struct ClosingTriple {
  Return x;  // later point, x = f^t(y)
  Return y;
  Cube cube;  // C: contains x and y; intermediate iterates avoid (1+eps) C
  double expansion = 0.0;
  /// The nested cubes C_0, C_1, ... (C_k = half of the k-th outer cube).
  std::vector<Cube> nested;
  /// Number of T(j) steps taken in the last level.
  int inner_steps = 0;
};

/// Returns must be sorted by strictly increasing iterate; y_0 is the first
/// and x_0 the last entry, both inside C0. Requires
/// (1 + expansion)^(3^d) <= 3/2.
ClosingTriple select_closing_pair(std::span<const Return> returns, const Cube& c0, double expansion);

/// Largest expansion factor admissible in dimension d.
double max_closing_expansion(int dim);

// ---------------------------------------------------------------------------
// Newton closing.

struct ClosingOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
  int max_halvings = 20;
};

struct PeriodicOrbit {
  std::vector<Vec> points;  // p_0 .. p_{tau-1}
  std::size_t period = 0;
  /// max_i d(f(p_i), p_{i+1 mod tau})
  double residual = 0.0;
  /// d_H between the input pseudo-orbit points and the orbit (when closed from one).
  std::optional<double> hausdorff_to_pseudo;
  int iterations = 0;
  const Vec& representative() const { return points.front(); }
};

/// Damped multiple-shooting Newton for the periodic problem f(p_i) = p_{i+1},
/// p_tau = p_0, seeded at the pseudo-orbit; on the torus steps use nearest
/// lifts. Throws ConvergenceError or DegeneracyError.
PeriodicOrbit close_to_periodic(const System& sys, const PseudoOrbit& po,
                                const ClosingOptions& opt = {});

/// Shortest prefix whose cyclic repetition matches the cycle within tol
/// (proper divisors of the length only).
std::vector<Vec> reduce_to_minimal_period(const Ambient& ambient, std::vector<Vec> cycle, double tol);

/// max_i d(f(p_i), p_{i+1}) over a cyclic list.
double periodic_residual(const System& sys, std::span<const Vec> cycle);

// ---------------------------------------------------------------------------
// Weak shadowing.

struct OrbitSegment {
  Vec start;
  std::size_t steps = 0;
  std::vector<Vec> points;  // start, f(start), ..., f^steps(start)
  double hausdorff = 0.0;
  /// max one-step defect d(f(p_i), p_{i+1}) of the stored points.
  double defect = 0.0;
  std::string origin;
};

struct ShadowReport {
  bool found = false;
  double delta = 0.0;
  std::optional<OrbitSegment> witness;  // set when found
  std::optional<OrbitSegment> best;     // best candidate (also set when found)
  std::size_t candidates_tried = 0;
  std::string message;
};

ShadowReport weak_shadow_check(const System& sys, const PseudoOrbit& po, double delta,
                               std::size_t search_budget = 256);

}  // namespace chainrec
