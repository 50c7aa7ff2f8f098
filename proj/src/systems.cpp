#include "chainrec/systems.hpp"

#include "chainrec/errors.hpp"
#include "chainrec/expression.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace chainrec {

namespace {

constexpr const char* kStage = "systems";
constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void bad_param(const std::string& system, const std::string& what) {
  throw Error(ErrorKind::config, kStage, what, system);
}

double get_number(const nlohmann::json& params, const char* key, double fallback,
                  const std::string& system) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_number()) bad_param(system, std::string("parameter '") + key + "' must be a number");
  return v.get<double>();
}

Mat parse_integer_matrix(const nlohmann::json& j, const std::string& system) {
  if (!j.is_array() || j.empty()) bad_param(system, "matrix must be a nonempty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Mat m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      bad_param(system, "matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto& v = row.at(static_cast<std::size_t>(c));
      if (!v.is_number_integer()) bad_param(system, "matrix entries must be integers");
      m(r, c) = static_cast<double>(v.get<long long>());
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

/// x -> M x mod 1 for an integer matrix with det +-1.
class LinearTorusModel final : public Model {
 public:
  explicit LinearTorusModel(Mat m) : m_(std::move(m)), inv_(m_.inverse()) {
    inv_ = inv_.array().round().matrix();
  }
  Vec step(const Vec& p) const override { return m_ * p; }
  Vec inverse_step(const Vec& p) const override { return inv_ * p; }
  Mat jacobian(const Vec&) const override { return m_; }

 private:
  Mat m_;
  Mat inv_;
};

class RotationModel final : public Model {
 public:
  explicit RotationModel(Vec shift) : shift_(std::move(shift)) {}
  Vec step(const Vec& p) const override { return p + shift_; }
  Vec inverse_step(const Vec& p) const override { return p - shift_; }
  Mat jacobian(const Vec& p) const override { return Mat::Identity(p.size(), p.size()); }

 private:
  Vec shift_;
};

/// Time-1 map of the descent flow of h(x,y) = cos(2 pi x) + cos(2 pi y),
/// i.e. x' = 2 pi sin(2 pi x) per axis, by fixed-step RK4. The field is
/// separable, so each axis and its variational equation integrate alone.
class MorseGradientModel final : public Model {
 public:
  explicit MorseGradientModel(int steps_per_unit) : steps_(steps_per_unit) {}

  Vec step(const Vec& p) const override {
    Vec out(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = flow_axis(p[i]).first;
    return out;
  }

  Mat jacobian(const Vec& p) const override {
    Mat j = Mat::Zero(p.size(), p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) j(i, i) = flow_axis(p[i]).second;
    return j;
  }

 private:
  static double field(double x) { return kTwoPi * std::sin(kTwoPi * x); }
  static double field_derivative(double x) { return kTwoPi * kTwoPi * std::cos(kTwoPi * x); }

  // Returns (x(1), dx(1)/dx(0)).
  std::pair<double, double> flow_axis(double x) const {
    const double h = 1.0 / steps_;
    double d = 1.0;
    for (int s = 0; s < steps_; ++s) {
      const double k1 = field(x);
      const double m1 = field_derivative(x) * d;
      const double x2 = x + 0.5 * h * k1, d2 = d + 0.5 * h * m1;
      const double k2 = field(x2);
      const double m2 = field_derivative(x2) * d2;
      const double x3 = x + 0.5 * h * k2, d3 = d + 0.5 * h * m2;
      const double k3 = field(x3);
      const double m3 = field_derivative(x3) * d3;
      const double x4 = x + h * k3, d4 = d + h * m3;
      const double k4 = field(x4);
      const double m4 = field_derivative(x4) * d4;
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      d += h / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    }
    return {x, d};
  }

  int steps_;
};

enum class BumpProfile { cubic_hermite, quintic };

double bump(BumpProfile profile, double s) {
  if (s >= 1.0) return 0.0;
  switch (profile) {
    case BumpProfile::cubic_hermite: return 1.0 - s * s * (3.0 - 2.0 * s);
    case BumpProfile::quintic: return 1.0 - s * s * s * (10.0 - s * (15.0 - 6.0 * s));
  }
  return 0.0;
}

double bump_derivative(BumpProfile profile, double s) {
  if (s >= 1.0) return 0.0;
  switch (profile) {
    case BumpProfile::cubic_hermite: return -6.0 * s * (1.0 - s);
    case BumpProfile::quintic: return -30.0 * s * s * (1.0 - s) * (1.0 - s);
  }
  return 0.0;
}

/// Linear Anosov map of T^3 deformed near the fixed point 0. In the
/// orthonormal eigenbasis (s1, s2, u) of the symmetric matrix the deformed map
/// reads (l1 y, (l2 + k phi(rho)) z, lu x) with
/// rho = |(a x, a b y, a b z)| / r0: the strong-stable and unstable
/// coordinates are untouched and the weak-stable one is stretched inside a
/// shrinking ellipsoid. For k < l2 / |min(phi + s phi')| the z-map is
/// monotone, so the deformed map stays a diffeomorphism.
class DerivedAnosovModel final : public Model {
 public:
  DerivedAnosovModel(double a, double b, double kappa, double r0, BumpProfile profile)
      : a_(a), b_(b), kappa_(kappa), r0_(r0), profile_(profile) {
    matrix_ = derived_anosov_matrix();
    inverse_ = matrix_.inverse().array().round().matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(matrix_);
    lambda_ = es.eigenvalues();
    basis_ = es.eigenvectors();
  }

  const Eigen::Vector3d& eigenvalues() const { return lambda_; }

  Vec step(const Vec& p) const override {
    Eigen::Vector3d q = p;
    Eigen::Vector3d out = matrix_ * q;
    const Eigen::Vector3d v = local(q);
    const double rho = radius(v);
    if (rho < 1.0) out += basis_.col(1) * (kappa_ * bump(profile_, rho) * v[1]);
    return out;
  }

  Mat jacobian(const Vec& p) const override {
    Eigen::Matrix3d j = matrix_;
    const Eigen::Vector3d v = local(p);
    const double rho = radius(v);
    if (rho < 1.0) {
      // gradient in eigen coordinates of phi(rho) * v_s2
      Eigen::Vector3d grad = Eigen::Vector3d::Zero();
      grad[1] = bump(profile_, rho);
      if (rho > 0.0) {
        const double ab = a_ * b_;
        const Eigen::Vector3d drho(ab * ab * v[0], ab * ab * v[1], a_ * a_ * v[2]);
        grad += bump_derivative(profile_, rho) * v[1] / (r0_ * r0_ * rho) * drho;
      }
      j += kappa_ * basis_.col(1) * (basis_ * grad).transpose();
    }
    return j;
  }

  Vec inverse_step(const Vec& p) const override {
    Eigen::Vector3d w = p;
    Eigen::Vector3d q0 = inverse_ * w;
    Eigen::Vector3d v0 = local(q0);
    const double target = lambda_[1] * v0[1];
    auto residual = [&](double t) {
      Eigen::Vector3d v = v0;
      v[1] = t;
      return (lambda_[1] + kappa_ * bump(profile_, radius(v))) * t - target;
    };
    double lo = std::min(v0[1], lambda_[1] * v0[1] / (lambda_[1] + kappa_));
    double hi = std::max(v0[1], lambda_[1] * v0[1] / (lambda_[1] + kappa_));
    if (residual(lo) > 0.0 || residual(hi) < 0.0) return q0;  // outside the deformation
    for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
      const double mid = 0.5 * (lo + hi);
      (residual(mid) > 0.0 ? hi : lo) = mid;
    }
    const double t = 0.5 * (lo + hi);
    return q0 + basis_.col(1) * (t - v0[1]);
  }

 private:
  // Eigen coordinates (s1, s2, u) of the nearest lift of q around 0.
  Eigen::Vector3d local(const Eigen::Vector3d& q) const {
    Eigen::Vector3d d;
    for (int i = 0; i < 3; ++i) d[i] = wrap_half(q[i]);
    return basis_.transpose() * d;
  }

  double radius(const Eigen::Vector3d& v) const {
    const double ab = a_ * b_;
    return std::sqrt(ab * ab * (v[0] * v[0] + v[1] * v[1]) + a_ * a_ * v[2] * v[2]) / r0_;
  }

  double a_, b_, kappa_, r0_;
  BumpProfile profile_;
  Eigen::Matrix3d matrix_, inverse_, basis_;
  Eigen::Vector3d lambda_;
};

/// Coordinates given by expression strings.
class ExpressionModel final : public Model {
 public:
  ExpressionModel(std::vector<Expression> map, std::vector<Expression> inverse,
                  std::vector<Expression> jacobian, bool finite_differences)
      : map_(std::move(map)),
        inverse_(std::move(inverse)),
        jacobian_(std::move(jacobian)),
        finite_differences_(finite_differences) {}

  Vec step(const Vec& p) const override { return apply(map_, p); }

  Vec inverse_step(const Vec& p) const override {
    if (inverse_.empty()) return Model::inverse_step(p);
    return apply(inverse_, p);
  }

  Mat jacobian(const Vec& p) const override {
    const auto d = p.size();
    Mat j(d, d);
    if (!jacobian_.empty()) {
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) j(r, c) = jacobian_[static_cast<std::size_t>(r * d + c)](p);
      return j;
    }
    if (!finite_differences_) return Model::jacobian(p);
    constexpr double h = 1e-6;
    for (Eigen::Index c = 0; c < d; ++c) {
      Vec plus = p, minus = p;
      plus[c] += h;
      minus[c] -= h;
      j.col(c) = (apply(map_, plus) - apply(map_, minus)) / (2.0 * h);
    }
    return j;
  }

 private:
  static Vec apply(const std::vector<Expression>& exprs, const Vec& p) {
    Vec out(static_cast<Eigen::Index>(exprs.size()));
    for (std::size_t i = 0; i < exprs.size(); ++i) out[static_cast<Eigen::Index>(i)] = exprs[i](p);
    return out;
  }

  std::vector<Expression> map_;
  std::vector<Expression> inverse_;
  std::vector<Expression> jacobian_;
  bool finite_differences_;
};

std::vector<Expression> parse_expressions(const nlohmann::json& j, std::size_t count, int dim,
                                          const char* what) {
  std::vector<Expression> out;
  if (!j.is_array() || j.size() != count)
    bad_param("user_defined", std::string(what) + " must be an array of " + std::to_string(count) +
                                  " expression strings");
  for (const auto& e : j) {
    if (!e.is_string()) bad_param("user_defined", std::string(what) + " entries must be strings");
    out.emplace_back(e.get<std::string>(), dim);
  }
  return out;
}

int get_dimension(const nlohmann::json& params, int fallback, const std::string& system) {
  const double d = get_number(params, "d", get_number(params, "dimension", fallback, system), system);
  if (d < 1 || d != std::floor(d)) bad_param(system, "dimension must be a positive integer");
  return static_cast<int>(d);
}

}  // namespace

// ---------------------------------------------------------------------------

Vec Model::inverse_step(const Vec&) const {
  throw Error(ErrorKind::config, kStage, "system is not invertible");
}

Mat Model::jacobian(const Vec&) const {
  throw Error(ErrorKind::config, kStage, "Jacobian unavailable and finite differences disabled");
}

System::System(std::string name, Ambient ambient, nlohmann::json params, Capabilities caps,
               std::shared_ptr<const Model> model)
    : name_(std::move(name)),
      ambient_(std::move(ambient)),
      params_(std::move(params)),
      caps_(caps),
      model_(std::move(model)) {}

Vec System::step(const Vec& p) const {
  const Vec out = model_->step(p);
  if (!out.allFinite()) throw Error(ErrorKind::numerical, kStage, "non-finite image", name_);
  return ambient_.canonicalize(out);
}

Vec System::inverse_step(const Vec& p) const {
  if (!caps_.invertible) throw Error(ErrorKind::config, kStage, "system is not invertible", name_);
  const Vec out = model_->inverse_step(p);
  if (!out.allFinite()) throw Error(ErrorKind::numerical, kStage, "non-finite preimage", name_);
  return ambient_.canonicalize(out);
}

Mat System::jacobian_at(const Vec& p) const {
  if (!caps_.jacobian_available)
    throw Error(ErrorKind::config, kStage, "Jacobian unavailable", name_);
  Mat j = model_->jacobian(p);
  if (!j.allFinite()) throw Error(ErrorKind::numerical, kStage, "non-finite Jacobian", name_);
  return j;
}

Eigen::Matrix3d derived_anosov_matrix() {
  Eigen::Matrix3d m;
  m << 2, 1, 2,
       1, 1, 1,
       2, 1, 3;
  return m;
}

System make_system(std::string_view name_view, const nlohmann::json& params_in) {
  const std::string name(name_view);
  nlohmann::json params = params_in.is_null() ? nlohmann::json::object() : params_in;
  if (!params.is_object()) bad_param(name, "parameters must be an object");

  if (name == "cat_map") {
    Mat m(2, 2);
    m << 2, 1, 1, 1;
    return System(name, Ambient::torus(2), params, {true, true, true},
                  std::make_shared<LinearTorusModel>(m));
  }

  if (name == "identity") {
    const int d = get_dimension(params, 2, name);
    params["d"] = d;
    return System(name, Ambient::torus(d), params, {true, true, true},
                  std::make_shared<LinearTorusModel>(Mat::Identity(d, d)));
  }

  if (name == "linear_torus") {
    if (!params.contains("matrix")) bad_param(name, "missing 'matrix'");
    Mat m = parse_integer_matrix(params.at("matrix"), name);
    const double det = m.determinant();
    if (std::abs(std::abs(det) - 1.0) > 1e-9)
      bad_param(name, "matrix must have determinant +-1 to define a torus diffeomorphism");
    const auto d = static_cast<int>(m.rows());
    return System(name, Ambient::torus(d), params, {true, true, true},
                  std::make_shared<LinearTorusModel>(std::move(m)));
  }

  if (name == "rotation") {
    if (!params.contains("angle")) bad_param(name, "missing 'angle' (array of translations)");
    const auto& a = params.at("angle");
    if (!a.is_array() || a.empty()) bad_param(name, "'angle' must be a nonempty array");
    Vec shift(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) bad_param(name, "'angle' entries must be numbers");
      shift[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    }
    return System(name, Ambient::torus(static_cast<int>(shift.size())), params,
                  {true, true, true}, std::make_shared<RotationModel>(shift));
  }

  if (name == "morse_gradient_t1") {
    const double steps = get_number(params, "steps_per_unit", 64, name);
    if (steps < 1 || steps != std::floor(steps)) bad_param(name, "steps_per_unit must be a positive integer");
    params["steps_per_unit"] = static_cast<int>(steps);
    // The time-1 map contracts by exp(-4 pi^2) near the minimum, so its
    // inverse is not computable in double precision.
    return System(name, Ambient::torus(2), params, {false, true, true},
                  std::make_shared<MorseGradientModel>(static_cast<int>(steps)));
  }

  if (name == "derived_anosov_3d") {
    const double a = get_number(params, "a", 1.0, name);
    const double b = get_number(params, "b", 1.0, name);
    const double kappa = get_number(params, "kappa", 0.6, name);
    const double r0 = get_number(params, "radius", 0.1, name);
    const std::string prof = params.value("profile", std::string("cubic_hermite"));
    if (a < 1.0 || b < 1.0) bad_param(name, "deformation sizes a, b must be >= 1");
    if (!(r0 > 0.0 && r0 <= 0.2)) bad_param(name, "radius must lie in (0, 0.2]");
    BumpProfile profile;
    if (prof == "cubic_hermite") profile = BumpProfile::cubic_hermite;
    else if (prof == "quintic") profile = BumpProfile::quintic;
    else bad_param(name, "unknown profile '" + prof + "'");
    // Monotonicity bound: l2 + kappa * min_s (phi + s phi') > 0.
    double worst = 0.0;
    for (int k = 0; k <= 1000; ++k) {
      const double s = k / 1000.0;
      worst = std::min(worst, bump(profile, s) + s * bump_derivative(profile, s));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(derived_anosov_matrix());
    const double l2 = es.eigenvalues()[1];
    if (kappa < 0.0 || l2 + kappa * worst <= 0.0)
      bad_param(name, "kappa must satisfy 0 <= kappa < " + std::to_string(l2 / -worst));
    params["a"] = a;
    params["b"] = b;
    params["kappa"] = kappa;
    params["radius"] = r0;
    params["profile"] = prof;
    return System(name, Ambient::torus(3), params, {true, true, true},
                  std::make_shared<DerivedAnosovModel>(a, b, kappa, r0, profile));
  }

  if (name == "user_defined") {
    if (!params.contains("map")) bad_param(name, "user_defined requires a 'map' evaluator");
    const int d = get_dimension(params, static_cast<int>(params.at("map").size()), name);
    Ambient ambient = Ambient::torus(d);
    const std::string kind = params.value("ambient", std::string("torus"));
    if (kind == "box") {
      if (!params.contains("lower") || !params.contains("upper"))
        bad_param(name, "box ambient needs 'lower' and 'upper'");
      const auto lo = params.at("lower").get<std::vector<double>>();
      const auto hi = params.at("upper").get<std::vector<double>>();
      if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
        bad_param(name, "bounds must have one entry per dimension");
      ambient = Ambient::box(Eigen::Map<const Vec>(lo.data(), d), Eigen::Map<const Vec>(hi.data(), d));
    } else if (kind != "torus") {
      bad_param(name, "ambient must be 'torus' or 'box'");
    }
    const auto ud = static_cast<std::size_t>(d);
    auto map = parse_expressions(params.at("map"), ud, d, "map");
    std::vector<Expression> inverse, jac;
    if (params.contains("inverse")) inverse = parse_expressions(params.at("inverse"), ud, d, "inverse");
    if (params.contains("jacobian")) {
      const auto& rows = params.at("jacobian");
      if (!rows.is_array() || rows.size() != ud) bad_param(name, "jacobian must have d rows");
      for (const auto& row : rows) {
        auto r = parse_expressions(row, ud, d, "jacobian row");
        jac.insert(jac.end(), r.begin(), r.end());
      }
    }
    const bool fd = params.value("finite_differences", true);
    Capabilities caps{!inverse.empty(), !jac.empty() || fd, !jac.empty()};
    return System(name, std::move(ambient), params, caps,
                  std::make_shared<ExpressionModel>(std::move(map), std::move(inverse),
                                                    std::move(jac), fd));
  }

  throw Error(ErrorKind::config, kStage, "unknown system '" + name + "'");
}

Vec evaluate(const System& sys, const Vec& p, long steps) {
  if (steps < 0 && !sys.capabilities().invertible)
    throw Error(ErrorKind::config, kStage, "negative steps on a non-invertible system", sys.name());
  Vec x = sys.ambient().canonicalize(p);
  if (steps >= 0) {
    for (long i = 0; i < steps; ++i) x = sys.step(x);
  } else {
    for (long i = 0; i < -steps; ++i) x = sys.inverse_step(x);
  }
  return x;
}

TangentMap jacobian(const System& sys, const Vec& p) {
  const Vec base = sys.ambient().canonicalize(p);
  return TangentMap{base, sys.jacobian_at(base), !sys.capabilities().jacobian_exact};
}

}  // namespace chainrec
