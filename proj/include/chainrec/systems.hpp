#pragma once

#include "chainrec/phase_space.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <string_view>

namespace chainrec {

struct Capabilities {
  bool invertible = false;
  bool jacobian_available = false;
  /// False when the Jacobian comes from central finite differences.
  bool jacobian_exact = false;
};

/// One map step plus its tangent data. Implementations are immutable and
/// reentrant.
class Model {
 public:
  virtual ~Model() = default;
  virtual Vec step(const Vec& p) const = 0;
  virtual Vec inverse_step(const Vec& p) const;
  virtual Mat jacobian(const Vec& p) const;
};

/// A discrete dynamical system: named map of an ambient space with
/// capability flags. Cheap to copy (shared immutable model).
class System {
 public:
  System(std::string name, Ambient ambient, nlohmann::json params, Capabilities caps,
         std::shared_ptr<const Model> model);

  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return ambient_.dim(); }
  const Ambient& ambient() const noexcept { return ambient_; }
  const nlohmann::json& params() const noexcept { return params_; }
  const Capabilities& capabilities() const noexcept { return caps_; }

  /// One forward step, result canonicalized. Box-space results outside the
  /// bounds raise a domain error.
  Vec step(const Vec& p) const;
  Vec inverse_step(const Vec& p) const;
  Mat jacobian_at(const Vec& p) const;

 private:
  std::string name_;
  Ambient ambient_;
  nlohmann::json params_;
  Capabilities caps_;
  std::shared_ptr<const Model> model_;
};

struct TangentMap {
  Vec base;
  Mat matrix;
  bool approximate = false;
};

/// Built-in catalog: cat_map, morse_gradient_t1, derived_anosov_3d, identity,
/// rotation, linear_torus, user_defined. Throws Error(config) on unknown names
/// or invalid parameters.
System make_system(std::string_view name, const nlohmann::json& params = nlohmann::json::object());

/// f^steps(p). Negative steps iterate the inverse and need the invertible flag.
Vec evaluate(const System& sys, const Vec& p, long steps = 1);

TangentMap jacobian(const System& sys, const Vec& p);

/// Matrix of the derived-from-Anosov linear part (integer, det 1, spectrum
/// 0 < l1 < l2 < 1 < lu).
Eigen::Matrix3d derived_anosov_matrix();

}  // namespace chainrec
