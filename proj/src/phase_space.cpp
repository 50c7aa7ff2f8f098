#include "chainrec/phase_space.hpp"

#include "chainrec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace chainrec {

namespace {

constexpr const char* kStage = "phase_space";

std::string fmt_point(const Vec& p) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

}  // namespace

double wrap_half(double x) noexcept { return x - std::floor(x + 0.5); }

Ambient::Ambient(SpaceKind kind, Vec lower, Vec upper, std::vector<int> extents)
    : kind_(kind),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      extents_(std::move(extents)) {}

Ambient Ambient::torus(int dim) {
  if (dim < 1) throw Error(ErrorKind::config, kStage, "torus dimension must be >= 1");
  return Ambient(SpaceKind::torus, Vec::Zero(dim), Vec::Ones(dim),
                 std::vector<int>(static_cast<std::size_t>(dim), 1));
}

Ambient Ambient::box(Vec lower, Vec upper, std::vector<int> extents) {
  if (lower.size() < 1 || lower.size() != upper.size())
    throw Error(ErrorKind::config, kStage, "box bounds must have equal nonzero length");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw Error(ErrorKind::config, kStage,
                  "box bounds must be finite with lower < upper on axis " + std::to_string(i));
  }
  if (extents.empty()) extents.assign(static_cast<std::size_t>(lower.size()), 1);
  if (extents.size() != static_cast<std::size_t>(lower.size()))
    throw Error(ErrorKind::config, kStage, "extent list length must match dimension");
  for (int e : extents)
    if (e < 1) throw Error(ErrorKind::config, kStage, "extents must be >= 1");
  return Ambient(SpaceKind::box, std::move(lower), std::move(upper), std::move(extents));
}

Vec Ambient::canonicalize(const Vec& p) const {
  if (p.size() != dim())
    throw Error(ErrorKind::domain, kStage, "point dimension mismatch", fmt_point(p));
  if (!p.allFinite()) throw Error(ErrorKind::domain, kStage, "non-finite point", fmt_point(p));
  if (is_torus()) {
    Vec q(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      double v = p[i] - std::floor(p[i]);
      q[i] = v >= 1.0 ? 0.0 : v;
    }
    return q;
  }
  if (!contains(p)) throw Error(ErrorKind::domain, kStage, "point outside ambient bounds", fmt_point(p));
  return p;
}

bool Ambient::contains(const Vec& p) const {
  if (p.size() != dim() || !p.allFinite()) return false;
  if (is_torus()) return true;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] < lower_[i] || p[i] > upper_[i]) return false;
  return true;
}

Vec Ambient::displacement(const Vec& from, const Vec& to) const {
  Vec d = to - from;
  if (is_torus())
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = wrap_half(d[i]);
  return d;
}

double Ambient::distance(const Vec& a, const Vec& b) const { return displacement(a, b).norm(); }

double Ambient::diameter() const {
  if (is_torus()) return 0.5 * std::sqrt(static_cast<double>(dim()));
  return (upper_ - lower_).norm();
}

bool operator==(const Ambient& a, const Ambient& b) {
  return a.kind_ == b.kind_ && a.lower_ == b.lower_ && a.upper_ == b.upper_ &&
         a.extents_ == b.extents_;
}

// ---------------------------------------------------------------------------

BoxGrid::BoxGrid(Ambient ambient, int depth, int max_depth)
    : ambient_(std::move(ambient)), depth_(depth), max_depth_(max_depth) {
  if (depth < 0) throw Error(ErrorKind::config, kStage, "grid depth must be >= 0");
  if (depth > max_depth)
    throw Error(ErrorKind::config, kStage,
                "grid depth " + std::to_string(depth) + " exceeds ceiling " +
                    std::to_string(max_depth));
  const int d = ambient_.dim();
  cells_.resize(static_cast<std::size_t>(d));
  long double total = 1.0L;
  count_ = 1;
  for (int i = 0; i < d; ++i) {
    const std::int64_t c = static_cast<std::int64_t>(ambient_.extent(i)) << depth;
    cells_[static_cast<std::size_t>(i)] = c;
    total *= static_cast<long double>(c);
    if (total > static_cast<long double>(std::numeric_limits<std::uint64_t>::max() / 2))
      throw Error(ErrorKind::budget, kStage, "box count overflows 64-bit ids");
    count_ *= static_cast<std::uint64_t>(c);
  }
}

BoxGrid BoxGrid::subdivide() const {
  if (depth_ + 1 > max_depth_)
    throw Error(ErrorKind::config, kStage,
                "cannot subdivide past depth ceiling " + std::to_string(max_depth_));
  return BoxGrid(ambient_, depth_ + 1, max_depth_);
}

Box BoxGrid::box(BoxId id) const {
  if (!valid(id)) throw Error(ErrorKind::domain, kStage, "invalid box id", std::to_string(id));
  Box b;
  b.depth = depth_;
  b.index.resize(cells_.size());
  for (std::size_t k = cells_.size(); k-- > 0;) {
    const auto c = static_cast<std::uint64_t>(cells_[k]);
    b.index[k] = static_cast<std::int64_t>(id % c);
    id /= c;
  }
  return b;
}

BoxId BoxGrid::id(const Box& b) const {
  if (b.depth != depth_ || b.index.size() != cells_.size())
    throw Error(ErrorKind::domain, kStage, "box does not belong to this grid");
  BoxId id = 0;
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    if (b.index[k] < 0 || b.index[k] >= cells_[k])
      throw Error(ErrorKind::domain, kStage, "multi-index out of range on axis " + std::to_string(k));
    id = id * static_cast<BoxId>(cells_[k]) + static_cast<BoxId>(b.index[k]);
  }
  return id;
}

Vec BoxGrid::side() const {
  Vec s(dim());
  for (int i = 0; i < dim(); ++i)
    s[i] = (ambient_.upper()[i] - ambient_.lower()[i]) / static_cast<double>(cells(i));
  return s;
}

Box BoxGrid::box_of(const Vec& p) const {
  const Vec q = ambient_.canonicalize(p);
  Box b;
  b.depth = depth_;
  b.index.resize(cells_.size());
  for (int i = 0; i < dim(); ++i) {
    const auto c = cells_[static_cast<std::size_t>(i)];
    const double t = (q[i] - ambient_.lower()[i]) / (ambient_.upper()[i] - ambient_.lower()[i]);
    auto k = static_cast<std::int64_t>(std::floor(t * static_cast<double>(c)));
    b.index[static_cast<std::size_t>(i)] = std::clamp<std::int64_t>(k, 0, c - 1);
  }
  return b;
}

BoxId BoxGrid::id_of(const Vec& p) const { return id(box_of(p)); }

Vec BoxGrid::lower_corner(BoxId id) const {
  const Box b = box(id);
  const Vec s = side();
  Vec x(dim());
  for (int i = 0; i < dim(); ++i)
    x[i] = ambient_.lower()[i] + static_cast<double>(b.index[static_cast<std::size_t>(i)]) * s[i];
  return x;
}

Vec BoxGrid::center(BoxId id) const { return lower_corner(id) + radius(); }

bool BoxGrid::closure_contains(BoxId id, const Vec& p, double tol) const {
  const Vec lo = lower_corner(id);
  const Vec s = side();
  for (int i = 0; i < dim(); ++i) {
    double off = p[i] - lo[i];
    if (ambient_.is_torus()) off -= std::floor(off + tol);
    if (off < -tol || off > s[i] + tol) return false;
  }
  return true;
}

std::vector<BoxId> BoxGrid::children(BoxId id) const {
  const BoxGrid fine = subdivide();
  const Box b = box(id);
  const int d = dim();
  std::vector<BoxId> out;
  out.reserve(std::size_t{1} << d);
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    Box c{depth_ + 1, MultiIndex(b.index.size())};
    for (int i = 0; i < d; ++i)
      c.index[static_cast<std::size_t>(i)] =
          2 * b.index[static_cast<std::size_t>(i)] + ((mask >> (d - 1 - i)) & 1u);
    out.push_back(fine.id(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

BoxId BoxGrid::parent(BoxId id) const {
  if (depth_ == 0) throw Error(ErrorKind::domain, kStage, "depth-0 boxes have no parent");
  const BoxGrid coarse(ambient_, depth_ - 1, max_depth_);
  Box b = box(id);
  b.depth = depth_ - 1;
  for (auto& k : b.index) k /= 2;
  return coarse.id(b);
}

void BoxGrid::boxes_meeting(const Vec& c, const Vec& r, std::vector<BoxId>& out) const {
  const int d = dim();
  const Vec s = side();
  std::vector<std::int64_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const auto n = cells_[static_cast<std::size_t>(i)];
    const double a = (c[i] - r[i] - ambient_.lower()[i]) / s[i];
    const double b = (c[i] + r[i] - ambient_.lower()[i]) / s[i];
    std::int64_t k0 = static_cast<std::int64_t>(std::ceil(a)) - 1;
    std::int64_t k1 = static_cast<std::int64_t>(std::floor(b));
    if (ambient_.is_torus()) {
      if (k1 - k0 + 1 >= n) {
        k0 = 0;
        k1 = n - 1;
      }
    } else {
      k0 = std::max<std::int64_t>(k0, 0);
      k1 = std::min<std::int64_t>(k1, n - 1);
      if (k0 > k1) return;
    }
    lo[static_cast<std::size_t>(i)] = k0;
    hi[static_cast<std::size_t>(i)] = k1;
  }
  std::vector<std::int64_t> k(lo);
  while (true) {
    BoxId id = 0;
    for (int i = 0; i < d; ++i) {
      const auto n = cells_[static_cast<std::size_t>(i)];
      std::int64_t m = k[static_cast<std::size_t>(i)] % n;
      if (m < 0) m += n;
      id = id * static_cast<BoxId>(n) + static_cast<BoxId>(m);
    }
    out.push_back(id);
    int i = d - 1;
    while (i >= 0 && ++k[static_cast<std::size_t>(i)] > hi[static_cast<std::size_t>(i)]) {
      k[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
      --i;
    }
    if (i < 0) break;
  }
}

// ---------------------------------------------------------------------------

BoxSet::BoxSet(std::vector<BoxId> ids, const BoxGrid& grid) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  if (!ids_.empty() && !grid.valid(ids_.back()))
    throw Error(ErrorKind::domain, kStage, "box id outside grid", std::to_string(ids_.back()));
}

bool BoxSet::contains(BoxId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

// ---------------------------------------------------------------------------

double directed_hausdorff(const Ambient& ambient, std::span<const Vec> a, std::span<const Vec> b) {
  double worst = 0.0;
  for (const Vec& x : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& y : b) {
      best = std::min(best, ambient.distance(x, y));
      if (best <= worst) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double hausdorff_distance(const Ambient& ambient, std::span<const Vec> a, std::span<const Vec> b) {
  if (a.empty() && b.empty())
    throw Error(ErrorKind::domain, kStage, "Hausdorff distance of two empty sets");
  if (a.empty() || b.empty()) return ambient.diameter();
  return std::max(directed_hausdorff(ambient, a, b), directed_hausdorff(ambient, b, a));
}

}  // namespace chainrec
