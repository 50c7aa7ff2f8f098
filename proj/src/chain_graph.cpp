#include "chainrec/chain_graph.hpp"

#include "chainrec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <thread>

namespace chainrec {

namespace {

constexpr const char* kStage = "chain_graph";
constexpr int kNone = -1;

struct GraphChunk {
  std::vector<std::uint64_t> counts;
  std::vector<BoxId> targets;
};

void image_targets(const System& sys, const BoxGrid& grid, const GraphOptions& opt, BoxId u,
                   std::vector<Vec>& images, std::vector<BoxId>& out) {
  const int d = grid.dim();
  const int s = opt.samples_per_axis;
  const Vec lo = grid.lower_corner(u);
  const Vec side = grid.side();
  const Ambient& amb = sys.ambient();

  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(s);
  images.resize(total);

  std::vector<int> k(static_cast<std::size_t>(d), 0);
  Vec p(d);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rest = n;
    for (int i = d - 1; i >= 0; --i) {
      k[static_cast<std::size_t>(i)] = static_cast<int>(rest % static_cast<std::size_t>(s));
      rest /= static_cast<std::size_t>(s);
    }
    for (int i = 0; i < d; ++i) {
      // Corners are hit exactly so fixed points on grid vertices are sampled.
      const int ki = k[static_cast<std::size_t>(i)];
      p[i] = ki == s - 1 ? lo[i] + side[i] : lo[i] + side[i] * ki / (s - 1);
      if (!amb.is_torus()) p[i] = std::min(p[i], amb.upper()[i]);
    }
    try {
      images[n] = sys.step(p);
    } catch (const Error& e) {
      throw Error(e.kind(), kStage, std::string("box image evaluation failed: ") + e.what(),
                  "box " + std::to_string(u));
    }
  }

  double radius = opt.epsilon;
  if (opt.lipschitz) {
    radius += *opt.lipschitz * grid.radius().norm();
  } else {
    // Every point of a parallelepiped lies within half its longest main
    // diagonal of some vertex; apply that to the image of each sample cell.
    double spread = 0.0;
    std::vector<std::size_t> strides(static_cast<std::size_t>(d));
    std::size_t stride = 1;
    for (int i = d - 1; i >= 0; --i) {
      strides[static_cast<std::size_t>(i)] = stride;
      stride *= static_cast<std::size_t>(s);
    }
    const std::size_t diagonals = std::size_t{1} << (d - 1);
    for (std::size_t n = 0; n < total; ++n) {
      bool base = true;
      for (int i = 0; i < d && base; ++i)
        base = (n / strides[static_cast<std::size_t>(i)]) % static_cast<std::size_t>(s) != static_cast<std::size_t>(s - 1);
      if (!base) continue;
      for (std::size_t mask = 0; mask < diagonals; ++mask) {
        std::size_t a = n, b = n;
        for (int i = 0; i < d; ++i) {
          // axis d-1 always goes to b so each diagonal is visited once
          if (i < d - 1 && (mask >> i) & 1U) a += strides[static_cast<std::size_t>(i)];
          else b += strides[static_cast<std::size_t>(i)];
        }
        spread = std::max(spread, amb.distance(images[a], images[b]));
      }
    }
    radius += 0.5 * spread;
  }

  const Vec r = Vec::Constant(d, radius);
  const std::size_t first = out.size();
  for (const Vec& y : images) grid.boxes_meeting(y, r, out);
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
  out.erase(std::unique(out.begin() + static_cast<std::ptrdiff_t>(first), out.end()), out.end());
}

std::vector<bool> reverse_reach(const TransitionGraph& rev, const std::vector<BoxId>& sources) {
  std::vector<bool> seen(rev.size(), false);
  std::vector<BoxId> stack;
  for (BoxId s : sources)
    if (!seen[s]) {
      seen[s] = true;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    const BoxId u = stack.back();
    stack.pop_back();
    for (BoxId v : rev.successors(u))
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
  }
  return seen;
}

BoxSet complement_of(const std::vector<bool>& mask) {
  std::vector<BoxId> ids;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) ids.push_back(i);
  return BoxSet::from_sorted(std::move(ids));
}

BoxSet set_of(const std::vector<bool>& mask) {
  std::vector<BoxId> ids;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) ids.push_back(i);
  return BoxSet::from_sorted(std::move(ids));
}

void check_class(const ChainDecomposition& dec, int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= dec.classes.size())
    throw Error(ErrorKind::domain, kStage, "unknown class id", std::to_string(id));
}

}  // namespace

// ---------------------------------------------------------------------------

TransitionGraph::TransitionGraph(BoxGrid grid, double epsilon, bool rigorous,
                                 std::vector<std::uint64_t> offsets, std::vector<BoxId> targets,
                                 std::uint32_t samples_per_box)
    : grid_(std::move(grid)),
      epsilon_(epsilon),
      rigorous_(rigorous),
      offsets_(std::move(offsets)),
      targets_(std::move(targets)),
      samples_per_box_(samples_per_box) {
  if (offsets_.size() != grid_.box_count() + 1 || offsets_.back() != targets_.size())
    throw Error(ErrorKind::internal, kStage, "inconsistent adjacency arrays");
  for (BoxId t : targets_)
    if (!grid_.valid(t)) throw Error(ErrorKind::internal, kStage, "edge to invalid box", std::to_string(t));
}

TransitionGraph TransitionGraph::from_edges(std::size_t n,
                                            std::span<const std::pair<BoxId, BoxId>> edges) {
  if (n == 0) throw Error(ErrorKind::config, kStage, "graph must have at least one vertex");
  BoxGrid grid(Ambient::box(Vec::Zero(1), Vec::Constant(1, static_cast<double>(n)),
                            {static_cast<int>(n)}),
               0);
  std::vector<std::vector<BoxId>> adj(n);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw Error(ErrorKind::domain, kStage, "edge endpoint out of range");
    adj[u].push_back(v);
  }
  std::vector<std::uint64_t> offsets{0};
  std::vector<BoxId> targets;
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    targets.insert(targets.end(), a.begin(), a.end());
    offsets.push_back(targets.size());
  }
  return TransitionGraph(std::move(grid), 0.0, false, std::move(offsets), std::move(targets), 0);
}

bool TransitionGraph::has_edge(BoxId u, BoxId v) const {
  const auto s = successors(u);
  return std::binary_search(s.begin(), s.end(), v);
}

TransitionGraph TransitionGraph::reversed() const {
  const std::size_t n = size();
  std::vector<std::uint64_t> offsets(n + 1, 0);
  for (BoxId t : targets_) ++offsets[t + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  std::vector<BoxId> targets(targets_.size());
  std::vector<std::uint64_t> fill(offsets.begin(), offsets.end() - 1);
  for (BoxId u = 0; u < n; ++u)
    for (BoxId v : successors(u)) targets[fill[v]++] = u;  // u ascending keeps lists sorted
  return TransitionGraph(grid_, epsilon_, rigorous_, std::move(offsets), std::move(targets),
                         samples_per_box_);
}

TransitionGraph build_transition_graph(const System& sys, const BoxGrid& grid,
                                       const GraphOptions& opt) {
  if (!(opt.epsilon >= 0.0)) throw Error(ErrorKind::config, kStage, "epsilon must be >= 0");
  if (opt.samples_per_axis < 2) throw Error(ErrorKind::config, kStage, "samples_per_axis must be >= 2");
  if (opt.lipschitz && !(*opt.lipschitz >= 0.0))
    throw Error(ErrorKind::config, kStage, "Lipschitz bound must be >= 0");
  if (!(grid.ambient() == sys.ambient()))
    throw Error(ErrorKind::config, kStage, "grid ambient differs from system ambient");

  const std::uint64_t n = grid.box_count();
  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(std::min<std::uint64_t>(n, 256))));
  std::vector<GraphChunk> chunks(threads);
  std::vector<std::exception_ptr> failures(threads);

  auto work = [&](unsigned t) {
    try {
      const std::uint64_t begin = n * t / threads, end = n * (t + 1) / threads;
      GraphChunk& c = chunks[t];
      c.counts.reserve(end - begin);
      std::vector<Vec> images;
      for (BoxId u = begin; u < end; ++u) {
        const std::size_t before = c.targets.size();
        image_targets(sys, grid, opt, u, images, c.targets);
        c.counts.push_back(c.targets.size() - before);
      }
    } catch (...) {
      failures[t] = std::current_exception();
    }
  };

  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::vector<std::uint64_t> offsets{0};
  offsets.reserve(n + 1);
  std::vector<BoxId> targets;
  std::size_t total = 0;
  for (auto& c : chunks) total += c.targets.size();
  targets.reserve(total);
  for (auto& c : chunks) {
    for (auto k : c.counts) offsets.push_back(offsets.back() + k);
    targets.insert(targets.end(), c.targets.begin(), c.targets.end());
    c = GraphChunk{};
  }

  std::uint32_t samples = 1;
  for (int i = 0; i < grid.dim(); ++i) samples *= static_cast<std::uint32_t>(opt.samples_per_axis);
  return TransitionGraph(grid, opt.epsilon, opt.lipschitz.has_value(), std::move(offsets),
                         std::move(targets), samples);
}

// ---------------------------------------------------------------------------

CondensationOrder::CondensationOrder(std::vector<int> ids, std::vector<std::vector<bool>> closure)
    : ids_(std::move(ids)), closure_(std::move(closure)) {}

std::size_t CondensationOrder::slot(int id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id)
    throw Error(ErrorKind::domain, kStage, "not a recurrent class", std::to_string(id));
  return static_cast<std::size_t>(it - ids_.begin());
}

bool CondensationOrder::reaches(int from, int to) const {
  if (from == to) return false;
  return closure_[slot(from)][slot(to)];
}

std::vector<std::pair<int, int>> CondensationOrder::edges() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t a = 0; a < ids_.size(); ++a)
    for (std::size_t b = 0; b < ids_.size(); ++b)
      if (a != b && closure_[a][b]) out.emplace_back(ids_[a], ids_[b]);
  return out;
}

std::vector<int> CondensationOrder::minimal() const {
  std::vector<int> out;
  for (std::size_t a = 0; a < ids_.size(); ++a) {
    bool sink = true;
    for (std::size_t b = 0; b < ids_.size() && sink; ++b)
      if (a != b && closure_[a][b]) sink = false;
    if (sink) out.push_back(ids_[a]);
  }
  return out;
}

const ChainClass& ChainDecomposition::at(int id) const {
  check_class(*this, id);
  return classes[static_cast<std::size_t>(id)];
}

std::vector<BoxId> ChainDecomposition::recurrent_boxes() const {
  std::vector<BoxId> out;
  for (const auto& c : classes)
    if (c.recurrent) out.insert(out.end(), c.boxes.begin(), c.boxes.end());
  std::sort(out.begin(), out.end());
  return out;
}

ChainDecomposition chain_recurrence_classes(const TransitionGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) throw Error(ErrorKind::config, kStage, "empty graph");

  // Iterative Tarjan.
  constexpr std::uint64_t kUnvisited = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<BoxId> stack;
  std::vector<std::pair<BoxId, std::size_t>> call;
  std::vector<int> comp(n, kNone);
  int comps = 0;
  std::uint64_t counter = 0;

  for (BoxId root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [u, next] = call.back();
      const auto succ = g.successors(u);
      if (next < succ.size()) {
        const BoxId v = succ[next++];
        if (index[v] == kUnvisited) {
          index[v] = low[v] = counter++;
          stack.push_back(v);
          on_stack[v] = true;
          call.emplace_back(v, 0);
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], index[v]);
        }
        continue;
      }
      if (low[u] == index[u]) {
        BoxId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = comps;
        } while (w != u);
        ++comps;
      }
      const BoxId done = u;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }

  // Members, minimum box, recurrence flag per raw component.
  std::vector<std::vector<BoxId>> members(static_cast<std::size_t>(comps));
  for (BoxId u = 0; u < n; ++u) members[static_cast<std::size_t>(comp[u])].push_back(u);
  std::vector<bool> recurrent(static_cast<std::size_t>(comps), false);
  for (BoxId u = 0; u < n; ++u)
    for (BoxId v : g.successors(u))
      if (comp[u] == comp[v]) recurrent[static_cast<std::size_t>(comp[u])] = true;

  std::vector<int> raw(static_cast<std::size_t>(comps));
  for (int c = 0; c < comps; ++c) raw[static_cast<std::size_t>(c)] = c;
  std::sort(raw.begin(), raw.end(), [&](int a, int b) {
    const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
    if (recurrent[ua] != recurrent[ub]) return static_cast<bool>(recurrent[ua]);
    return members[ua].front() < members[ub].front();
  });
  std::vector<int> rename(static_cast<std::size_t>(comps));
  ChainDecomposition dec;
  dec.classes.resize(static_cast<std::size_t>(comps));
  for (int k = 0; k < comps; ++k) {
    const auto r = static_cast<std::size_t>(raw[static_cast<std::size_t>(k)]);
    rename[r] = k;
    auto& cls = dec.classes[static_cast<std::size_t>(k)];
    cls.id = k;
    cls.recurrent = recurrent[r];
    cls.boxes = BoxSet::from_sorted(std::move(members[r]));
  }
  dec.class_of_box.resize(n);
  for (BoxId u = 0; u < n; ++u) dec.class_of_box[u] = rename[static_cast<std::size_t>(comp[u])];

  // Condensation DAG (all classes).
  const auto m = static_cast<std::size_t>(comps);
  std::vector<std::vector<int>> dag(m);
  for (BoxId u = 0; u < n; ++u) {
    const int cu = dec.class_of_box[u];
    for (BoxId v : g.successors(u)) {
      const int cv = dec.class_of_box[v];
      if (cu != cv) dag[static_cast<std::size_t>(cu)].push_back(cv);
    }
  }
  std::vector<int> indeg(m, 0);
  for (auto& out : dag) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (int v : out) ++indeg[static_cast<std::size_t>(v)];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t c = 0; c < m; ++c)
    if (indeg[c] == 0) ready.push(static_cast<int>(c));
  while (!ready.empty()) {
    const int c = ready.top();
    ready.pop();
    dec.topological_order.push_back(c);
    for (int v : dag[static_cast<std::size_t>(c)])
      if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  if (dec.topological_order.size() != m)
    throw Error(ErrorKind::internal, kStage, "condensation is not acyclic");

  // Reachability among recurrent classes: one DAG search per recurrent class.
  std::vector<int> rec_ids;
  for (const auto& c : dec.classes)
    if (c.recurrent) rec_ids.push_back(c.id);
  const std::size_t r = rec_ids.size();
  std::vector<std::vector<bool>> closure(r, std::vector<bool>(r, false));
  std::vector<std::size_t> stamp(m, static_cast<std::size_t>(-1));
  std::vector<int> todo;
  for (std::size_t a = 0; a < r; ++a) {
    todo.assign(1, rec_ids[a]);
    stamp[static_cast<std::size_t>(rec_ids[a])] = a;
    while (!todo.empty()) {
      const int c = todo.back();
      todo.pop_back();
      for (int v : dag[static_cast<std::size_t>(c)]) {
        if (stamp[static_cast<std::size_t>(v)] == a) continue;
        stamp[static_cast<std::size_t>(v)] = a;
        // recurrent ids are exactly 0..r-1
        if (static_cast<std::size_t>(v) < r) closure[a][static_cast<std::size_t>(v)] = true;
        todo.push_back(v);
      }
    }
  }
  dec.order = CondensationOrder(std::move(rec_ids), std::move(closure));
  return dec;
}

// ---------------------------------------------------------------------------

std::vector<QuasiAttractor> quasi_attractors(const ChainDecomposition& dec, const TransitionGraph& g) {
  // Per class: which recurrent classes are reachable (itself included):
  // kNone, a single id, or kMany.
  constexpr int kMany = -2;
  const std::size_t m = dec.classes.size();
  std::vector<std::vector<int>> dag(m);
  for (BoxId u = 0; u < g.size(); ++u)
    for (BoxId v : g.successors(u))
      if (dec.class_of_box[u] != dec.class_of_box[v])
        dag[static_cast<std::size_t>(dec.class_of_box[u])].push_back(dec.class_of_box[v]);
  std::vector<int> summary(m, kNone);
  for (auto it = dec.topological_order.rbegin(); it != dec.topological_order.rend(); ++it) {
    const auto c = static_cast<std::size_t>(*it);
    int s = dec.classes[c].recurrent ? static_cast<int>(c) : kNone;
    for (int v : dag[c]) {
      const int t = summary[static_cast<std::size_t>(v)];
      if (t == kNone) continue;
      if (s == kNone) s = t;
      else if (s != t) s = kMany;
    }
    summary[c] = s;
  }

  std::vector<QuasiAttractor> out;
  for (int id : dec.order.minimal()) {
    // Boxes whose reachable recurrent classes are exactly {id}, closed
    // forward over dead-end boxes (only synthetic graphs have those).
    std::vector<bool> in(g.size(), false);
    std::vector<BoxId> stack;
    for (BoxId u = 0; u < g.size(); ++u)
      if (summary[static_cast<std::size_t>(dec.class_of_box[u])] == id) {
        in[u] = true;
        stack.push_back(u);
      }
    while (!stack.empty()) {
      const BoxId u = stack.back();
      stack.pop_back();
      for (BoxId v : g.successors(u))
        if (!in[v]) {
          in[v] = true;
          stack.push_back(v);
        }
    }
    std::vector<BoxId> basin;
    for (BoxId u = 0; u < g.size(); ++u)
      if (in[u]) basin.push_back(u);
    out.push_back({id, BoxSet::from_sorted(std::move(basin))});
  }
  return out;
}

bool has_attracting_neighborhood(const ChainDecomposition& dec, const TransitionGraph& g, int class_id) {
  check_class(dec, class_id);
  std::vector<BoxId> others;
  for (const auto& c : dec.classes)
    if (c.recurrent && c.id != class_id) others.insert(others.end(), c.boxes.begin(), c.boxes.end());
  const auto reach_others = reverse_reach(g.reversed(), others);
  const BoxSet candidate = complement_of(reach_others);
  for (BoxId b : dec.at(class_id).boxes)
    if (!candidate.contains(b)) return false;
  return is_forward_invariant(g, candidate);
}

BoxSet chain_stable_set(const TransitionGraph& g, const ChainDecomposition& dec, int class_id) {
  check_class(dec, class_id);
  return set_of(reverse_reach(g.reversed(), dec.at(class_id).boxes.ids()));
}

BoxSet chain_unstable_set(const TransitionGraph& g, const ChainDecomposition& dec, int class_id) {
  check_class(dec, class_id);
  return set_of(reverse_reach(g, dec.at(class_id).boxes.ids()));
}

bool is_forward_invariant(const TransitionGraph& g, const BoxSet& set) {
  for (BoxId u : set)
    for (BoxId v : g.successors(u))
      if (!set.contains(v)) return false;
  return true;
}

Filtration build_filtration(const ChainDecomposition& dec, const TransitionGraph& g,
                            std::span<const int> selected_in) {
  std::vector<int> selected(selected_in.begin(), selected_in.end());
  for (int id : selected) {
    check_class(dec, id);
    if (!dec.at(id).recurrent)
      throw Error(ErrorKind::config, kStage, "filtration selection must be recurrent", std::to_string(id));
  }
  {
    auto sorted = selected;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorKind::config, kStage, "filtration selection has duplicates");
  }
  std::vector<std::size_t> position(dec.classes.size());
  for (std::size_t i = 0; i < dec.topological_order.size(); ++i)
    position[static_cast<std::size_t>(dec.topological_order[i])] = i;
  std::sort(selected.begin(), selected.end(), [&](int a, int b) {
    return position[static_cast<std::size_t>(a)] < position[static_cast<std::size_t>(b)];
  });

  Filtration f;
  f.selected = selected;
  std::vector<BoxId> all(g.size());
  for (BoxId u = 0; u < g.size(); ++u) all[u] = u;
  f.levels.push_back(BoxSet::from_sorted(std::move(all)));

  const TransitionGraph rev = g.reversed();
  std::vector<BoxId> sources;
  for (std::size_t i = 0; i + 1 < selected.size(); ++i) {
    const auto& boxes = dec.at(selected[i]).boxes;
    sources.insert(sources.end(), boxes.begin(), boxes.end());
    f.levels.push_back(complement_of(reverse_reach(rev, sources)));
  }
  if (!selected.empty()) f.levels.emplace_back();

  // Post-conditions.
  for (std::size_t i = 0; i < f.levels.size(); ++i) {
    if (!is_forward_invariant(g, f.levels[i]))
      throw Error(ErrorKind::internal, kStage, "filtration level is not attracting", std::to_string(i));
  }
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const BoxSet& outer = f.levels[i];
    const BoxSet& inner = f.levels[i + 1];
    if (inner.size() >= outer.size())
      throw Error(ErrorKind::internal, kStage, "filtration is not strictly nested");
    for (BoxId b : inner)
      if (!outer.contains(b)) throw Error(ErrorKind::internal, kStage, "filtration is not nested");
    for (std::size_t j = 0; j < selected.size(); ++j) {
      const auto& boxes = dec.at(selected[j]).boxes;
      const bool in_gap = outer.contains(boxes.ids().front()) && !inner.contains(boxes.ids().front());
      if (in_gap != (i == j))
        throw Error(ErrorKind::internal, kStage, "filtration gap does not isolate exactly one class",
                    std::to_string(i));
    }
  }
  return f;
}

CompleteLyapunovFunction conley_function(const ChainDecomposition& dec, const TransitionGraph& g) {
  const auto m = static_cast<std::int64_t>(dec.classes.size());
  CompleteLyapunovFunction h;
  h.class_value.resize(dec.classes.size());
  for (std::size_t i = 0; i < dec.topological_order.size(); ++i)
    h.class_value[static_cast<std::size_t>(dec.topological_order[i])] =
        Rational(m - static_cast<std::int64_t>(i), m);
  h.box_value.resize(g.size());
  for (BoxId u = 0; u < g.size(); ++u)
    h.box_value[u] = h.class_value[static_cast<std::size_t>(dec.class_of_box[u])];

  for (BoxId u = 0; u < g.size(); ++u)
    for (BoxId v : g.successors(u))
      if (dec.class_of_box[u] != dec.class_of_box[v] && !(h.box_value[v] < h.box_value[u]))
        throw Error(ErrorKind::internal, kStage, "Lyapunov function does not decrease on an edge",
                    std::to_string(u) + "->" + std::to_string(v));
  return h;
}

}  // namespace chainrec
