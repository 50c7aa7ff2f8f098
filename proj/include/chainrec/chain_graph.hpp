#pragma once

#include "chainrec/phase_space.hpp"
#include "chainrec/rational.hpp"
#include "chainrec/systems.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace chainrec {

struct GraphOptions {
  /// Inflation radius in ambient units.
  double epsilon = 0.0;
  /// Sample lattice per axis (corners included).
  int samples_per_axis = 3;
  /// When set, images are inflated by L * box_radius + epsilon and the graph
  /// is a guaranteed outer enclosure.
  std::optional<double> lipschitz;
  unsigned threads = 1;
};

/// Directed graph over the boxes of one grid in compressed adjacency form.
/// Successor lists are sorted and duplicate-free.
class TransitionGraph {
 public:
  TransitionGraph(BoxGrid grid, double epsilon, bool rigorous, std::vector<std::uint64_t> offsets,
                  std::vector<BoxId> targets, std::uint32_t samples_per_box);

  /// Synthetic graph over `n` vertices: a one-dimensional box-space grid with
  /// n cells is used as the carrier.
  static TransitionGraph from_edges(std::size_t n, std::span<const std::pair<BoxId, BoxId>> edges);

  const BoxGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return targets_.size(); }
  double epsilon() const noexcept { return epsilon_; }
  bool rigorous() const noexcept { return rigorous_; }
  std::uint32_t samples_per_box() const noexcept { return samples_per_box_; }

  std::span<const BoxId> successors(BoxId u) const {
    return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
  }
  bool has_edge(BoxId u, BoxId v) const;

  TransitionGraph reversed() const;

 private:
  BoxGrid grid_;
  double epsilon_;
  bool rigorous_;
  std::vector<std::uint64_t> offsets_;
  std::vector<BoxId> targets_;
  std::uint32_t samples_per_box_;
};

/// Outer approximation of the epsilon-inflated box images. Evaluation
/// failures propagate with the offending box id as entity.
TransitionGraph build_transition_graph(const System& sys, const BoxGrid& grid,
                                       const GraphOptions& options);

struct ChainClass {
  int id = 0;
  BoxSet boxes;
  /// True iff the induced subgraph has at least one edge.
  bool recurrent = false;
};

/// Partial order between recurrent classes: reaches(a, b) iff a directed box
/// path runs from class a to class b (a != b).
class CondensationOrder {
 public:
  CondensationOrder() = default;
  CondensationOrder(std::vector<int> recurrent_ids, std::vector<std::vector<bool>> closure);

  const std::vector<int>& recurrent_ids() const noexcept { return ids_; }
  bool reaches(int from, int to) const;
  /// All (a, b) with a != b and reaches(a, b), sorted.
  std::vector<std::pair<int, int>> edges() const;
  /// Recurrent classes with no path to another recurrent class.
  std::vector<int> minimal() const;

 private:
  std::size_t slot(int id) const;

  std::vector<int> ids_;
  std::vector<std::vector<bool>> closure_;
};

/// SCC decomposition. Recurrent classes are numbered first (0..R-1), then
/// transient ones, each group ordered by smallest member box id.
struct ChainDecomposition {
  std::vector<ChainClass> classes;
  std::vector<int> class_of_box;
  /// All class ids in a topological order of the condensation (sources first,
  /// ties by id).
  std::vector<int> topological_order;
  CondensationOrder order;

  std::size_t recurrent_count() const noexcept { return order.recurrent_ids().size(); }
  const ChainClass& at(int id) const;
  /// Union of recurrent class boxes: the box approximation of R(f).
  std::vector<BoxId> recurrent_boxes() const;
};

ChainDecomposition chain_recurrence_classes(const TransitionGraph& g);

struct QuasiAttractor {
  int class_id = 0;
  /// Boxes whose paths reach no other recurrent class and reach this one,
  /// plus dead-end boxes they lead to. Forward invariant, contains the class.
  BoxSet basin;
};

std::vector<QuasiAttractor> quasi_attractors(const ChainDecomposition& dec, const TransitionGraph& g);

/// Graph-level attracting characterization: the class admits a forward
/// invariant box neighborhood avoiding every other recurrent class.
bool has_attracting_neighborhood(const ChainDecomposition& dec, const TransitionGraph& g, int class_id);

/// Boxes with a directed path into the class (graph-level pW^s).
BoxSet chain_stable_set(const TransitionGraph& g, const ChainDecomposition& dec, int class_id);
/// Boxes reachable from the class (graph-level pW^u).
BoxSet chain_unstable_set(const TransitionGraph& g, const ChainDecomposition& dec, int class_id);

struct Filtration {
  /// levels[0] = all boxes ... levels.back() = empty.
  std::vector<BoxSet> levels;
  /// selected[i] is the class isolated by levels[i] \ levels[i+1].
  std::vector<int> selected;
  std::size_t length() const noexcept { return selected.size(); }
};

Filtration build_filtration(const ChainDecomposition& dec, const TransitionGraph& g,
                            std::span<const int> selected);

/// True iff every edge leaving a box of `set` lands in `set`.
bool is_forward_invariant(const TransitionGraph& g, const BoxSet& set);

struct CompleteLyapunovFunction {
  std::vector<Rational> box_value;
  std::vector<Rational> class_value;
};

CompleteLyapunovFunction conley_function(const ChainDecomposition& dec, const TransitionGraph& g);

}  // namespace chainrec
