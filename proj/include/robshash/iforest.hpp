#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "robshash/distributions.hpp"

namespace robshash {

struct IsolationForestConfig {
  std::size_t n_trees = 100;
  /// Capped at the sample size when building.
  std::size_t subsample_size = 256;
  std::uint64_t seed = 0;
  double score_threshold = 0.6;

  void validate() const;
};

/// Average unsuccessful-search path length of a binary search tree on n
/// points: 2 H(n-1) - 2 (n-1) / n, with c(0) = c(1) = 0.
double average_path_length(std::size_t n);

// Single-attribute isolation forest.
class IsolationForest {
 public:
  struct Node {
    double split = 0.0;
    // Children index into the owning tree's node vector; -1 marks a leaf.
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t size = 0;
    std::uint16_t depth = 0;
  };
  using Tree = std::vector<Node>;

  /// Each tree draws its own subsample without replacement from a stream
  /// keyed by (seed, tree index). Throws InvalidArgument for n < 2.
  IsolationForest(std::span<const double> xs, const IsolationForestConfig& cfg);

  /// 2^(-E[h(x)] / c(psi)); path lengths ending in a leaf holding m > 1
  /// points are extended by c(m).
  [[nodiscard]] double score(double x) const;
  [[nodiscard]] std::vector<double> scores(std::span<const double> xs) const;

  /// Depth of x's leaf plus the c(leaf size) extension, in one tree.
  [[nodiscard]] double path_length(const Tree& t, double x) const;

  [[nodiscard]] const std::vector<Tree>& trees() const noexcept { return trees_; }
  [[nodiscard]] std::size_t subsample_size() const noexcept { return psi_; }
  [[nodiscard]] std::size_t height_limit() const noexcept { return height_limit_; }
  [[nodiscard]] double normalizer() const noexcept { return normalizer_; }

 private:
  std::vector<Tree> trees_;
  std::size_t psi_ = 0;
  std::size_t height_limit_ = 0;
  double normalizer_ = 1.0;
};

inline IsolationForest build_forest(const Sample& s, const IsolationForestConfig& cfg) {
  return IsolationForest(s.values(), cfg);
}

struct InitLabels {
  std::vector<bool> flags;
  // Data-unit cut points. PositiveReal samples only ever carry upper_cut.
  std::optional<double> lower_cut;
  std::optional<double> upper_cut;

  [[nodiscard]] std::size_t count() const noexcept;
};

/// Flags robust z-scores strictly beyond +cutoff, and below -cutoff for
/// RealLine support. Cuts are the boundary values median +- cutoff * MAD.
/// Throws DegenerateSample when the MAD is zero.
InitLabels zscore_init(const Sample& s, double cutoff = 2.58);

/// Isolation-forest initialization. Points scoring at least the threshold are
/// split into tails by their sign relative to the median. In the upper tail
/// the smallest such value becomes upper_cut and every value >= it is
/// flagged; the lower tail mirrors this with the largest such value and <=.
/// PositiveReal samples use the upper tail only.
InitLabels iforest_init(const Sample& s, const IsolationForestConfig& cfg);

/// Element-wise OR of the flags; cuts widen to cover both label sets.
InitLabels union_labels(const InitLabels& a, const InitLabels& b);

}  // namespace robshash
