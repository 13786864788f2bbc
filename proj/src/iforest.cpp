#include "robshash/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "robshash/error.hpp"
#include "robshash/random.hpp"
#include "robshash/robust.hpp"

namespace robshash {

void IsolationForestConfig::validate() const {
  if (n_trees < 1) throw InvalidArgument("iforest: n_trees must be >= 1");
  if (subsample_size < 2) throw InvalidArgument("iforest: subsample_size must be >= 2");
  if (!(score_threshold > 0.0 && score_threshold < 1.0))
    throw InvalidArgument("iforest: score_threshold must lie in (0, 1)");
}

double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  double h = 0.0;
  for (std::size_t i = n - 1; i >= 1; --i) h += 1.0 / static_cast<double>(i);
  const double m = static_cast<double>(n);
  return 2.0 * h - 2.0 * (m - 1.0) / m;
}

namespace {

struct TreeBuilder {
  IsolationForest::Tree& nodes;
  std::size_t height_limit;
  Rng& rng;

  std::int32_t grow(std::span<double> pts, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes.size());
    IsolationForest::Node node;
    node.size = static_cast<std::uint32_t>(pts.size());
    node.depth = static_cast<std::uint16_t>(depth);
    nodes.push_back(node);
    if (pts.size() <= 1 || depth >= height_limit) return id;
    const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end());
    const double a = *lo;
    const double b = *hi;
    if (!(a < b)) return id;

    std::uniform_real_distribution<double> u(a, b);
    double split = u(rng);
    while (split <= a) split = u(rng);
    const auto mid = std::partition(pts.begin(), pts.end(), [&](double v) { return v < split; });
    const auto n_left = static_cast<std::size_t>(mid - pts.begin());

    nodes[static_cast<std::size_t>(id)].split = split;
    const std::int32_t l = grow(pts.first(n_left), depth + 1);
    const std::int32_t r = grow(pts.subspan(n_left), depth + 1);
    nodes[static_cast<std::size_t>(id)].left = l;
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

}  // namespace

IsolationForest::IsolationForest(std::span<const double> xs, const IsolationForestConfig& cfg) {
  cfg.validate();
  if (xs.size() < 2) throw InvalidArgument("iforest: need at least 2 observations");
  for (double x : xs)
    if (!std::isfinite(x)) throw InvalidArgument("iforest: non-finite observation");

  psi_ = std::min(cfg.subsample_size, xs.size());
  height_limit_ = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(psi_))));
  normalizer_ = average_path_length(psi_);

  std::vector<std::size_t> idx(xs.size());
  std::vector<double> pts(psi_);
  trees_.reserve(cfg.n_trees);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    Rng rng = make_rng(derive_seed(stream_seed(cfg.seed, Stream::Forest), {t}));
    // Partial Fisher-Yates: the first psi entries form the subsample.
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < psi_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      pts[i] = xs[idx[i]];
    }
    Tree tree;
    tree.reserve(2 * psi_);
    TreeBuilder{tree, height_limit_, rng}.grow(pts, 0);
    trees_.push_back(std::move(tree));
  }
}

double IsolationForest::path_length(const Tree& t, double x) const {
  std::size_t i = 0;
  while (t[i].left >= 0) i = static_cast<std::size_t>(x < t[i].split ? t[i].left : t[i].right);
  return static_cast<double>(t[i].depth) + average_path_length(t[i].size);
}

double IsolationForest::score(double x) const {
  double total = 0.0;
  for (const Tree& t : trees_) total += path_length(t, x);
  const double mean = total / static_cast<double>(trees_.size());
  return std::exp2(-mean / normalizer_);
}

std::vector<double> IsolationForest::scores(std::span<const double> xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(score(x));
  return out;
}

std::size_t InitLabels::count() const noexcept {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

InitLabels zscore_init(const Sample& s, double cutoff) {
  if (!(cutoff > 0.0)) throw InvalidArgument("zscore_init: cutoff must be > 0");
  const auto xs = s.values();
  const double m = median(xs);
  const double d = mad(xs);
  if (!(d > 0.0)) throw DegenerateSample("zscore_init: MAD is zero");
  const bool two_sided = s.support() == Support::RealLine;
  InitLabels out;
  out.flags.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double z = (xs[i] - m) / d;
    out.flags[i] = z > cutoff || (two_sided && z < -cutoff);
  }
  out.upper_cut = m + cutoff * d;
  if (two_sided) out.lower_cut = m - cutoff * d;
  return out;
}

InitLabels iforest_init(const Sample& s, const IsolationForestConfig& cfg) {
  const auto xs = s.values();
  const IsolationForest forest(xs, cfg);
  const std::vector<double> sc = forest.scores(xs);
  const double m = median(xs);
  const bool two_sided = s.support() == Support::RealLine;

  InitLabels out;
  out.flags.assign(xs.size(), false);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (sc[i] < cfg.score_threshold) continue;
    if (xs[i] > m) {
      if (!out.upper_cut || xs[i] < *out.upper_cut) out.upper_cut = xs[i];
    } else if (two_sided && xs[i] < m) {
      if (!out.lower_cut || xs[i] > *out.lower_cut) out.lower_cut = xs[i];
    }
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
    out.flags[i] = (out.upper_cut && xs[i] >= *out.upper_cut) ||
                   (out.lower_cut && xs[i] <= *out.lower_cut);
  return out;
}

InitLabels union_labels(const InitLabels& a, const InitLabels& b) {
  if (a.flags.size() != b.flags.size()) throw InvalidArgument("union_labels: length mismatch");
  InitLabels out;
  out.flags.resize(a.flags.size());
  for (std::size_t i = 0; i < a.flags.size(); ++i) out.flags[i] = a.flags[i] || b.flags[i];
  auto widen = [](std::optional<double> p, std::optional<double> q, auto pick) {
    if (p && q) return std::optional<double>(pick(*p, *q));
    return p ? p : q;
  };
  out.upper_cut = widen(a.upper_cut, b.upper_cut, [](double u, double v) { return std::min(u, v); });
  out.lower_cut = widen(a.lower_cut, b.lower_cut, [](double u, double v) { return std::max(u, v); });
  return out;
}

}  // namespace robshash
