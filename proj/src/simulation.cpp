#include "robshash/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <limits>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "robshash/error.hpp"
#include "robshash/format.hpp"
#include "robshash/random.hpp"
#include "robshash/robust.hpp"

namespace robshash {

namespace {

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          const std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

void check_fraction(double f) {
  if (!(f >= 0.0 && f < 1.0)) throw InvalidArgument("contamination fraction must lie in [0, 1)");
}

}  // namespace

void ContaminationSpec::validate() const {
  distribution.validate();
  check_fraction(fraction);
  if (n < 1) throw InvalidArgument("contamination: n must be >= 1");
  if (calibration_n < kMinFitSize)
    throw InvalidArgument("contamination: calibration_n must be >= " + std::to_string(kMinFitSize));
}

std::size_t contamination_count(double fraction, std::size_t n) {
  check_fraction(fraction);
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

ShashParams calibrate_shash(const ReferenceDistribution& d, std::size_t calibration_n,
                            std::uint64_t seed) {
  using Key = std::tuple<int, double, double, std::size_t, std::uint64_t>;
  static std::mutex mutex;
  static std::map<Key, ShashParams> cache;
  const Key key{static_cast<int>(d.kind), d.params[0], d.params[1], calibration_n, seed};
  {
    const std::lock_guard lock(mutex);
    if (const auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const Sample s = sample_reference(d, calibration_n, seed);
  const ShashParams p = fit_shash(s).params;
  const std::lock_guard lock(mutex);
  cache.emplace(key, p);
  return p;
}

LabeledSample contaminate(const ContaminationSpec& spec, const ShashParams& params) {
  spec.validate();
  params.validate();
  const Sample raw = sample_reference(spec.distribution, spec.n, stream_seed(spec.seed, Stream::Base));
  std::vector<double> z = shash_transform(raw.values(), params);
  const std::size_t k = contamination_count(spec.fraction, spec.n);

  std::vector<bool> truth(spec.n, false);
  std::vector<std::size_t> idx(spec.n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng index_rng = make_rng(stream_seed(spec.seed, Stream::ContaminationIndex));
  Rng value_rng = make_rng(stream_seed(spec.seed, Stream::ContaminationValue));
  Rng sign_rng = make_rng(stream_seed(spec.seed, Stream::ContaminationSign));
  std::chi_squared_distribution<double> chi2(kContaminantDf);
  std::bernoulli_distribution coin(0.5);
  const bool signed_outliers = spec.distribution.support() == Support::RealLine;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, spec.n - 1);
    std::swap(idx[i], idx[pick(index_rng)]);
    const std::size_t j = idx[i];
    double v = chi2(value_rng) / kContaminantDivisor + kContaminantShift;
    if (signed_outliers && coin(sign_rng)) v = -v;
    z[j] = v;
    truth[j] = true;
  }
  std::vector<double> x(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) x[i] = shash_inverse(z[i], params);
  return {Sample(std::move(x), spec.distribution.support()), std::move(truth)};
}

ConfusionRates confusion(const std::vector<bool>& flags, const std::vector<bool>& truth) {
  if (flags.size() != truth.size()) throw InvalidArgument("confusion: length mismatch");
  ConfusionRates r;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (truth[i]) {
      flags[i] ? ++r.tp : ++r.fn;
    } else {
      flags[i] ? ++r.fp : ++r.tn;
    }
  }
  if (r.tp + r.fn > 0) r.tpr = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  if (r.fp + r.tn > 0) r.fpr = static_cast<double>(r.fp) / static_cast<double>(r.fp + r.tn);
  return r;
}

std::uint64_t replication_seed(std::uint64_t base, std::size_t dist_index, std::size_t rep) {
  return derive_seed(base, {static_cast<std::uint64_t>(Stream::Replication), dist_index, rep});
}

std::uint64_t calibration_seed(std::uint64_t base, std::size_t dist_index) {
  return derive_seed(base, {static_cast<std::uint64_t>(Stream::Calibration), dist_index});
}

void BiasStudyConfig::validate() const {
  if (estimators.empty() || distributions.empty() || fractions.empty())
    throw InvalidArgument("bias study: estimators, distributions and fractions must be non-empty");
  for (const auto& d : distributions) d.validate();
  for (double f : fractions) check_fraction(f);
  if (replications < 1) throw InvalidArgument("bias study: replications must be >= 1");
  if (n < 2) throw InvalidArgument("bias study: n must be >= 2");
}

void StudyConfig::validate() const {
  if (distributions.empty() || methods.empty() || fractions.empty())
    throw InvalidArgument("study: distributions, methods and fractions must be non-empty");
  for (const auto& d : distributions) d.validate();
  for (double f : fractions) check_fraction(f);
  if (replications < 1) throw InvalidArgument("study: replications must be >= 1");
  if (n < kMinFitSize) throw InvalidArgument("study: n must be >= " + std::to_string(kMinFitSize));
  if (calibration_n < kMinFitSize)
    throw InvalidArgument("study: calibration_n must be >= " + std::to_string(kMinFitSize));
  detection.validate();
  if (bias_study) bias.validate();
}

const StudyRow* StudyTable::find(std::size_t dist_index, Method m, double fraction) const {
  for (const auto& r : rows)
    if (r.dist_index == dist_index && r.method == m && r.fraction == fraction) return &r;
  return nullptr;
}

StudyTable run_study(const StudyConfig& cfg) {
  cfg.validate();
  const std::size_t nd = cfg.distributions.size();
  const std::size_t nf = cfg.fractions.size();
  const std::size_t nm = cfg.methods.size();
  const std::size_t nr = cfg.replications;

  std::vector<ShashParams> calib(nd);
  parallel_for(nd, cfg.threads, [&](std::size_t d) {
    calib[d] = calibrate_shash(cfg.distributions[d], cfg.calibration_n, calibration_seed(cfg.seed, d));
  });

  StudyTable table;
  table.distributions = cfg.distributions;
  table.records.resize(nd * nf * nr * nm);
  parallel_for(nd * nf * nr, cfg.threads, [&](std::size_t task) {
    const std::size_t r = task % nr;
    const std::size_t f = (task / nr) % nf;
    const std::size_t d = task / (nr * nf);
    const std::uint64_t seed = replication_seed(cfg.seed, d, r);
    RunRecord* out = &table.records[task * nm];

    std::optional<LabeledSample> ls;
    std::string sample_error;
    try {
      ls = contaminate({cfg.distributions[d], cfg.fractions[f], cfg.n, cfg.calibration_n, seed},
                       calib[d]);
    } catch (const std::exception& e) {
      sample_error = e.what();
    }
    for (std::size_t m = 0; m < nm; ++m) {
      RunRecord& rec = out[m];
      rec.dist_index = d;
      rec.method = cfg.methods[m];
      rec.fraction = cfg.fractions[f];
      rec.replication = r;
      rec.seed = seed;
      if (!ls) {
        rec.failed = true;
        rec.error = sample_error;
        continue;
      }
      DetectionConfig dc = cfg.detection;
      dc.method = cfg.methods[m];
      dc.forest.seed = stream_seed(seed, Stream::Forest);
      try {
        const DetectionResult res = detect(ls->sample, dc);
        rec.converged = res.converged;
        rec.iterations = res.iterations;
        rec.rates = confusion(res.flags, ls->truth);
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  });

  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t f = 0; f < nf; ++f) {
      for (std::size_t m = 0; m < nm; ++m) {
        StudyRow row;
        row.dist_index = d;
        row.method = cfg.methods[m];
        row.fraction = cfg.fractions[f];
        row.replications = nr;
        std::vector<double> tprs;
        std::vector<double> fprs;
        for (std::size_t r = 0; r < nr; ++r) {
          const RunRecord& rec = table.records[((d * nf + f) * nr + r) * nm + m];
          if (rec.failed) {
            ++row.failures;
            continue;
          }
          if (!rec.converged) ++row.non_converged;
          if (rec.rates.tpr) tprs.push_back(*rec.rates.tpr);
          fprs.push_back(rec.rates.fpr);
        }
        row.tpr_runs = tprs.size();
        if (!tprs.empty()) {
          const MeanSd t = mean_sd(tprs);
          row.mean_tpr = t.mean;
          row.sd_tpr = t.sd;
        }
        const MeanSd fp = mean_sd(fprs);
        row.mean_fpr = fp.mean;
        row.sd_fpr = fp.sd;
        table.rows.push_back(row);
      }
    }
  }
  return table;
}

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Median: return "median";
    case Estimator::Mad: return "mad";
    case Estimator::HuberLocation: return "huber_location";
    case Estimator::HuberScale: return "huber_scale";
    case Estimator::Qn: return "qn";
    case Estimator::Sn: return "sn";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view name) {
  for (Estimator e : {Estimator::Median, Estimator::Mad, Estimator::HuberLocation,
                      Estimator::HuberScale, Estimator::Qn, Estimator::Sn})
    if (estimator_name(e) == name) return e;
  throw InvalidArgument("unknown estimator '" + std::string(name) + "'");
}

double apply_estimator(Estimator e, std::span<const double> xs) {
  switch (e) {
    case Estimator::Median: return median(xs);
    case Estimator::Mad: return mad(xs);
    case Estimator::HuberLocation: return huber_location_scale(xs).location;
    case Estimator::HuberScale: return huber_location_scale(xs).scale;
    case Estimator::Qn: return qn(xs);
    case Estimator::Sn: return sn(xs);
  }
  throw InvalidArgument("unknown estimator");
}

std::vector<BiasCell> estimator_bias_study(const BiasStudyConfig& cfg) {
  cfg.validate();
  const std::size_t nd = cfg.distributions.size();
  const std::size_t nf = cfg.fractions.size();
  const std::size_t ne = cfg.estimators.size();
  const std::size_t nr = cfg.replications;

  std::vector<ShashParams> calib(nd);
  parallel_for(nd, cfg.threads, [&](std::size_t d) {
    calib[d] = calibrate_shash(cfg.distributions[d], cfg.calibration_n, calibration_seed(cfg.seed, d));
  });

  // NaN marks a failed estimate.
  std::vector<double> values(nd * nf * nr * ne, std::numeric_limits<double>::quiet_NaN());
  parallel_for(nd * nf * nr, cfg.threads, [&](std::size_t task) {
    const std::size_t r = task % nr;
    const std::size_t f = (task / nr) % nf;
    const std::size_t d = task / (nr * nf);
    try {
      const LabeledSample ls = contaminate(
          {cfg.distributions[d], cfg.fractions[f], cfg.n, cfg.calibration_n,
           replication_seed(cfg.seed, d, r)},
          calib[d]);
      for (std::size_t e = 0; e < ne; ++e) {
        try {
          values[task * ne + e] = apply_estimator(cfg.estimators[e], ls.sample.values());
        } catch (const std::exception&) {
        }
      }
    } catch (const std::exception&) {
    }
  });

  std::vector<BiasCell> cells;
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t f = 0; f < nf; ++f) {
      for (std::size_t e = 0; e < ne; ++e) {
        BiasCell c;
        c.dist_index = d;
        c.estimator = cfg.estimators[e];
        c.fraction = cfg.fractions[f];
        for (std::size_t r = 0; r < nr; ++r) {
          const double v = values[((d * nf + f) * nr + r) * ne + e];
          if (std::isnan(v)) {
            ++c.failures;
          } else {
            c.estimates.push_back(v);
          }
        }
        const MeanSd ms = mean_sd(c.estimates);
        c.mean = ms.mean;
        c.sd = ms.sd;
        cells.push_back(std::move(c));
      }
    }
  }
  return cells;
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

template <class T, class F>
std::string join_map(const std::vector<T>& v, F f) {
  std::vector<std::string> parts;
  for (const auto& x : v) parts.emplace_back(f(x));
  return join(parts);
}

}  // namespace

StudyConfig parse_study_config(std::string_view text) {
  StudyConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(trim(body.substr(0, eq)));
    const std::string_view value = trim(body.substr(eq + 1));
    const std::string where = "config line " + std::to_string(lineno) + ": " + key + ": ";

    auto number = [&](std::string_view v) {
      const auto d = parse_double(v);
      if (!d) throw InvalidArgument(where + "'" + std::string(v) + "' is not a number");
      return *d;
    };
    auto count = [&](std::string_view v) {
      const double d = number(v);
      if (d < 0 || d != std::floor(d) || d > 1e15)
        throw InvalidArgument(where + "'" + std::string(v) + "' is not a non-negative integer");
      return static_cast<std::size_t>(d);
    };
    auto numbers = [&](std::string_view v) {
      std::vector<double> out;
      for (const auto& p : split_list(v)) out.push_back(number(p));
      return out;
    };
    auto distributions = [&](std::string_view v) {
      std::vector<ReferenceDistribution> out;
      for (const auto& p : split_list(v)) {
        try {
          out.push_back(ReferenceDistribution::parse(p));
        } catch (const InvalidArgument& e) {
          throw InvalidArgument(where + e.what());
        }
      }
      return out;
    };
    auto boolean = [&](std::string_view v) {
      if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
      if (v == "false" || v == "off" || v == "0" || v == "no") return false;
      throw InvalidArgument(where + "'" + std::string(v) + "' is not a boolean");
    };

    try {
      if (key == "distributions") {
        cfg.distributions = distributions(value);
      } else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& p : split_list(value)) cfg.methods.push_back(parse_method(p));
      } else if (key == "fractions") {
        cfg.fractions = numbers(value);
      } else if (key == "replications") {
        cfg.replications = count(value);
      } else if (key == "n") {
        cfg.n = count(value);
      } else if (key == "seed") {
        const auto s = trim(value);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
          throw InvalidArgument(where + "'" + std::string(s) + "' is not an unsigned integer");
        cfg.seed = v;
      } else if (key == "calibration_n") {
        cfg.calibration_n = count(value);
      } else if (key == "final_threshold") {
        cfg.detection.final_threshold = number(value);
      } else if (key == "init_cutoff") {
        cfg.detection.init_cutoff = number(value);
      } else if (key == "max_iterations") {
        cfg.detection.max_iterations = static_cast<int>(count(value));
      } else if (key == "truncated_fit") {
        cfg.detection.truncated_fit = boolean(value);
      } else if (key == "forest_trees") {
        cfg.detection.forest.n_trees = count(value);
      } else if (key == "forest_subsample") {
        cfg.detection.forest.subsample_size = count(value);
      } else if (key == "forest_threshold") {
        cfg.detection.forest.score_threshold = number(value);
      } else if (key == "threads") {
        cfg.threads = count(value);
      } else if (key == "bias_study") {
        cfg.bias_study = boolean(value);
      } else if (key == "bias_estimators") {
        cfg.bias.estimators.clear();
        for (const auto& p : split_list(value)) cfg.bias.estimators.push_back(parse_estimator(p));
      } else if (key == "bias_distributions") {
        cfg.bias.distributions = distributions(value);
      } else if (key == "bias_fractions") {
        cfg.bias.fractions = numbers(value);
      } else if (key == "bias_replications") {
        cfg.bias.replications = count(value);
      } else {
        throw InvalidArgument(where + "unknown key");
      }
    } catch (const InvalidArgument& e) {
      const std::string msg = e.what();
      if (msg.rfind("config line", 0) == 0) throw;
      throw InvalidArgument(where + msg);
    }
  }
  cfg.bias.seed = cfg.seed;
  cfg.bias.n = cfg.n;
  cfg.bias.calibration_n = cfg.calibration_n;
  cfg.bias.threads = cfg.threads;
  cfg.validate();
  return cfg;
}

std::string format_study_config(const StudyConfig& cfg) {
  std::ostringstream out;
  out << "distributions = "
      << join_map(cfg.distributions, [](const auto& d) { return d.name(); }) << '\n'
      << "methods = " << join_map(cfg.methods, [](Method m) { return std::string(method_name(m)); })
      << '\n'
      << "fractions = " << join_map(cfg.fractions, [](double f) { return format_double(f); }) << '\n'
      << "replications = " << cfg.replications << '\n'
      << "n = " << cfg.n << '\n'
      << "seed = " << cfg.seed << '\n'
      << "calibration_n = " << cfg.calibration_n << '\n'
      << "final_threshold = " << format_double(cfg.detection.final_threshold) << '\n'
      << "init_cutoff = " << format_double(cfg.detection.init_cutoff) << '\n'
      << "max_iterations = " << cfg.detection.max_iterations << '\n'
      << "truncated_fit = " << (cfg.detection.truncated_fit ? "true" : "false") << '\n'
      << "forest_trees = " << cfg.detection.forest.n_trees << '\n'
      << "forest_subsample = " << cfg.detection.forest.subsample_size << '\n'
      << "forest_threshold = " << format_double(cfg.detection.forest.score_threshold) << '\n'
      << "threads = " << cfg.threads << '\n'
      << "bias_study = " << (cfg.bias_study ? "true" : "false") << '\n'
      << "bias_estimators = "
      << join_map(cfg.bias.estimators, [](Estimator e) { return std::string(estimator_name(e)); })
      << '\n'
      << "bias_distributions = "
      << join_map(cfg.bias.distributions, [](const auto& d) { return d.name(); }) << '\n'
      << "bias_fractions = "
      << join_map(cfg.bias.fractions, [](double f) { return format_double(f); }) << '\n'
      << "bias_replications = " << cfg.bias.replications << '\n';
  return out.str();
}

}  // namespace robshash
