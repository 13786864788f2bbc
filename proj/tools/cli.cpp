#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <variant>

#include "robshash/datasets.hpp"
#include "robshash/detect.hpp"
#include "robshash/error.hpp"
#include "robshash/format.hpp"
#include "robshash/plotdata.hpp"
#include "robshash/robust.hpp"
#include "robshash/shash_fit.hpp"
#include "robshash/simulation.hpp"

namespace robshash::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Output files keyed by name, written only after the whole command succeeded.
using Files = std::map<std::string, std::string>;

struct InputArgs {
  std::string file;
  std::string builtin;
  std::string column;
  std::string support = "auto";
};

struct Loaded {
  IngestedColumn data;
  std::string digest;
  // Row labels and truth, available for builtin datasets only.
  std::vector<std::string> labels;
  std::optional<std::vector<std::size_t>> known_outliers;
};

std::string hex_digest(std::string_view bytes) {
  std::ostringstream s;
  s << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(bytes);
  return s.str();
}

Loaded load_input(const InputArgs& in) {
  if (in.file.empty() == in.builtin.empty())
    throw InvalidArgument("exactly one of --input or --builtin is required");
  if (in.column.empty()) throw InvalidArgument("--column is required");
  const SupportChoice support = parse_support_choice(in.support);
  if (!in.builtin.empty()) {
    const BenchmarkDataset ds = load_builtin(in.builtin);
    Loaded out{builtin_column(ds, in.column, support), hex_digest(builtin_csv(in.builtin)),
               ds.row_labels, ds.known_outlier_indices};
    return out;
  }
  const std::string text = read_file(in.file);
  return {ingest_csv_text(text, in.column, support), hex_digest(text), {}, std::nullopt};
}

Json input_json(const InputArgs& in, const Loaded& l) {
  Json j;
  if (!in.builtin.empty()) {
    j["builtin"] = in.builtin;
  } else {
    j["file"] = in.file;
  }
  j["column"] = in.column;
  j["support"] = in.support;
  j["digest"] = l.digest;
  return j;
}

InputArgs input_from_json(const Json& j) {
  InputArgs in;
  if (j.contains("builtin")) in.builtin = j.at("builtin").get<std::string>();
  if (j.contains("file")) in.file = j.at("file").get<std::string>();
  in.column = j.at("column").get<std::string>();
  in.support = j.at("support").get<std::string>();
  return in;
}

void check_digest(const Json& input, const Loaded& l) {
  const auto expected = input.at("digest").get<std::string>();
  if (expected != l.digest)
    throw DataError("input digest " + l.digest + " does not match the manifest's " + expected);
}

Json manifest(std::string_view subcommand, std::optional<std::uint64_t> seed, Json config,
              Json input) {
  Json m;
  m["tool"] = "robshash";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["seed"] = seed ? Json(*seed) : Json(nullptr);
  m["config"] = std::move(config);
  m["input"] = std::move(input);
  return m;
}

Json optional_json(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

Json fit_config_json(const FitConfig& f) {
  return {{"max_iterations", f.max_iterations},
          {"objective_tolerance", f.objective_tolerance},
          {"parameter_tolerance", f.parameter_tolerance},
          {"nu_starts", f.nu_starts},
          {"tau_starts", f.tau_starts},
          {"screening_size", f.screening_size}};
}

FitConfig fit_config_from_json(const Json& j) {
  FitConfig f;
  f.max_iterations = j.at("max_iterations").get<int>();
  f.objective_tolerance = j.at("objective_tolerance").get<double>();
  f.parameter_tolerance = j.at("parameter_tolerance").get<double>();
  f.nu_starts = j.at("nu_starts").get<std::vector<double>>();
  f.tau_starts = j.at("tau_starts").get<std::vector<double>>();
  f.screening_size = j.at("screening_size").get<std::size_t>();
  return f;
}

Json shash_json(const ShashParams& p) {
  return {{"mu", p.mu}, {"sigma", p.sigma}, {"nu", p.nu}, {"tau", p.tau}};
}

Json params_json(const TransformParams& params) {
  if (const auto* p = std::get_if<ShashParams>(&params)) {
    Json j = shash_json(*p);
    j["kind"] = "shash";
    return j;
  }
  if (const auto* p = std::get_if<PowerParams>(&params)) {
    return {{"kind", p->family == PowerFamily::BoxCox ? "box-cox" : "yeo-johnson"},
            {"lambda", p->lambda},
            {"pre_center", p->pre_center},
            {"pre_scale", p->pre_scale},
            {"post_center", p->post_center},
            {"post_scale", p->post_scale}};
  }
  const auto& ls = std::get<LocationScale>(params);
  return {{"kind", "location-scale"}, {"location", ls.location}, {"scale", ls.scale}};
}

std::string histogram_csv(std::span<const double> xs) {
  std::string s = "lower,upper,count,density\n";
  for (const auto& b : histogram(xs))
    s += format_double(b.lower) + ',' + format_double(b.upper) + ',' + std::to_string(b.count) +
         ',' + format_double(b.density) + '\n';
  return s;
}

std::string qq_csv(std::span<const double> xs) {
  std::string s = "theoretical,sample\n";
  for (const auto& p : normal_qq(xs))
    s += format_double(p.theoretical) + ',' + format_double(p.sample) + '\n';
  return s;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// ---------------------------------------------------------------- detect

struct DetectArgs {
  InputArgs input;
  std::string method = "shash-z";
  double final_threshold = 3.0;
  double init_cutoff = 2.58;
  int max_iterations = 50;
  bool truncated_fit = true;
  std::size_t trees = 100;
  std::size_t subsample = 256;
  double score_threshold = 0.6;
  std::optional<std::uint64_t> seed;
  bool plots = false;
  FitConfig fit;
};

Json detect_config_json(const DetectArgs& a) {
  return {{"method", a.method},
          {"final_threshold", a.final_threshold},
          {"init_cutoff", a.init_cutoff},
          {"max_iterations", a.max_iterations},
          {"truncated_fit", a.truncated_fit},
          {"forest",
           {{"n_trees", a.trees}, {"subsample_size", a.subsample},
            {"score_threshold", a.score_threshold}}},
          {"fit", fit_config_json(a.fit)},
          {"plots", a.plots}};
}

DetectArgs detect_args_from_manifest(const Json& m) {
  DetectArgs a;
  const Json& c = m.at("config");
  a.input = input_from_json(m.at("input"));
  a.method = c.at("method").get<std::string>();
  a.final_threshold = c.at("final_threshold").get<double>();
  a.init_cutoff = c.at("init_cutoff").get<double>();
  a.max_iterations = c.at("max_iterations").get<int>();
  a.truncated_fit = c.at("truncated_fit").get<bool>();
  a.trees = c.at("forest").at("n_trees").get<std::size_t>();
  a.subsample = c.at("forest").at("subsample_size").get<std::size_t>();
  a.score_threshold = c.at("forest").at("score_threshold").get<double>();
  a.fit = fit_config_from_json(c.at("fit"));
  a.plots = c.at("plots").get<bool>();
  a.seed = m.at("seed").get<std::uint64_t>();
  return a;
}

struct CommandOutput {
  Files files;
  Json summary;
  std::vector<std::string> warnings;
};

CommandOutput run_detect(DetectArgs a, const Json* replay_input = nullptr) {
  if (!a.seed) a.seed = std::random_device{}() * 0x100000000ULL + std::random_device{}();
  DetectionConfig cfg;
  cfg.method = parse_method(a.method);
  cfg.final_threshold = a.final_threshold;
  cfg.init_cutoff = a.init_cutoff;
  cfg.max_iterations = a.max_iterations;
  cfg.truncated_fit = a.truncated_fit;
  cfg.forest.n_trees = a.trees;
  cfg.forest.subsample_size = a.subsample;
  cfg.forest.score_threshold = a.score_threshold;
  cfg.forest.seed = *a.seed;
  cfg.fit = a.fit;
  cfg.validate();

  const Loaded l = load_input(a.input);
  if (replay_input) check_digest(*replay_input, l);
  const Sample& s = l.data.sample;
  const DetectionResult r = detect(s, cfg);

  CommandOutput out;
  if (!r.converged) out.warnings.push_back("detection did not converge: " + r.diagnostic);

  const bool labelled = !l.labels.empty();
  std::string rows = labelled ? "row,label,value,transformed,flagged\n"
                              : "row,value,transformed,flagged\n";
  Json flagged_rows = Json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t row = l.data.source_rows[i] + 1;
    rows += std::to_string(row) + ',';
    if (labelled) rows += csv_quote(l.labels[l.data.source_rows[i]]) + ',';
    rows += format_double(s[i]) + ',' + format_double(r.transformed[i]) + ',' +
            (r.flags[i] ? "1" : "0") + '\n';
    if (r.flags[i]) flagged_rows.push_back(row);
  }

  Json summary;
  summary["method"] = method_name(r.method);
  summary["column"] = l.data.report.column_name;
  summary["support"] = support_name(s.support());
  summary["n"] = s.size();
  summary["rows_read"] = l.data.report.rows_read;
  summary["rows_dropped"] = l.data.report.rows_dropped;
  summary["params"] = params_json(r.params);
  summary["iterations"] = r.iterations;
  summary["converged"] = r.converged;
  summary["diagnostic"] = r.diagnostic;
  summary["initial_flags"] = r.initial_flags;
  summary["final_threshold"] = cfg.final_threshold;
  summary["threshold_data_units"] = {{"lower", optional_json(r.threshold_data_units.lower)},
                                     {"upper", optional_json(r.threshold_data_units.upper)}};
  summary["flag_count"] = r.flag_count();
  summary["flagged_rows"] = flagged_rows;
  if (l.known_outliers) {
    std::vector<bool> truth(s.size(), false);
    for (std::size_t i = 0; i < s.size(); ++i)
      truth[i] = std::find(l.known_outliers->begin(), l.known_outliers->end(),
                           l.data.source_rows[i]) != l.known_outliers->end();
    const ConfusionRates c = confusion(r.flags, truth);
    summary["known_outliers"] = {{"true_positives", c.tp},
                                 {"false_positives", c.fp},
                                 {"false_negatives", c.fn}};
  }
  Json trace = Json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"iteration", t.iteration}, {"kept", t.kept}, {"flagged", t.flagged},
                     {"objective", t.objective}});
  summary["trace"] = trace;

  out.files["rows.csv"] = rows;
  out.files["summary.json"] = summary.dump(2) + '\n';
  out.files["manifest.json"] =
      manifest("detect", a.seed, detect_config_json(a), input_json(a.input, l)).dump(2) + '\n';
  if (a.plots) {
    out.files["hist_before.csv"] = histogram_csv(s.values());
    out.files["hist_after.csv"] = histogram_csv(r.transformed);
    out.files["qq_before.csv"] = qq_csv(s.values());
    out.files["qq_after.csv"] = qq_csv(r.transformed);
  }
  out.summary = std::move(summary);
  return out;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  InputArgs input;
  FitConfig fit;
};

CommandOutput run_fit(const FitArgs& a, const Json* replay_input = nullptr) {
  a.fit.validate();
  const Loaded l = load_input(a.input);
  if (replay_input) check_digest(*replay_input, l);
  const FitResult r = fit_shash(l.data.sample, a.fit);
  CommandOutput out;
  if (!r.converged) out.warnings.push_back("SHASH fit did not converge");
  Json summary;
  summary["column"] = l.data.report.column_name;
  summary["n"] = l.data.sample.size();
  summary["rows_dropped"] = l.data.report.rows_dropped;
  summary["params"] = shash_json(r.params);
  summary["neg_log_likelihood"] = r.neg_log_likelihood;
  summary["iterations"] = r.iterations;
  summary["converged"] = r.converged;
  summary["start_index"] = r.start_index;
  out.files["fit.json"] = summary.dump(2) + '\n';
  out.files["manifest.json"] =
      manifest("fit", std::nullopt, {{"fit", fit_config_json(a.fit)}}, input_json(a.input, l))
          .dump(2) +
      '\n';
  out.summary = std::move(summary);
  return out;
}

// ---------------------------------------------------------------- transform

struct TransformArgs {
  InputArgs input;
  std::vector<double> params;
  bool fit = false;
  FitConfig fit_config;
};

CommandOutput run_transform(const TransformArgs& a, const Json* replay_input = nullptr) {
  if (a.fit == !a.params.empty()) throw InvalidArgument("exactly one of --params or --fit is required");
  ShashParams p;
  if (!a.fit) {
    if (a.params.size() != 4) throw InvalidArgument("--params takes mu,sigma,nu,tau");
    p = {a.params[0], a.params[1], a.params[2], a.params[3]};
    p.validate();
  }
  a.fit_config.validate();
  const Loaded l = load_input(a.input);
  if (replay_input) check_digest(*replay_input, l);
  if (a.fit) p = fit_shash(l.data.sample, a.fit_config).params;
  const std::vector<double> z = shash_transform(l.data.sample.values(), p);

  CommandOutput out;
  std::string rows = "row,value,transformed\n";
  for (std::size_t i = 0; i < z.size(); ++i)
    rows += std::to_string(l.data.source_rows[i] + 1) + ',' + format_double(l.data.sample[i]) +
            ',' + format_double(z[i]) + '\n';
  out.files["transformed.csv"] = rows;
  Json config{{"params", a.fit ? Json(nullptr) : Json(a.params)}, {"fit", a.fit}};
  if (a.fit) config["fit_config"] = fit_config_json(a.fit_config);
  out.files["manifest.json"] =
      manifest("transform", std::nullopt, config, input_json(a.input, l)).dump(2) + '\n';
  out.summary = {{"params", shash_json(p)}, {"n", z.size()}};
  return out;
}

// ---------------------------------------------------------------- estimators

CommandOutput run_estimators(const InputArgs& in, const Json* replay_input = nullptr) {
  const Loaded l = load_input(in);
  if (replay_input) check_digest(*replay_input, l);
  const auto xs = l.data.sample.values();
  Json summary;
  summary["column"] = l.data.report.column_name;
  summary["n"] = xs.size();
  for (Estimator e : {Estimator::Median, Estimator::Mad, Estimator::HuberLocation,
                      Estimator::HuberScale, Estimator::Qn, Estimator::Sn}) {
    try {
      summary[std::string(estimator_name(e))] = apply_estimator(e, xs);
    } catch (const std::exception& ex) {
      summary[std::string(estimator_name(e))] = nullptr;
    }
  }
  CommandOutput out;
  out.files["estimators.json"] = summary.dump(2) + '\n';
  out.files["manifest.json"] =
      manifest("estimators", std::nullopt, Json::object(), input_json(in, l)).dump(2) + '\n';
  out.summary = std::move(summary);
  return out;
}

// ---------------------------------------------------------------- simulate

std::string study_csv(const StudyTable& t) {
  std::string s =
      "distribution,method,fraction,replications,failures,non_converged,tpr_runs,mean_tpr,sd_tpr,"
      "mean_fpr,sd_fpr\n";
  for (const auto& r : t.rows)
    s += csv_quote(t.distributions[r.dist_index].name()) + ',' + std::string(method_name(r.method)) +
         ',' + format_double(r.fraction) + ',' + std::to_string(r.replications) + ',' +
         std::to_string(r.failures) + ',' + std::to_string(r.non_converged) + ',' +
         std::to_string(r.tpr_runs) + ',' + format_double(r.mean_tpr) + ',' +
         format_double(r.sd_tpr) + ',' + format_double(r.mean_fpr) + ',' + format_double(r.sd_fpr) +
         '\n';
  return s;
}

std::string runs_csv(const StudyTable& t) {
  std::string s =
      "distribution,method,fraction,replication,seed,failed,converged,iterations,tp,fp,tn,fn,tpr,"
      "fpr,error\n";
  for (const auto& r : t.records)
    s += csv_quote(t.distributions[r.dist_index].name()) + ',' + std::string(method_name(r.method)) +
         ',' + format_double(r.fraction) + ',' + std::to_string(r.replication) + ',' +
         std::to_string(r.seed) + ',' + (r.failed ? "1" : "0") + ',' + (r.converged ? "1" : "0") +
         ',' + std::to_string(r.iterations) + ',' + std::to_string(r.rates.tp) + ',' +
         std::to_string(r.rates.fp) + ',' + std::to_string(r.rates.tn) + ',' +
         std::to_string(r.rates.fn) + ',' + (r.failed ? "" : format_double(r.rates.tpr)) + ',' +
         (r.failed ? "" : format_double(r.rates.fpr)) + ',' + csv_quote(r.error) + '\n';
  return s;
}

struct SimulateArgs {
  std::string config_text;
};

CommandOutput run_simulate(const SimulateArgs& a, std::ostream& err) {
  const StudyConfig cfg = parse_study_config(a.config_text);
  const std::string canonical = format_study_config(cfg);
  CommandOutput out;
  const StudyTable table = run_study(cfg);
  std::size_t failures = 0;
  for (const auto& r : table.records) failures += r.failed ? 1 : 0;
  if (failures > 0) {
    out.warnings.push_back(std::to_string(failures) + " of " +
                           std::to_string(table.records.size()) + " runs failed (see runs.csv)");
  }
  out.files["study.csv"] = study_csv(table);
  out.files["runs.csv"] = runs_csv(table);
  if (cfg.bias_study) {
    const std::vector<BiasCell> cells = estimator_bias_study(cfg.bias);
    std::string summary = "distribution,estimator,fraction,replications,failures,mean,sd\n";
    std::string estimates = "distribution,estimator,fraction,replication,estimate\n";
    for (const auto& c : cells) {
      const std::string dist = csv_quote(cfg.bias.distributions[c.dist_index].name());
      const std::string est(estimator_name(c.estimator));
      summary += dist + ',' + est + ',' + format_double(c.fraction) + ',' +
                 std::to_string(cfg.bias.replications) + ',' + std::to_string(c.failures) + ',' +
                 format_double(c.mean) + ',' + format_double(c.sd) + '\n';
      for (std::size_t i = 0; i < c.estimates.size(); ++i)
        estimates += dist + ',' + est + ',' + format_double(c.fraction) + ',' + std::to_string(i) +
                     ',' + format_double(c.estimates[i]) + '\n';
    }
    out.files["bias_summary.csv"] = summary;
    out.files["bias_estimates.csv"] = estimates;
  }
  out.files["manifest.json"] =
      manifest("simulate", cfg.seed, {{"study", canonical}}, Json::object()).dump(2) + '\n';
  err << "simulate: " << table.rows.size() << " cells, " << table.records.size() << " runs\n";
  out.summary = {{"cells", table.rows.size()}, {"runs", table.records.size()},
                 {"failures", failures}};
  return out;
}

// ---------------------------------------------------------------- plumbing

void write_files(const std::string& dir, const Files& files) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  for (const auto& [name, content] : files) {
    std::ofstream f(root / name, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw DataError("cannot write '" + (root / name).string() + "'");
  }
}

void emit(const CommandOutput& out, const std::string& dir, const std::string& stdout_file,
          std::ostream& os, std::ostream& err) {
  for (const auto& w : out.warnings) err << "warning: " << w << '\n';
  if (!dir.empty()) {
    write_files(dir, out.files);
  } else {
    os << out.files.at(stdout_file);
  }
}

void add_input_options(CLI::App& cmd, InputArgs& in) {
  auto* file = cmd.add_option("--input", in.file, "CSV file with a header row");
  auto* builtin = cmd.add_option("--builtin", in.builtin, "Bundled dataset: hbk, wood, topgear");
  file->excludes(builtin);
  cmd.add_option("--column", in.column, "Column name, or #N for the N-th column")->required();
  cmd.add_option("--support", in.support, "auto, real or positive")
      ->check(CLI::IsMember({"auto", "real", "positive"}));
}

int run_replay(const std::string& path, const std::string& dir, std::ostream& out,
               std::ostream& err) {
  Json m;
  try {
    m = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw DataError("manifest '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    const std::string sub = m.at("subcommand").get<std::string>();
    const Json& c = m.at("config");
    if (sub == "detect") {
      emit(run_detect(detect_args_from_manifest(m), &m.at("input")), dir, "summary.json", out, err);
    } else if (sub == "fit") {
      FitArgs a{input_from_json(m.at("input")), fit_config_from_json(c.at("fit"))};
      emit(run_fit(a, &m.at("input")), dir, "fit.json", out, err);
    } else if (sub == "transform") {
      TransformArgs a;
      a.input = input_from_json(m.at("input"));
      a.fit = c.at("fit").get<bool>();
      if (a.fit) {
        a.fit_config = fit_config_from_json(c.at("fit_config"));
      } else {
        a.params = c.at("params").get<std::vector<double>>();
      }
      emit(run_transform(a, &m.at("input")), dir, "transformed.csv", out, err);
    } else if (sub == "estimators") {
      emit(run_estimators(input_from_json(m.at("input")), &m.at("input")), dir, "estimators.json",
           out, err);
    } else if (sub == "simulate") {
      if (dir.empty()) throw InvalidArgument("replaying a simulation requires --out");
      emit(run_simulate({c.at("study").get<std::string>()}, err), dir, "", out, err);
    } else {
      throw DataError("manifest names unknown subcommand '" + sub + "'");
    }
  } catch (const Json::exception& e) {
    throw DataError("manifest '" + path + "' is missing a field: " + e.what());
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust SHASH transformation and outlier detection", "robshash"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  DetectArgs detect_args;
  std::string detect_out;
  std::uint64_t detect_seed = 0;
  auto* detect_cmd = app.add_subcommand("detect", "Iterative transformation and outlier detection");
  add_input_options(*detect_cmd, detect_args.input);
  detect_cmd->add_option("--method", detect_args.method, "shash-z, shash-i, shash-union, robust-z, power")
      ->check(CLI::IsMember({"shash-z", "shash-i", "shash-union", "robust-z", "power"}));
  detect_cmd->add_option("--final-threshold", detect_args.final_threshold, "Final cutoff on the normal scale");
  detect_cmd->add_option("--init-cutoff", detect_args.init_cutoff, "Initialization and re-flagging cutoff");
  detect_cmd->add_option("--max-iterations", detect_args.max_iterations, "Iteration cap");
  auto* seed_opt = detect_cmd->add_option("--seed", detect_seed, "Isolation-forest seed (generated and recorded when absent)");
  detect_cmd->add_option("--trees", detect_args.trees, "Isolation-forest tree count");
  detect_cmd->add_option("--subsample", detect_args.subsample, "Isolation-forest subsample size");
  detect_cmd->add_option("--score-threshold", detect_args.score_threshold, "Isolation-forest anomaly score threshold");
  bool untruncated = false;
  detect_cmd->add_flag("--untruncated-fit", untruncated, "Fit kept points as a complete sample");
  detect_cmd->add_flag("--plots", detect_args.plots, "Also write histogram and QQ tables");
  detect_cmd->add_option("--out", detect_out, "Output directory (summary to stdout when absent)");

  FitArgs fit_args;
  std::string fit_out;
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood SHASH fit");
  add_input_options(*fit_cmd, fit_args.input);
  fit_cmd->add_option("--out", fit_out, "Output directory");

  TransformArgs tr_args;
  std::string tr_out;
  auto* tr_cmd = app.add_subcommand("transform", "Apply a SHASH transformation to a column");
  add_input_options(*tr_cmd, tr_args.input);
  auto* params_opt = tr_cmd->add_option("--params", tr_args.params, "mu,sigma,nu,tau")->delimiter(',')->expected(4);
  auto* fitflag = tr_cmd->add_flag("--fit", tr_args.fit, "Fit the parameters first");
  params_opt->excludes(fitflag);
  tr_cmd->add_option("--out", tr_out, "Output directory (CSV to stdout when absent)");

  InputArgs est_args;
  std::string est_out;
  auto* est_cmd = app.add_subcommand("estimators", "Robust location and scale estimates of a column");
  add_input_options(*est_cmd, est_args);
  est_cmd->add_option("--out", est_out, "Output directory");

  std::string sim_config;
  std::string sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_reps;
  std::optional<std::size_t> sim_threads;
  bool sim_bias = false;
  auto* sim_cmd = app.add_subcommand("simulate", "Contamination study");
  sim_cmd->add_option("--config", sim_config, "Study configuration file (key = value)");
  sim_cmd->add_option("--out", sim_out, "Output directory")->required();
  sim_cmd->add_option("--seed", sim_seed, "Overrides the config seed");
  sim_cmd->add_option("--replications", sim_reps, "Overrides the config replication count");
  sim_cmd->add_option("--threads", sim_threads, "Overrides the config thread count");
  sim_cmd->add_flag("--bias-study", sim_bias, "Also run the estimator-bias study");

  std::string replay_manifest;
  std::string replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Re-execute the run recorded in a manifest");
  replay_cmd->add_option("--manifest", replay_manifest, "manifest.json")->required();
  replay_cmd->add_option("--out", replay_out, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*detect_cmd) {
      if (*seed_opt) detect_args.seed = detect_seed;
      detect_args.truncated_fit = !untruncated;
      const CommandOutput r = run_detect(detect_args);
      emit(r, detect_out, "summary.json", out, err);
    } else if (*fit_cmd) {
      emit(run_fit(fit_args), fit_out, "fit.json", out, err);
    } else if (*tr_cmd) {
      emit(run_transform(tr_args), tr_out, "transformed.csv", out, err);
    } else if (*est_cmd) {
      emit(run_estimators(est_args), est_out, "estimators.json", out, err);
    } else if (*sim_cmd) {
      std::string text = sim_config.empty() ? std::string() : read_file(sim_config);
      // Later keys win, so overrides are appended.
      if (sim_seed) text += "\nseed = " + std::to_string(*sim_seed);
      if (sim_reps) text += "\nreplications = " + std::to_string(*sim_reps);
      if (sim_threads) text += "\nthreads = " + std::to_string(*sim_threads);
      if (sim_bias) text += "\nbias_study = true";
      emit(run_simulate({text}, err), sim_out, "", out, err);
    } else if (*replay_cmd) {
      return run_replay(replay_manifest, replay_out, out, err);
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const DegenerateSample& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const ConvergenceError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace robshash::cli
