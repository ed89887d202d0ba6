// nre: command-line front end for Neural Rule Ensembles.
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 runtime/numeric.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nre/nre.hpp"
#include "nre/pmlb.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_runtime = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- config file

// Flat "key = value" lines; '#' or ';' starts a comment, blank lines are
// skipped, an optional [section] header is ignored. Keys are option long
// names without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw nre::DataError("cannot read config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = std::string(nre::detail::trim(line));
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("{}:{}: expected key = value", path.string(), lineno));
    std::string key(nre::detail::trim(line.substr(0, eq)));
    std::string value(nre::detail::trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw UsageError(fmt::format("{}:{}: empty key", path.string(), lineno));
    out.emplace_back(key, value);
  }
  return out;
}

// Fills options of `sub` that were not given on the command line. Keys that
// belong to no subcommand are rejected so typos do not pass silently.
void apply_config(CLI::App& app, CLI::App& sub, const fs::path& path) {
  for (const auto& [key, value] : read_config_file(path)) {
    auto* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr) {
      bool known = false;
      for (auto* other : app.get_subcommands({})) known = known || other->get_option_no_throw("--" + key) != nullptr;
      if (!known) throw UsageError(fmt::format("unknown config key '{}' in {}", key, path.string()));
      continue;
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

// ---------------------------------------------------------------- data access

std::string default_cache_dir() {
  if (const char* env = std::getenv("NRE_CACHE_DIR"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return (fs::path(xdg) / "nre").string();
  if (const char* home = std::getenv("HOME"); home && *home) return (fs::path(home) / ".cache" / "nre").string();
  return ".nre-cache";
}

struct DataOptions {
  std::string path;
  std::string label_column = "label";
  std::string positive_label;
  std::string cache_dir = default_cache_dir();
  std::string url_template;

  void bind(CLI::App* cmd) {
    cmd->add_option("data", path, "Data file (CSV/TSV, optionally .gz) or pmlb:<name>")->required();
    cmd->add_option("--label-column", label_column, "Label column name or 0-based index")->capture_default_str();
    cmd->add_option("--positive-label", positive_label, "Raw label value mapped to +1");
    cmd->add_option("--cache-dir", cache_dir, "Benchmark download cache (env NRE_CACHE_DIR)")->capture_default_str();
    cmd->add_option("--url-template", url_template, "Benchmark URL template with {name} (env NRE_PMLB_BASE_URL)");
  }

  bool is_pmlb() const { return path.rfind("pmlb:", 0) == 0; }

  // All digits selects a column by 0-based position.
  std::optional<std::size_t> label_index() const {
    if (label_column.empty() || !std::all_of(label_column.begin(), label_column.end(), ::isdigit)) return std::nullopt;
    return std::stoul(label_column);
  }

  nre::LabelColumn label() const {
    if (auto i = label_index()) return *i;
    return label_column;
  }

  void check() const {
    if (!is_pmlb() && !fs::exists(path)) throw nre::DataError("no such data file: " + path);
  }

  nre::Dataset load() const {
    if (is_pmlb()) {
      std::optional<std::string> tmpl;
      if (!url_template.empty()) tmpl = url_template;
      return nre::fetch_pmlb(path.substr(5), cache_dir, tmpl);
    }
    std::optional<std::string> pos;
    if (!positive_label.empty()) pos = positive_label;
    return nre::load_table(path, label(), pos);
  }
};

void check_output_path(const std::string& path) {
  if (path.empty()) return;
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) throw nre::DataError("output directory does not exist: " + parent.string());
}

void write_text(const std::string& path, const std::string& text) { nre::detail::write_file_bytes(path, text); }

// ---------------------------------------------------------------- train config

struct TrainOptions {
  nre::TrainConfig cfg;
  std::size_t batch_size = 0;
  std::size_t max_rules = 0;
  std::size_t patience = 0;

  void bind(CLI::App* cmd) {
    cmd->add_option("--max-depth", cfg.max_depth, "Tree depth")->capture_default_str();
    cmd->add_option("--min-leaf", cfg.min_leaf, "Minimum samples per leaf")->capture_default_str();
    cmd->add_flag("--deep,!--shallow", cfg.deep, "Use two-layer neural rules");
    cmd->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--batch-size", batch_size, "Mini-batch size (0: full batch up to 4096 rows, else 256)");
    cmd->add_option("--learning-rate", cfg.learning_rate, "Adam step size")->capture_default_str();
    cmd->add_option("--l2", cfg.l2, "L2 penalty on all rule parameters")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "Seed for batching and validation split")->capture_default_str();
    cmd->add_option("--max-rules", max_rules, "Keep only the top ranked rules (0: keep all)");
    cmd->add_option("--early-stop-patience", patience, "Epochs without validation improvement (0: off)");
    cmd->add_option("--validation-fraction", cfg.validation_fraction, "Held-out share for early stopping")
        ->capture_default_str();
  }

  nre::TrainConfig resolve() const {
    auto c = cfg;
    if (batch_size > 0) c.batch_size = batch_size;
    if (max_rules > 0) c.max_rules = max_rules;
    if (patience > 0) c.early_stop_patience = patience;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

std::string percent(double fraction) { return fmt::format("{:.2f}%", 100.0 * fraction); }

// ---------------------------------------------------------------- gen

struct GenOptions {
  std::string kind;
  std::string out;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double angle = 45.0;
  double noise = 0.15;
  double margin = 0.05;
  std::size_t informative = 5;
  std::size_t redundant = 15;
  std::size_t distractors = 480;
  double cluster_std = 0.1;
  double vertex_scale = 1.0;
  double redundant_noise = 0.0;
};

int cmd_gen(const GenOptions& o) {
  check_output_path(o.out);
  json meta{{"kind", o.kind}, {"n", o.n}, {"seed", o.seed}};
  std::optional<nre::Dataset> d;
  if (o.kind == "xor") {
    d = nre::gen_rotated_xor(o.n, o.angle, o.noise, o.seed);
    meta["angle"] = o.angle;
    meta["noise_std"] = o.noise;
  } else if (o.kind == "linear") {
    d = nre::gen_linear_separable(o.n, o.angle, o.margin, o.seed);
    meta["angle"] = o.angle;
    meta["margin"] = o.margin;
  } else {
    nre::MadelonOptions mo;
    mo.cluster_std = o.cluster_std;
    mo.vertex_scale = o.vertex_scale;
    mo.redundant_noise = o.redundant_noise;
    auto m = nre::gen_madelon_like(o.n, o.informative, o.redundant, o.distractors, o.seed, mo);
    meta["informative"] = o.informative;
    meta["redundant"] = o.redundant;
    meta["distractors"] = o.distractors;
    meta["cluster_std"] = o.cluster_std;
    meta["vertex_scale"] = o.vertex_scale;
    meta["redundant_noise"] = o.redundant_noise;
    json features = json::array();
    for (const auto& f : m.features) features.push_back({{"origin", nre::to_string(f.origin)}, {"source", f.source_index}});
    meta["features"] = std::move(features);
    d = std::move(m.data);
  }
  nre::write_table(*d, o.out);
  write_text(o.out + ".meta.json", meta.dump(1) + "\n");
  std::cout << fmt::format("wrote {} rows x {} features to {}\n", d->rows(), d->cols(), o.out);
  return exit_ok;
}

// ---------------------------------------------------------------- fetch

int cmd_fetch(const std::string& name, const DataOptions& data, const std::string& out) {
  check_output_path(out);
  std::optional<std::string> tmpl;
  if (!data.url_template.empty()) tmpl = data.url_template;
  const auto d = nre::fetch_pmlb(name, data.cache_dir, tmpl);
  std::cout << fmt::format("{}: {} rows x {} features ({} positive, {} negative)\n", name, d.rows(), d.cols(),
                           d.count_positive(), d.count_negative());
  if (!out.empty()) {
    nre::write_table(d, out);
    std::cout << "wrote " << out << "\n";
  }
  return exit_ok;
}

// ---------------------------------------------------------------- train

struct TrainCommand {
  DataOptions data;
  TrainOptions train;
  std::string out;
  std::string log;
  std::vector<std::size_t> checkpoints;
  bool show_rules = false;
  bool quiet = false;
};

std::string checkpoint_path(const std::string& model_path, std::size_t iteration) {
  return fmt::format("{}.iter{}.json", model_path, iteration);
}

int cmd_train(const TrainCommand& c) {
  const auto cfg = c.train.resolve();
  c.data.check();
  check_output_path(c.out);
  const std::string log_path = c.log.empty() ? c.out + ".log.csv" : c.log;
  check_output_path(log_path);
  const auto d = c.data.load();

  std::string log = "epoch,iteration,train_loss,train_error,validation_loss\n";
  nre::TrainHooks hooks;
  hooks.on_epoch = [&](const nre::EpochStats& s) {
    log += fmt::format("{},{},{},{},{}\n", s.epoch, s.iteration, s.train_loss, s.train_error,
                       s.validation_loss ? fmt::format("{}", *s.validation_loss) : std::string());
  };
  const std::set<std::size_t> wanted(c.checkpoints.begin(), c.checkpoints.end());
  if (!wanted.empty()) {
    hooks.on_iteration = [&](std::size_t it, const nre::NREModel& m) {
      if (wanted.count(it)) nre::save_model(m, checkpoint_path(c.out, it));
    };
  }
  const auto result = nre::nre_train(d, cfg, hooks);
  if (result.degenerate_tree) std::cerr << "warning: the tree has a single leaf; the model is a constant vote\n";
  nre::save_model(result.model, c.out);
  write_text(log_path, log);

  if (!c.quiet) {
    std::cout << fmt::format("rules: {}  iterations: {}{}\n", result.model.rules.size(), result.iterations,
                             result.stopped_early ? "  (stopped early)" : "");
    std::cout << "training error: " << percent(nre::evaluate(result.model, d)) << "\n";
    if (c.show_rules && !result.model.degenerate) {
      const auto rules = nre::extract_rules(result.model.source_tree);
      for (auto k : nre::rank_rules(rules)) std::cout << "  " << nre::format_rule(rules[k], d.feature_names()) << "\n";
    }
  }
  return exit_ok;
}

// ---------------------------------------------------------------- predict / eval

struct Features {
  std::vector<double> values;
  std::size_t rows = 0;
};

// Feature matrix from a table with or without the label column.
Features read_features(const DataOptions& data, std::size_t expected_cols) {
  if (data.is_pmlb()) {
    const auto d = data.load();
    return {d.values(), d.rows()};
  }
  const auto table = nre::detail::read_table(data.path);
  const auto it = std::find(table.header.begin(), table.header.end(), data.label_column);
  std::size_t skip = static_cast<std::size_t>(it - table.header.begin());
  if (it == table.header.end()) skip = data.label_index().value_or(table.header.size());
  Features f;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j == skip) continue;
      const auto v = nre::detail::parse_double(table.rows[i][j]);
      if (!v) throw nre::DataError(fmt::format("row {}: non-numeric value '{}' in column '{}'", i + 1, table.rows[i][j], table.header[j]));
      f.values.push_back(*v);
    }
  }
  f.rows = table.rows.size();
  const std::size_t cols = table.header.size() - (skip < table.header.size() ? 1 : 0);
  if (cols != expected_cols) {
    throw nre::DataError(fmt::format("dimension mismatch: data has {} features, model expects {}", cols, expected_cols));
  }
  return f;
}

int cmd_predict(const DataOptions& data, const std::string& model_path, const std::string& out) {
  data.check();
  check_output_path(out);
  const auto model = nre::load_model(model_path);
  const auto f = read_features(data, model.input_dim());
  std::string text = "score,prediction\n";
  const std::size_t p = model.input_dim();
  for (std::size_t i = 0; i < f.rows; ++i) {
    const std::span<const double> x(f.values.data() + i * p, p);
    const double s = nre::nre_score(model, x);
    text += fmt::format("{},{}\n", s, nre::sign_label(s));
  }
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  return exit_ok;
}

int cmd_eval(const DataOptions& data, const std::string& model_path, bool as_json) {
  data.check();
  const auto model = nre::load_model(model_path);
  const auto d = data.load();
  if (d.cols() != model.input_dim()) {
    throw nre::DataError(fmt::format("dimension mismatch: data has {} features, model expects {}", d.cols(), model.input_dim()));
  }
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const int yhat = nre::nre_predict(model, d.row(i));
    if (d.label(i) == 1) {
      (yhat == 1 ? tp : fn) += 1;
    } else {
      (yhat == 1 ? fp : tn) += 1;
    }
  }
  const double error = nre::evaluate(model, d);
  if (as_json) {
    std::cout << json{{"error", error}, {"rows", d.rows()}, {"tp", tp}, {"tn", tn}, {"fp", fp}, {"fn", fn}}.dump(1) << "\n";
  } else {
    std::cout << fmt::format("rows: {}\nerror: {}\nconfusion: tp={} fp={} fn={} tn={}\n", d.rows(), percent(error), tp, fp,
                             fn, tn);
  }
  return exit_ok;
}

// ---------------------------------------------------------------- cv

json report_to_json(const nre::EvalReport& r) {
  return json{{"k", r.k},
              {"seed", r.seed},
              {"fold_errors", r.fold_errors},
              {"mean", r.mean},
              {"std", r.std},
              {"wall_time_seconds", r.wall_time_seconds},
              {"config", nre::config_to_json(r.config)}};
}

void print_report(const nre::EvalReport& r) {
  for (std::size_t f = 0; f < r.fold_errors.size(); ++f) {
    std::cout << fmt::format("fold {}: {}\n", f, percent(r.fold_errors[f]));
  }
  std::cout << fmt::format("mean: {}  std: {}\n", percent(r.mean), percent(r.std));
}

struct CvCommand {
  DataOptions data;
  TrainOptions train;
  std::size_t k = 5;
  std::uint64_t fold_seed = 0;
  bool grid = false;
  std::string report;
};

int cmd_cv(const CvCommand& c) {
  const auto cfg = c.train.resolve();
  if (c.k < 2) throw UsageError("--k must be >= 2");
  c.data.check();
  check_output_path(c.report);
  const auto d = c.data.load();
  json out;
  if (c.grid) {
    const auto g = nre::depth_sweep(d, cfg, c.k, c.fold_seed);
    out = json{{"best_depth", g.best_depth}, {"by_depth", json::array()}};
    double total = 0.0;
    for (const auto& [depth, r] : g.by_depth) {
      std::cout << fmt::format("depth {}: mean {}  std {}\n", depth, percent(r.mean), percent(r.std));
      out["by_depth"].push_back(json{{"max_depth", depth}, {"report", report_to_json(r)}});
      total += r.wall_time_seconds;
    }
    std::cout << fmt::format("best depth: {}\nwall time: {:.2f}s\n", g.best_depth, total);
  } else {
    const auto r = nre::cross_validate(d, cfg, c.k, c.fold_seed);
    print_report(r);
    std::cout << fmt::format("wall time: {:.2f}s\n", r.wall_time_seconds);
    out = report_to_json(r);
  }
  if (!c.report.empty()) write_text(c.report, out.dump(1) + "\n");
  return exit_ok;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const std::string& path, const std::string& test, const std::string& policy_name) {
  if (!fs::exists(path)) throw nre::DataError("no such results file: " + path);
  const auto table = nre::stats::read_comparison_csv(path);
  const auto policy = policy_name == "drop_one_if_odd" ? nre::stats::ZeroPolicy::drop_one_if_odd
                                                       : nre::stats::ZeroPolicy::split_all;
  std::optional<nre::stats::WilcoxonResult> w;
  std::optional<nre::stats::SignTestResult> s;
  if (test != "sign") w = nre::stats::wilcoxon_signed_rank(table, policy);
  if (test != "wilcoxon") s = nre::stats::sign_test(table);
  std::cout << nre::stats::format_report(table, w ? &*w : nullptr, s ? &*s : nullptr);
  return exit_ok;
}

// ---------------------------------------------------------------- plot

struct PlotCommand {
  DataOptions data;
  std::string model;
  std::string out;
  std::size_t resolution = 200;
  std::optional<std::size_t> rule_index;
  std::optional<std::size_t> at_iteration;
  std::vector<double> bounds;
  std::size_t width = 480;
  std::size_t height = 480;
};

int cmd_plot(const PlotCommand& c) {
  c.data.check();
  check_output_path(c.out);
  std::string model_path = c.model;
  if (c.at_iteration) {
    model_path = checkpoint_path(c.model, *c.at_iteration);
    if (!fs::exists(model_path)) {
      throw nre::DataError(fmt::format("no checkpoint for iteration {} ({}); train with --checkpoint-iterations",
                                       *c.at_iteration, model_path));
    }
  }
  const auto model = nre::load_model(model_path);
  const auto d = c.data.load();
  if (d.cols() != 2) throw nre::DataError(fmt::format("plotting needs exactly 2 features, dataset has {}", d.cols()));
  if (c.rule_index && *c.rule_index >= model.rules.size()) {
    throw UsageError(fmt::format("rule index {} out of range (model has {} rules)", *c.rule_index, model.rules.size()));
  }
  nre::plot::Bounds b = nre::plot::data_bounds(d);
  if (!c.bounds.empty()) {
    if (c.bounds.size() != 4 || !(c.bounds[0] < c.bounds[1]) || !(c.bounds[2] < c.bounds[3])) {
      throw UsageError("--bounds needs xmin xmax ymin ymax with min < max");
    }
    b = {c.bounds[0], c.bounds[1], c.bounds[2], c.bounds[3]};
  }
  const auto grid = nre::plot::classify_grid(model, b, c.resolution, c.rule_index);
  nre::plot::SvgOptions opt;
  opt.width = c.width;
  opt.height = c.height;
  write_text(c.out, nre::plot::render_svg(grid, d, opt));
  std::cout << fmt::format("wrote {} ({} positive cells, {} negative cells)\n", c.out, grid.count(1), grid.count(-1));
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural Rule Ensembles: tree-initialized neural rule learning and classifier comparison"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Flat key = value file supplying defaults for the chosen command")
      ->check(CLI::ExistingFile);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen_cmd->add_option("kind", gen.kind, "xor | linear | madelon")
      ->required()
      ->check(CLI::IsMember({"xor", "linear", "madelon"}));
  gen_cmd->add_option("-o,--out", gen.out, "Output CSV")->required();
  gen_cmd->add_option("--n", gen.n, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--angle", gen.angle, "Rotation / boundary angle in degrees")->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise, "XOR cluster noise std")->capture_default_str();
  gen_cmd->add_option("--margin", gen.margin, "Linear: minimum distance to the boundary")->capture_default_str();
  gen_cmd->add_option("--informative", gen.informative, "Madelon: informative features")->capture_default_str();
  gen_cmd->add_option("--redundant", gen.redundant, "Madelon: redundant features")->capture_default_str();
  gen_cmd->add_option("--distractors", gen.distractors, "Madelon: distractor features")->capture_default_str();
  gen_cmd->add_option("--cluster-std", gen.cluster_std, "Madelon: cluster spread")->capture_default_str();
  gen_cmd->add_option("--vertex-scale", gen.vertex_scale, "Madelon: hypercube half-width")->capture_default_str();
  gen_cmd->add_option("--redundant-noise", gen.redundant_noise, "Madelon: noise on redundant features")
      ->capture_default_str();

  DataOptions fetch_data;
  std::string fetch_name;
  std::string fetch_out;
  auto* fetch_cmd = app.add_subcommand("fetch", "Download a benchmark dataset into the cache");
  fetch_cmd->add_option("name", fetch_name, "Dataset name")->required();
  fetch_cmd->add_option("-o,--out", fetch_out, "Also write the parsed table as CSV");
  fetch_cmd->add_option("--cache-dir", fetch_data.cache_dir, "Download cache (env NRE_CACHE_DIR)")->capture_default_str();
  fetch_cmd->add_option("--url-template", fetch_data.url_template, "URL template with {name} (env NRE_PMLB_BASE_URL)");

  TrainCommand train;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train.data.bind(train_cmd);
  train.train.bind(train_cmd);
  train_cmd->add_option("-o,--out", train.out, "Model file (JSON)")->required();
  train_cmd->add_option("--log", train.log, "Per-epoch log CSV (default <out>.log.csv)");
  train_cmd->add_option("--checkpoint-iterations", train.checkpoints, "Save <out>.iter<k>.json after these iterations")
      ->delimiter(',');
  train_cmd->add_flag("--show-rules", train.show_rules, "Print the extracted rules, best first");
  train_cmd->add_flag("-q,--quiet", train.quiet, "No summary output");

  DataOptions predict_data;
  std::string predict_model;
  std::string predict_out;
  auto* predict_cmd = app.add_subcommand("predict", "Score a table with a trained model");
  predict_data.bind(predict_cmd);
  predict_cmd->add_option("-m,--model", predict_model, "Model file")->required();
  predict_cmd->add_option("-o,--out", predict_out, "Output CSV (default stdout)");

  DataOptions eval_data;
  std::string eval_model;
  bool eval_json = false;
  auto* eval_cmd = app.add_subcommand("eval", "Report the error rate of a model on labelled data");
  eval_data.bind(eval_cmd);
  eval_cmd->add_option("-m,--model", eval_model, "Model file")->required();
  eval_cmd->add_flag("--json", eval_json, "JSON output");

  CvCommand cv;
  auto* cv_cmd = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  cv.data.bind(cv_cmd);
  cv.train.bind(cv_cmd);
  cv_cmd->add_option("--k", cv.k, "Number of folds")->capture_default_str();
  cv_cmd->add_option("--fold-seed", cv.fold_seed, "Seed for the fold assignment")->capture_default_str();
  cv_cmd->add_flag("--grid", cv.grid, "Sweep max depth over 2, 4, 6, 8, 10");
  cv_cmd->add_option("--report", cv.report, "Write the report as JSON");

  std::string compare_path;
  std::string compare_test = "both";
  std::string compare_policy = "split_all";
  auto* compare_cmd = app.add_subcommand("compare", "Wilcoxon signed-rank and sign tests for two classifiers");
  compare_cmd->add_option("results", compare_path, "CSV: dataset,error_a,error_b")->required();
  compare_cmd->add_option("--test", compare_test, "wilcoxon | sign | both")
      ->capture_default_str()
      ->check(CLI::IsMember({"wilcoxon", "sign", "both"}));
  compare_cmd->add_option("--zero-policy", compare_policy, "split_all | drop_one_if_odd")
      ->capture_default_str()
      ->check(CLI::IsMember({"split_all", "drop_one_if_odd"}));

  PlotCommand plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render decision regions of a 2-feature model as SVG");
  plot.data.bind(plot_cmd);
  plot_cmd->add_option("-m,--model", plot.model, "Model file")->required();
  plot_cmd->add_option("-o,--out", plot.out, "Output SVG")->required();
  plot_cmd->add_option("--grid-resolution", plot.resolution, "Cells per axis")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  plot_cmd->add_option("--rule-index", plot.rule_index, "Show the support of a single rule");
  plot_cmd->add_option("--at-iteration", plot.at_iteration, "Use the checkpoint saved at this iteration");
  plot_cmd->add_option("--bounds", plot.bounds, "xmin,xmax,ymin,ymax")->delimiter(',')->expected(4);
  plot_cmd->add_option("--width", plot.width, "SVG width")->capture_default_str();
  plot_cmd->add_option("--height", plot.height, "SVG height")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    auto* active = app.get_subcommands().front();
    if (!config_path.empty()) apply_config(app, *active, config_path);

    if (active == gen_cmd) return cmd_gen(gen);
    if (active == fetch_cmd) return cmd_fetch(fetch_name, fetch_data, fetch_out);
    if (active == train_cmd) return cmd_train(train);
    if (active == predict_cmd) return cmd_predict(predict_data, predict_model, predict_out);
    if (active == eval_cmd) return cmd_eval(eval_data, eval_model, eval_json);
    if (active == cv_cmd) return cmd_cv(cv);
    if (active == compare_cmd) return cmd_compare(compare_path, compare_test, compare_policy);
    if (active == plot_cmd) return cmd_plot(plot);
    return exit_usage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const nre::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return exit_data;
  } catch (const nre::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return exit_data;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
}
