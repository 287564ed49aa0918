#include "diversenet/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "diversenet/artifact_io.hpp"
#include "diversenet/errors.hpp"
#include "diversenet/io.hpp"

namespace diversenet {

const char* task_name(Task t) { return t == Task::regression ? "regression" : "occluded"; }

Task task_from_name(const std::string& name) {
  if (name == "regression") return Task::regression;
  if (name == "occluded") return Task::occluded;
  throw ConfigError("unknown task '" + name + "' (expected regression or occluded)");
}

namespace {

struct IniLine {
  std::string section;
  std::string key;
  std::string value;
};

std::vector<IniLine> parse_ini(const std::string& text, const std::string& ctx) {
  std::vector<IniLine> out;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    std::string where = ctx + ": line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + ": malformed section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
    if (section.empty()) throw ParseError(where + ": key outside any section");
    IniLine entry;
    entry.section = section;
    entry.key = trim(line.substr(0, eq));
    entry.value = trim(line.substr(eq + 1));
    if (entry.key.empty()) throw ParseError(where + ": empty key");
    if (entry.value.empty()) {
      throw ParseError(where + ": field '" + entry.key + "' has no value");
    }
    out.push_back(std::move(entry));
  }
  return out;
}

[[noreturn]] void unknown_key(const IniLine& e, const std::string& ctx) {
  throw ParseError(ctx + ": unknown key '" + e.key + "' in section [" + e.section + "]");
}

void apply_data(DataSection& s, const IniLine& e, const std::string& ctx) {
  const std::string f = ctx + ": [data] " + e.key;
  if (e.key == "task") s.task = task_from_name(e.value);
  else if (e.key == "n_train") s.n_train = parse_size(e.value, f);
  else if (e.key == "n_test") s.n_test = parse_size(e.value, f);
  else if (e.key == "modes") s.modes = parse_modes(e.value);
  else if (e.key == "noise_sd") s.noise_sd = parse_double(e.value, f);
  else if (e.key == "grid_side") s.grid_side = parse_size(e.value, f);
  else if (e.key == "n_shapes") s.n_shapes = parse_size(e.value, f);
  else if (e.key == "visible_quadrant") s.visible_quadrant = quadrant_from_name(e.value);
  else if (e.key == "k_neighbors") s.k_neighbors = parse_size(e.value, f);
  else if (e.key == "seed") s.seed = parse_u64(e.value, f);
  else unknown_key(e, ctx);
}

void apply_model(ModelSection& s, const IniLine& e, const std::string& ctx) {
  const std::string f = ctx + ": [model] " + e.key;
  if (e.key == "encoder_widths") s.encoder_widths = parse_size_list(e.value, f);
  else if (e.key == "decoder_widths") s.decoder_widths = parse_size_list(e.value, f);
  else if (e.key == "hidden_activation") s.hidden_activation = act_from_name(e.value);
  else if (e.key == "output_activation") s.output_activation = act_from_name(e.value);
  else if (e.key == "injection_points") s.injection_points = parse_size_list(e.value, f);
  else if (e.key == "control_mode") s.control_mode = control_mode_from_name(e.value);
  else if (e.key == "seed") s.seed = parse_u64(e.value, f);
  else unknown_key(e, ctx);
}

void apply_train(TrainSection& s, const IniLine& e, const std::string& ctx) {
  const std::string f = ctx + ": [train] " + e.key;
  if (e.key == "method") s.method = method_from_name(e.value);
  else if (e.key == "n_controls") s.n_controls = parse_size(e.value, f);
  else if (e.key == "control_samples") s.control_samples = parse_size(e.value, f);
  else if (e.key == "control_lo") s.control_lo = parse_double(e.value, f);
  else if (e.key == "control_hi") s.control_hi = parse_double(e.value, f);
  else if (e.key == "beta") s.beta = parse_double(e.value, f);
  else if (e.key == "epsilon") s.epsilon = parse_double(e.value, f);
  else if (e.key == "learning_rate") s.learning_rate = parse_double(e.value, f);
  else if (e.key == "epochs") s.epochs = parse_size(e.value, f);
  else if (e.key == "batch_size") s.batch_size = parse_size(e.value, f);
  else if (e.key == "pretrain_epochs") s.pretrain_epochs = parse_size(e.value, f);
  else if (e.key == "optimizer") s.optimizer = optimizer_from_name(e.value);
  else if (e.key == "adam_beta1") s.adam_beta1 = parse_double(e.value, f);
  else if (e.key == "adam_beta2") s.adam_beta2 = parse_double(e.value, f);
  else if (e.key == "adam_eps") s.adam_eps = parse_double(e.value, f);
  else if (e.key == "n_members") s.n_members = parse_size(e.value, f);
  else if (e.key == "seed") s.seed = parse_u64(e.value, f);
  else unknown_key(e, ctx);
}

void apply_eval(EvalSection& s, const IniLine& e, const std::string& ctx) {
  const std::string f = ctx + ": [eval] " + e.key;
  if (e.key == "k_max") s.k_max = parse_size(e.value, f);
  else if (e.key == "n_slots") s.n_slots = parse_size(e.value, f);
  else if (e.key == "n_resamples") s.n_resamples = parse_size(e.value, f);
  else if (e.key == "tau") s.tau = parse_double(e.value, f);
  else if (e.key == "seed") s.seed = parse_u64(e.value, f);
  else unknown_key(e, ctx);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& context) {
  ExperimentConfig cfg;
  std::vector<std::string> seen;
  for (const IniLine& e : parse_ini(text, context)) {
    std::string id = e.section + "." + e.key;
    if (std::find(seen.begin(), seen.end(), id) != seen.end()) {
      throw ParseError(context + ": duplicate key '" + e.key + "' in section [" + e.section + "]");
    }
    seen.push_back(id);
    if (e.section == "data") apply_data(cfg.data, e, context);
    else if (e.section == "model") apply_model(cfg.model, e, context);
    else if (e.section == "train") apply_train(cfg.train, e, context);
    else if (e.section == "eval") apply_eval(cfg.eval, e, context);
    else throw ParseError(context + ": unknown section [" + e.section + "]");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("config '" + path.string() + "': cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), "config '" + path.string() + "'");
}

std::vector<std::size_t> ExperimentConfig::resolved_injection_points() const {
  if (model.injection_points) return *model.injection_points;
  return {model.encoder_widths.empty() ? 0 : model.encoder_widths.size() - 1};
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out << "[data]\n";
  out << "task = " << task_name(data.task) << "\n";
  out << "n_train = " << data.n_train << "\n";
  out << "n_test = " << data.n_test << "\n";
  out << "modes = " << modes_str(data.modes) << "\n";
  out << "noise_sd = " << fmt_double(data.noise_sd) << "\n";
  out << "grid_side = " << data.grid_side << "\n";
  out << "n_shapes = " << data.n_shapes << "\n";
  out << "visible_quadrant = " << quadrant_name(data.visible_quadrant) << "\n";
  out << "k_neighbors = " << data.k_neighbors << "\n";
  out << "seed = " << data.seed << "\n";
  out << "\n[model]\n";
  out << "encoder_widths = " << join_sizes(model.encoder_widths) << "\n";
  out << "decoder_widths = " << join_sizes(model.decoder_widths) << "\n";
  out << "hidden_activation = " << act_name(model.hidden_activation) << "\n";
  out << "output_activation = " << act_name(model.output_activation) << "\n";
  out << "injection_points = " << join_sizes(resolved_injection_points()) << "\n";
  out << "control_mode = " << control_mode_name(model.control_mode) << "\n";
  out << "seed = " << model.seed << "\n";
  out << "\n[train]\n";
  out << "method = " << method_name(train.method) << "\n";
  out << "n_controls = " << train.n_controls << "\n";
  out << "control_samples = " << train.control_samples << "\n";
  out << "control_lo = " << fmt_double(train.control_lo) << "\n";
  out << "control_hi = " << fmt_double(train.control_hi) << "\n";
  out << "beta = " << fmt_double(train.beta) << "\n";
  out << "epsilon = " << fmt_double(train.epsilon) << "\n";
  out << "learning_rate = " << fmt_double(train.learning_rate) << "\n";
  out << "epochs = " << train.epochs << "\n";
  out << "batch_size = " << train.batch_size << "\n";
  out << "pretrain_epochs = " << train.pretrain_epochs << "\n";
  out << "optimizer = " << optimizer_name(train.optimizer) << "\n";
  out << "adam_beta1 = " << fmt_double(train.adam_beta1) << "\n";
  out << "adam_beta2 = " << fmt_double(train.adam_beta2) << "\n";
  out << "adam_eps = " << fmt_double(train.adam_eps) << "\n";
  out << "n_members = " << train.n_members << "\n";
  out << "seed = " << train.seed << "\n";
  out << "\n[eval]\n";
  out << "k_max = " << eval.k_max << "\n";
  out << "n_slots = " << eval.n_slots << "\n";
  out << "n_resamples = " << eval.n_resamples << "\n";
  out << "tau = " << fmt_double(eval.tau) << "\n";
  out << "seed = " << eval.seed << "\n";
  return out.str();
}

void ExperimentConfig::validate() const {
  if (data.n_train == 0) throw ConfigError("n_train must be >= 1");
  if (data.task == Task::regression && data.modes.empty()) {
    throw ConfigError("regression task needs at least one mode");
  }
  if (data.noise_sd < 0.0) throw ConfigError("noise_sd must be >= 0");
  train_config().validate();
  // Width/injection sanity, independent of dataset dims.
  model_config(1, 1).validate();
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig cfg;
  cfg.method = train.method;
  cfg.n_controls = train.method == Method::standard ? 1 : train.n_controls;
  cfg.control_mode = model.control_mode;
  cfg.continuous = {train.control_lo, train.control_hi, train.control_samples};
  cfg.beta = train.beta;
  cfg.epsilon = train.epsilon;
  cfg.learning_rate = train.learning_rate;
  cfg.epochs = train.epochs;
  cfg.batch_size = train.batch_size;
  cfg.pretrain_epochs = train.pretrain_epochs;
  cfg.optimizer = train.optimizer;
  cfg.adam = {train.adam_beta1, train.adam_beta2, train.adam_eps};
  cfg.seed = train.seed;
  return cfg;
}

ModelConfig ExperimentConfig::model_config(std::size_t input_dim, std::size_t output_dim) const {
  ModelConfig cfg;
  cfg.input_dim = input_dim;
  cfg.output_dim = output_dim;
  cfg.encoder_widths = model.encoder_widths;
  cfg.decoder_widths = model.decoder_widths;
  cfg.hidden_activation = model.hidden_activation;
  cfg.output_activation = model.output_activation;
  cfg.injection_points = resolved_injection_points();
  cfg.control_mode = model.control_mode;
  if (model.control_mode == ControlMode::continuous) {
    cfg.control_dim = 1;
  } else if (train.method == Method::standard || train.method == Method::bagged) {
    cfg.control_dim = 1;
  } else {
    cfg.control_dim = train.n_controls;
  }
  cfg.seed = model.seed;
  return cfg;
}

TreenetConfig ExperimentConfig::treenet_config(std::size_t input_dim,
                                               std::size_t output_dim) const {
  TreenetConfig cfg;
  cfg.input_dim = input_dim;
  cfg.output_dim = output_dim;
  cfg.encoder_widths = model.encoder_widths;
  cfg.decoder_widths = model.decoder_widths;
  cfg.hidden_activation = model.hidden_activation;
  cfg.output_activation = model.output_activation;
  cfg.n_members = member_count();
  cfg.seed = model.seed;
  return cfg;
}

std::size_t ExperimentConfig::member_count() const {
  return train.n_members == 0 ? train.n_controls : train.n_members;
}

DatasetPair generate_data(const DataSection& section) {
  if (section.task == Task::regression) {
    RegressionSpec spec;
    spec.n_train = section.n_train;
    spec.n_test = section.n_test;
    spec.modes = section.modes;
    spec.noise_sd = section.noise_sd;
    return gen_multimodal_regression(spec, section.seed);
  }
  OccludedSpec spec;
  spec.n_train = section.n_train;
  spec.n_test = section.n_test;
  spec.grid_side = section.grid_side;
  spec.n_shapes = section.n_shapes;
  spec.k_neighbors = section.k_neighbors;
  spec.visible = section.visible_quadrant;
  return gen_occluded_completion(spec, section.seed);
}

std::size_t Predictor::n_slots() const {
  if (std::holds_alternative<Model>(value)) {
    const Model& m = std::get<Model>(value);
    return m.config().control_mode == ControlMode::discrete ? m.config().control_dim : 0;
  }
  if (std::holds_alternative<TreenetModel>(value)) {
    return std::get<TreenetModel>(value).n_members();
  }
  if (std::holds_alternative<BaggedEnsemble>(value)) {
    return std::get<BaggedEnsemble>(value).members.size();
  }
  return 0;
}

void save_predictor(const Predictor& p, const std::filesystem::path& path) {
  if (std::holds_alternative<Model>(p.value)) save_model(std::get<Model>(p.value), path);
  else if (std::holds_alternative<TreenetModel>(p.value))
    save_treenet(std::get<TreenetModel>(p.value), path);
  else if (std::holds_alternative<BaggedEnsemble>(p.value))
    save_bagged(std::get<BaggedEnsemble>(p.value), path);
  else throw UsageError("empty predictor");
}

Predictor load_predictor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string ctx = "model file '" + path.string() + "'";
  if (!in) throw LoadError(ctx + ": cannot open");
  ArtifactHeader header = read_artifact_header(in, ctx);
  in.close();
  Predictor p;
  if (header.kind == "model") {
    p.value = load_model(path);
    p.method_kind = Method::diversenet;
  } else if (header.kind == "treenet") {
    p.value = load_treenet(path);
    p.method_kind = Method::treenet;
  } else if (header.kind == "bagged") {
    p.value = load_bagged(path);
    p.method_kind = Method::bagged;
  } else {
    throw LoadError(ctx + ": unknown artifact kind '" + header.kind + "'");
  }
  return p;
}

Predictor train_from_config(const ExperimentConfig& cfg, const Dataset& train_data,
                            std::vector<TrainReport>* reports_out) {
  TrainConfig tc = cfg.train_config();
  Predictor p;
  p.method_kind = tc.method;
  switch (tc.method) {
    case Method::diversenet:
    case Method::standard: {
      Model model = Model::init(cfg.model_config(train_data.input_dim, train_data.output_dim));
      auto [trained, report] = train(std::move(model), train_data, tc);
      if (reports_out) reports_out->push_back(std::move(report));
      p.value = std::move(trained);
      break;
    }
    case Method::treenet:
    case Method::treenet_eps: {
      TreenetModel model =
          TreenetModel::init(cfg.treenet_config(train_data.input_dim, train_data.output_dim));
      auto [trained, report] = train_treenet(std::move(model), train_data, tc);
      if (reports_out) reports_out->push_back(std::move(report));
      p.value = std::move(trained);
      break;
    }
    case Method::bagged: {
      BaggedEnsemble ensemble =
          train_bagged(cfg.model_config(train_data.input_dim, train_data.output_dim), train_data,
                       cfg.member_count(), tc, tc.seed, reports_out);
      p.value = std::move(ensemble);
      break;
    }
  }
  return p;
}

PredictionSet predict_from(const Predictor& p, const Dataset& data, const ExperimentConfig& cfg) {
  if (std::holds_alternative<Model>(p.value)) {
    const Model& model = std::get<Model>(p.value);
    if (model.config().control_mode == ControlMode::discrete) {
      std::size_t natural = model.config().control_dim;
      std::size_t m = cfg.eval.n_slots == 0 ? natural : cfg.eval.n_slots;
      ControlSet controls;
      for (std::size_t i = 0; i < m; ++i) {
        controls.push_back(ControlValue::index(std::min(i, natural - 1)));
      }
      return predict_all(model, controls, data);
    }
    std::size_t m = cfg.eval.n_slots == 0 ? cfg.train.n_controls : cfg.eval.n_slots;
    ControlSet controls = m < 2 ? ControlSet{ControlValue::vec({cfg.train.control_lo})}
                                : spaced_controls(cfg.train.control_lo, cfg.train.control_hi, m);
    return predict_all(model, controls, data);
  }
  if (std::holds_alternative<TreenetModel>(p.value)) {
    const TreenetModel& model = std::get<TreenetModel>(p.value);
    if (cfg.eval.n_slots != 0 && cfg.eval.n_slots != model.n_members()) {
      throw UsageError("eval n_slots must match the treenet member count");
    }
    return predict_all(model, data);
  }
  if (std::holds_alternative<BaggedEnsemble>(p.value)) {
    const BaggedEnsemble& ensemble = std::get<BaggedEnsemble>(p.value);
    if (cfg.eval.n_slots != 0 && cfg.eval.n_slots != ensemble.members.size()) {
      throw UsageError("eval n_slots must match the bagged member count");
    }
    return predict_all(ensemble, data);
  }
  throw UsageError("empty predictor");
}

EvalOutcome evaluate_predictor(const Predictor& p, const Dataset& test_data,
                               const ExperimentConfig& cfg, const std::string& method_label) {
  if (test_data.items.empty()) throw ArgumentError("evaluation dataset is empty");
  PredictionSet preds = predict_from(p, test_data, cfg);
  LabelSets gts = dataset_labels(test_data);
  EvalOutcome outcome;
  outcome.curve = oracle_curve(preds, gts, cfg.eval.seed, cfg.eval.n_resamples, method_label);
  if (cfg.eval.k_max != 0 && cfg.eval.k_max < preds.n_slots) {
    outcome.curve.ks.resize(cfg.eval.k_max);
    outcome.curve.mean_error.resize(cfg.eval.k_max);
    outcome.curve.std_error.resize(cfg.eval.k_max);
  }
  outcome.variance = preds.n_slots >= 2 ? prediction_variance(preds) : 0.0;
  double tau = cfg.eval.tau > 0.0 ? cfg.eval.tau : default_degeneracy_tau(preds, gts);
  outcome.degeneracy = degeneracy_report(preds, gts, tau);
  return outcome;
}

void write_diagnostics_csv(const EvalOutcome& outcome, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  out << "metric,value\n";
  out << "variance," << fmt_double(outcome.variance) << "\n";
  out << "tau," << fmt_double(outcome.degeneracy.tau) << "\n";
  out << "degenerate_count," << outcome.degeneracy.n_degenerate << "\n";
  for (std::size_t s = 0; s < outcome.degeneracy.flags.size(); ++s) {
    out << "degenerate_slot_" << s << "," << (outcome.degeneracy.flags[s] ? 1 : 0) << "\n";
  }
  for (std::size_t s = 0; s < outcome.degeneracy.mean_nearest.size(); ++s) {
    out << "mean_nearest_" << s << "," << fmt_double(outcome.degeneracy.mean_nearest[s]) << "\n";
  }
  if (!out) throw LoadError("write failed for '" + path.string() + "'");
}

namespace {

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw LoadError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw LoadError("write failed for '" + path.string() + "'");
}

}  // namespace

GenDataPaths run_gen_data(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  DatasetPair pair = generate_data(cfg.data);
  GenDataPaths paths{out_dir / "train.csv", out_dir / "test.csv"};
  save_dataset(pair.train, paths.train_file);
  save_dataset(pair.test, paths.test_file);
  write_text(out_dir / "resolved_config.ini", cfg.serialize());
  return paths;
}

TrainRunPaths run_train_cmd(const ExperimentConfig& cfg, const std::filesystem::path& train_data,
                            const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  Dataset data = load_dataset(train_data);
  std::vector<TrainReport> reports;
  Predictor p = train_from_config(cfg, data, &reports);
  TrainRunPaths paths{out_dir / "model.dnet", out_dir / "train_report.csv",
                      out_dir / "resolved_config.ini"};
  save_predictor(p, paths.model_file);
  if (cfg.train.method == Method::bagged) {
    for (std::size_t m = 0; m < reports.size(); ++m) {
      write_train_report_csv(reports[m],
                             out_dir / ("train_report_m" + std::to_string(m) + ".csv"));
    }
    if (!reports.empty()) write_train_report_csv(reports[0], paths.report_file);
  } else if (!reports.empty()) {
    write_train_report_csv(reports[0], paths.report_file);
  }
  write_text(paths.config_file, cfg.serialize());
  return paths;
}

EvalRunPaths run_eval_cmd(const ExperimentConfig& cfg, const std::filesystem::path& model_file,
                          const std::filesystem::path& test_data,
                          const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  Predictor p = load_predictor(model_file);
  Dataset data = load_dataset(test_data);
  EvalOutcome outcome = evaluate_predictor(p, data, cfg, method_name(cfg.train.method));
  EvalRunPaths paths{out_dir / "oracle_curve.csv", out_dir / "diagnostics.csv"};
  write_oracle_curve_csv(outcome.curve, paths.curve_file);
  write_diagnostics_csv(outcome, paths.diagnostics_file);
  write_text(out_dir / "resolved_config.ini", cfg.serialize());
  return paths;
}

namespace {

// One train+eval pass used by the sweep and ablation grids. Every sub-run
// writes its own artifact set under `dir`.
EvalOutcome run_cell(const ExperimentConfig& cfg, const DatasetPair& pair,
                     const std::filesystem::path& dir, const std::string& label) {
  ensure_dir(dir);
  std::vector<TrainReport> reports;
  Predictor p = train_from_config(cfg, pair.train, &reports);
  save_predictor(p, dir / "model.dnet");
  if (!reports.empty()) write_train_report_csv(reports[0], dir / "train_report.csv");
  write_text(dir / "resolved_config.ini", cfg.serialize());
  EvalOutcome outcome = evaluate_predictor(p, pair.test, cfg, label);
  write_oracle_curve_csv(outcome.curve, dir / "oracle_curve.csv");
  write_diagnostics_csv(outcome, dir / "diagnostics.csv");
  return outcome;
}

void run_parallel(std::size_t n_tasks, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n_tasks <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&]() {
    while (true) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n_tasks) return;
        i = next++;
      }
      fn(i);
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < std::min(jobs, n_tasks); ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

std::string beta_dir_name(double beta) {
  std::string s = "beta_" + fmt_double(beta);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return s;
}

}  // namespace

std::vector<SweepRow> run_sweep_beta(const ExperimentConfig& cfg,
                                     const std::vector<double>& betas,
                                     const std::filesystem::path& out_dir, std::size_t jobs) {
  if (betas.empty()) throw ArgumentError("sweep-beta needs at least one beta value");
  for (double b : betas) {
    if (b < 0.0) throw ConfigError("beta values must be >= 0");
  }
  ensure_dir(out_dir);
  DatasetPair pair = generate_data(cfg.data);  // shared data seed across runs
  std::vector<SweepRow> rows(betas.size());
  std::vector<std::string> failures(betas.size());
  run_parallel(betas.size(), jobs, [&](std::size_t i) {
    ExperimentConfig sub = cfg;
    sub.train.beta = betas[i];
    try {
      EvalOutcome outcome = run_cell(sub, pair, out_dir / beta_dir_name(betas[i]),
                                     method_name(sub.train.method));
      SweepRow row;
      row.beta = betas[i];
      row.k1_error = outcome.curve.mean_error.front();
      row.kmax_error = outcome.curve.mean_error.back();
      row.variance = outcome.variance;
      rows[i] = row;
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });
  std::string csv = "beta,k1_error,kmax_error,variance\n";
  std::vector<SweepRow> ok;
  std::string failure_note;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!failures[i].empty()) {
      failure_note += "beta=" + fmt_double(betas[i]) + ": " + failures[i] + "; ";
      continue;
    }
    csv += fmt_double(rows[i].beta) + "," + fmt_double(rows[i].k1_error) + "," +
           fmt_double(rows[i].kmax_error) + "," + fmt_double(rows[i].variance) + "\n";
    ok.push_back(rows[i]);
  }
  write_text(out_dir / "summary.csv", csv);
  if (!failure_note.empty()) {
    throw TrainingError("sweep-beta finished with partial results: " + failure_note);
  }
  return ok;
}

std::vector<AblateRow> run_ablate(const ExperimentConfig& cfg,
                                  const std::filesystem::path& out_dir, std::size_t jobs) {
  ensure_dir(out_dir);
  DatasetPair pair = generate_data(cfg.data);
  struct Cell {
    Method method;
    bool catchup;
    bool pretrain;
  };
  std::vector<Cell> cells;
  for (Method m : {Method::diversenet, Method::treenet}) {
    for (bool catchup : {true, false}) {
      for (bool pretrain : {true, false}) cells.push_back({m, catchup, pretrain});
    }
  }
  std::size_t pretrain_on = cfg.train.pretrain_epochs > 0
                                ? cfg.train.pretrain_epochs
                                : std::max<std::size_t>(1, cfg.train.epochs / 5);
  double beta_on = cfg.train.beta > 0.0 ? cfg.train.beta : 1.0;

  std::vector<AblateRow> rows(cells.size());
  std::vector<std::string> failures(cells.size());
  run_parallel(cells.size(), jobs, [&](std::size_t i) {
    const Cell& cell = cells[i];
    ExperimentConfig sub = cfg;
    sub.train.method = cell.method;
    sub.train.beta = cell.catchup ? beta_on : 0.0;
    sub.train.epsilon = 0.0;
    sub.train.pretrain_epochs = cell.pretrain ? pretrain_on : 0;
    std::string name = std::string("cell_") + method_name(cell.method) +
                       (cell.catchup ? "_catchup1" : "_catchup0") +
                       (cell.pretrain ? "_pretrain1" : "_pretrain0");
    try {
      EvalOutcome outcome = run_cell(sub, pair, out_dir / name, method_name(cell.method));
      AblateRow row;
      row.method = cell.method;
      row.catchup = cell.catchup;
      row.pretrain = cell.pretrain;
      row.k_errors = outcome.curve.mean_error;
      row.variance = outcome.variance;
      rows[i] = row;
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });
  std::size_t k_cols = 0;
  for (const auto& row : rows) k_cols = std::max(k_cols, row.k_errors.size());
  std::string csv = "method,catchup,pretrain";
  for (std::size_t k = 1; k <= k_cols; ++k) csv += ",k" + std::to_string(k);
  csv += ",variance\n";
  std::vector<AblateRow> ok;
  std::string failure_note;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!failures[i].empty()) {
      failure_note += std::string(method_name(cells[i].method)) + "/catchup=" +
                      (cells[i].catchup ? "1" : "0") + "/pretrain=" +
                      (cells[i].pretrain ? "1" : "0") + ": " + failures[i] + "; ";
      continue;
    }
    csv += std::string(method_name(rows[i].method)) + "," + (rows[i].catchup ? "1" : "0") + "," +
           (rows[i].pretrain ? "1" : "0");
    for (std::size_t k = 0; k < k_cols; ++k) {
      csv += ",";
      csv += k < rows[i].k_errors.size() ? fmt_double(rows[i].k_errors[k]) : "";
    }
    csv += "," + fmt_double(rows[i].variance) + "\n";
    ok.push_back(rows[i]);
  }
  write_text(out_dir / "summary.csv", csv);
  if (!failure_note.empty()) {
    throw TrainingError("ablate finished with partial results: " + failure_note);
  }
  return ok;
}

}  // namespace diversenet
