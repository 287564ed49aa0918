#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "diversenet/data.hpp"
#include "diversenet/ensemble.hpp"
#include "diversenet/eval.hpp"
#include "diversenet/model.hpp"
#include "diversenet/train.hpp"

namespace diversenet {

enum class Task { regression, occluded };

const char* task_name(Task t);
Task task_from_name(const std::string& name);

struct DataSection {
  Task task = Task::regression;
  std::size_t n_train = 512;
  std::size_t n_test = 128;
  std::vector<ModeSpec> modes = default_modes();
  double noise_sd = 0.0;
  std::size_t grid_side = 8;
  std::size_t n_shapes = 12;
  Quadrant visible_quadrant = Quadrant::top_left;
  std::size_t k_neighbors = 4;
  std::uint64_t seed = 1;
};

struct ModelSection {
  std::vector<std::size_t> encoder_widths = {32, 16};
  std::vector<std::size_t> decoder_widths = {32};
  Act hidden_activation = Act::tanh;
  Act output_activation = Act::identity;
  std::optional<std::vector<std::size_t>> injection_points;  // default: bottleneck
  ControlMode control_mode = ControlMode::discrete;
  std::uint64_t seed = 2;
};

struct TrainSection {
  Method method = Method::diversenet;
  std::size_t n_controls = 4;
  std::size_t control_samples = 8;
  double control_lo = -1.0;
  double control_hi = 1.0;
  double beta = 1.0;
  double epsilon = 1e-4;
  double learning_rate = 1e-3;
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  std::size_t pretrain_epochs = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t n_members = 0;  // 0: match n_controls
  std::uint64_t seed = 3;
};

struct EvalSection {
  std::size_t k_max = 0;       // 0: all slots
  std::size_t n_slots = 0;     // 0: natural slot count of the predictor
  std::size_t n_resamples = 64;
  double tau = 0.0;            // 0: auto (3x best slot's mean nearest distance)
  std::uint64_t seed = 4;
};

// Sectioned text config with defaults for every key; unknown sections or
// keys are rejected and a parsed config serializes back canonically.
struct ExperimentConfig {
  DataSection data;
  ModelSection model;
  TrainSection train;
  EvalSection eval;

  static ExperimentConfig parse(const std::string& text, const std::string& context);
  static ExperimentConfig parse_file(const std::filesystem::path& path);
  std::string serialize() const;
  void validate() const;

  std::vector<std::size_t> resolved_injection_points() const;
  TrainConfig train_config() const;
  ModelConfig model_config(std::size_t input_dim, std::size_t output_dim) const;
  TreenetConfig treenet_config(std::size_t input_dim, std::size_t output_dim) const;
  std::size_t member_count() const;
};

DatasetPair generate_data(const DataSection& section);

// A trained predictor of any method.
struct Predictor {
  std::variant<std::monostate, Model, TreenetModel, BaggedEnsemble> value;

  Method method_kind = Method::diversenet;
  std::size_t n_slots() const;
};

void save_predictor(const Predictor& p, const std::filesystem::path& path);
Predictor load_predictor(const std::filesystem::path& path);

Predictor train_from_config(const ExperimentConfig& cfg, const Dataset& train_data,
                            std::vector<TrainReport>* reports_out);

// Slot predictions used at evaluation time; eval.n_slots = 0 keeps the
// predictor's natural count. A single-prediction model replicates its slot;
// continuous models evaluate at equally spaced control values.
PredictionSet predict_from(const Predictor& p, const Dataset& data, const ExperimentConfig& cfg);

struct EvalOutcome {
  OracleCurve curve;
  double variance = 0.0;
  DegeneracyReport degeneracy;
};

EvalOutcome evaluate_predictor(const Predictor& p, const Dataset& test_data,
                               const ExperimentConfig& cfg, const std::string& method_label);

void write_diagnostics_csv(const EvalOutcome& outcome, const std::filesystem::path& path);

// --- command backends -------------------------------------------------------

struct GenDataPaths {
  std::filesystem::path train_file;
  std::filesystem::path test_file;
};

GenDataPaths run_gen_data(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct TrainRunPaths {
  std::filesystem::path model_file;
  std::filesystem::path report_file;
  std::filesystem::path config_file;
};

TrainRunPaths run_train_cmd(const ExperimentConfig& cfg, const std::filesystem::path& train_data,
                            const std::filesystem::path& out_dir);

struct EvalRunPaths {
  std::filesystem::path curve_file;
  std::filesystem::path diagnostics_file;
};

EvalRunPaths run_eval_cmd(const ExperimentConfig& cfg, const std::filesystem::path& model_file,
                          const std::filesystem::path& test_data,
                          const std::filesystem::path& out_dir);

struct SweepRow {
  double beta = 0.0;
  double k1_error = 0.0;
  double kmax_error = 0.0;
  double variance = 0.0;
};

std::vector<SweepRow> run_sweep_beta(const ExperimentConfig& cfg,
                                     const std::vector<double>& betas,
                                     const std::filesystem::path& out_dir, std::size_t jobs);

struct AblateRow {
  Method method = Method::diversenet;
  bool catchup = false;
  bool pretrain = false;
  std::vector<double> k_errors;
  double variance = 0.0;
};

std::vector<AblateRow> run_ablate(const ExperimentConfig& cfg,
                                  const std::filesystem::path& out_dir, std::size_t jobs);

}  // namespace diversenet
