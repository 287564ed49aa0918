#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "diversenet/data.hpp"
#include "diversenet/ensemble.hpp"
#include "diversenet/eval.hpp"
#include "diversenet/model.hpp"
#include "diversenet/tensor.hpp"

namespace diversenet {

enum class Method { diversenet, standard, treenet, treenet_eps, bagged };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

enum class OptimizerKind { sgd, adam };

const char* optimizer_name(OptimizerKind k);
OptimizerKind optimizer_from_name(const std::string& name);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Continuous-control training draws fresh samples per item per batch from
// U[lo, hi]; lo == hi is a point mass.
struct ContinuousSpec {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t samples_per_item = 8;
};

struct TrainConfig {
  Method method = Method::diversenet;
  std::size_t n_controls = 4;  // |C| (diversenet) or member count N
  ControlMode control_mode = ControlMode::discrete;
  ContinuousSpec continuous;
  double beta = 1.0;
  double epsilon = 1e-4;  // treenet_eps stabilizer
  double learning_rate = 1e-3;
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  std::size_t pretrain_epochs = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  AdamParams adam;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochStats {
  double loss = 0.0;
  double loss_div = 0.0;
  double loss_catchup = 0.0;
  std::vector<std::uint64_t> assignments;  // labels matched per slot
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t n_slots = 0;
  double wall_seconds = 0.0;
};

// One optimizer step on a single tensor; state holds first/second moments
// and the bias-correction step count.
struct AdamState {
  Tensor m;
  Tensor v;
  std::size_t t = 0;
};

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr,
               const AdamParams& hp);

// Diverse / standard training of a single model. Builds per-item loss
// matrices over the control set, applies the configured objective, and
// averages over the batch. The first pretrain_epochs run the plain set loss
// under control index 0.
std::pair<Model, TrainReport> train(Model model, const Dataset& dataset, const TrainConfig& cfg);

// Winner-take-all training of a treenet (rows = members); beta adds the
// catchup term, epsilon the mean-pair-loss stabilizer.
std::pair<TreenetModel, TrainReport> train_treenet(TreenetModel model, const Dataset& dataset,
                                                   const TrainConfig& cfg);

// N independent models, each on a random 2/3 subset, standard set loss.
BaggedEnsemble train_bagged(const ModelConfig& model_cfg, const Dataset& dataset,
                            std::size_t n_members, const TrainConfig& cfg, std::uint64_t seed,
                            std::vector<TrainReport>* reports_out = nullptr);

PredictionSet predict_all(const Model& model, const ControlSet& controls, const Dataset& dataset);
PredictionSet predict_all(const TreenetModel& model, const Dataset& dataset);
PredictionSet predict_all(const BaggedEnsemble& ensemble, const Dataset& dataset);

LabelSets dataset_labels(const Dataset& dataset);

void write_train_report_csv(const TrainReport& report, const std::filesystem::path& path);

}  // namespace diversenet
