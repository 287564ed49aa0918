#include "diversenet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "diversenet/errors.hpp"
#include "diversenet/io.hpp"
#include "diversenet/losses.hpp"
#include "diversenet/rng.hpp"

namespace diversenet {

const char* method_name(Method m) {
  switch (m) {
    case Method::diversenet: return "diversenet";
    case Method::standard: return "standard";
    case Method::treenet: return "treenet";
    case Method::treenet_eps: return "treenet_eps";
    case Method::bagged: return "bagged";
  }
  return "diversenet";
}

Method method_from_name(const std::string& name) {
  if (name == "diversenet") return Method::diversenet;
  if (name == "standard") return Method::standard;
  if (name == "treenet") return Method::treenet;
  if (name == "treenet_eps") return Method::treenet_eps;
  if (name == "bagged") return Method::bagged;
  throw ConfigError("unknown method '" + name + "'");
}

const char* optimizer_name(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + name + "'");
}

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
  if (beta < 0.0) throw ConfigError("beta must be >= 0");
  if (epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
  if (n_controls == 0) throw ConfigError("n_controls must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (epochs == 0 ? pretrain_epochs != 0 : pretrain_epochs >= epochs) {
    throw ConfigError("pretrain_epochs must be < epochs");
  }
  if (control_mode == ControlMode::continuous) {
    if (continuous.samples_per_item == 0) throw ConfigError("samples_per_item must be >= 1");
    if (continuous.lo > continuous.hi) throw ConfigError("continuous range is empty");
  }
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr,
               const AdamParams& hp) {
  if (!param.same_shape(grad)) {
    throw DimensionError("adam_step shape mismatch: " + param.shape_str() + " vs " +
                         grad.shape_str());
  }
  if (state.m.size() == 0) {
    state.m = Tensor(param.shape());
    state.v = Tensor(param.shape());
  }
  if (!state.m.same_shape(param)) {
    throw DimensionError("adam state shape mismatch: " + state.m.shape_str() + " vs " +
                         param.shape_str());
  }
  ++state.t;
  double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    double g = grad[i];
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
    double mhat = state.m[i] / c1;
    double vhat = state.v[i] / c2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + hp.eps);
  }
}

namespace {

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, std::size_t n_params)
      : cfg_(cfg), states_(n_params) {}

  void step(std::vector<NamedTensor>& params, const std::vector<Tensor>& grads) {
    if (cfg_.optimizer == OptimizerKind::sgd) {
      for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& t = params[p].tensor;
        for (std::size_t i = 0; i < t.size(); ++i) t[i] -= cfg_.learning_rate * grads[p][i];
      }
      return;
    }
    for (std::size_t p = 0; p < params.size(); ++p) {
      adam_step(params[p].tensor, grads[p], states_[p], cfg_.learning_rate, cfg_.adam);
    }
  }

 private:
  const TrainConfig& cfg_;
  std::vector<AdamState> states_;
};

struct BatchAccumulator {
  double loss_sum = 0.0;
  double div_sum = 0.0;
  double catchup_sum = 0.0;
  std::vector<std::uint64_t> assignments;
};

// Training controls for one item in one batch. Pretraining pins a single
// fixed control; discrete mode enumerates |C|; continuous mode draws fresh
// samples per item.
std::vector<ControlValue> item_controls(const TrainConfig& cfg, bool pretrain, Rng& control_rng) {
  if (pretrain) {
    if (cfg.control_mode == ControlMode::discrete) return {ControlValue::index(0)};
    return {ControlValue::vec({0.0})};
  }
  if (cfg.control_mode == ControlMode::discrete) {
    std::vector<ControlValue> out;
    out.reserve(cfg.n_controls);
    for (std::size_t i = 0; i < cfg.n_controls; ++i) out.push_back(ControlValue::index(i));
    return out;
  }
  std::vector<ControlValue> out;
  out.reserve(cfg.continuous.samples_per_item);
  for (std::size_t s = 0; s < cfg.continuous.samples_per_item; ++s) {
    double c = cfg.continuous.lo == cfg.continuous.hi
                   ? cfg.continuous.lo
                   : control_rng.uniform(cfg.continuous.lo, cfg.continuous.hi);
    out.push_back(ControlValue::vec({c}));
  }
  return out;
}

void check_finite_loss(double loss, std::size_t epoch, std::size_t batch) {
  if (!std::isfinite(loss)) {
    throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(batch));
  }
}

std::vector<Tensor> collect_grads(Graph& g, const std::vector<NodeId>& param_ids) {
  std::vector<Tensor> grads;
  grads.reserve(param_ids.size());
  for (NodeId id : param_ids) grads.push_back(g.grad(id));
  return grads;
}

}  // namespace

LabelSets dataset_labels(const Dataset& dataset) {
  LabelSets gts;
  gts.reserve(dataset.items.size());
  for (const DataItem& item : dataset.items) gts.push_back(item.labels);
  return gts;
}

std::pair<Model, TrainReport> train(Model model, const Dataset& dataset, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.method != Method::diversenet && cfg.method != Method::standard) {
    throw UsageError(std::string("train() handles diversenet/standard; got ") +
                     method_name(cfg.method));
  }
  if (cfg.method == Method::standard && cfg.n_controls != 1) {
    throw ConfigError("method=standard trains a single prediction; set n_controls=1");
  }
  if (dataset.items.empty()) throw ArgumentError("training dataset is empty");
  if (model.config().input_dim != dataset.input_dim ||
      model.config().output_dim != dataset.output_dim) {
    throw DimensionError("model dims (" + std::to_string(model.config().input_dim) + "->" +
                         std::to_string(model.config().output_dim) + ") do not match dataset (" +
                         std::to_string(dataset.input_dim) + "->" +
                         std::to_string(dataset.output_dim) + ")");
  }
  if (cfg.control_mode != model.config().control_mode) {
    throw UsageError("train control_mode does not match the model");
  }
  if (cfg.control_mode == ControlMode::discrete &&
      model.config().control_dim != cfg.n_controls) {
    throw ConfigError("model control_dim " + std::to_string(model.config().control_dim) +
                      " does not match n_controls " + std::to_string(cfg.n_controls));
  }

  auto start = std::chrono::steady_clock::now();
  std::size_t n_slots = cfg.control_mode == ControlMode::discrete
                            ? cfg.n_controls
                            : cfg.continuous.samples_per_item;
  TrainReport report;
  report.n_slots = n_slots;
  Optimizer opt(cfg, model.parameters().size());
  Rng control_rng(mix_seed(cfg.seed, 0xC011));
  LossConfig loss_cfg{cfg.beta, PairLossKind::squared_error};

  std::size_t n = dataset.items.size();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    bool pretrain = epoch < cfg.pretrain_epochs;
    BatchAccumulator acc;
    acc.assignments.assign(n_slots, 0);
    auto batches = batch_indices(n, cfg.batch_size, mix_seed(cfg.seed, epoch));
    for (std::size_t b = 0; b < batches.size(); ++b) {
      Graph g;
      std::vector<NodeId> param_ids = model.emit_params(g);
      std::vector<NodeId> item_losses;
      item_losses.reserve(batches[b].size());
      for (std::size_t idx : batches[b]) {
        const DataItem& item = dataset.items[idx];
        std::vector<ControlValue> controls = item_controls(cfg, pretrain, control_rng);
        NodeId x = g.leaf(Tensor::row(item.x));
        std::vector<NodeId> rows;
        rows.reserve(controls.size());
        for (const ControlValue& c : controls) {
          rows.push_back(model.forward_on_graph(g, param_ids, c, x));
        }
        std::vector<Tensor> labels;
        labels.reserve(item.labels.size());
        for (const auto& y : item.labels) labels.push_back(Tensor::row(y));
        LossMatrix matrix = loss_matrix(g, rows, labels);
        NodeId item_loss;
        if (pretrain || cfg.method == Method::standard) {
          item_loss = loss_standard_set(g, matrix);
          acc.div_sum += g.value(item_loss).item();
        } else {
          NodeId div = loss_div(g, matrix);
          NodeId catchup = loss_catchup(g, matrix);
          item_loss = g.add(div, g.scale(catchup, loss_cfg.beta));
          acc.div_sum += g.value(div).item();
          acc.catchup_sum += g.value(catchup).item();
        }
        AssignmentTrace trace = assignment_trace(g, matrix);
        for (std::size_t match : trace.column_match) ++acc.assignments[match];
        acc.loss_sum += g.value(item_loss).item();
        item_losses.push_back(item_loss);
      }
      NodeId batch_loss =
          g.scale(g.sum(item_losses), 1.0 / static_cast<double>(item_losses.size()));
      check_finite_loss(g.value(batch_loss).item(), epoch, b);
      g.backward(batch_loss);
      opt.step(model.parameters(), collect_grads(g, param_ids));
    }
    EpochStats stats;
    stats.loss = acc.loss_sum / static_cast<double>(n);
    stats.loss_div = acc.div_sum / static_cast<double>(n);
    stats.loss_catchup = acc.catchup_sum / static_cast<double>(n);
    stats.assignments = std::move(acc.assignments);
    report.epochs.push_back(std::move(stats));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

std::pair<TreenetModel, TrainReport> train_treenet(TreenetModel model, const Dataset& dataset,
                                                   const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.method != Method::treenet && cfg.method != Method::treenet_eps) {
    throw UsageError(std::string("train_treenet() handles treenet methods; got ") +
                     method_name(cfg.method));
  }
  if (dataset.items.empty()) throw ArgumentError("training dataset is empty");
  if (model.config().input_dim != dataset.input_dim ||
      model.config().output_dim != dataset.output_dim) {
    throw DimensionError("treenet dims do not match dataset");
  }
  double epsilon = cfg.method == Method::treenet_eps ? cfg.epsilon : 0.0;

  auto start = std::chrono::steady_clock::now();
  std::size_t n_slots = model.n_members();
  TrainReport report;
  report.n_slots = n_slots;
  Optimizer opt(cfg, model.parameters().size());

  std::size_t n = dataset.items.size();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    bool pretrain = epoch < cfg.pretrain_epochs;
    BatchAccumulator acc;
    acc.assignments.assign(n_slots, 0);
    auto batches = batch_indices(n, cfg.batch_size, mix_seed(cfg.seed, epoch));
    for (std::size_t b = 0; b < batches.size(); ++b) {
      Graph g;
      std::vector<NodeId> param_ids = model.emit_params(g);
      std::vector<NodeId> item_losses;
      item_losses.reserve(batches[b].size());
      for (std::size_t idx : batches[b]) {
        const DataItem& item = dataset.items[idx];
        NodeId x = g.leaf(Tensor::row(item.x));
        std::vector<NodeId> rows = model.forward_members_on_graph(g, param_ids, x);
        std::vector<Tensor> labels;
        labels.reserve(item.labels.size());
        for (const auto& y : item.labels) labels.push_back(Tensor::row(y));
        LossMatrix matrix = loss_matrix(g, rows, labels);
        NodeId item_loss;
        if (pretrain) {
          // Every member fits every label: the plain set loss averaged
          // over members.
          item_loss = g.scale(g.sum(matrix.entries), 1.0 / static_cast<double>(n_slots));
          acc.div_sum += g.value(item_loss).item();
        } else {
          NodeId wta = loss_div(g, matrix);
          item_loss = wta;
          acc.div_sum += g.value(wta).item();
          if (cfg.beta > 0.0) {
            NodeId catchup = loss_catchup(g, matrix);
            item_loss = g.add(item_loss, g.scale(catchup, cfg.beta));
            acc.catchup_sum += g.value(catchup).item();
          }
          if (epsilon > 0.0) {
            item_loss = g.add(item_loss, epsilon_l2_term(g, matrix, epsilon));
          }
        }
        AssignmentTrace trace = assignment_trace(g, matrix);
        for (std::size_t match : trace.column_match) ++acc.assignments[match];
        acc.loss_sum += g.value(item_loss).item();
        item_losses.push_back(item_loss);
      }
      NodeId batch_loss =
          g.scale(g.sum(item_losses), 1.0 / static_cast<double>(item_losses.size()));
      check_finite_loss(g.value(batch_loss).item(), epoch, b);
      g.backward(batch_loss);
      opt.step(model.parameters(), collect_grads(g, param_ids));
    }
    EpochStats stats;
    stats.loss = acc.loss_sum / static_cast<double>(n);
    stats.loss_div = acc.div_sum / static_cast<double>(n);
    stats.loss_catchup = acc.catchup_sum / static_cast<double>(n);
    stats.assignments = std::move(acc.assignments);
    report.epochs.push_back(std::move(stats));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

BaggedEnsemble train_bagged(const ModelConfig& model_cfg, const Dataset& dataset,
                            std::size_t n_members, const TrainConfig& cfg, std::uint64_t seed,
                            std::vector<TrainReport>* reports_out) {
  if (n_members == 0) throw ConfigError("bagged ensemble needs at least one member");
  if (dataset.items.size() < 3) {
    throw ConfigError("bagged training needs at least 3 items, got " +
                      std::to_string(dataset.items.size()));
  }
  std::size_t subset_size = static_cast<std::size_t>(
      std::llround(2.0 * static_cast<double>(dataset.items.size()) / 3.0));
  BaggedEnsemble ensemble;
  for (std::size_t m = 0; m < n_members; ++m) {
    Rng subset_rng(mix_seed(seed, 0xBA66 + m));
    std::vector<std::size_t> subset =
        subset_rng.sample_without_replacement(dataset.items.size(), subset_size);
    std::sort(subset.begin(), subset.end());

    Dataset member_data;
    member_data.split = dataset.split;
    member_data.generator_spec = dataset.generator_spec;
    member_data.seed = dataset.seed;
    member_data.input_dim = dataset.input_dim;
    member_data.output_dim = dataset.output_dim;
    for (std::size_t idx : subset) member_data.items.push_back(dataset.items[idx]);

    ModelConfig mc = model_cfg;
    mc.control_mode = ControlMode::discrete;
    mc.control_dim = 1;
    mc.seed = mix_seed(seed, 0x5EED + m);

    TrainConfig tc = cfg;
    tc.method = Method::standard;
    tc.control_mode = ControlMode::discrete;
    tc.n_controls = 1;
    tc.pretrain_epochs = 0;
    tc.seed = mix_seed(seed, m);

    auto [trained, report] = train(Model::init(mc), member_data, tc);
    if (reports_out) reports_out->push_back(std::move(report));
    ensemble.members.push_back(std::move(trained));
    ensemble.subsets.push_back(std::move(subset));
  }
  return ensemble;
}

PredictionSet predict_all(const Model& model, const ControlSet& controls, const Dataset& dataset) {
  if (controls.empty()) throw ArgumentError("predict_all with an empty control set");
  for (const ControlValue& c : controls) {
    bool discrete_model = model.config().control_mode == ControlMode::discrete;
    if (c.is_discrete() != discrete_model) {
      throw UsageError("control value mode does not match the model's control mode");
    }
  }
  std::size_t n = dataset.items.size();
  Tensor x({n, dataset.input_dim});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dataset.input_dim; ++j) {
      x.at(i, j) = dataset.items[i].x[j];
    }
  }
  PredictionSet preds;
  preds.n_slots = controls.size();
  preds.preds.assign(n, {});
  for (auto& p : preds.preds) p.reserve(controls.size());
  for (const ControlValue& c : controls) {
    Tensor y = model.forward(c, x);
    for (std::size_t i = 0; i < n; ++i) {
      preds.preds[i].emplace_back(y.values().begin() + i * dataset.output_dim,
                                  y.values().begin() + (i + 1) * dataset.output_dim);
    }
  }
  return preds;
}

PredictionSet predict_all(const TreenetModel& model, const Dataset& dataset) {
  std::size_t n = dataset.items.size();
  Tensor x({n, dataset.input_dim});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dataset.input_dim; ++j) x.at(i, j) = dataset.items[i].x[j];
  }
  Tensor slabs = model.forward_members(x);
  PredictionSet preds;
  preds.n_slots = model.n_members();
  preds.preds.assign(n, {});
  std::size_t out_dim = dataset.output_dim;
  for (std::size_t i = 0; i < n; ++i) {
    preds.preds[i].reserve(preds.n_slots);
    for (std::size_t m = 0; m < preds.n_slots; ++m) {
      const double* base = slabs.data() + (m * n + i) * out_dim;
      preds.preds[i].emplace_back(base, base + out_dim);
    }
  }
  return preds;
}

PredictionSet predict_all(const BaggedEnsemble& ensemble, const Dataset& dataset) {
  if (ensemble.members.empty()) throw ArgumentError("bagged ensemble has no members");
  PredictionSet preds;
  preds.n_slots = ensemble.members.size();
  preds.preds.assign(dataset.items.size(), {});
  for (const Model& member : ensemble.members) {
    PredictionSet one = predict_all(member, {ControlValue::index(0)}, dataset);
    for (std::size_t i = 0; i < dataset.items.size(); ++i) {
      preds.preds[i].push_back(std::move(one.preds[i][0]));
    }
  }
  return preds;
}

void write_train_report_csv(const TrainReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  out << "epoch,loss,loss_div,loss_catchup";
  for (std::size_t s = 0; s < report.n_slots; ++s) out << ",assign_" << s;
  out << "\n";
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const EpochStats& st = report.epochs[e];
    out << e << "," << fmt_double(st.loss) << "," << fmt_double(st.loss_div) << ","
        << fmt_double(st.loss_catchup);
    for (std::uint64_t a : st.assignments) out << "," << a;
    out << "\n";
  }
  if (!out) throw LoadError("write failed for '" + path.string() + "'");
}

}  // namespace diversenet
