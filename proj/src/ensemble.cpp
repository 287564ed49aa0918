#include "diversenet/ensemble.hpp"

#include <cmath>
#include <fstream>

#include "diversenet/artifact_io.hpp"
#include "diversenet/errors.hpp"
#include "diversenet/io.hpp"
#include "diversenet/rng.hpp"

namespace diversenet {

void TreenetConfig::validate() const {
  if (input_dim == 0 || output_dim == 0) throw ConfigError("treenet dims must be positive");
  if (encoder_widths.empty()) throw ConfigError("treenet encoder needs at least one layer");
  for (std::size_t w : encoder_widths) {
    if (w == 0) throw ConfigError("zero-width encoder layer");
  }
  for (std::size_t w : decoder_widths) {
    if (w == 0) throw ConfigError("zero-width decoder layer");
  }
  if (n_members == 0) throw ConfigError("treenet needs at least one member");
}

std::vector<NamedTensor> TreenetModel::parameter_layout(const TreenetConfig& cfg) {
  std::vector<NamedTensor> layout;
  std::size_t cur = cfg.input_dim;
  for (std::size_t i = 0; i < cfg.encoder_widths.size(); ++i) {
    std::size_t w = cfg.encoder_widths[i];
    layout.push_back({"enc" + std::to_string(i) + ".W", Tensor({cur, w})});
    layout.push_back({"enc" + std::to_string(i) + ".b", Tensor({w})});
    cur = w;
  }
  std::size_t bottleneck = cur;
  for (std::size_t m = 0; m < cfg.n_members; ++m) {
    cur = bottleneck;
    std::string prefix = "m" + std::to_string(m) + ".";
    for (std::size_t i = 0; i < cfg.decoder_widths.size(); ++i) {
      std::size_t w = cfg.decoder_widths[i];
      layout.push_back({prefix + "dec" + std::to_string(i) + ".W", Tensor({cur, w})});
      layout.push_back({prefix + "dec" + std::to_string(i) + ".b", Tensor({w})});
      cur = w;
    }
    layout.push_back({prefix + "out.W", Tensor({cur, cfg.output_dim})});
    layout.push_back({prefix + "out.b", Tensor({cfg.output_dim})});
  }
  return layout;
}

TreenetModel::TreenetModel(TreenetConfig config, std::vector<NamedTensor> params)
    : config_(std::move(config)), params_(std::move(params)) {}

TreenetModel TreenetModel::init(const TreenetConfig& config) {
  config.validate();
  std::vector<NamedTensor> params = parameter_layout(config);
  std::size_t enc_end = 2 * config.encoder_widths.size();
  std::size_t per_member = 2 * (config.decoder_widths.size() + 1);
  Rng enc_rng(mix_seed(config.seed, 0));
  auto fill = [](NamedTensor& p, Rng& rng) {
    if (p.tensor.ndim() != 2) return;  // biases stay zero
    double s = std::sqrt(6.0 / static_cast<double>(p.tensor.rows() + p.tensor.cols()));
    for (double& v : p.tensor.values()) v = rng.uniform(-s, s);
  };
  for (std::size_t i = 0; i < enc_end; ++i) fill(params[i], enc_rng);
  for (std::size_t m = 0; m < config.n_members; ++m) {
    Rng head_rng(mix_seed(config.seed, m + 1));
    for (std::size_t i = 0; i < per_member; ++i) {
      fill(params[enc_end + m * per_member + i], head_rng);
    }
  }
  return TreenetModel(config, std::move(params));
}

std::size_t TreenetModel::encoder_param_end() const { return 2 * config_.encoder_widths.size(); }

std::size_t TreenetModel::member_param_begin(std::size_t member) const {
  return encoder_param_end() + member * 2 * (config_.decoder_widths.size() + 1);
}

std::vector<NodeId> TreenetModel::emit_params(Graph& g) const {
  std::vector<NodeId> ids;
  ids.reserve(params_.size());
  for (const auto& p : params_) ids.push_back(g.leaf(p.tensor));
  return ids;
}

std::vector<NodeId> TreenetModel::forward_members_on_graph(Graph& g,
                                                           const std::vector<NodeId>& param_ids,
                                                           NodeId x) const {
  const Tensor& xv = g.value(x);
  if (xv.ndim() != 2 || xv.cols() != config_.input_dim) {
    throw DimensionError("treenet input width mismatch: got " + xv.shape_str() + ", expected [* x " +
                         std::to_string(config_.input_dim) + "]");
  }
  NodeId h = x;
  std::size_t pi = 0;
  for (std::size_t i = 0; i < config_.encoder_widths.size(); ++i) {
    h = g.activation(g.add_bias(g.matmul(h, param_ids[pi]), param_ids[pi + 1]),
                     config_.hidden_activation);
    pi += 2;
  }
  std::vector<NodeId> outputs;
  outputs.reserve(config_.n_members);
  for (std::size_t m = 0; m < config_.n_members; ++m) {
    NodeId hm = h;
    for (std::size_t i = 0; i < config_.decoder_widths.size(); ++i) {
      hm = g.activation(g.add_bias(g.matmul(hm, param_ids[pi]), param_ids[pi + 1]),
                        config_.hidden_activation);
      pi += 2;
    }
    outputs.push_back(g.activation(g.add_bias(g.matmul(hm, param_ids[pi]), param_ids[pi + 1]),
                                   config_.output_activation));
    pi += 2;
  }
  return outputs;
}

Tensor TreenetModel::forward_members(const Tensor& x) const {
  Graph g;
  std::vector<NodeId> ids = emit_params(g);
  std::vector<NodeId> outs = forward_members_on_graph(g, ids, g.leaf(x));
  std::size_t batch = x.rows();
  Tensor result({config_.n_members, batch, config_.output_dim});
  std::size_t slab = batch * config_.output_dim;
  for (std::size_t m = 0; m < outs.size(); ++m) {
    const Tensor& y = g.value(outs[m]);
    std::copy(y.values().begin(), y.values().end(), result.values().begin() + m * slab);
  }
  return result;
}

NodeId epsilon_l2_term(Graph& g, const LossMatrix& m, double epsilon) {
  NodeId mean_all = g.scale(g.sum(m.entries), 1.0 / static_cast<double>(m.entries.size()));
  return g.scale(mean_all, epsilon);
}

NodeId treenet_loss(Graph& g, std::span<const NodeId> member_predictions,
                    std::span<const Tensor> labels, double epsilon) {
  if (epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
  if (labels.empty()) throw ArgumentError("treenet_loss with an empty label set");
  LossMatrix m = loss_matrix(g, member_predictions, labels);
  NodeId wta = loss_div(g, m);
  if (epsilon == 0.0) return wta;
  return g.add(wta, epsilon_l2_term(g, m, epsilon));
}

namespace {

std::vector<std::pair<std::string, std::string>> treenet_config_fields(const TreenetConfig& cfg) {
  return {
      {"input_dim", std::to_string(cfg.input_dim)},
      {"output_dim", std::to_string(cfg.output_dim)},
      {"encoder_widths", join_sizes(cfg.encoder_widths)},
      {"decoder_widths", join_sizes(cfg.decoder_widths)},
      {"hidden_activation", act_name(cfg.hidden_activation)},
      {"output_activation", act_name(cfg.output_activation)},
      {"n_members", std::to_string(cfg.n_members)},
      {"seed", std::to_string(cfg.seed)},
  };
}

}  // namespace

void save_treenet(const TreenetModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  auto cfg = treenet_config_fields(model.config());
  write_artifact(out, "treenet", cfg, model.parameters());
  if (!out) throw LoadError("write failed for '" + path.string() + "'");
}

TreenetModel load_treenet(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string ctx = "treenet file '" + path.string() + "'";
  if (!in) throw LoadError(ctx + ": cannot open");
  ArtifactHeader header = read_artifact_header(in, ctx);
  if (header.kind != "treenet") {
    throw LoadError(ctx + ": kind '" + header.kind + "', expected 'treenet'");
  }
  TreenetConfig cfg;
  cfg.input_dim = parse_size(header.config_value("input_dim", ctx), ctx + ": input_dim");
  cfg.output_dim = parse_size(header.config_value("output_dim", ctx), ctx + ": output_dim");
  cfg.encoder_widths = parse_size_list(header.config_value("encoder_widths", ctx), ctx);
  cfg.decoder_widths = parse_size_list(header.config_value("decoder_widths", ctx), ctx);
  cfg.hidden_activation = act_from_name(header.config_value("hidden_activation", ctx));
  cfg.output_activation = act_from_name(header.config_value("output_activation", ctx));
  cfg.n_members = parse_size(header.config_value("n_members", ctx), ctx + ": n_members");
  cfg.seed = parse_u64(header.config_value("seed", ctx), ctx + ": seed");
  cfg.validate();
  std::vector<NamedTensor> expected = TreenetModel::parameter_layout(cfg);
  if (expected.size() != header.tensors.size()) {
    throw LoadError(ctx + ": manifest lists " + std::to_string(header.tensors.size()) +
                    " tensors, config implies " + std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (header.tensors[i].first != expected[i].name ||
        header.tensors[i].second != expected[i].tensor.shape()) {
      throw LoadError(ctx + ": tensor '" + header.tensors[i].first +
                      "' does not match expected '" + expected[i].name + "' " +
                      expected[i].tensor.shape_str());
    }
  }
  std::vector<NamedTensor> params = read_artifact_payload(in, header, ctx);
  return TreenetModel(cfg, std::move(params));
}

void save_bagged(const BaggedEnsemble& ensemble, const std::filesystem::path& path) {
  if (ensemble.members.empty()) throw ArgumentError("bagged ensemble has no members");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  auto cfg = model_config_fields(ensemble.members[0].config());
  cfg.emplace_back("n_members", std::to_string(ensemble.members.size()));
  for (std::size_t m = 0; m < ensemble.subsets.size(); ++m) {
    cfg.emplace_back("subset" + std::to_string(m), join_sizes(ensemble.subsets[m]));
  }
  for (std::size_t m = 0; m < ensemble.members.size(); ++m) {
    cfg.emplace_back("member" + std::to_string(m) + "_seed",
                     std::to_string(ensemble.members[m].config().seed));
  }
  std::vector<NamedTensor> tensors;
  for (std::size_t m = 0; m < ensemble.members.size(); ++m) {
    for (const auto& p : ensemble.members[m].parameters()) {
      tensors.push_back({"m" + std::to_string(m) + "." + p.name, p.tensor});
    }
  }
  write_artifact(out, "bagged", cfg, tensors);
  if (!out) throw LoadError("write failed for '" + path.string() + "'");
}

BaggedEnsemble load_bagged(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string ctx = "bagged file '" + path.string() + "'";
  if (!in) throw LoadError(ctx + ": cannot open");
  ArtifactHeader header = read_artifact_header(in, ctx);
  if (header.kind != "bagged") {
    throw LoadError(ctx + ": kind '" + header.kind + "', expected 'bagged'");
  }
  ModelConfig base = model_config_from_header(header, ctx);
  std::size_t n_members = parse_size(header.config_value("n_members", ctx), ctx + ": n_members");
  if (n_members == 0) throw LoadError(ctx + ": n_members must be >= 1");
  std::vector<NamedTensor> tensors = read_artifact_payload(in, header, ctx);

  BaggedEnsemble ensemble;
  std::vector<NamedTensor> layout = Model::parameter_layout(base);
  if (tensors.size() != n_members * layout.size()) {
    throw LoadError(ctx + ": payload holds " + std::to_string(tensors.size()) +
                    " tensors, expected " + std::to_string(n_members * layout.size()));
  }
  for (std::size_t m = 0; m < n_members; ++m) {
    ModelConfig cfg = base;
    cfg.seed = parse_u64(header.config_value("member" + std::to_string(m) + "_seed", ctx),
                         ctx + ": member seed");
    std::vector<NamedTensor> params;
    std::string prefix = "m" + std::to_string(m) + ".";
    for (std::size_t i = 0; i < layout.size(); ++i) {
      NamedTensor& t = tensors[m * layout.size() + i];
      if (t.name != prefix + layout[i].name ||
          !t.tensor.same_shape(layout[i].tensor)) {
        throw LoadError(ctx + ": tensor '" + t.name + "' does not match expected '" + prefix +
                        layout[i].name + "'");
      }
      params.push_back({layout[i].name, std::move(t.tensor)});
    }
    ensemble.members.emplace_back(cfg, std::move(params));
    ensemble.subsets.push_back(parse_size_list(
        header.config_value("subset" + std::to_string(m), ctx), ctx + ": subset"));
  }
  return ensemble;
}

}  // namespace diversenet
