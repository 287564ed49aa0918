#include "diversenet/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "diversenet/artifact_io.hpp"
#include "diversenet/errors.hpp"
#include "diversenet/io.hpp"
#include "diversenet/rng.hpp"

namespace diversenet {

const char* control_mode_name(ControlMode m) {
  return m == ControlMode::discrete ? "discrete" : "continuous";
}

ControlMode control_mode_from_name(const std::string& name) {
  if (name == "discrete") return ControlMode::discrete;
  if (name == "continuous") return ControlMode::continuous;
  throw ConfigError("unknown control mode '" + name + "'");
}

ControlValue ControlValue::index(std::size_t i) {
  ControlValue c;
  c.discrete_ = true;
  c.idx_ = i;
  return c;
}

ControlValue ControlValue::vec(std::vector<double> v) {
  ControlValue c;
  c.discrete_ = false;
  c.raw_ = std::move(v);
  return c;
}

ControlSet discrete_controls(std::size_t n) {
  ControlSet set;
  set.reserve(n);
  for (std::size_t i = 0; i < n; ++i) set.push_back(ControlValue::index(i));
  return set;
}

ControlSet spaced_controls(double lo, double hi, std::size_t steps) {
  if (steps < 2) throw ArgumentError("spaced_controls requires steps >= 2");
  ControlSet set;
  set.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(steps - 1);
    set.push_back(ControlValue::vec({lo + (hi - lo) * t}));
  }
  return set;
}

void ModelConfig::validate() const {
  if (input_dim == 0 || output_dim == 0) throw ConfigError("model dims must be positive");
  for (std::size_t w : encoder_widths) {
    if (w == 0) throw ConfigError("zero-width encoder layer");
  }
  for (std::size_t w : decoder_widths) {
    if (w == 0) throw ConfigError("zero-width decoder layer");
  }
  if (encoder_widths.empty()) throw ConfigError("encoder needs at least one layer");
  if (control_dim == 0) throw ConfigError("control_dim must be >= 1");
  if (injection_points.empty()) {
    throw ConfigError("injection_points must be non-empty; the model cannot condition on c");
  }
  for (std::size_t p : injection_points) {
    if (p >= n_hidden()) {
      throw ConfigError("injection point " + std::to_string(p) + " out of range (" +
                        std::to_string(n_hidden()) + " hidden layers)");
    }
  }
}

namespace {

bool injected_after(const ModelConfig& cfg, std::size_t hidden_index) {
  return std::find(cfg.injection_points.begin(), cfg.injection_points.end(), hidden_index) !=
         cfg.injection_points.end();
}

std::string hidden_layer_name(const ModelConfig& cfg, std::size_t i) {
  if (i < cfg.encoder_widths.size()) return "enc" + std::to_string(i);
  return "dec" + std::to_string(i - cfg.encoder_widths.size());
}

}  // namespace

std::vector<NamedTensor> Model::parameter_layout(const ModelConfig& cfg) {
  std::vector<NamedTensor> layout;
  std::size_t cur = cfg.input_dim;
  for (std::size_t i = 0; i < cfg.n_hidden(); ++i) {
    std::size_t w = i < cfg.encoder_widths.size()
                        ? cfg.encoder_widths[i]
                        : cfg.decoder_widths[i - cfg.encoder_widths.size()];
    std::string name = hidden_layer_name(cfg, i);
    layout.push_back({name + ".W", Tensor({cur, w})});
    layout.push_back({name + ".b", Tensor({w})});
    cur = w;
    if (injected_after(cfg, i)) cur += cfg.control_dim;
  }
  layout.push_back({"out.W", Tensor({cur, cfg.output_dim})});
  layout.push_back({"out.b", Tensor({cfg.output_dim})});
  return layout;
}

Model::Model(ModelConfig config, std::vector<NamedTensor> params)
    : config_(std::move(config)), params_(std::move(params)) {}

Model Model::init(const ModelConfig& config) {
  config.validate();
  std::vector<NamedTensor> params = parameter_layout(config);
  Rng rng(config.seed);
  for (NamedTensor& p : params) {
    if (p.tensor.ndim() != 2) continue;  // biases start at zero
    double fan_in = static_cast<double>(p.tensor.rows());
    double fan_out = static_cast<double>(p.tensor.cols());
    double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : p.tensor.values()) v = rng.uniform(-s, s);
  }
  return Model(config, std::move(params));
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

Tensor Model::encode_control(const ControlValue& c) const {
  if (c.is_discrete()) {
    if (config_.control_mode != ControlMode::discrete) {
      throw ConfigError("discrete control value on a continuous-control model");
    }
    if (c.idx() >= config_.control_dim) {
      throw ConfigError("control index " + std::to_string(c.idx()) + " out of range for |C|=" +
                        std::to_string(config_.control_dim));
    }
    Tensor t({config_.control_dim});
    t[c.idx()] = 1.0;
    return t;
  }
  if (config_.control_mode != ControlMode::continuous) {
    throw ConfigError("continuous control value on a discrete-control model");
  }
  if (c.raw().size() != config_.control_dim) {
    throw ConfigError("control vector length " + std::to_string(c.raw().size()) +
                      " does not match control_dim " + std::to_string(config_.control_dim));
  }
  return Tensor({config_.control_dim}, c.raw());
}

std::vector<NodeId> Model::emit_params(Graph& g) const {
  std::vector<NodeId> ids;
  ids.reserve(params_.size());
  for (const auto& p : params_) ids.push_back(g.leaf(p.tensor));
  return ids;
}

NodeId Model::forward_on_graph(Graph& g, const std::vector<NodeId>& param_ids, NodeId control,
                               NodeId x) const {
  const Tensor& xv = g.value(x);
  if (xv.ndim() != 2 || xv.cols() != config_.input_dim) {
    throw DimensionError("model input width mismatch: got " + xv.shape_str() + ", expected [* x " +
                         std::to_string(config_.input_dim) + "]");
  }
  NodeId h = x;
  std::size_t pi = 0;
  for (std::size_t i = 0; i < config_.n_hidden(); ++i) {
    h = g.activation(g.add_bias(g.matmul(h, param_ids[pi]), param_ids[pi + 1]),
                     config_.hidden_activation);
    pi += 2;
    if (injected_after(config_, i)) h = g.concat_features(h, control);
  }
  return g.activation(g.add_bias(g.matmul(h, param_ids[pi]), param_ids[pi + 1]),
                      config_.output_activation);
}

NodeId Model::forward_on_graph(Graph& g, const std::vector<NodeId>& param_ids,
                               const ControlValue& c, NodeId x) const {
  Tensor enc = encode_control(c);
  std::size_t batch = g.value(x).rows();
  Tensor tiled({batch, config_.control_dim});
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t j = 0; j < config_.control_dim; ++j) tiled.at(r, j) = enc[j];
  }
  return forward_on_graph(g, param_ids, g.leaf(std::move(tiled)), x);
}

Tensor Model::forward(const ControlValue& c, const Tensor& x) const {
  Graph g;
  std::vector<NodeId> ids = emit_params(g);
  NodeId out = forward_on_graph(g, ids, c, g.leaf(x));
  return g.value(out);
}

Tensor Model::forward_all(const ControlSet& controls, const Tensor& x) const {
  if (controls.empty()) throw ArgumentError("forward_all with an empty control set");
  std::size_t batch = x.rows();
  Tensor out({controls.size(), batch, config_.output_dim});
  std::size_t slab = batch * config_.output_dim;
  for (std::size_t i = 0; i < controls.size(); ++i) {
    Tensor y = forward(controls[i], x);
    std::copy(y.values().begin(), y.values().end(), out.values().begin() + i * slab);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> model_config_fields(const ModelConfig& cfg) {
  return {
      {"input_dim", std::to_string(cfg.input_dim)},
      {"output_dim", std::to_string(cfg.output_dim)},
      {"encoder_widths", join_sizes(cfg.encoder_widths)},
      {"decoder_widths", join_sizes(cfg.decoder_widths)},
      {"hidden_activation", act_name(cfg.hidden_activation)},
      {"output_activation", act_name(cfg.output_activation)},
      {"injection_points", join_sizes(cfg.injection_points)},
      {"control_mode", control_mode_name(cfg.control_mode)},
      {"control_dim", std::to_string(cfg.control_dim)},
      {"seed", std::to_string(cfg.seed)},
  };
}

ModelConfig model_config_from_header(const ArtifactHeader& h, const std::string& ctx) {
  ModelConfig cfg;
  cfg.input_dim = parse_size(h.config_value("input_dim", ctx), ctx + ": input_dim");
  cfg.output_dim = parse_size(h.config_value("output_dim", ctx), ctx + ": output_dim");
  cfg.encoder_widths = parse_size_list(h.config_value("encoder_widths", ctx), ctx);
  cfg.decoder_widths = parse_size_list(h.config_value("decoder_widths", ctx), ctx);
  cfg.hidden_activation = act_from_name(h.config_value("hidden_activation", ctx));
  cfg.output_activation = act_from_name(h.config_value("output_activation", ctx));
  cfg.injection_points = parse_size_list(h.config_value("injection_points", ctx), ctx);
  cfg.control_mode = control_mode_from_name(h.config_value("control_mode", ctx));
  cfg.control_dim = parse_size(h.config_value("control_dim", ctx), ctx + ": control_dim");
  cfg.seed = parse_u64(h.config_value("seed", ctx), ctx + ": seed");
  return cfg;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  auto cfg = model_config_fields(model.config());
  write_artifact(out, "model", cfg, model.parameters());
  if (!out) throw LoadError("write failed for '" + path.string() + "'");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string ctx = "model file '" + path.string() + "'";
  if (!in) throw LoadError(ctx + ": cannot open");
  ArtifactHeader header = read_artifact_header(in, ctx);
  if (header.kind != "model") {
    throw LoadError(ctx + ": kind '" + header.kind + "', expected 'model'");
  }
  ModelConfig cfg = model_config_from_header(header, ctx);
  cfg.validate();
  std::vector<NamedTensor> expected = Model::parameter_layout(cfg);
  if (expected.size() != header.tensors.size()) {
    throw LoadError(ctx + ": manifest lists " + std::to_string(header.tensors.size()) +
                    " tensors, config implies " + std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (header.tensors[i].first != expected[i].name) {
      throw LoadError(ctx + ": tensor '" + header.tensors[i].first + "' where '" +
                      expected[i].name + "' was expected");
    }
    if (header.tensors[i].second != expected[i].tensor.shape()) {
      throw LoadError(ctx + ": tensor '" + expected[i].name + "' has manifest shape " +
                      Tensor(header.tensors[i].second).shape_str() + ", config implies " +
                      expected[i].tensor.shape_str());
    }
  }
  std::vector<NamedTensor> params = read_artifact_payload(in, header, ctx);
  return Model(cfg, std::move(params));
}

}  // namespace diversenet
