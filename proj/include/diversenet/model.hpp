#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "diversenet/graph.hpp"
#include "diversenet/tensor.hpp"

namespace diversenet {

enum class ControlMode { discrete, continuous };

const char* control_mode_name(ControlMode m);
ControlMode control_mode_from_name(const std::string& name);

// A control value selects which of the network's predictions is produced.
// Discrete values are one-hot encoded; continuous values are fed raw.
class ControlValue {
 public:
  static ControlValue index(std::size_t i);
  static ControlValue vec(std::vector<double> v);

  bool is_discrete() const { return discrete_; }
  std::size_t idx() const { return idx_; }
  const std::vector<double>& raw() const { return raw_; }

 private:
  bool discrete_ = true;
  std::size_t idx_ = 0;
  std::vector<double> raw_;
};

using ControlSet = std::vector<ControlValue>;

// The first n one-hot indices, in order.
ControlSet discrete_controls(std::size_t n);
// `steps` equally spaced scalar controls covering [lo, hi].
ControlSet spaced_controls(double lo, double hi, std::size_t steps);

struct ModelConfig {
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::vector<std::size_t> encoder_widths = {32, 16};
  std::vector<std::size_t> decoder_widths = {32};
  Act hidden_activation = Act::tanh;
  Act output_activation = Act::identity;
  // Indices of hidden layers whose activations get the control vector
  // appended before the next layer. Default: the bottleneck (last encoder
  // layer) only.
  std::vector<std::size_t> injection_points = {1};
  ControlMode control_mode = ControlMode::discrete;
  std::size_t control_dim = 4;
  std::uint64_t seed = 0;

  std::size_t bottleneck_index() const { return encoder_widths.size() - 1; }
  std::size_t n_hidden() const { return encoder_widths.size() + decoder_widths.size(); }
  void validate() const;
};

// Encoder-bottleneck-decoder dense network f(c, x).
class Model {
 public:
  static Model init(const ModelConfig& config);
  Model(ModelConfig config, std::vector<NamedTensor> params);

  const ModelConfig& config() const { return config_; }
  const std::vector<NamedTensor>& parameters() const { return params_; }
  std::vector<NamedTensor>& parameters() { return params_; }
  std::size_t parameter_count() const;

  // One-hot or raw control vector of length control_dim.
  Tensor encode_control(const ControlValue& c) const;

  // Pure forward pass, [batch x input_dim] -> [batch x output_dim].
  Tensor forward(const ControlValue& c, const Tensor& x) const;

  // Stacks forward(c_i, x) for each control, [|C| x batch x output_dim].
  Tensor forward_all(const ControlSet& controls, const Tensor& x) const;

  // Graph-building pieces used by the training loop.
  std::vector<NodeId> emit_params(Graph& g) const;
  NodeId forward_on_graph(Graph& g, const std::vector<NodeId>& param_ids, NodeId control,
                          NodeId x) const;
  NodeId forward_on_graph(Graph& g, const std::vector<NodeId>& param_ids, const ControlValue& c,
                          NodeId x) const;

  // Expected (name, shape) list for this config, used by init and load.
  static std::vector<NamedTensor> parameter_layout(const ModelConfig& config);

 private:
  ModelConfig config_;
  std::vector<NamedTensor> params_;
};

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

// Config (de)serialization shared with the ensemble file formats.
struct ArtifactHeader;
std::vector<std::pair<std::string, std::string>> model_config_fields(const ModelConfig& cfg);
ModelConfig model_config_from_header(const ArtifactHeader& header, const std::string& context);

}  // namespace diversenet
