#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "diversenet/data.hpp"
#include "diversenet/graph.hpp"
#include "diversenet/losses.hpp"
#include "diversenet/model.hpp"

namespace diversenet {

struct TreenetConfig {
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::vector<std::size_t> encoder_widths = {32, 16};
  std::vector<std::size_t> decoder_widths = {32};
  Act hidden_activation = Act::tanh;
  Act output_activation = Act::identity;
  std::size_t n_members = 4;
  std::uint64_t seed = 0;

  void validate() const;
};

// Winner-take-all ensemble with a shared encoder and per-member
// decoder/output heads. Heads start from different seeds so members break
// symmetry.
class TreenetModel {
 public:
  static TreenetModel init(const TreenetConfig& config);
  TreenetModel(TreenetConfig config, std::vector<NamedTensor> params);

  const TreenetConfig& config() const { return config_; }
  const std::vector<NamedTensor>& parameters() const { return params_; }
  std::vector<NamedTensor>& parameters() { return params_; }
  std::size_t n_members() const { return config_.n_members; }

  // [N x batch x output_dim]; the encoder runs once.
  Tensor forward_members(const Tensor& x) const;

  std::vector<NodeId> emit_params(Graph& g) const;
  // One output node per member; encoder nodes are shared.
  std::vector<NodeId> forward_members_on_graph(Graph& g, const std::vector<NodeId>& param_ids,
                                               NodeId x) const;

  // Index ranges into the parameter list: [0, encoder_end) is shared,
  // member j owns [member_begin(j), member_begin(j+1)).
  std::size_t encoder_param_end() const;
  std::size_t member_param_begin(std::size_t member) const;

  static std::vector<NamedTensor> parameter_layout(const TreenetConfig& config);

 private:
  TreenetConfig config_;
  std::vector<NamedTensor> params_;
};

// Winner-take-all set loss over member predictions plus an epsilon share of
// the mean pair loss over every member/label pair; epsilon = 0 recovers the
// plain ensemble loss.
NodeId treenet_loss(Graph& g, std::span<const NodeId> member_predictions,
                    std::span<const Tensor> labels, double epsilon);

// Same stabilizer on an already-built matrix.
NodeId epsilon_l2_term(Graph& g, const LossMatrix& m, double epsilon);

struct BaggedEnsemble {
  std::vector<Model> members;
  std::vector<std::vector<std::size_t>> subsets;  // training item indices per member
};

void save_treenet(const TreenetModel& model, const std::filesystem::path& path);
TreenetModel load_treenet(const std::filesystem::path& path);
void save_bagged(const BaggedEnsemble& ensemble, const std::filesystem::path& path);
BaggedEnsemble load_bagged(const std::filesystem::path& path);

}  // namespace diversenet
