#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace diversenet {

// One training pair: an input vector and a non-empty ordered list of
// acceptable target vectors.
struct DataItem {
  std::vector<double> x;
  std::vector<std::vector<double>> labels;
};

enum class Split { train, test };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct Dataset {
  std::vector<DataItem> items;
  Split split = Split::train;
  std::string generator_spec;
  std::uint64_t seed = 0;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;

  std::size_t size() const { return items.size(); }
};

struct DatasetPair {
  Dataset train;
  Dataset test;
};

// --- multimodal regression -------------------------------------------------

enum class ModeKind { sine, neg_sine, constant };

struct ModeSpec {
  ModeKind kind = ModeKind::sine;
  double value = 0.0;  // constant modes only

  double eval(double x) const;
  std::string str() const;
};

ModeSpec parse_mode(const std::string& text);
std::vector<ModeSpec> parse_modes(const std::string& csv);
std::string modes_str(const std::vector<ModeSpec>& modes);
std::vector<ModeSpec> default_modes();  // sin(2*pi*x), -sin(2*pi*x), 0.5

struct RegressionSpec {
  std::size_t n_train = 512;
  std::size_t n_test = 128;
  std::vector<ModeSpec> modes = default_modes();
  double noise_sd = 0.0;
};

// Scalar x ~ U[0,1); one label per mode, plus optional Gaussian noise.
// Items are drawn from one stream: construction indices 0..n_train-1 form
// the train split, the rest the test split.
DatasetPair gen_multimodal_regression(const RegressionSpec& spec, std::uint64_t seed);

// --- occluded completion ---------------------------------------------------

enum class Quadrant { top_left, top_right, bottom_left, bottom_right };

const char* quadrant_name(Quadrant q);
Quadrant quadrant_from_name(const std::string& name);

struct OccludedSpec {
  std::size_t n_train = 160;
  std::size_t n_test = 48;
  std::size_t grid_side = 8;   // must be even
  std::size_t n_shapes = 12;   // size of the sampled shape-prototype pool
  std::size_t k_neighbors = 4;
  Quadrant visible = Quadrant::top_left;
};

// Linear indices of the visible quadrant cells of a grid_side^2 pattern.
std::vector<std::size_t> quadrant_cells(std::size_t grid_side, Quadrant q);

// For each pattern, the k nearest patterns by squared distance over the
// visible quadrant. The pattern itself is always first; remaining slots
// order by (distance, index). Exposed for direct testing.
std::vector<std::vector<std::size_t>> nearest_neighbor_label_order(
    const std::vector<std::vector<double>>& patterns, std::size_t grid_side, Quadrant q,
    std::size_t k);

// Full patterns are randomly parameterized shape templates (bars, crosses,
// corner arcs) rasterized on the grid with values in [0,1]. The input is
// the pattern with everything outside the visible quadrant zeroed; the
// label set holds the full patterns of the k nearest visible quadrants,
// own pattern first. Neighbor lookup stays within each split.
DatasetPair gen_occluded_completion(const OccludedSpec& spec, std::uint64_t seed);

// --- iteration and persistence ----------------------------------------------

// Deterministic shuffled partition covering every item exactly once.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n_items, std::size_t batch_size,
                                                    std::uint64_t shuffle_seed);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace diversenet
