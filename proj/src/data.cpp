#include "diversenet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "diversenet/errors.hpp"
#include "diversenet/io.hpp"
#include "diversenet/rng.hpp"

namespace diversenet {

const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  throw ParseError("unknown split '" + name + "'");
}

double ModeSpec::eval(double x) const {
  switch (kind) {
    case ModeKind::sine: return std::sin(2.0 * std::numbers::pi * x);
    case ModeKind::neg_sine: return -std::sin(2.0 * std::numbers::pi * x);
    case ModeKind::constant: return value;
  }
  return 0.0;
}

std::string ModeSpec::str() const {
  switch (kind) {
    case ModeKind::sine: return "sin";
    case ModeKind::neg_sine: return "negsin";
    case ModeKind::constant: return "const:" + fmt_double(value);
  }
  return "sin";
}

ModeSpec parse_mode(const std::string& text) {
  std::string t = trim(text);
  if (t == "sin") return {ModeKind::sine, 0.0};
  if (t == "negsin") return {ModeKind::neg_sine, 0.0};
  if (t.rfind("const:", 0) == 0) {
    return {ModeKind::constant, parse_double(t.substr(6), "mode '" + t + "'")};
  }
  throw ConfigError("unknown mode '" + t + "' (expected sin, negsin or const:<v>)");
}

std::vector<ModeSpec> parse_modes(const std::string& csv) {
  std::vector<ModeSpec> modes;
  for (const std::string& part : split(csv, ',')) {
    if (trim(part).empty()) continue;
    modes.push_back(parse_mode(part));
  }
  return modes;
}

std::string modes_str(const std::vector<ModeSpec>& modes) {
  std::string s;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i) s += ",";
    s += modes[i].str();
  }
  return s;
}

std::vector<ModeSpec> default_modes() {
  return {{ModeKind::sine, 0.0}, {ModeKind::neg_sine, 0.0}, {ModeKind::constant, 0.5}};
}

DatasetPair gen_multimodal_regression(const RegressionSpec& spec, std::uint64_t seed) {
  if (spec.modes.empty()) throw ConfigError("regression needs at least one mode");
  if (spec.noise_sd < 0.0) throw ConfigError("noise_sd must be >= 0");
  std::string gen = "regression;modes=" + modes_str(spec.modes) +
                    ";noise_sd=" + fmt_double(spec.noise_sd) +
                    ";n_train=" + std::to_string(spec.n_train) +
                    ";n_test=" + std::to_string(spec.n_test);
  Rng rng(mix_seed(seed, 0));
  DatasetPair pair;
  for (Dataset* ds : {&pair.train, &pair.test}) {
    ds->generator_spec = gen;
    ds->seed = seed;
    ds->input_dim = 1;
    ds->output_dim = 1;
  }
  pair.train.split = Split::train;
  pair.test.split = Split::test;
  std::size_t total = spec.n_train + spec.n_test;
  for (std::size_t i = 0; i < total; ++i) {
    DataItem item;
    double x = rng.uniform01();
    item.x = {x};
    for (const ModeSpec& m : spec.modes) {
      double y = m.eval(x);
      if (spec.noise_sd > 0.0) y += rng.normal(0.0, spec.noise_sd);
      item.labels.push_back({y});
    }
    (i < spec.n_train ? pair.train : pair.test).items.push_back(std::move(item));
  }
  return pair;
}

const char* quadrant_name(Quadrant q) {
  switch (q) {
    case Quadrant::top_left: return "tl";
    case Quadrant::top_right: return "tr";
    case Quadrant::bottom_left: return "bl";
    case Quadrant::bottom_right: return "br";
  }
  return "tl";
}

Quadrant quadrant_from_name(const std::string& name) {
  if (name == "tl") return Quadrant::top_left;
  if (name == "tr") return Quadrant::top_right;
  if (name == "bl") return Quadrant::bottom_left;
  if (name == "br") return Quadrant::bottom_right;
  throw ConfigError("unknown quadrant '" + name + "' (expected tl, tr, bl or br)");
}

std::vector<std::size_t> quadrant_cells(std::size_t grid_side, Quadrant q) {
  std::size_t half = grid_side / 2;
  std::size_t r0 = (q == Quadrant::bottom_left || q == Quadrant::bottom_right) ? half : 0;
  std::size_t c0 = (q == Quadrant::top_right || q == Quadrant::bottom_right) ? half : 0;
  std::vector<std::size_t> cells;
  cells.reserve(half * half);
  for (std::size_t r = r0; r < r0 + half; ++r) {
    for (std::size_t c = c0; c < c0 + half; ++c) cells.push_back(r * grid_side + c);
  }
  return cells;
}

std::vector<std::vector<std::size_t>> nearest_neighbor_label_order(
    const std::vector<std::vector<double>>& patterns, std::size_t grid_side, Quadrant q,
    std::size_t k) {
  std::size_t n = patterns.size();
  if (k < 1 || (n > 0 && k > n)) {
    throw ConfigError("k_neighbors " + std::to_string(k) + " out of range for " +
                      std::to_string(n) + " items");
  }
  std::vector<std::size_t> cells = quadrant_cells(grid_side, q);
  std::vector<std::vector<std::size_t>> order(n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double d = 0.0;
      for (std::size_t cell : cells) {
        double diff = patterns[i][cell] - patterns[j][cell];
        d += diff * diff;
      }
      dist[j] = {d, j};
    }
    std::sort(dist.begin(), dist.end(), [i](const auto& a, const auto& b) {
      bool a_self = a.second == i, b_self = b.second == i;
      if (a_self != b_self) return a_self;  // own pattern always first
      if (a.first != b.first) return a.first < b.first;
      return a.second < b.second;
    });
    order[i].reserve(k);
    for (std::size_t j = 0; j < k; ++j) order[i].push_back(dist[j].second);
  }
  return order;
}

namespace {

// One randomly parameterized template: horizontal/vertical bars, crosses,
// and quarter-circle arcs anchored at a corner.
std::vector<double> random_pattern(std::size_t g, Rng& rng) {
  std::vector<double> p(g * g, 0.0);
  std::size_t family = rng.below(4);
  double v = rng.uniform(0.5, 1.0);
  auto stroke_row = [&](std::size_t r) {
    for (std::size_t c = 0; c < g; ++c) p[r * g + c] = v;
  };
  auto stroke_col = [&](std::size_t c) {
    for (std::size_t r = 0; r < g; ++r) p[r * g + c] = v;
  };
  switch (family) {
    case 0: stroke_row(rng.below(g)); break;
    case 1: stroke_col(rng.below(g)); break;
    case 2: {
      stroke_row(rng.below(g));
      stroke_col(rng.below(g));
      break;
    }
    default: {
      std::size_t corner = rng.below(4);
      double cr = (corner < 2) ? 0.0 : static_cast<double>(g - 1);
      double cc = (corner % 2 == 0) ? 0.0 : static_cast<double>(g - 1);
      double radius = rng.uniform(static_cast<double>(g) / 2.0 - 1.0, static_cast<double>(g - 1));
      for (std::size_t r = 0; r < g; ++r) {
        for (std::size_t c = 0; c < g; ++c) {
          double d = std::hypot(static_cast<double>(r) - cr, static_cast<double>(c) - cc);
          if (std::fabs(d - radius) <= 0.5) p[r * g + c] = v;
        }
      }
      break;
    }
  }
  return p;
}

Dataset build_occluded_split(const OccludedSpec& spec, Split split, std::size_t n_items,
                             const std::vector<std::vector<double>>& prototypes, Rng& rng,
                             const std::string& gen, std::uint64_t seed) {
  std::size_t g = spec.grid_side;
  std::vector<std::vector<double>> patterns;
  patterns.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    patterns.push_back(prototypes[rng.below(prototypes.size())]);
  }
  auto order = nearest_neighbor_label_order(patterns, g, spec.visible, spec.k_neighbors);
  std::vector<std::size_t> cells = quadrant_cells(g, spec.visible);

  Dataset ds;
  ds.split = split;
  ds.generator_spec = gen;
  ds.seed = seed;
  ds.input_dim = g * g;
  ds.output_dim = g * g;
  for (std::size_t i = 0; i < n_items; ++i) {
    DataItem item;
    item.x.assign(g * g, 0.0);
    for (std::size_t cell : cells) item.x[cell] = patterns[i][cell];
    for (std::size_t j : order[i]) item.labels.push_back(patterns[j]);
    ds.items.push_back(std::move(item));
  }
  return ds;
}

}  // namespace

DatasetPair gen_occluded_completion(const OccludedSpec& spec, std::uint64_t seed) {
  if (spec.grid_side == 0 || spec.grid_side % 2 != 0) {
    throw ConfigError("grid_side must be even and positive");
  }
  if (spec.n_shapes == 0) throw ConfigError("n_shapes must be >= 1");
  std::size_t smaller = std::min(spec.n_train, spec.n_test);
  if (spec.k_neighbors < 1 || spec.k_neighbors + 1 > smaller) {
    throw ConfigError("k_neighbors " + std::to_string(spec.k_neighbors) +
                      " out of range (need 1 <= k <= n_items-1 per split)");
  }
  std::string gen = "occluded;grid_side=" + std::to_string(spec.grid_side) +
                    ";n_shapes=" + std::to_string(spec.n_shapes) +
                    ";visible=" + quadrant_name(spec.visible) +
                    ";k_neighbors=" + std::to_string(spec.k_neighbors) +
                    ";n_train=" + std::to_string(spec.n_train) +
                    ";n_test=" + std::to_string(spec.n_test);

  Rng proto_rng(mix_seed(seed, 1));
  std::vector<std::vector<double>> prototypes;
  prototypes.reserve(spec.n_shapes);
  for (std::size_t i = 0; i < spec.n_shapes; ++i) {
    prototypes.push_back(random_pattern(spec.grid_side, proto_rng));
  }

  Rng train_rng(mix_seed(seed, 2));
  Rng test_rng(mix_seed(seed, 3));
  DatasetPair pair;
  pair.train =
      build_occluded_split(spec, Split::train, spec.n_train, prototypes, train_rng, gen, seed);
  pair.test =
      build_occluded_split(spec, Split::test, spec.n_test, prototypes, test_rng, gen, seed);
  return pair;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n_items, std::size_t batch_size,
                                                    std::uint64_t shuffle_seed) {
  if (n_items == 0) throw ArgumentError("batch_indices on an empty dataset");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  std::vector<std::size_t> idx(n_items);
  for (std::size_t i = 0; i < n_items; ++i) idx[i] = i;
  Rng rng(shuffle_seed);
  rng.shuffle(idx);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n_items; start += batch_size) {
    std::size_t end = std::min(n_items, start + batch_size);
    batches.emplace_back(idx.begin() + start, idx.begin() + end);
  }
  return batches;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  out << "diversenet-dataset\n";
  out << "generator=" << ds.generator_spec << "\n";
  out << "seed=" << ds.seed << "\n";
  out << "split=" << split_name(ds.split) << "\n";
  out << "n_items=" << ds.items.size() << "\n";
  out << "input_dim=" << ds.input_dim << "\n";
  out << "output_dim=" << ds.output_dim << "\n";
  out << "items:\n";
  for (const DataItem& item : ds.items) {
    std::string line;
    for (double v : item.x) {
      line += fmt_double(v);
      line += ",";
    }
    line += std::to_string(item.labels.size());
    for (const auto& y : item.labels) {
      for (double v : y) {
        line += ",";
        line += fmt_double(v);
      }
    }
    out << line << "\n";
  }
  if (!out) throw LoadError("write failed for '" + path.string() + "'");
}

namespace {

std::string expect_line(std::istream& in, const std::string& ctx, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(ctx + ": truncated at line " + std::to_string(line_no));
  ++line_no;
  return line;
}

std::string header_field(const std::string& line, const std::string& key, const std::string& ctx,
                         std::size_t line_no) {
  if (line.rfind(key + "=", 0) != 0) {
    throw ParseError(ctx + ": line " + std::to_string(line_no) + ": expected field '" + key + "'");
  }
  return line.substr(key.size() + 1);
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string ctx = "dataset '" + path.string() + "'";
  if (!in) throw ParseError(ctx + ": cannot open");
  std::size_t line_no = 0;
  if (expect_line(in, ctx, line_no) != "diversenet-dataset") {
    throw ParseError(ctx + ": bad header line");
  }
  Dataset ds;
  ds.generator_spec = header_field(expect_line(in, ctx, line_no), "generator", ctx, line_no);
  ds.seed = parse_u64(header_field(expect_line(in, ctx, line_no), "seed", ctx, line_no),
                      ctx + ": seed");
  ds.split = split_from_name(header_field(expect_line(in, ctx, line_no), "split", ctx, line_no));
  std::size_t n_items = parse_size(
      header_field(expect_line(in, ctx, line_no), "n_items", ctx, line_no), ctx + ": n_items");
  ds.input_dim = parse_size(
      header_field(expect_line(in, ctx, line_no), "input_dim", ctx, line_no), ctx + ": input_dim");
  ds.output_dim =
      parse_size(header_field(expect_line(in, ctx, line_no), "output_dim", ctx, line_no),
                 ctx + ": output_dim");
  if (expect_line(in, ctx, line_no) != "items:") {
    throw ParseError(ctx + ": line " + std::to_string(line_no) + ": expected 'items:'");
  }
  for (std::size_t i = 0; i < n_items; ++i) {
    std::string line = expect_line(in, ctx, line_no);
    std::string where = ctx + ": line " + std::to_string(line_no);
    std::vector<std::string> tok = split(line, ',');
    if (tok.size() < ds.input_dim + 1) throw ParseError(where + ": too few fields");
    DataItem item;
    item.x.reserve(ds.input_dim);
    for (std::size_t j = 0; j < ds.input_dim; ++j) {
      item.x.push_back(parse_double(tok[j], where + ": x[" + std::to_string(j) + "]"));
    }
    std::size_t n_labels = parse_size(tok[ds.input_dim], where + ": label count");
    if (n_labels == 0) throw ParseError(where + ": empty label set");
    if (tok.size() != ds.input_dim + 1 + n_labels * ds.output_dim) {
      throw ParseError(where + ": expected " +
                       std::to_string(ds.input_dim + 1 + n_labels * ds.output_dim) +
                       " fields, got " + std::to_string(tok.size()));
    }
    std::size_t pos = ds.input_dim + 1;
    for (std::size_t l = 0; l < n_labels; ++l) {
      std::vector<double> y;
      y.reserve(ds.output_dim);
      for (std::size_t j = 0; j < ds.output_dim; ++j) {
        y.push_back(parse_double(tok[pos++], where + ": label value"));
      }
      item.labels.push_back(std::move(y));
    }
    ds.items.push_back(std::move(item));
  }
  std::string rest;
  if (std::getline(in, rest) && !trim(rest).empty()) {
    throw ParseError(ctx + ": trailing content after " + std::to_string(n_items) + " items");
  }
  return ds;
}

}  // namespace diversenet
