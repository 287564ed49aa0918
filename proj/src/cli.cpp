#include "diversenet/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "diversenet/errors.hpp"
#include "diversenet/experiment.hpp"
#include "diversenet/grad_check.hpp"
#include "diversenet/io.hpp"
#include "diversenet/losses.hpp"
#include "diversenet/rng.hpp"

namespace diversenet {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

ExperimentConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed) {
  ExperimentConfig cfg =
      path.empty() ? ExperimentConfig{} : ExperimentConfig::parse_file(path);
  if (seed) cfg.train.seed = *seed;
  cfg.validate();
  return cfg;
}

// Random model + data probe of the combined loss gradients; the CSV carries
// one row per parameter block.
int do_grad_check(const std::string& out_dir, std::uint64_t seed, double tol) {
  ModelConfig mc;
  mc.input_dim = 3;
  mc.output_dim = 2;
  mc.encoder_widths = {8, 5};
  mc.decoder_widths = {6};
  mc.injection_points = {1};
  mc.control_dim = 3;
  mc.seed = seed;
  Model model = Model::init(mc);

  Rng rng(mix_seed(seed, 0xF00D));
  Tensor x({1, mc.input_dim});
  for (double& v : x.values()) v = rng.uniform(-1.0, 1.0);
  std::vector<Tensor> labels;
  for (std::size_t i = 0; i < 2; ++i) {
    Tensor y({1, mc.output_dim});
    for (double& v : y.values()) v = rng.uniform(-1.0, 1.0);
    labels.push_back(std::move(y));
  }

  GraphBuilder build = [&](Graph& g, const std::vector<NodeId>& params) {
    NodeId xn = g.leaf(x);
    std::vector<NodeId> rows;
    for (std::size_t c = 0; c < mc.control_dim; ++c) {
      rows.push_back(model.forward_on_graph(g, params, ControlValue::index(c), xn));
    }
    LossMatrix m = loss_matrix(g, rows, labels);
    return loss_combined(g, m, LossConfig{1.0, PairLossKind::squared_error});
  };
  GradCheckReport report = grad_check(build, model.parameters(), 1e-5, tol);

  std::filesystem::create_directories(out_dir);
  std::ofstream out(std::filesystem::path(out_dir) / "grad_check.csv", std::ios::binary);
  out << "param_block,max_rel_error\n";
  for (const auto& block : report.blocks) {
    out << block.name << "," << fmt_double(block.max_rel_error) << "\n";
  }
  out << "TOTAL," << fmt_double(report.max_rel_error) << "\n";
  if (!report.passed) {
    std::cerr << "grad-check failed: max relative error " << report.max_rel_error
              << " exceeds tolerance " << tol << "\n";
    return kExitNumerical;
  }
  std::cerr << "grad-check ok: max relative error " << report.max_rel_error << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"diversenet: diverse structured prediction experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  std::size_t jobs = 1;
  app.add_option("--config", config_path, "experiment config file")->configurable(false);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed_override, "override [train] seed");
  app.add_option("--jobs", jobs, "parallel workers for sweeps");

  auto* gen = app.add_subcommand("gen-data", "generate train/test dataset files");

  auto* train_cmd = app.add_subcommand("train", "train a model from a dataset file");
  std::string data_path;
  train_cmd->add_option("--data", data_path, "training dataset file")->required();

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model file on a dataset file");
  std::string model_path;
  std::string eval_data_path;
  std::size_t k_max = 0;
  eval_cmd->add_option("--model", model_path, "model file")->required();
  eval_cmd->add_option("--data", eval_data_path, "test dataset file")->required();
  eval_cmd->add_option("--k-max", k_max, "largest k in the oracle curve");

  auto* sweep_cmd = app.add_subcommand("sweep-beta", "train/evaluate one run per beta");
  std::string betas_csv = "0,0.5,1,2,5";
  sweep_cmd->add_option("--betas", betas_csv, "comma-separated beta values");

  auto* ablate_cmd = app.add_subcommand("ablate", "method x catchup x pretrain grid");

  auto* grad_cmd = app.add_subcommand("grad-check", "verify analytic gradients");
  double tol = 1e-4;
  std::uint64_t gc_seed = 0;
  grad_cmd->add_option("--tol", tol, "max relative error tolerance");
  grad_cmd->add_option("--probe-seed", gc_seed, "probe model seed");

  std::vector<const char*> argv;
  argv.push_back("diversenet");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      ExperimentConfig cfg = load_config(config_path, seed_override);
      run_gen_data(cfg, out_dir);
      return kExitOk;
    }
    if (train_cmd->parsed()) {
      ExperimentConfig cfg = load_config(config_path, seed_override);
      run_train_cmd(cfg, data_path, out_dir);
      return kExitOk;
    }
    if (eval_cmd->parsed()) {
      ExperimentConfig cfg = load_config(config_path, seed_override);
      if (k_max != 0) cfg.eval.k_max = k_max;
      run_eval_cmd(cfg, model_path, eval_data_path, out_dir);
      return kExitOk;
    }
    if (sweep_cmd->parsed()) {
      ExperimentConfig cfg = load_config(config_path, seed_override);
      std::vector<double> betas;
      for (const std::string& part : split(betas_csv, ',')) {
        betas.push_back(parse_double(trim(part), "--betas"));
      }
      run_sweep_beta(cfg, betas, out_dir, jobs);
      return kExitOk;
    }
    if (ablate_cmd->parsed()) {
      ExperimentConfig cfg = load_config(config_path, seed_override);
      run_ablate(cfg, out_dir, jobs);
      return kExitOk;
    }
    if (grad_cmd->parsed()) {
      return do_grad_check(out_dir, seed_override.value_or(gc_seed), tol);
    }
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace diversenet
