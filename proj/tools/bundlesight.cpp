#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "bundlesight/baselines.hpp"
#include "bundlesight/em.hpp"
#include "bundlesight/em_censored.hpp"
#include "bundlesight/em_gmm.hpp"
#include "bundlesight/errors.hpp"
#include "bundlesight/experiments.hpp"
#include "bundlesight/io.hpp"
#include "bundlesight/metrics.hpp"
#include "bundlesight/theory_lab.hpp"

namespace {

using namespace bundlesight;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    io::write_text_file(out_path, text);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void add_em_options(CLI::App* cmd, EmConfig& config) {
  cmd->add_option("--samples", config.mc_samples,
                  "Monte-Carlo draws per transaction per iteration");
  cmd->add_option("--tol", config.tolerance, "l1 stopping tolerance");
  cmd->add_option("--max-iter", config.max_iterations, "iteration cap");
  cmd->add_option("--pool-size", config.pool_size,
                  "shared draw pool size (0 = automatic)");
  cmd->add_option("--acceptance-threshold", config.acceptance_threshold,
                  "rejection rate below which importance sampling kicks in");
  cmd->add_option("--seed", config.seed, "random seed");
  cmd->add_option("--workers", config.workers,
                  "E-step threads (0 = automatic; results identical)");
}

struct GenerateArgs {
  std::string spec_path;
  std::string out_path;
  std::string truth_out;
  std::string censored_out;
  std::string purchases_out;
  std::string train_out;
  std::string test_out;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
};

int cmd_generate(const GenerateArgs& args) {
  const GenSpec spec = io::genspec_from_json(io::read_text_file(args.spec_path));
  const GenResult result = generate_dataset(spec);
  emit(io::dataset_to_json(result.dataset), args.out_path);
  if (!args.truth_out.empty())
    io::write_text_file(args.truth_out, io::truth_to_json(result.truth));
  if (!args.censored_out.empty()) {
    if (!spec.censor)
      throw InvalidInputError(
          "--censored-out needs \"censor\": true in the spec");
    io::write_text_file(args.censored_out,
                        io::censored_to_json(result.censored));
  }
  if (!args.purchases_out.empty()) {
    if (!spec.censor)
      throw InvalidInputError(
          "--purchases-out needs \"censor\": true in the spec");
    io::write_text_file(args.purchases_out,
                        io::dataset_to_json(result.purchases_only));
  }
  if (!args.train_out.empty() || !args.test_out.empty()) {
    if (args.train_out.empty() || args.test_out.empty())
      throw InvalidInputError("--train-out and --test-out come as a pair");
    const SplitResult split =
        train_test_split(result.dataset, args.test_fraction,
                         args.split_seed ? args.split_seed : spec.seed);
    io::write_text_file(args.train_out, io::dataset_to_json(split.train));
    io::write_text_file(args.test_out, io::dataset_to_json(split.test));
  }
  return 0;
}

int main_checked(int argc, char** argv) {
  CLI::App app{"bundle transaction valuation estimation"};
  app.require_subcommand(1);

  // generate ------------------------------------------------------------
  GenerateArgs gen_args;
  auto* generate = app.add_subcommand(
      "generate", "synthesize a dataset from a JSON generation spec");
  generate->add_option("--spec", gen_args.spec_path, "generation spec JSON")
      ->required();
  generate->add_option("--out", gen_args.out_path,
                       "dataset JSON path (default: stdout)");
  generate->add_option("--truth-out", gen_args.truth_out,
                       "write the ground truth JSON here");
  generate->add_option("--censored-out", gen_args.censored_out,
                       "write aggregated censored counts here");
  generate->add_option("--purchases-out", gen_args.purchases_out,
                       "write the purchases-only transaction list here");
  generate->add_option("--train-out", gen_args.train_out,
                       "write the training split here");
  generate->add_option("--test-out", gen_args.test_out,
                       "write the held-out split here");
  generate->add_option("--test-fraction", gen_args.test_fraction,
                       "held-out fraction (default 0.2)");
  generate->add_option("--split-seed", gen_args.split_seed,
                       "split seed (default: the spec seed)");

  // fit -----------------------------------------------------------------
  std::string fit_data;
  std::string fit_out;
  std::string fit_trace;
  EmConfig fit_config;
  auto* fit_cmd =
      app.add_subcommand("fit", "estimate a Gaussian valuation model");
  fit_cmd->add_option("--data", fit_data, "dataset JSON")->required();
  fit_cmd->add_option("--out", fit_out, "report JSON path (default: stdout)");
  fit_cmd->add_option("--trace", fit_trace, "write iteration,error CSV here");
  add_em_options(fit_cmd, fit_config);

  // fit-censored ----------------------------------------------------------
  std::string cen_data;
  std::string cen_out;
  std::string cen_trace;
  CensoredConfig cen_config;
  auto* cen_cmd = app.add_subcommand(
      "fit-censored", "estimate from purchase-only aggregated counts");
  cen_cmd->add_option("--data", cen_data, "censored dataset JSON")->required();
  cen_cmd->add_option("--out", cen_out, "report JSON path (default: stdout)");
  cen_cmd->add_option("--trace", cen_trace, "write iteration,error CSV here");
  cen_cmd->add_option("--instances", cen_config.mc_instances,
                      "posterior draws of the unobserved total per iteration");
  add_em_options(cen_cmd, cen_config.em);

  // fit-gmm ---------------------------------------------------------------
  std::string gmm_data;
  std::string gmm_out;
  GmmConfig gmm_config;
  auto* gmm_cmd = app.add_subcommand(
      "fit-gmm", "estimate a Gaussian-mixture valuation model");
  gmm_cmd->add_option("--data", gmm_data, "dataset JSON")->required();
  gmm_cmd->add_option("--out", gmm_out, "report JSON path (default: stdout)");
  gmm_cmd->add_option("--components", gmm_config.components,
                      "mixture components (default 2)");
  gmm_cmd->add_option("--weight-floor", gmm_config.weight_floor,
                      "minimum component weight");
  add_em_options(gmm_cmd, gmm_config.em);

  // baseline-mnl ------------------------------------------------------------
  std::string mnl_data;
  std::string mnl_out;
  MnlConfig mnl_config;
  auto* mnl_cmd =
      app.add_subcommand("baseline-mnl", "fit a multinomial-logit baseline");
  mnl_cmd->add_option("--data", mnl_data, "dataset JSON")->required();
  mnl_cmd->add_option("--out", mnl_out, "report JSON path (default: stdout)");
  mnl_cmd->add_option("--max-iter", mnl_config.max_iterations,
                      "iteration cap");
  mnl_cmd->add_option("--tol", mnl_config.tolerance,
                      "gradient sup-norm tolerance");

  // baseline-mh --------------------------------------------------------------
  std::string mh_data;
  std::string mh_sigma;
  std::string mh_out;
  MhConfig mh_config;
  auto* mh_cmd = app.add_subcommand(
      "baseline-mh", "Metropolis posterior mean for mu with sigma known");
  mh_cmd->add_option("--data", mh_data, "dataset JSON")->required();
  mh_cmd->add_option("--sigma", mh_sigma,
                     "JSON with the known sigma (any report with mu/sigma)")
      ->required();
  mh_cmd->add_option("--out", mh_out, "report JSON path (default: stdout)");
  mh_cmd->add_option("--iterations", mh_config.iterations, "chain length");
  mh_cmd->add_option("--halfwidth", mh_config.proposal_halfwidth,
                     "uniform proposal halfwidth");
  mh_cmd->add_option("--mc", mh_config.likelihood_mc,
                     "likelihood Monte-Carlo draws");
  mh_cmd->add_option("--burn-in", mh_config.burn_in_fraction,
                     "burn-in fraction");
  mh_cmd->add_option("--seed", mh_config.seed, "random seed");

  // baseline-grid --------------------------------------------------------------
  std::string grid_data;
  std::string grid_sigma;
  std::string grid_out;
  GridConfig grid_config;
  auto* grid_cmd = app.add_subcommand(
      "baseline-grid", "dense-grid posterior for mu with sigma known");
  grid_cmd->add_option("--data", grid_data, "dataset JSON")->required();
  grid_cmd->add_option("--sigma", grid_sigma,
                       "JSON with the known sigma (any report with mu/sigma)")
      ->required();
  grid_cmd->add_option("--out", grid_out,
                       "report JSON path (default: stdout)");
  grid_cmd->add_option("--nodes", grid_config.nodes_per_dim, "nodes per axis");
  grid_cmd->add_option("--mc", grid_config.likelihood_mc,
                       "likelihood Monte-Carlo draws");
  grid_cmd->add_option("--seed", grid_config.seed, "random seed");

  // eval ---------------------------------------------------------------------
  std::string eval_data;
  std::string eval_model;
  std::string eval_out;
  int eval_draws = 20000;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand(
      "eval", "held-out choice-probability RMSE of a fitted report");
  eval_cmd->add_option("--data", eval_data, "held-out dataset JSON")
      ->required();
  eval_cmd->add_option("--model", eval_model, "fitted report JSON")
      ->required();
  eval_cmd->add_option("--out", eval_out, "metrics JSON path (default: stdout)");
  eval_cmd->add_option("--draws", eval_draws,
                       "Monte-Carlo draws per menu for model predictions");
  eval_cmd->add_option("--seed", eval_seed, "prediction seed");

  // lab ---------------------------------------------------------------------
  auto* lab_cmd = app.add_subcommand(
      "lab", "population-level experiments on partitions and contraction");
  lab_cmd->require_subcommand(1);
  std::string lab_truth_path;
  std::vector<double> lab_thresholds;
  long lab_mc = 500000;
  std::uint64_t lab_seed = 1;
  std::string lab_out;
  auto add_lab_common = [&](CLI::App* sub) {
    sub->add_option("--truth", lab_truth_path,
                    "truth JSON (default: 1D standard normal)");
    sub->add_option("--thresholds", lab_thresholds,
                    "axis split thresholds (default: 0 per dimension)");
    sub->add_option("--mc", lab_mc, "Monte-Carlo draws");
    sub->add_option("--seed", lab_seed, "random seed");
    sub->add_option("--out", lab_out, "output path (default: stdout)");
  };
  auto* lab_a1 = lab_cmd->add_subcommand(
      "assumption1", "separation eigenvalue of an axis-split partition");
  add_lab_common(lab_a1);
  auto* lab_contr = lab_cmd->add_subcommand(
      "contraction", "population EM error decay from a perturbed start");
  add_lab_common(lab_contr);
  double lab_radius = 0.2;
  int lab_steps = 10;
  lab_contr->add_option("--radius", lab_radius, "whitened start distance");
  lab_contr->add_option("--steps", lab_steps, "population EM steps");
  auto* lab_ident = lab_cmd->add_subcommand(
      "identifiability", "separate-selling recovery experiment");
  int ident_products = 2;
  int ident_n = 2000;
  EmConfig ident_config;
  lab_ident->add_option("--products", ident_products, "product count");
  lab_ident->add_option("--n", ident_n, "transactions");
  lab_ident->add_option("--out", lab_out, "output path (default: stdout)");
  add_em_options(lab_ident, ident_config);

  // repro ---------------------------------------------------------------------
  auto* repro = app.add_subcommand(
      "repro", "regenerate the synthetic experiments at desk scale");
  repro->require_subcommand(1);
  std::uint64_t repro_seed = 1;
  int repro_seeds = 5;
  std::string repro_out;
  auto add_repro_common = [&](CLI::App* sub, bool multi) {
    sub->add_option("--seed", repro_seed, "base seed");
    if (multi) sub->add_option("--seeds", repro_seeds, "number of seeds");
    sub->add_option("--out", repro_out, "CSV path (default: stdout)");
  };
  auto* repro_f1 = repro->add_subcommand(
      "figure1", "6-product recovery trace (iteration,error CSV)");
  add_repro_common(repro_f1, false);
  auto* repro_f2 = repro->add_subcommand(
      "figure2", "EM vs MNL held-out RMSE per seed and truth kind");
  add_repro_common(repro_f2, true);
  auto* repro_cen = repro->add_subcommand(
      "censored", "complete vs censored fit RMSE per seed");
  add_repro_common(repro_cen, true);
  auto* repro_mh = repro->add_subcommand(
      "mh-comparison", "EM vs Metropolis error per seed");
  add_repro_common(repro_mh, true);

  CLI11_PARSE(app, argc, argv);

  if (*generate) return cmd_generate(gen_args);

  if (*fit_cmd) {
    const Dataset dataset = io::dataset_from_json(io::read_text_file(fit_data));
    const FitReport report = fit(dataset, fit_config);
    emit(io::fit_report_to_json(report, "em"), fit_out);
    if (!fit_trace.empty())
      io::write_text_file(fit_trace, io::trace_to_csv(report.error_trace));
    return 0;
  }

  if (*cen_cmd) {
    const CensoredDataset dataset =
        io::censored_from_json(io::read_text_file(cen_data));
    const FitReport report = fit_censored(dataset, cen_config);
    emit(io::fit_report_to_json(report, "em_censored"), cen_out);
    if (!cen_trace.empty())
      io::write_text_file(cen_trace, io::trace_to_csv(report.error_trace));
    return 0;
  }

  if (*gmm_cmd) {
    const Dataset dataset = io::dataset_from_json(io::read_text_file(gmm_data));
    const GmmFitReport report = fit_gmm(dataset, gmm_config);
    emit(io::gmm_report_to_json(report), gmm_out);
    return 0;
  }

  if (*mnl_cmd) {
    const Dataset dataset = io::dataset_from_json(io::read_text_file(mnl_data));
    emit(io::mnl_to_json(fit_mnl(dataset, mnl_config)), mnl_out);
    return 0;
  }

  if (*mh_cmd) {
    const Dataset dataset = io::dataset_from_json(io::read_text_file(mh_data));
    const GaussianParams known =
        io::params_from_json(io::read_text_file(mh_sigma));
    emit(io::mh_report_to_json(run_mh(dataset, known.sigma, mh_config)),
         mh_out);
    return 0;
  }

  if (*grid_cmd) {
    const Dataset dataset =
        io::dataset_from_json(io::read_text_file(grid_data));
    const GaussianParams known =
        io::params_from_json(io::read_text_file(grid_sigma));
    emit(io::grid_report_to_json(run_grid(dataset, known.sigma, grid_config)),
         grid_out);
    return 0;
  }

  if (*eval_cmd) {
    const Dataset test = io::dataset_from_json(io::read_text_file(eval_data));
    const std::string model_text = io::read_text_file(eval_model);
    const std::string method = io::detect_method(model_text);
    double rmse = 0.0;
    if (method == "mnl") {
      const MnlParams params = io::mnl_from_json(model_text);
      rmse = rmse_choice_prediction(test, [&](const PriceMenu& menu) {
        return predict_choice_probs(menu, params);
      });
    } else if (method == "em_gmm") {
      const GmmParams params = io::gmm_params_from_json(model_text);
      rmse = rmse_choice_prediction(test, [&](const PriceMenu& menu) {
        return predict_choice_probs(menu, params, eval_draws, eval_seed);
      });
    } else {
      const GaussianParams params = io::params_from_json(model_text);
      rmse = rmse_choice_prediction(test, [&](const PriceMenu& menu) {
        return predict_choice_probs(menu, params, eval_draws, eval_seed);
      });
    }
    emit("{\n  \"method\": \"" + (method.empty() ? "em" : method) +
             "\",\n  \"rmse\": " + fmt(rmse) + "\n}\n",
         eval_out);
    return 0;
  }

  if (*lab_cmd) {
    GaussianParams truth;
    if (!lab_truth_path.empty()) {
      truth = io::params_from_json(io::read_text_file(lab_truth_path));
    } else {
      truth.mu = Eigen::VectorXd::Zero(1);
      truth.sigma = Eigen::MatrixXd::Identity(1, 1);
    }
    Eigen::VectorXd thresholds;
    if (lab_thresholds.empty()) {
      thresholds = Eigen::VectorXd::Zero(truth.dimension());
    } else {
      thresholds.resize(static_cast<Eigen::Index>(lab_thresholds.size()));
      for (std::size_t i = 0; i < lab_thresholds.size(); ++i)
        thresholds[static_cast<Eigen::Index>(i)] = lab_thresholds[i];
    }
    const lab::PartitionSpec partition = lab::axis_split_partition(thresholds);

    if (*lab_a1) {
      const auto result =
          lab::assumption1_eigenvalue(truth, partition, lab_mc, lab_seed);
      std::string text = "{\n  \"lambda_min\": " + fmt(result.lambda_min) +
                         ",\n  \"draws_used\": " +
                         std::to_string(result.draws_used) +
                         ",\n  \"region_mass\": [";
      for (std::size_t k = 0; k < result.region_mass.size(); ++k)
        text += (k ? ", " : "") + fmt(result.region_mass[k]);
      text += "]\n}\n";
      emit(text, lab_out);
      return 0;
    }
    if (*lab_contr) {
      const auto result = lab::contraction_experiment(
          truth, partition, lab_radius, lab_steps, lab_mc, lab_seed);
      std::string text = "step,error,ratio,bound\n";
      for (std::size_t t = 0; t < result.errors.size(); ++t) {
        text += std::to_string(t) + "," + fmt(result.errors[t]) + ",";
        text += (t > 0 ? fmt(result.ratios[t - 1]) : "");
        text += "," + fmt(result.bound) + "\n";
      }
      emit(text, lab_out);
      std::cerr << "epsilon_hat = " << result.epsilon_hat
                << ", ratio bound = " << result.bound << "\n";
      return 0;
    }
    const auto result = lab::identifiability_experiment(
        ident_products, ident_n, ident_config.seed ? ident_config.seed : 1,
        ident_config);
    emit(io::fit_report_to_json(result.fit, "em"), lab_out);
    std::cerr << "l1 error vs truth = " << result.l1_error << " over "
              << result.menus.size() << " separate-selling menus\n";
    return 0;
  }

  if (*repro) {
    if (*repro_f1) {
      const auto result = experiments::run_figure1(repro_seed);
      emit(io::trace_to_csv(result.truth_errors), repro_out);
      std::cerr << "distinct bundles: " << result.distinct_bundles
                << ", final error: " << result.truth_errors.back()
                << ", iterations: " << result.fit.iterations
                << ", seconds: " << result.fit.runtime_seconds << "\n";
      return 0;
    }
    if (*repro_f2) {
      std::string text = "kind,seed,em_rmse,mnl_rmse\n";
      for (int s = 0; s < repro_seeds; ++s) {
        for (const TruthKind kind :
             {TruthKind::kGaussian, TruthKind::kGumbel}) {
          const auto r = experiments::run_figure2(kind, repro_seed + s);
          text += std::string(kind == TruthKind::kGaussian ? "gaussian"
                                                           : "gumbel") +
                  "," + std::to_string(repro_seed + s) + "," + fmt(r.em_rmse) +
                  "," + fmt(r.mnl_rmse) + "\n";
        }
      }
      emit(text, repro_out);
      return 0;
    }
    if (*repro_cen) {
      std::string text = "seed,full_rmse,censored_rmse,censor_rate\n";
      for (int s = 0; s < repro_seeds; ++s) {
        const auto r = experiments::run_censored_comparison(repro_seed + s);
        text += std::to_string(repro_seed + s) + "," + fmt(r.full_rmse) + "," +
                fmt(r.censored_rmse) + "," + fmt(r.censor_rate) + "\n";
      }
      emit(text, repro_out);
      return 0;
    }
    std::string text = "seed,em_error,mh_error,em_seconds,mh_seconds\n";
    for (int s = 0; s < repro_seeds; ++s) {
      const auto r = experiments::run_mh_comparison(repro_seed + s);
      text += std::to_string(repro_seed + s) + "," + fmt(r.em_error) + "," +
              fmt(r.mh_error) + "," + fmt(r.em_runtime_seconds) + "," +
              fmt(r.mh_runtime_seconds) + "\n";
    }
    emit(text, repro_out);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return main_checked(argc, argv);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
