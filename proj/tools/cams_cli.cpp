#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "cams/base_pool.hpp"
#include "cams/coassoc.hpp"
#include "cams/consensus.hpp"
#include "cams/data_io.hpp"
#include "cams/enhance.hpp"
#include "cams/errors.hpp"
#include "cams/experiment.hpp"
#include "cams/matrix_io.hpp"
#include "cams/metrics.hpp"
#include "cams/microcluster.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

cams::Partition partition_from_file(const std::string& path) {
  std::vector<int> labels = cams::load_labels(path);
  cams::Partition p;
  p.labels = labels;
  for (int lab : labels) p.num_clusters = std::max(p.num_clusters, lab + 1);
  return p;
}

void print_metrics(const cams::MetricsReport& m, std::ostream& os) {
  cams::json j = cams::detail::metrics_to_json(m);
  os << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"co-association matrix self-enhancement for ensemble clustering"};
  app.require_subcommand(1);

  // ---- pool ----
  auto* pool_cmd = app.add_subcommand("pool", "generate a base clustering pool and save it");
  std::string pool_data, pool_label_mode = "embedded-last-column", pool_label_file, pool_out;
  int pool_size = 100;
  std::uint64_t pool_seed = 1;
  bool pool_normalize = false;
  pool_cmd->add_option("--data", pool_data, "dataset CSV")->required();
  pool_cmd->add_option("--label-mode", pool_label_mode, "embedded-last-column|separate-file|none");
  pool_cmd->add_option("--label-file", pool_label_file, "labels, one per line");
  pool_cmd->add_flag("--normalize", pool_normalize, "per-column min-max scaling");
  pool_cmd->add_option("--pool-size", pool_size, "number of base clusterings");
  pool_cmd->add_option("--seed", pool_seed, "master seed");
  pool_cmd->add_option("--out", pool_out, "output directory")->required();

  // ---- enhance ----
  auto* enh_cmd = app.add_subcommand("enhance", "enhance a similarity matrix (matrix in, matrix out)");
  std::string enh_input, enh_ca_tilde, enh_out, enh_diag;
  cams::SolverConfig enh_solver;
  double enh_alpha = 0.8;
  bool enh_no_lock = false;
  enh_cmd->add_option("--input", enh_input, "similarity matrix to enhance (.csv or .cam)")->required();
  enh_cmd->add_option("--ca-tilde", enh_ca_tilde,
                      "plain co-occurrence CA matrix for the high-confidence support "
                      "(defaults to --input)");
  enh_cmd->add_option("--alpha", enh_alpha, "high-confidence threshold");
  enh_cmd->add_option("--lambda", enh_solver.lambda, "error-term weight");
  enh_cmd->add_option("--gamma1", enh_solver.gamma1, "penalty on A = C + E");
  enh_cmd->add_option("--gamma2", enh_solver.gamma2, "penalty on C = F");
  enh_cmd->add_option("--epsilon", enh_solver.epsilon, "stopping tolerance");
  enh_cmd->add_option("--max-iters", enh_solver.max_iters, "iteration cap");
  enh_cmd->add_flag("--no-omega-lock", enh_no_lock, "do not pin high-confidence entries");
  enh_cmd->add_option("--out", enh_out, "output matrix path (.csv or .cam)")->required();
  enh_cmd->add_option("--diagnostics", enh_diag, "per-iteration convergence CSV");

  // ---- cluster ----
  auto* clu_cmd = app.add_subcommand("cluster", "cut a similarity matrix into k clusters");
  std::string clu_matrix, clu_out, clu_dendro, clu_linkage = "average";
  int clu_k = 0;
  clu_cmd->add_option("--matrix", clu_matrix, "similarity matrix (.csv or .cam)")->required();
  clu_cmd->add_option("--k", clu_k, "target cluster count")->required();
  clu_cmd->add_option("--linkage", clu_linkage, "average|complete");
  clu_cmd->add_option("--out", clu_out, "output label file")->required();
  clu_cmd->add_option("--dendrogram", clu_dendro, "merge history CSV");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "score predicted labels against ground truth");
  std::string eval_pred, eval_truth, eval_out, eval_profile_ca, eval_profile_out;
  eval_cmd->add_option("--pred", eval_pred, "predicted labels, one per line")->required();
  eval_cmd->add_option("--truth", eval_truth, "ground-truth labels, one per line")->required();
  eval_cmd->add_option("--out", eval_out, "metrics JSON path (default: stdout only)");
  eval_cmd->add_option("--profile-ca", eval_profile_ca,
                       "plain CA matrix for a pair reliability profile");
  eval_cmd->add_option("--profile-out", eval_profile_out, "profile CSV path");

  // ---- experiment ----
  auto* exp_cmd = app.add_subcommand("experiment", "run the full protocol from a config file");
  std::string exp_config;
  cams::ExperimentConfig ovr;
  std::string ovr_label_mode, ovr_ca_kind, ovr_linkage;
  std::vector<double> ovr_sweep_alpha, ovr_sweep_lambda;
  std::vector<int> ovr_sweep_m;
  exp_cmd->add_option("--config", exp_config, "JSON config file");
  exp_cmd->add_option("--dataset", ovr.dataset_path, "dataset CSV");
  exp_cmd->add_option("--label-mode", ovr_label_mode, "embedded-last-column|separate-file|none");
  exp_cmd->add_option("--label-file", ovr.label_file, "labels, one per line");
  exp_cmd->add_option("--pool-size", ovr.pool_size, "candidate pool size");
  exp_cmd->add_option("--ensemble-size", ovr.ensemble_size, "base clusterings per repetition");
  exp_cmd->add_option("--repetitions", ovr.repetitions, "number of repetitions");
  exp_cmd->add_option("--seed", ovr.seed, "master seed");
  exp_cmd->add_option("--ca-kind", ovr_ca_kind, "ca|lwca|pts");
  exp_cmd->add_option("--alpha", ovr.alpha, "high-confidence threshold");
  exp_cmd->add_option("--lambda", ovr.solver.lambda, "error-term weight");
  exp_cmd->add_option("--gamma1", ovr.solver.gamma1, "penalty on A = C + E");
  exp_cmd->add_option("--gamma2", ovr.solver.gamma2, "penalty on C = F");
  exp_cmd->add_option("--epsilon", ovr.solver.epsilon, "stopping tolerance");
  exp_cmd->add_option("--max-iters", ovr.solver.max_iters, "iteration cap");
  exp_cmd->add_option("--theta", ovr.theta, "LWCA reliability temperature");
  exp_cmd->add_option("--pts-v", ovr.pts_v, "top-V links per node (0 = auto)");
  exp_cmd->add_option("--pts-t", ovr.pts_t, "random-walk steps");
  exp_cmd->add_option("--k", ovr.k, "consensus clusters (0 = true class count)");
  exp_cmd->add_option("--linkage", ovr_linkage, "average|complete");
  exp_cmd->add_option("--sweep-alpha", ovr_sweep_alpha, "alpha sweep values")->delimiter(',');
  exp_cmd->add_option("--sweep-lambda", ovr_sweep_lambda, "lambda sweep values")->delimiter(',');
  exp_cmd->add_option("--sweep-ensemble-size", ovr_sweep_m, "ensemble-size sweep")->delimiter(',');
  bool ovr_drop_lap = false, ovr_drop_lock = false, ovr_views = false, ovr_diag = false,
       ovr_norm = false;
  exp_cmd->add_flag("--drop-laplacian", ovr_drop_lap, "ablation: no Laplacian propagation");
  exp_cmd->add_flag("--drop-omega-lock", ovr_drop_lock, "ablation: no high-confidence lock");
  exp_cmd->add_flag("--normalize", ovr_norm, "per-column min-max scaling");
  exp_cmd->add_option("--workers", ovr.workers, "concurrent repetitions (0 = hardware)");
  exp_cmd->add_option("--out", ovr.out_dir, "output directory for report files");
  exp_cmd->add_flag("--dump-views", ovr_views, "write matrix views for the first repetition");
  exp_cmd->add_flag("--dump-diagnostics", ovr_diag, "write solver diagnostics CSV");

  // ---- views ----
  auto* views_cmd = app.add_subcommand("views", "write sorted matrix views and the ideal matrix");
  std::string views_input, views_enhanced, views_truth, views_out;
  views_cmd->add_option("--input", views_input, "input similarity matrix")->required();
  views_cmd->add_option("--enhanced", views_enhanced, "enhanced similarity matrix")->required();
  views_cmd->add_option("--truth", views_truth, "ground-truth labels, one per line")->required();
  views_cmd->add_option("--out", views_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (pool_cmd->parsed()) {
      cams::Dataset data = cams::load_dataset(
          pool_data, cams::label_mode_from_string(pool_label_mode), pool_label_file);
      if (pool_normalize) cams::normalize_minmax(data);
      const cams::PoolResult pool = cams::generate_pool(data, pool_size, pool_seed);
      std::filesystem::create_directories(pool_out);
      const std::filesystem::path dir(pool_out);
      cams::save_ensemble_csv(pool.ensemble, (dir / "pool.csv").string());
      cams::save_pool_meta_json(pool, pool_seed, data.num_samples(),
                                (dir / "pool_meta.json").string());
      std::cout << "pool: " << pool.ensemble.size() << " base clusterings over "
                << data.num_samples() << " samples -> " << pool_out << '\n';
    } else if (enh_cmd->parsed()) {
      cams::CoassocMatrix input{cams::load_matrix_auto(enh_input), cams::CaKind::Lwca};
      cams::CoassocMatrix ca_tilde{
          enh_ca_tilde.empty() ? input.values : cams::load_matrix_auto(enh_ca_tilde),
          cams::CaKind::PlainCa};
      const cams::HighConfidence hc = cams::extract_hc(ca_tilde, enh_alpha);
      enh_solver.omega_lock = !enh_no_lock;
      const cams::EnhancedResult res = cams::solve(input, hc, enh_solver);
      cams::save_matrix_auto(res.c.values, enh_out);
      if (!enh_diag.empty()) cams::save_diagnostics_csv(res.history, enh_diag);
      std::cout << "enhance: " << (res.converged ? "converged" : "iteration cap") << " after "
                << res.iters << " iterations, objective " << res.final_objective << " -> "
                << enh_out << '\n';
    } else if (clu_cmd->parsed()) {
      const cams::CoassocMatrix sim{cams::load_matrix_auto(clu_matrix), cams::CaKind::Enhanced};
      auto [part, dendro] = cams::hac(sim, clu_k, cams::linkage_from_string(clu_linkage));
      cams::save_labels(part.labels, clu_out);
      if (!clu_dendro.empty()) cams::save_dendrogram_csv(dendro, clu_dendro);
      std::cout << "cluster: cut " << sim.size() << " units into " << clu_k << " clusters -> "
                << clu_out << '\n';
    } else if (eval_cmd->parsed()) {
      const cams::Partition pred = partition_from_file(eval_pred);
      const cams::Partition truth = partition_from_file(eval_truth);
      const cams::MetricsReport rep = cams::compute_metrics(pred, truth);
      print_metrics(rep, std::cout);
      if (!eval_out.empty()) {
        std::ofstream out(eval_out);
        if (!out) throw cams::ParseError(eval_out + ": cannot open for writing");
        out << cams::detail::metrics_to_json(rep).dump(2) << '\n';
      }
      if (!eval_profile_ca.empty()) {
        if (eval_profile_out.empty())
          throw cams::ConfigError("eval: --profile-ca needs --profile-out");
        const cams::CoassocMatrix ca{cams::load_matrix_auto(eval_profile_ca),
                                     cams::CaKind::PlainCa};
        cams::save_profile_csv(cams::reliability_profile(ca, truth), eval_profile_out);
      }
    } else if (exp_cmd->parsed()) {
      cams::ExperimentConfig cfg;
      if (!exp_config.empty()) cfg = cams::load_config(exp_config);
      auto passed = [&](const std::string& name) { return exp_cmd->count(name) > 0; };
      if (passed("--dataset")) cfg.dataset_path = ovr.dataset_path;
      if (passed("--label-mode")) cfg.label_mode = cams::label_mode_from_string(ovr_label_mode);
      if (passed("--label-file")) cfg.label_file = ovr.label_file;
      if (passed("--normalize")) cfg.normalize = ovr_norm;
      if (passed("--pool-size")) cfg.pool_size = ovr.pool_size;
      if (passed("--ensemble-size")) cfg.ensemble_size = ovr.ensemble_size;
      if (passed("--repetitions")) cfg.repetitions = ovr.repetitions;
      if (passed("--seed")) cfg.seed = ovr.seed;
      if (passed("--ca-kind")) cfg.ca_kind = cams::ca_kind_from_string(ovr_ca_kind);
      if (passed("--alpha")) cfg.alpha = ovr.alpha;
      if (passed("--lambda")) cfg.solver.lambda = ovr.solver.lambda;
      if (passed("--gamma1")) cfg.solver.gamma1 = ovr.solver.gamma1;
      if (passed("--gamma2")) cfg.solver.gamma2 = ovr.solver.gamma2;
      if (passed("--epsilon")) cfg.solver.epsilon = ovr.solver.epsilon;
      if (passed("--max-iters")) cfg.solver.max_iters = ovr.solver.max_iters;
      if (passed("--theta")) cfg.theta = ovr.theta;
      if (passed("--pts-v")) cfg.pts_v = ovr.pts_v;
      if (passed("--pts-t")) cfg.pts_t = ovr.pts_t;
      if (passed("--k")) cfg.k = ovr.k;
      if (passed("--linkage")) cfg.linkage = cams::linkage_from_string(ovr_linkage);
      if (passed("--sweep-alpha")) cfg.sweep_alpha = ovr_sweep_alpha;
      if (passed("--sweep-lambda")) cfg.sweep_lambda = ovr_sweep_lambda;
      if (passed("--sweep-ensemble-size")) cfg.sweep_ensemble_size = ovr_sweep_m;
      if (passed("--drop-laplacian")) cfg.drop_laplacian = ovr_drop_lap;
      if (passed("--drop-omega-lock")) cfg.drop_omega_lock = ovr_drop_lock;
      if (passed("--workers")) cfg.workers = ovr.workers;
      if (passed("--out")) cfg.out_dir = ovr.out_dir;
      if (passed("--dump-views")) cfg.dump_views = ovr_views;
      if (passed("--dump-diagnostics")) cfg.dump_diagnostics = ovr_diag;

      const cams::ExperimentReport report = cams::run_experiment(cfg);
      std::printf("%-8s %-8s %-4s | %-22s | %-22s\n", "alpha", "lambda", "m", "baseline ARI",
                  "enhanced ARI");
      for (const cams::GridPoint& g : report.grid)
        std::printf("%-8g %-8g %-4d | %.3f +/- %.3f        | %.3f +/- %.3f\n", g.alpha, g.lambda,
                    g.ensemble_size, g.baseline.mean.ari, g.baseline.stdev.ari,
                    g.enhanced.mean.ari, g.enhanced.stdev.ari);
      if (!cfg.out_dir.empty()) std::cout << "report files -> " << cfg.out_dir << '\n';
    } else if (views_cmd->parsed()) {
      const Eigen::MatrixXd input = cams::load_matrix_auto(views_input);
      const Eigen::MatrixXd enhanced = cams::load_matrix_auto(views_enhanced);
      const cams::Partition truth = partition_from_file(views_truth);
      cams::emit_matrix_views({{"input", input}, {"enhanced", enhanced}}, truth, views_out);
      std::cout << "views -> " << views_out << '\n';
    }
  } catch (const cams::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return 0;
}
