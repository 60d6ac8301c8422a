#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cams/base_pool.hpp"
#include "cams/coassoc.hpp"
#include "cams/consensus.hpp"
#include "cams/data_io.hpp"
#include "cams/enhance.hpp"
#include "cams/errors.hpp"
#include "cams/matrix_io.hpp"
#include "cams/metrics.hpp"
#include "cams/microcluster.hpp"
#include "cams/rng.hpp"

namespace cams {

using json = nlohmann::ordered_json;

// Full protocol: pool of randomized-K base clusterings, per-repetition
// ensembles, optional hyper-parameter sweeps, baseline vs enhanced scoring.
struct ExperimentConfig {
  std::string dataset_path;
  LabelMode label_mode = LabelMode::EmbeddedLastColumn;
  std::string label_file;
  bool normalize = false;

  int pool_size = 100;
  int ensemble_size = 20;
  int repetitions = 20;
  std::uint64_t seed = 1;

  CaKind ca_kind = CaKind::Lwca;
  double alpha = 0.8;
  SolverConfig solver;  // lambda 0.4, gamma 1/1, epsilon 1e-2, max_iters 200
  double theta = 0.4;   // LWCA reliability temperature
  int pts_v = 0;        // 0 = auto
  int pts_t = 20;

  int k = 0;  // consensus cluster count; 0 = ground-truth class count
  Linkage linkage = Linkage::Average;

  std::vector<double> sweep_alpha;
  std::vector<double> sweep_lambda;
  std::vector<int> sweep_ensemble_size;

  bool drop_laplacian = false;
  bool drop_omega_lock = false;

  int workers = 0;  // 0 = hardware concurrency
  std::string out_dir;
  bool dump_views = false;
  bool dump_diagnostics = false;
};

struct RepetitionResult {
  int rep = 0;
  MetricsReport baseline;
  MetricsReport enhanced;
  bool converged = false;
  int iters = 0;
  double solve_seconds = 0.0;
  int n_prime = 0;  // microcluster count (PTS runs), else n
};

struct MetricsAggregate {
  MetricsReport mean;
  MetricsReport stdev;  // sample standard deviation
};

struct GridPoint {
  double alpha = 0.8;
  double lambda = 0.4;
  int ensemble_size = 20;
  std::vector<RepetitionResult> repetitions;
  MetricsAggregate baseline;
  MetricsAggregate enhanced;
};

struct ExperimentReport {
  std::string dataset_name;
  int n = 0, d = 0, classes = 0, k = 0;
  std::vector<GridPoint> grid;
};

namespace detail {

inline MetricsAggregate aggregate(const std::vector<RepetitionResult>& reps, bool enhanced_side) {
  auto get = [&](const RepetitionResult& r) -> const MetricsReport& {
    return enhanced_side ? r.enhanced : r.baseline;
  };
  const double n = static_cast<double>(reps.size());
  MetricsAggregate agg;
  for (const RepetitionResult& r : reps) {
    agg.mean.ari += get(r).ari;
    agg.mean.nmi += get(r).nmi;
    agg.mean.fscore += get(r).fscore;
    agg.mean.accuracy += get(r).accuracy;
    agg.mean.purity += get(r).purity;
  }
  agg.mean.ari /= n;
  agg.mean.nmi /= n;
  agg.mean.fscore /= n;
  agg.mean.accuracy /= n;
  agg.mean.purity /= n;
  if (reps.size() > 1) {
    auto dev = [&](auto field) {
      double s = 0.0;
      for (const RepetitionResult& r : reps) {
        const double d = field(get(r)) - field(agg.mean);
        s += d * d;
      }
      return std::sqrt(s / (n - 1.0));
    };
    agg.stdev.ari = dev([](const MetricsReport& m) { return m.ari; });
    agg.stdev.nmi = dev([](const MetricsReport& m) { return m.nmi; });
    agg.stdev.fscore = dev([](const MetricsReport& m) { return m.fscore; });
    agg.stdev.accuracy = dev([](const MetricsReport& m) { return m.accuracy; });
    agg.stdev.purity = dev([](const MetricsReport& m) { return m.purity; });
  }
  return agg;
}

inline json metrics_to_json(const MetricsReport& m) {
  return json{{"ari", m.ari},
              {"nmi", m.nmi},
              {"fscore", m.fscore},
              {"accuracy", m.accuracy},
              {"purity", m.purity}};
}

}  // namespace detail

// One repetition of the protocol on a fixed ensemble: build the configured
// input matrix and the high-confidence support, cluster the raw input as the
// baseline, enhance, cluster again. PTS inputs live at microcluster scale;
// their partitions and matrices are lifted back to samples on the way out.
struct PipelineOutput {
  CoassocMatrix input;
  CoassocMatrix enhanced;
  Partition baseline_part;
  Partition enhanced_part;
  bool converged = true;
  int iters = 0;
  int n_prime = 0;
  std::vector<IterationRecord> history;
  MicroclusterMap map;  // populated on PTS runs
};

inline PipelineOutput run_pipeline_once(const Ensemble& ensemble, const ExperimentConfig& cfg,
                                        double alpha, double lambda, int k) {
  PipelineOutput out;
  const CoassocMatrix ca_tilde = build_ca(ensemble);
  out.n_prime = ca_tilde.size();

  CoassocMatrix input;
  HighConfidence hc;
  MicroclusterMap& map = out.map;
  const bool micro_level = cfg.ca_kind == CaKind::Pts;
  if (cfg.ca_kind == CaKind::PlainCa) {
    input = ca_tilde;
    hc = extract_hc(ca_tilde, alpha);
  } else if (cfg.ca_kind == CaKind::Lwca) {
    input = build_lwca(ensemble, LwcaParams{cfg.theta});
    hc = extract_hc(ca_tilde, alpha);
  } else {
    map = form_microclusters(ensemble);
    out.n_prime = map.n_prime;
    if (map.n_prime < 2)
      throw ValidationError("pts: ensemble collapses to fewer than 2 microclusters");
    const CoassocMatrix mca = build_mca(ensemble, map);
    PtsParams params;
    params.v = cfg.pts_v > 0 ? std::min(cfg.pts_v, map.n_prime - 1) : default_pts_v(map.n_prime);
    params.t = cfg.pts_t;
    input = build_pts(mca, map.sizes, params);
    hc = extract_hc(mca, alpha);
  }

  if (k > input.size())
    throw ValidationError("consensus: k exceeds the number of units to cluster");

  Partition base = hac(input, k, cfg.linkage).first;

  CoassocMatrix enhanced;
  if (cfg.drop_laplacian) {
    enhanced = enhance_without_laplacian(input);
  } else {
    SolverConfig sc = cfg.solver;
    sc.lambda = lambda;
    sc.omega_lock = !cfg.drop_omega_lock;
    EnhancedResult res = solve(input, hc, sc);
    enhanced = std::move(res.c);
    out.converged = res.converged;
    out.iters = res.iters;
    out.history = std::move(res.history);
  }
  Partition enh = hac(enhanced, k, cfg.linkage).first;

  if (micro_level) {
    out.baseline_part = lift_partition(base, map);
    out.enhanced_part = lift_partition(enh, map);
    const int n = static_cast<int>(map.assignment.size());
    auto expand = [&](const CoassocMatrix& m) {
      CoassocMatrix s;
      s.kind = m.kind;
      s.values.resize(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          s.values(i, j) = m.values(map.assignment[i], map.assignment[j]);
      return s;
    };
    out.input = expand(input);
    out.enhanced = expand(enhanced);
  } else {
    out.baseline_part = base;
    out.enhanced_part = enh;
    out.input = std::move(input);
    out.enhanced = std::move(enhanced);
  }
  return out;
}

// Writes each named matrix, the elementwise difference (last minus first) and
// the ground-truth block matrix, with rows and columns sorted by true class
// so the block structure is visible, as dense CSV and 8-bit PGM.
inline void emit_matrix_views(const std::vector<std::pair<std::string, Eigen::MatrixXd>>& mats,
                              const Partition& truth, const std::string& out_dir) {
  if (mats.empty()) throw std::invalid_argument("views: no matrices given");
  const int n = truth.size();
  for (const auto& [name, m] : mats)
    if (m.rows() != n || m.cols() != n)
      throw ValidationError("views: matrix '" + name + "' does not match label count");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return truth.labels[a] < truth.labels[b];
  });
  auto sorted = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s(i, j) = m(order[i], order[j]);
    return s;
  };

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  auto dump = [&](const std::string& name, const Eigen::MatrixXd& m) {
    save_matrix_csv(m, (dir / (name + ".csv")).string());
    save_matrix_pgm(m, (dir / (name + ".pgm")).string());
  };
  for (const auto& [name, m] : mats) dump(name, sorted(m));
  if (mats.size() >= 2) dump("difference", sorted(mats.back().second - mats.front().second));

  Eigen::MatrixXd ideal(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      ideal(i, j) = truth.labels[order[i]] == truth.labels[order[j]] ? 1.0 : 0.0;
  dump("ideal", ideal);
}

// ---- configuration file (JSON, documented key set) ----

inline CaKind ca_kind_from_string(const std::string& s) {
  if (s == "ca") return CaKind::PlainCa;
  if (s == "lwca") return CaKind::Lwca;
  if (s == "pts") return CaKind::Pts;
  throw ConfigError("config: ca_kind must be one of ca|lwca|pts");
}

inline LabelMode label_mode_from_string(const std::string& s) {
  if (s == "embedded-last-column") return LabelMode::EmbeddedLastColumn;
  if (s == "separate-file") return LabelMode::SeparateFile;
  if (s == "none") return LabelMode::None;
  throw ConfigError("config: label_mode must be embedded-last-column|separate-file|none");
}

inline const char* to_string(LabelMode m) {
  switch (m) {
    case LabelMode::EmbeddedLastColumn: return "embedded-last-column";
    case LabelMode::SeparateFile: return "separate-file";
    case LabelMode::None: return "none";
  }
  return "?";
}

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = c.dataset_path;
  j["label_mode"] = to_string(c.label_mode);
  j["label_file"] = c.label_file;
  j["normalize"] = c.normalize;
  j["pool_size"] = c.pool_size;
  j["ensemble_size"] = c.ensemble_size;
  j["repetitions"] = c.repetitions;
  j["seed"] = c.seed;
  j["ca_kind"] = to_string(c.ca_kind);
  j["alpha"] = c.alpha;
  j["lambda"] = c.solver.lambda;
  j["gamma1"] = c.solver.gamma1;
  j["gamma2"] = c.solver.gamma2;
  j["epsilon"] = c.solver.epsilon;
  j["max_iters"] = c.solver.max_iters;
  j["theta"] = c.theta;
  j["pts_v"] = c.pts_v;
  j["pts_t"] = c.pts_t;
  j["k"] = c.k;
  j["linkage"] = c.linkage == Linkage::Average ? "average" : "complete";
  j["sweep_alpha"] = c.sweep_alpha;
  j["sweep_lambda"] = c.sweep_lambda;
  j["sweep_ensemble_size"] = c.sweep_ensemble_size;
  j["drop_laplacian"] = c.drop_laplacian;
  j["drop_omega_lock"] = c.drop_omega_lock;
  j["workers"] = c.workers;
  j["out_dir"] = c.out_dir;
  j["dump_views"] = c.dump_views;
  j["dump_diagnostics"] = c.dump_diagnostics;
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    try {
      if (key == "dataset") c.dataset_path = it->get<std::string>();
      else if (key == "label_mode") c.label_mode = label_mode_from_string(it->get<std::string>());
      else if (key == "label_file") c.label_file = it->get<std::string>();
      else if (key == "normalize") c.normalize = it->get<bool>();
      else if (key == "pool_size") c.pool_size = it->get<int>();
      else if (key == "ensemble_size") c.ensemble_size = it->get<int>();
      else if (key == "repetitions") c.repetitions = it->get<int>();
      else if (key == "seed") c.seed = it->get<std::uint64_t>();
      else if (key == "ca_kind") c.ca_kind = ca_kind_from_string(it->get<std::string>());
      else if (key == "alpha") c.alpha = it->get<double>();
      else if (key == "lambda") c.solver.lambda = it->get<double>();
      else if (key == "gamma1") c.solver.gamma1 = it->get<double>();
      else if (key == "gamma2") c.solver.gamma2 = it->get<double>();
      else if (key == "epsilon") c.solver.epsilon = it->get<double>();
      else if (key == "max_iters") c.solver.max_iters = it->get<int>();
      else if (key == "theta") c.theta = it->get<double>();
      else if (key == "pts_v") c.pts_v = it->get<int>();
      else if (key == "pts_t") c.pts_t = it->get<int>();
      else if (key == "k") c.k = it->get<int>();
      else if (key == "linkage") c.linkage = linkage_from_string(it->get<std::string>());
      else if (key == "sweep_alpha") c.sweep_alpha = it->get<std::vector<double>>();
      else if (key == "sweep_lambda") c.sweep_lambda = it->get<std::vector<double>>();
      else if (key == "sweep_ensemble_size") c.sweep_ensemble_size = it->get<std::vector<int>>();
      else if (key == "drop_laplacian") c.drop_laplacian = it->get<bool>();
      else if (key == "drop_omega_lock") c.drop_omega_lock = it->get<bool>();
      else if (key == "workers") c.workers = it->get<int>();
      else if (key == "out_dir") c.out_dir = it->get<std::string>();
      else if (key == "dump_views") c.dump_views = it->get<bool>();
      else if (key == "dump_diagnostics") c.dump_diagnostics = it->get<bool>();
      else throw ConfigError("config: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return config_from_json(j);
}

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.dataset_path.empty()) throw ConfigError("config: dataset path is required");
  if (cfg.label_mode == LabelMode::SeparateFile && cfg.label_file.empty())
    throw ConfigError("config: label_mode separate-file needs label_file");
  if (cfg.pool_size < 1) throw ConfigError("config: pool_size must be positive");
  if (cfg.repetitions < 1) throw ConfigError("config: repetitions must be positive");
  if (cfg.ensemble_size < 1 || cfg.ensemble_size > cfg.pool_size)
    throw ConfigError("config: need 1 <= ensemble_size <= pool_size");
  for (int m : cfg.sweep_ensemble_size)
    if (m < 1 || m > cfg.pool_size) throw ConfigError("config: swept ensemble_size exceeds pool");
  auto check_alpha = [](double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("config: alpha must lie in [0,1]");
  };
  check_alpha(cfg.alpha);
  for (double a : cfg.sweep_alpha) check_alpha(a);
  if (!(cfg.solver.lambda > 0.0)) throw ConfigError("config: lambda must be positive");
  for (double l : cfg.sweep_lambda)
    if (!(l > 0.0)) throw ConfigError("config: swept lambda must be positive");
  if (!(cfg.solver.gamma1 > 0.0 && cfg.solver.gamma2 > 0.0))
    throw ConfigError("config: gamma1 and gamma2 must be positive");
  if (!(cfg.solver.epsilon > 0.0)) throw ConfigError("config: epsilon must be positive");
  if (cfg.solver.max_iters < 1) throw ConfigError("config: max_iters must be positive");
  if (!(cfg.theta > 0.0)) throw ConfigError("config: theta must be positive");
  if (cfg.pts_t < 1) throw ConfigError("config: pts_t must be positive");
  if (cfg.k < 0 || cfg.workers < 0 || cfg.pts_v < 0)
    throw ConfigError("config: k, workers, pts_v cannot be negative");
  if (cfg.drop_laplacian && cfg.drop_omega_lock)
    throw ConfigError("config: the two ablation flags are mutually exclusive");
}

// ---- report files ----

inline void write_report_json(const ExperimentConfig& cfg, const ExperimentReport& report,
                              const PoolResult& pool, const std::string& path) {
  json j;
  j["config"] = config_to_json(cfg);
  j["dataset"] = json{{"name", report.dataset_name},
                      {"n", report.n},
                      {"d", report.d},
                      {"classes", report.classes},
                      {"k", report.k}};
  j["pool"] = json{{"seed", cfg.seed}, {"size", pool.ensemble.size()},
                   {"requested_k", pool.requested_k}};
  j["grid"] = json::array();
  for (const GridPoint& g : report.grid) {
    json gj;
    gj["alpha"] = g.alpha;
    gj["lambda"] = g.lambda;
    gj["ensemble_size"] = g.ensemble_size;
    gj["baseline_mean"] = detail::metrics_to_json(g.baseline.mean);
    gj["baseline_std"] = detail::metrics_to_json(g.baseline.stdev);
    gj["enhanced_mean"] = detail::metrics_to_json(g.enhanced.mean);
    gj["enhanced_std"] = detail::metrics_to_json(g.enhanced.stdev);
    gj["repetitions"] = json::array();
    for (const RepetitionResult& r : g.repetitions) {
      json rj;
      rj["rep"] = r.rep;
      rj["baseline"] = detail::metrics_to_json(r.baseline);
      rj["enhanced"] = detail::metrics_to_json(r.enhanced);
      rj["converged"] = r.converged;
      rj["iters"] = r.iters;
      rj["n_prime"] = r.n_prime;
      gj["repetitions"].push_back(std::move(rj));
    }
    j["grid"].push_back(std::move(gj));
  }
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << j.dump(2) << '\n';
}

inline void write_runs_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "alpha,lambda,ensemble_size,rep,"
         "baseline_ari,baseline_nmi,baseline_fscore,baseline_accuracy,baseline_purity,"
         "enhanced_ari,enhanced_nmi,enhanced_fscore,enhanced_accuracy,enhanced_purity,"
         "converged,iters\n";
  auto fmt = detail::format_double;
  for (const GridPoint& g : report.grid)
    for (const RepetitionResult& r : g.repetitions)
      out << fmt(g.alpha) << ',' << fmt(g.lambda) << ',' << g.ensemble_size << ',' << r.rep << ','
          << fmt(r.baseline.ari) << ',' << fmt(r.baseline.nmi) << ',' << fmt(r.baseline.fscore)
          << ',' << fmt(r.baseline.accuracy) << ',' << fmt(r.baseline.purity) << ','
          << fmt(r.enhanced.ari) << ',' << fmt(r.enhanced.nmi) << ',' << fmt(r.enhanced.fscore)
          << ',' << fmt(r.enhanced.accuracy) << ',' << fmt(r.enhanced.purity) << ','
          << (r.converged ? 1 : 0) << ',' << r.iters << '\n';
}

inline void write_summary_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "alpha,lambda,ensemble_size,side,"
         "ari_mean,ari_std,nmi_mean,nmi_std,fscore_mean,fscore_std,"
         "accuracy_mean,accuracy_std,purity_mean,purity_std\n";
  auto fmt = detail::format_double;
  auto row = [&](const GridPoint& g, const char* side, const MetricsAggregate& a) {
    out << fmt(g.alpha) << ',' << fmt(g.lambda) << ',' << g.ensemble_size << ',' << side << ','
        << fmt(a.mean.ari) << ',' << fmt(a.stdev.ari) << ',' << fmt(a.mean.nmi) << ','
        << fmt(a.stdev.nmi) << ',' << fmt(a.mean.fscore) << ',' << fmt(a.stdev.fscore) << ','
        << fmt(a.mean.accuracy) << ',' << fmt(a.stdev.accuracy) << ',' << fmt(a.mean.purity)
        << ',' << fmt(a.stdev.purity) << '\n';
  };
  for (const GridPoint& g : report.grid) {
    row(g, "baseline", g.baseline);
    row(g, "enhanced", g.enhanced);
  }
}

inline void save_pool_meta_json(const PoolResult& pool, std::uint64_t seed, int n,
                                const std::string& path) {
  json j;
  j["seed"] = seed;
  j["n"] = n;
  j["pool_size"] = pool.ensemble.size();
  j["requested_k"] = pool.requested_k;
  json achieved = json::array();
  for (const Partition& p : pool.ensemble.members) achieved.push_back(p.num_clusters);
  j["num_clusters"] = std::move(achieved);
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << j.dump(2) << '\n';
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  Dataset data = load_dataset(cfg.dataset_path, cfg.label_mode, cfg.label_file);
  if (cfg.normalize) normalize_minmax(data);
  if (!data.has_labels())
    throw ConfigError("config: experiment scoring needs ground-truth labels");
  const Partition truth = data.truth();
  const int k = cfg.k > 0 ? cfg.k : truth.num_clusters;

  const SplitRng root(cfg.seed);
  const PoolResult pool = generate_pool(data, cfg.pool_size, cfg.seed);

  const std::vector<double> alphas =
      cfg.sweep_alpha.empty() ? std::vector<double>{cfg.alpha} : cfg.sweep_alpha;
  const std::vector<double> lambdas =
      cfg.sweep_lambda.empty() ? std::vector<double>{cfg.solver.lambda} : cfg.sweep_lambda;
  const std::vector<int> sizes = cfg.sweep_ensemble_size.empty()
                                     ? std::vector<int>{cfg.ensemble_size}
                                     : cfg.sweep_ensemble_size;

  ExperimentReport report;
  report.dataset_name = data.name;
  report.n = data.num_samples();
  report.d = data.num_features();
  report.classes = truth.num_clusters;
  report.k = k;
  for (int m : sizes)
    for (double a : alphas)
      for (double l : lambdas) {
        GridPoint g;
        g.alpha = a;
        g.lambda = l;
        g.ensemble_size = m;
        g.repetitions.resize(cfg.repetitions);
        report.grid.push_back(std::move(g));
      }

  struct Task {
    int grid_index;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t gi = 0; gi < report.grid.size(); ++gi)
    for (int r = 0; r < cfg.repetitions; ++r) tasks.push_back({static_cast<int>(gi), r});

  // Views and diagnostics are captured from the first grid point's first
  // repetition only; its task is the only writer of `captured`.
  PipelineOutput captured;
  const bool want_capture = cfg.dump_views || cfg.dump_diagnostics;

  std::atomic<std::size_t> next_task{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t t = next_task.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task task = tasks[t];
      GridPoint& g = report.grid[task.grid_index];
      try {
        const std::uint64_t rep_seed =
            root.derive(kStreamRepetition, static_cast<std::uint64_t>(task.rep)).next_u64();
        const Ensemble ensemble = sample_ensemble(pool.ensemble, g.ensemble_size, rep_seed);
        const auto start = std::chrono::steady_clock::now();
        PipelineOutput out = run_pipeline_once(ensemble, cfg, g.alpha, g.lambda, k);
        const auto stop = std::chrono::steady_clock::now();

        RepetitionResult& rr = g.repetitions[task.rep];
        rr.rep = task.rep;
        rr.baseline = compute_metrics(out.baseline_part, truth);
        rr.enhanced = compute_metrics(out.enhanced_part, truth);
        rr.converged = out.converged;
        rr.iters = out.iters;
        rr.n_prime = out.n_prime;
        rr.solve_seconds = std::chrono::duration<double>(stop - start).count();
        if (want_capture && task.grid_index == 0 && task.rep == 0) captured = std::move(out);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  int workers = cfg.workers > 0 ? cfg.workers
                                : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (std::thread& th : threads) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (GridPoint& g : report.grid) {
    g.baseline = detail::aggregate(g.repetitions, false);
    g.enhanced = detail::aggregate(g.repetitions, true);
  }

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    write_report_json(cfg, report, pool, (dir / "report.json").string());
    write_runs_csv(report, (dir / "runs.csv").string());
    write_summary_csv(report, (dir / "summary.csv").string());
    save_pool_meta_json(pool, cfg.seed, report.n, (dir / "pool_meta.json").string());
    if (cfg.dump_views) {
      emit_matrix_views({{"input", captured.input.values}, {"enhanced", captured.enhanced.values}},
                        truth, cfg.out_dir);
      if (cfg.ca_kind == CaKind::Pts)
        save_microclusters_csv(captured.map, (dir / "microclusters.csv").string());
    }
    if (cfg.dump_diagnostics && !captured.history.empty())
      save_diagnostics_csv(captured.history, (dir / "diagnostics.csv").string());
  }
  return report;
}

}  // namespace cams
