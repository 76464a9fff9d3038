#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "stpca/analysis.hpp"
#include "stpca/core.hpp"
#include "stpca/embedding.hpp"
#include "stpca/error.hpp"
#include "stpca/io.hpp"
#include "stpca/parallel.hpp"
#include "stpca/synth.hpp"

namespace stpca::cli {
namespace {

namespace fs = std::filesystem;

// Observation noise gets its own stream so that changing --noise never
// perturbs the simulated trajectory.
constexpr std::uint64_t kNoiseStream = 0x9e3779b97f4a7c15ULL;

bool is_stdio(const std::string& path) { return path.empty() || path == "-"; }

SeriesMatrix read_series(const std::string& path) {
  if (is_stdio(path)) return read_series_csv(std::cin);
  return load_series_csv(path);
}

void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (is_stdio(path)) {
    body(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path + " for writing");
  body(file);
  if (!file) throw IoError("write to " + path + " failed");
}

fs::path output_dir(const std::string& path) {
  fs::path dir(path);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create output directory " + path);
  return dir;
}

std::vector<std::string> row_labels(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> names;
  for (Eigen::Index i = 1; i <= count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

struct EmbeddingFlags {
  int L = 20;
  double lambda = 0.95;
  bool scale = false;
  bool noCenter = false;
  std::string method = "auto";
  double tol = 1e-10;
  int maxIter = 10000;

  void attach(CLI::App* cmd) {
    cmd->add_option("--L", L, "Embedding dimension")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--lambda", lambda, "Hankel weight")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_flag("--scale", scale, "Scale rows to unit sample SD");
    cmd->add_flag("--no-center", noCenter, "Skip row centring");
    cmd->add_option("--method", method, "Eigen solver")
        ->check(CLI::IsMember({"auto", "dense", "lanczos", "power"}))
        ->capture_default_str();
    cmd->add_option("--tol", tol, "Relative residual tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", maxIter, "Operator application budget")->check(CLI::PositiveNumber);
  }
  EmbeddingConfig config() const { return EmbeddingConfig{L, lambda, !noCenter, scale}; }
  EigenOptions eigen() const {
    static const std::map<std::string, EigenMethod> methods{{"auto", EigenMethod::kAuto},
                                                            {"dense", EigenMethod::kDense},
                                                            {"lanczos", EigenMethod::kLanczos},
                                                            {"power", EigenMethod::kPower}};
    EigenOptions o;
    o.tol = tol;
    o.maxIter = maxIter;
    o.method = methods.at(method);
    return o;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial-temporal PCA toolkit"};
  app.name("stpca");
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic series matrix");
  std::string model = "lorenz";
  int n = 60, m = 50, sampleEvery = 10, transient = 1000, tauSteps = 0, tauStar = 0;
  double coupling = -1.0, noise = 0.0, dynNoise = -1.0;
  std::uint64_t seed = 0;
  std::string simOut;
  simulate->add_option("--model", model, "lorenz, fold or hopf")
      ->check(CLI::IsMember({"lorenz", "fold", "hopf"}))
      ->capture_default_str();
  simulate->add_option("--n", n, "Variables (lorenz) or nodes (fold/hopf)")->check(CLI::PositiveNumber);
  simulate->add_option("--m", m, "Time points (lorenz)")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--coupling", coupling, "Coupling strength")->check(CLI::NonNegativeNumber);
  simulate->add_option("--sample-every", sampleEvery, "Integrator steps per sample (lorenz)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--transient", transient, "Discarded steps (lorenz)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--tau-steps", tauSteps, "Parameter steps (fold/hopf)")->check(CLI::PositiveNumber);
  simulate->add_option("--tau-star", tauStar, "Tipping step (fold/hopf)")->check(CLI::PositiveNumber);
  simulate->add_option("--dyn-noise", dynNoise, "Dynamical noise (fold/hopf)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--noise", noise, "Observation noise SD")->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", simOut, "Output CSV (default stdout)");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit stPCA to a series matrix");
  EmbeddingFlags fitFlags;
  std::string fitIn, fitOut;
  fitFlags.attach(fit);
  fit->add_option("--in", fitIn, "Series CSV (default stdin)");
  fit->add_option("--out", fitOut, "Directory for W.csv, Z.csv, z_extended.csv, summary.csv");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Sliding-window fluctuation index");
  EmbeddingFlags sweepFlags;
  WindowConfig window;
  std::string sweepIn, sweepOut;
  sweepFlags.attach(sweep);
  sweep->add_option("--window-width", window.width, "Window width")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--stride", window.stride, "Window stride")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--in", sweepIn, "Series CSV (default stdin)");
  sweep->add_option("--out", sweepOut, "Output CSV (default stdout)");

  // detect
  auto* detect = app.add_subcommand("detect", "Flag windows in a fluctuation sweep");
  std::string rule = "mean", detectIn, detectOut;
  FoldChange foldChange;
  detect->add_option("--rule", rule, "mean or fold")->check(CLI::IsMember({"mean", "fold"}))->capture_default_str();
  detect->add_option("--fc", foldChange.factor, "Fold-change factor")->check(CLI::PositiveNumber)->capture_default_str();
  detect->add_option("--baseline", foldChange.baselineLen, "Baseline windows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  detect->add_option("--in", detectIn, "Sweep CSV (default stdin)");
  detect->add_option("--out", detectOut, "Output CSV (default stdout)");

  // pcfd
  auto* pcfdCmd = app.add_subcommand("pcfd", "Principal component Frechet distance of two curves");
  std::string curveA, curveB;
  bool rawDfd = false;
  pcfdCmd->add_option("a", curveA, "First curve CSV")->required();
  pcfdCmd->add_option("b", curveB, "Second curve CSV")->required();
  pcfdCmd->add_flag("--dfd", rawDfd, "Plain discrete Frechet distance, no normalisation");

  // project
  auto* project = app.add_subcommand("project", "Hankel-SVD components of the stPCA latent series");
  EmbeddingFlags projectFlags;
  int rank = 2;
  bool usePca = false;
  std::string projectIn, projectOut;
  projectFlags.attach(project);
  project->add_option("--r", rank, "Number of components")->check(CLI::PositiveNumber)->capture_default_str();
  project->add_flag("--pca", usePca, "PCA baseline scores instead");
  project->add_option("--in", projectIn, "Series CSV (default stdin)");
  project->add_option("--out", projectOut, "Output CSV (default stdout)");

  // decide
  auto* decide = app.add_subcommand("decide", "Discharge decisions for patient records");
  std::string obsPath, boundsPath, eventsPath, decideOut;
  DecisionConfig decision;
  EvaluationOptions evaluation;
  decide->add_option("--obs", obsPath, "subject_id,hour,indicator,value")->required();
  decide->add_option("--bounds", boundsPath, "indicator,lb,ub")->required();
  decide->add_option("--events", eventsPath, "subject_id,discharge_hour,outcome")->required();
  decide->add_option("--items", decision.selectedItems, "Selected indicators (2-5)")->required()->delimiter(',');
  decide->add_option("--wl", decision.wl, "Averaging window")->check(CLI::PositiveNumber)->capture_default_str();
  decide->add_option("--fc", decision.FC, "Fluctuation drop threshold")->check(CLI::PositiveNumber)->capture_default_str();
  decide->add_option("--L", evaluation.embedding.L, "Embedding dimension")->check(CLI::PositiveNumber)->capture_default_str();
  decide->add_option("--lambda", evaluation.embedding.lambda, "Hankel weight")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  decide->add_option("--horizon", evaluation.horizon, "Discharge horizon in hours")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  decide->add_option("--out", decideOut, "Directory for decisions.csv and metrics.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const unsigned threads = configured_threads();

    if (*simulate) {
      SeriesMatrix X = [&] {
        if (model == "lorenz") {
          LorenzConfig cfg;
          cfg.n = n;
          cfg.m = m;
          cfg.sampleEvery = sampleEvery;
          cfg.transientSteps = transient;
          if (coupling >= 0.0) cfg.coupling = coupling;
          cfg.seed = seed;
          return simulate_coupled_lorenz(cfg);
        }
        auto cfg = BifNetConfig::defaults(model == "fold" ? BifurcationKind::kFold : BifurcationKind::kHopf);
        if (simulate->count("--n")) cfg.nodes = n;
        if (tauSteps > 0) cfg.tauSteps = tauSteps;
        if (tauStar > 0) cfg.tauStar = tauStar;
        if (coupling >= 0.0) cfg.coupling = coupling;
        if (dynNoise >= 0.0) cfg.noise = dynNoise;
        cfg.seed = seed;
        auto series = simulate_bifurcation_network(cfg);
        if (!is_stdio(simOut)) out << "tau_star," << series.tauStar << "\n";
        return series.data;
      }();
      X = add_observation_noise(X, NoiseSpec{noise, seed ^ kNoiseStream});
      emit(simOut, out, [&](std::ostream& os) { write_series_csv(os, X); });
      return 0;
    }

    if (*fit) {
      const SeriesMatrix X = read_series(fitIn);
      const StpcaResult r = fit_stpca(X, fitFlags.config(), fitFlags.eigen());
      auto summary = [&](std::ostream& os) {
        os << "alpha," << format_double(r.alpha) << "\n";
        os << "embedding_error," << format_double(r.embeddingError) << "\n";
        os << "iterations," << r.iterations << "\n";
        os << "degenerate," << (r.degenerate ? 1 : 0) << "\n";
        os << "z_extended_length," << r.zExtended.size() << "\n";
      };
      summary(out);
      if (!fitOut.empty()) {
        const fs::path dir = output_dir(fitOut);
        emit((dir / "W.csv").string(), out,
             [&](std::ostream& os) { write_matrix_csv(os, r.W, X.variableNames()); });
        emit((dir / "Z.csv").string(), out, [&](std::ostream& os) {
          write_series_csv(os, SeriesMatrix(r.Z, row_labels("z", r.Z.rows()), X.timeIndex()));
        });
        emit((dir / "z_extended.csv").string(), out,
             [&](std::ostream& os) { write_matrix_csv(os, r.zExtended, {"z"}); });
        emit((dir / "summary.csv").string(), out, summary);
      }
      return 0;
    }

    if (*sweep) {
      RunConfig run;
      run.embedding = sweepFlags.config();
      run.window = window;
      run.validate();
      const SeriesMatrix X = read_series(sweepIn);
      SweepOptions options;
      options.eigen = sweepFlags.eigen();
      options.threads = threads;
      const FluctuationSweep s = fluctuation_sweep(X, run.embedding, window.width, window.stride, options);
      emit(sweepOut, out, [&](std::ostream& os) { write_sweep_csv(os, s); });
      return 0;
    }

    if (*detect) {
      RunConfig run;
      run.rule = rule == "fold" ? RuleKind::kFoldChange : RuleKind::kMeanExceed;
      run.foldChange = foldChange;
      run.validate();
      const FluctuationSweep s = is_stdio(detectIn) ? read_sweep_csv(std::cin) : load_sweep_csv(detectIn);
      const auto flagged = detect_tipping(s, run.tippingRule());
      emit(detectOut, out, [&](std::ostream& os) {
        os << "window,position,fl\n";
        for (std::size_t k : flagged)
          os << k << "," << format_double(s.positions[k]) << "," << format_double(s.fl[k]) << "\n";
      });
      return 0;
    }

    if (*pcfdCmd) {
      const Curve a = load_curve_csv(curveA), b = load_curve_csv(curveB);
      out << format_double(rawDfd ? discrete_frechet(a, b) : pcfd(a, b)) << "\n";
      return 0;
    }

    if (*project) {
      const SeriesMatrix X = read_series(projectIn);
      ProjectionSet p;
      if (usePca) {
        p = pca_baseline(X, rank);
      } else {
        const StpcaResult r = fit_stpca(X, projectFlags.config(), projectFlags.eigen());
        p = hankel_svd_projections(hankel_from_series(r.zExtended, projectFlags.L), rank);
      }
      emit(projectOut, out, [&](std::ostream& os) { write_matrix_csv(os, p.components, row_labels("comp", rank)); });
      if (!is_stdio(projectOut)) {
        out << "component,singular_value,proportion\n";
        for (int k = 0; k < rank; ++k)
          out << k + 1 << "," << format_double(p.singularValues(k)) << ","
              << format_double(p.varianceProportions(k)) << "\n";
      }
      return 0;
    }

    if (*decide) {
      RunConfig run;
      run.embedding = evaluation.embedding;
      run.window.width = std::max(evaluation.embedding.L, decision.wl);
      run.decision = decision;
      run.inputs = {obsPath, boundsPath, eventsPath};
      run.output = decideOut;
      run.validate();
      const PatientLoadResult loaded = load_patient_records(obsPath, boundsPath, eventsPath);
      for (const auto& d : loaded.dropped) err << "dropped " << d.subjectId << ": " << d.reason << "\n";
      evaluation.threads = threads;
      const auto evaluations = evaluate_patients(loaded.records, decision, evaluation);
      const fs::path dir = output_dir(decideOut);
      emit((dir / "decisions.csv").string(), out, [&](std::ostream& os) { write_decisions_csv(os, evaluations); });
      emit((dir / "metrics.csv").string(), out, [&](std::ostream& os) { write_metrics_csv(os, evaluations); });
      err << loaded.records.size() << " subjects evaluated, " << loaded.dropped.size() << " dropped\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace stpca::cli
