#include "otselect/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "otselect/errors.hpp"
#include "otselect/features.hpp"
#include "otselect/loopsim.hpp"
#include "otselect/methods.hpp"
#include "otselect/metrics.hpp"
#include "otselect/report_json.hpp"

namespace otselect::cli {
namespace {

struct ProjectArgs {
  std::string in, out;
  std::size_t d_out = 1024;
  std::optional<double> sparsity;
  std::uint64_t seed = 0;
};

struct SelectArgs {
  std::string train, val, out, method = "evoselect";
  bool normalize = false;
  MethodConfig cfg;
};

struct ScoreArgs {
  std::string sub, train, selection, val, out, label = "subset";
  bool normalize = false;
  double epsilon = default_report_sinkhorn().epsilon;
};

struct SimulateArgs {
  std::string config, out, csv;
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("write failed for " + path);
}

FeatureMatrix load_unit_features(const std::string& path, bool normalize) {
  RawFeatureMatrix raw = read_features(path);
  if (normalize) return normalize_rows(raw);
  try {
    return FeatureMatrix::from_unit_rows(std::move(raw.values), kUnitNormTolerance, std::move(raw.ids));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path + ": " + e.what() + " (pass --normalize or run 'project' first)");
  }
}

int cmd_project(const ProjectArgs& a, std::ostream& out) {
  const RawFeatureMatrix raw = read_features(a.in);
  ProjectionSpec spec = ProjectionSpec::with_defaults(raw.d_in(), a.d_out, a.seed);
  if (a.sparsity) spec.sparsity = *a.sparsity;
  const FeatureMatrix projected = project(raw, spec);
  if (a.out.empty()) throw InvalidArgument("--out is required for project");
  write_evf(projected, a.out);
  out << "wrote " << projected.n() << " x " << projected.d() << " features to " << a.out << "\n";
  return kOk;
}

int cmd_select(SelectArgs a, std::ostream& out) {
  if (!is_known_method(a.method)) throw UnknownMethod("unknown method '" + a.method + "'");
  if (!(a.cfg.rho > 0.0 && a.cfg.rho <= 1.0)) throw InvalidArgument("--rho must lie in (0, 1]");
  const FeatureMatrix train = load_unit_features(a.train, a.normalize);
  const FeatureMatrix val = load_unit_features(a.val, a.normalize);
  const SelectionResult r = run_method(a.method, train, val, a.cfg);
  emit(to_json(r), a.out, out);
  return kOk;
}

std::vector<std::size_t> selection_indices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    return j.at("selected").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": not a selection result: " + e.what());
  }
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const FeatureMatrix val = load_unit_features(a.val, a.normalize);
  FeatureMatrix sub;
  if (!a.sub.empty()) {
    sub = load_unit_features(a.sub, a.normalize);
  } else if (!a.train.empty() && !a.selection.empty()) {
    const FeatureMatrix train = load_unit_features(a.train, a.normalize);
    const auto idx = selection_indices(a.selection);
    for (std::size_t i : idx)
      if (i >= train.n()) throw InvalidArgument("selection index " + std::to_string(i) + " out of range");
    sub = train.take(idx);
  } else {
    throw InvalidArgument("score needs --sub, or --train together with --selection");
  }
  SinkhornParams p = default_report_sinkhorn();
  p.epsilon = a.epsilon;
  emit(to_json(score_subset(a.label, sub, val, p)), a.out, out);
  return kOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const LoopConfig cfg = load_loop_config(a.config);
  const LoopReport report = run_loop(cfg);
  emit(to_json(report), a.out, out);
  std::string csv_path = a.csv;
  if (csv_path.empty() && !a.out.empty() && a.out != "-") {
    std::filesystem::path p(a.out);
    csv_path = p.replace_extension(".csv").string();
  }
  if (!csv_path.empty()) emit(to_csv(report), csv_path, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Target-aligned, diversity-aware data selection"};
  app.require_subcommand(1);

  ProjectArgs pa;
  auto* project = app.add_subcommand("project", "Sparse random projection + row normalization to EVF");
  project->add_option("--in", pa.in, "Raw features (CSV or EVF)")->required();
  project->add_option("--out", pa.out, "Output EVF path")->required();
  project->add_option("--d-out", pa.d_out, "Projected dimension")->check(CLI::PositiveNumber);
  project->add_option("--sparsity", pa.sparsity, "Nonzero fraction (default 1/sqrt(d_out))");
  project->add_option("--seed", pa.seed, "Projection seed");

  SelectArgs sa;
  auto* select = app.add_subcommand("select", "Select a subset of training examples");
  select->add_option("--train", sa.train)->required();
  select->add_option("--val", sa.val)->required();
  select->add_option("--out", sa.out, "Output JSON (default stdout)");
  select->add_option("--method", sa.method, "evoselect|random|attribution|diversity|attrdiv|tsds");
  select->add_option("--rho", sa.cfg.rho, "Selection ratio in (0, 1]");
  select->add_option("--seed", sa.cfg.seed);
  select->add_option("--steps", sa.cfg.evo.steps);
  select->add_option("--lr", sa.cfg.evo.lr);
  select->add_option("--epsilon", sa.cfg.evo.epsilon);
  select->add_option("--tol", sa.cfg.evo.sinkhorn.tol, "Sinkhorn marginal tolerance");
  select->add_option("--cluster-ratio", sa.cfg.cluster_ratio);
  select->add_option("--sigma", sa.cfg.tsds.sigma);
  select->add_option("--alpha", sa.cfg.tsds.alpha);
  select->add_option("--c-scale", sa.cfg.tsds.c_scale);
  select->add_option("--max-k", sa.cfg.tsds.max_k);
  select->add_option("--kde-k", sa.cfg.tsds.kde_k);
  select->add_flag("--normalize", sa.normalize, "Normalize rows instead of requiring unit norm");

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Vendi / attribution / OT report for a subset");
  score->add_option("--sub", sc.sub, "Subset features");
  score->add_option("--train", sc.train, "Training features (with --selection)");
  score->add_option("--selection", sc.selection, "Selection JSON from 'select'");
  score->add_option("--val", sc.val)->required();
  score->add_option("--out", sc.out, "Output JSON (default stdout)");
  score->add_option("--method", sc.label, "Label recorded in the report");
  score->add_option("--epsilon", sc.epsilon, "Sinkhorn regularization");
  score->add_flag("--normalize", sc.normalize);

  SimulateArgs si;
  auto* simulate = app.add_subcommand("simulate", "Run the generation-selection loop simulator");
  simulate->add_option("--config", si.config)->required();
  simulate->add_option("--out", si.out, "Report JSON (default stdout)");
  simulate->add_option("--csv", si.csv, "Per-iteration CSV (default: --out with .csv)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kIoOrValidation;
  }

  try {
    if (*project) return cmd_project(pa, out);
    if (*select) return cmd_select(sa, out);
    if (*score) return cmd_score(sc, out);
    if (*simulate) return cmd_simulate(si, out);
  } catch (const UnknownMethod& e) {
    err << "error: " << e.what() << "\n";
    return kUnknownMethod;
  } catch (const InfeasibleBudget& e) {
    err << "error: " << e.what() << "\n";
    return kInfeasibleBudget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoOrValidation;
  }
  return kIoOrValidation;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace otselect::cli
