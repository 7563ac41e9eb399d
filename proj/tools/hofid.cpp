// hofid: ground-state fidelity sweeps and finite-size scaling for the
// spin-1/2 J1-J2 Heisenberg ring.
//
//   hofid sweep   --sites 14,16 --lambda-min 0 --lambda-max 0.5 --lambda-step 0.01 --out sweep.csv
//   hofid peaks   --in sweep.csv --quantity chi3_abs --out peaks.json
//   hofid scale   --in peaks.json --out scaling.json
//   hofid oracle  --sites 8 --lambda 0.2
//   hofid plot    --in sweep.csv --quantity chi3_abs --out chi3.svg
//
// Exit codes: 0 success (possibly with flagged rows), 1 usage or input error,
// 2 oracle tolerance exceeded.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hofid/fidelity.hpp"
#include "hofid/io.hpp"
#include "hofid/oracle.hpp"
#include "hofid/parallel.hpp"
#include "hofid/scaling.hpp"

#ifndef HOFID_VERSION
#define HOFID_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitTolerance = 2;

std::string command_line(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json manifest_base(const std::string& command, const std::string& invocation, int workers) {
  return {{"tool", "hofid"},
          {"version", HOFID_VERSION},
          {"command", command},
          {"invocation", invocation},
          {"created_utc", utc_now()},
          {"workers", workers},
          {"model",
           {{"hamiltonian", "sum_j s_j.s_{j+1} + lambda s_j.s_{j+2}"},
            {"boundary", "periodic"},
            {"sector", "Sz=0 (n_up = L/2)"},
            {"symmetry_reduction", "none"}}}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

void write_manifest(const std::string& output_path, const json& manifest) {
  write_text(output_path + ".manifest.json", manifest.dump(2) + "\n");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<hofid::SweepRow> load_sweep(const std::string& path) {
  std::istringstream in(read_text(path));
  return hofid::read_sweep_csv(in);
}

hofid::LanczosOptions solver_options(double tolerance, std::uint64_t seed, int max_basis, int max_iter) {
  hofid::LanczosOptions o;
  o.tolerance = tolerance;
  o.seed = seed;
  o.max_basis = max_basis;
  o.max_iter = max_iter;
  return o;
}

json solver_json(const hofid::LanczosOptions& o) {
  return {{"method", "thick-restart Lanczos, full reorthogonalization"},
          {"tolerance", o.tolerance},
          {"excited_tolerance", o.excited_tolerance},
          {"seed", o.seed},
          {"max_basis", o.max_basis},
          {"max_iter", o.max_iter}};
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::vector<int> sites{14, 16, 18, 20};
  double lambda_min = 0.0;
  double lambda_max = 0.5;
  double lambda_step = 0.005;
  double delta = 1e-3;
  std::string method = "stencil";
  std::uint64_t seed = 1;
  double tolerance = 1e-12;
  int max_basis = 120;
  int max_iter = 4000;
  bool no_warm_start = false;
  bool no_richardson = false;
  std::string out = "sweep.csv";
  bool quiet = false;
};

int run_sweep(const SweepArgs& a, const std::string& invocation) {
  hofid::SweepOptions opts;
  opts.sizes = a.sites;
  opts.lambda_min = a.lambda_min;
  opts.lambda_max = a.lambda_max;
  opts.lambda_step = a.lambda_step;
  opts.step.h = a.delta;
  opts.step.richardson = !a.no_richardson;
  opts.warm_start = !a.no_warm_start;
  opts.solver = solver_options(a.tolerance, a.seed, a.max_basis, a.max_iter);
  if (a.method == "stencil") {
    opts.method = hofid::MethodSelection::stencil;
  } else if (a.method == "derivative") {
    opts.method = hofid::MethodSelection::derivative;
  } else if (a.method == "both") {
    opts.method = hofid::MethodSelection::both;
  } else {
    throw UsageError("--method must be stencil, derivative or both");
  }
  try {
    hofid::validate_sweep(opts);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto rows = hofid::sweep(opts, [&](const hofid::SweepRow& r) {
    if (!a.quiet) {
      std::fprintf(stderr, "L=%d lambda=%.6f chi2=%.6g chi3=%.6g flag=%s (%.2fs)\n", r.sites, r.lambda, r.chi2,
                   r.chi3, r.flag.c_str(), r.seconds);
    }
  });

  std::ostringstream csv;
  hofid::write_sweep_csv(csv, rows);
  write_text(a.out, csv.str());

  json points = json::array();
  for (const auto& r : rows) {
    points.push_back({{"L", r.sites}, {"lambda", r.lambda}, {"seconds", r.seconds}, {"solves", r.solves},
                      {"flag", r.flag}});
  }
  json manifest = manifest_base("sweep", invocation, hofid::worker_count());
  manifest["parameters"] = {{"sites", a.sites},
                            {"lambda_min", a.lambda_min},
                            {"lambda_max", a.lambda_max},
                            {"lambda_step", a.lambda_step},
                            {"delta", a.delta},
                            {"richardson", !a.no_richardson},
                            {"richardson_levels", {"h", "h/2", "h/4"}},
                            {"chi2_step_agreement", opts.step.chi2_agreement},
                            {"chi3_step_agreement", opts.step.chi3_agreement},
                            {"method", a.method},
                            {"warm_start", !a.no_warm_start},
                            {"warm_start_policy",
                             "each grid point solved cold from the seed (two eigenpairs); stencil points "
                             "start from an interpolation of already-converged stencil vectors"},
                            {"solver", solver_json(opts.solver)}};
  manifest["output"] = {{"path", a.out}, {"rows", rows.size()}, {"header", hofid::kSweepHeader}};
  manifest["points"] = points;
  write_manifest(a.out, manifest);
  return kExitOk;
}

// ---------------------------------------------------------------- peaks

struct PeaksArgs {
  std::string in;
  std::string quantity = "chi3_abs";
  double prominence = 0.02;
  std::string out = "peaks.json";
};

int run_peaks(const PeaksArgs& a, const std::string& invocation) {
  if (!hofid::is_sweep_quantity(a.quantity)) throw UsageError("unknown quantity '" + a.quantity + "'");
  const auto rows = load_sweep(a.in);
  json peaks = json::array();
  json per_size = json::array();
  for (const auto& [L, col] : hofid::columns_by_size(rows, a.quantity)) {
    if (col.values.size() < 5) {
      per_size.push_back({{"L", L}, {"status", "too few finite points"}});
      continue;
    }
    const double threshold = hofid::relative_prominence(col.values, a.prominence);
    const auto all = hofid::find_peaks(col.lambdas, col.values, threshold);
    const auto best = hofid::find_peak(col.lambdas, col.values, threshold);
    per_size.push_back({{"L", L}, {"qualifying_peaks", all.size()}, {"threshold", threshold}});
    if (best) {
      hofid::PeakRecord p = *best;
      p.sites = L;
      peaks.push_back(hofid::to_json(p));
    }
  }
  write_text(a.out, peaks.dump(2) + "\n");
  json manifest = manifest_base("peaks", invocation, hofid::worker_count());
  manifest["parameters"] = {{"in", a.in}, {"quantity", a.quantity}, {"relative_prominence", a.prominence}};
  manifest["sizes"] = per_size;
  write_manifest(a.out, manifest);
  std::cout << peaks.size() << " peak(s) written to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- scale

struct ScaleArgs {
  std::string in;
  std::string variable = "inv_L";
  std::string out = "scaling.json";
};

int run_scale(const ScaleArgs& a, const std::string& invocation) {
  hofid::ScalingVariable primary;
  try {
    primary = hofid::parse_scaling_variable(a.variable);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  json input;
  try {
    input = json::parse(read_text(a.in));
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("malformed peaks JSON: ") + e.what());
  }
  if (!input.is_array()) throw UsageError("peaks JSON must be an array of peak records");
  std::vector<hofid::PeakRecord> peaks;
  for (const auto& item : input) peaks.push_back(hofid::peak_from_json(item));

  json fits = json::array();
  for (auto variable : {hofid::ScalingVariable::inv_L, hofid::ScalingVariable::inv_L2}) {
    json fit = hofid::to_json(hofid::extrapolate(peaks, variable));
    fit["primary"] = variable == primary;
    fits.push_back(fit);
  }
  json result = {{"primary", hofid::to_string(primary)}, {"fits", fits}};
  write_text(a.out, result.dump(2) + "\n");
  json manifest = manifest_base("scale", invocation, hofid::worker_count());
  manifest["parameters"] = {{"in", a.in}, {"primary_variable", hofid::to_string(primary)}};
  write_manifest(a.out, manifest);
  for (const auto& fit : fits) {
    std::printf("%-7s lambda_c = %.6f +- %.6f  slope = %.6f  r^2 = %.5f%s\n",
                fit["variable"].get<std::string>().c_str(), fit["lambda_c"].get<double>(),
                fit["intercept_std_error"].get<double>(), fit["slope"].get<double>(),
                fit["r_squared"].get<double>(), fit["primary"].get<bool>() ? "  (primary)" : "");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
  int sites = 8;
  double lambda = 0.2;
  double delta = 1e-3;
  double d3e_step = 5e-3;
  double tol_chi2 = 5e-3;
  double tol_chi3 = 1e-2;
  double tol_d3e = 5e-3;
  bool allow_l14 = false;
  std::uint64_t seed = 1;
  std::string out;
};

double relative_deviation(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

int run_oracle(const OracleArgs& a, const std::string& invocation) {
  const int ceiling = a.allow_l14 ? hofid::kOracleSitesExtended : hofid::kOracleSites;
  if (a.sites % 2 != 0 || a.sites < 4 || a.sites > ceiling) {
    throw UsageError("oracle needs an even L in [4, " + std::to_string(ceiling) + "], got " +
                     std::to_string(a.sites) + (a.allow_l14 ? "" : " (use --allow-l14 for L = 14)"));
  }
  const auto basis = hofid::zero_magnetization_basis(a.sites);
  const auto exact = hofid::exact_point(basis, a.lambda, a.allow_l14);

  hofid::LanczosOptions solver;
  solver.seed = a.seed;
  hofid::ChainGroundStates states(a.sites, solver);
  hofid::StepControl control;
  control.h = a.delta;
  const auto stencil = hofid::chi_from_stencil(states.solver(), a.lambda, control);
  const auto derivative = hofid::chi_from_derivatives(states.solver(), a.lambda, control);
  const double d3e_fd = hofid::d3E_finite_difference(states.solver(), a.lambda, a.d3e_step);

  struct Line {
    std::string quantity, route;
    double value, reference, tolerance;
  };
  const std::vector<Line> lines = {
      {"chi2", "stencil", stencil.chi2, exact.chi2, a.tol_chi2},
      {"chi2", "derivative", derivative.chi2, exact.chi2, a.tol_chi2},
      {"chi3", "stencil", stencil.chi3, exact.chi3, a.tol_chi3},
      {"chi3", "derivative", derivative.chi3, exact.chi3, a.tol_chi3},
      {"d3E", "finite_difference", d3e_fd, exact.d3E, a.tol_d3e},
  };

  std::printf("oracle L=%d lambda=%.6g delta=%.3g (E0=%.12f, gap=%.6f)\n", a.sites, a.lambda, a.delta,
              exact.spectrum.energies(0), exact.spectrum.energies(1) - exact.spectrum.energies(0));
  std::printf("%-6s %-18s %20s %20s %12s %10s\n", "qty", "route", "value", "perturbative", "rel.dev", "status");
  bool all_ok = true;
  json report_lines = json::array();
  for (const auto& l : lines) {
    const double dev = relative_deviation(l.value, l.reference);
    const bool ok = dev <= l.tolerance;
    all_ok = all_ok && ok;
    std::printf("%-6s %-18s %20.12g %20.12g %12.3e %10s\n", l.quantity.c_str(), l.route.c_str(), l.value,
                l.reference, dev, ok ? "ok" : "EXCEEDED");
    report_lines.push_back({{"quantity", l.quantity},
                            {"route", l.route},
                            {"value", l.value},
                            {"perturbative", l.reference},
                            {"relative_deviation", dev},
                            {"tolerance", l.tolerance},
                            {"ok", ok}});
  }

  if (!a.out.empty()) {
    json report = {{"L", a.sites},
                   {"lambda", a.lambda},
                   {"delta", a.delta},
                   {"d3e_step", a.d3e_step},
                   {"energy", exact.spectrum.energies(0)},
                   {"gap", exact.spectrum.energies(1) - exact.spectrum.energies(0)},
                   {"stencil_linear_coeff", stencil.linear_coeff},
                   {"derivative_norm_identity_1", derivative.norm_identity_1},
                   {"derivative_norm_identity_2", derivative.norm_identity_2},
                   {"lines", report_lines},
                   {"all_within_tolerance", all_ok}};
    write_text(a.out, report.dump(2) + "\n");
    json manifest = manifest_base("oracle", invocation, hofid::worker_count());
    manifest["parameters"] = {{"sites", a.sites},         {"lambda", a.lambda},       {"delta", a.delta},
                              {"d3e_step", a.d3e_step},   {"tol_chi2", a.tol_chi2},   {"tol_chi3", a.tol_chi3},
                              {"tol_d3e", a.tol_d3e},     {"allow_l14", a.allow_l14}, {"solver", solver_json(solver)}};
    write_manifest(a.out, manifest);
  }
  return all_ok ? kExitOk : kExitTolerance;
}

// ---------------------------------------------------------------- plot

struct PlotArgs {
  std::string in;
  std::vector<std::string> quantities{"chi3_abs"};
  std::string variable;
  std::string out = "plot.svg";
};

std::string suffixed(const std::string& path, const std::string& suffix) {
  const fs::path p(path);
  return (p.parent_path() / (p.stem().string() + "_" + suffix + p.extension().string())).string();
}

int run_plot(const PlotArgs& a, const std::string& invocation) {
  const std::string text = read_text(a.in);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw UsageError("input '" + a.in + "' is empty");

  std::vector<std::pair<std::string, std::string>> charts;  // (path, svg)
  if (text[first] == '{' || text[first] == '[') {
    json input;
    try {
      input = json::parse(text);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("malformed JSON: ") + e.what());
    }
    if (!input.is_object() || !input.contains("fits")) throw UsageError("JSON input must be a scaling result");
    const std::string wanted = a.variable.empty() ? input.value("primary", std::string("inv_L")) : a.variable;
    bool found = false;
    for (const auto& fit : input["fits"]) {
      if (fit.at("variable").get<std::string>() != wanted) continue;
      hofid::ScalingResult r;
      r.variable = hofid::parse_scaling_variable(wanted);
      r.slope = fit.at("slope").get<double>();
      r.lambda_c = fit.at("lambda_c").get<double>();
      r.intercept_std_error = fit.at("intercept_std_error").get<double>();
      r.r_squared = fit.at("r_squared").get<double>();
      for (const auto& p : fit.at("points")) r.points.push_back(hofid::peak_from_json(p));
      charts.emplace_back(a.out, hofid::render_scaling_svg(r));
      found = true;
    }
    if (!found) throw UsageError("no fit for variable '" + wanted + "' in scaling result");
  } else {
    std::istringstream in(text);
    const auto rows = hofid::read_sweep_csv(in);
    if (rows.empty()) throw UsageError("sweep CSV '" + a.in + "' has no rows");
    for (const auto& q : a.quantities) {
      if (!hofid::is_sweep_quantity(q)) throw UsageError("unknown quantity '" + q + "'");
    }
    for (const auto& q : a.quantities) {
      const std::string path = a.quantities.size() == 1 ? a.out : suffixed(a.out, q);
      charts.emplace_back(path, hofid::render_sweep_svg(rows, q));
    }
  }
  for (const auto& [path, svg] : charts) {
    write_text(path, svg);
    json manifest = manifest_base("plot", invocation, hofid::worker_count());
    manifest["parameters"] = {{"in", a.in}, {"quantities", a.quantities}, {"variable", a.variable}};
    write_manifest(path, manifest);
    std::cout << "wrote " << path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground-state fidelity, fidelity susceptibility and third-order fidelity of the J1-J2 Heisenberg ring"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HOFID_VERSION);
  int workers = hofid::default_worker_count();
  app.add_option("--workers", workers, "Worker threads (default: $HOFID_WORKERS or hardware concurrency)")
      ->check(CLI::PositiveNumber);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Compute chi2/chi3 on a lambda grid for several chain lengths");
  sweep->add_option("--sites", sweep_args.sites, "Comma-separated even chain lengths")->delimiter(',');
  sweep->add_option("--lambda-min", sweep_args.lambda_min, "First grid point");
  sweep->add_option("--lambda-max", sweep_args.lambda_max, "Last grid point (inclusive)");
  sweep->add_option("--lambda-step", sweep_args.lambda_step, "Grid spacing");
  sweep->add_option("--delta", sweep_args.delta, "Base stencil step h");
  sweep->add_option("--method", sweep_args.method, "stencil | derivative | both")
      ->check(CLI::IsMember({"stencil", "derivative", "both"}));
  sweep->add_option("--seed", sweep_args.seed, "Lanczos start-vector seed");
  sweep->add_option("--tolerance", sweep_args.tolerance, "Lanczos residual tolerance");
  sweep->add_option("--max-basis", sweep_args.max_basis, "Krylov vectors kept before a thick restart");
  sweep->add_option("--max-iter", sweep_args.max_iter, "Matvec budget per solve");
  sweep->add_flag("--no-warm-start", sweep_args.no_warm_start, "Solve every stencil point from the random seed");
  sweep->add_flag("--no-richardson", sweep_args.no_richardson, "Skip the h/2 step-refinement check");
  sweep->add_option("--out", sweep_args.out, "Output CSV path");
  sweep->add_flag("--quiet", sweep_args.quiet, "No per-point progress on stderr");

  PeaksArgs peaks_args;
  auto* peaks = app.add_subcommand("peaks", "Locate the peak of a sweep column for each chain length");
  peaks->add_option("--in", peaks_args.in, "Sweep CSV")->required();
  peaks->add_option("--quantity", peaks_args.quantity, "Column to search (default chi3_abs)");
  peaks->add_option("--prominence", peaks_args.prominence, "Minimum prominence as a fraction of the column range");
  peaks->add_option("--out", peaks_args.out, "Output JSON path");

  ScaleArgs scale_args;
  auto* scale = app.add_subcommand("scale", "Extrapolate peak positions linearly in 1/L and 1/L^2");
  scale->add_option("--in", scale_args.in, "Peaks JSON")->required();
  scale->add_option("--variable", scale_args.variable, "Primary scaling variable: inv_L | inv_L2");
  scale->add_option("--out", scale_args.out, "Output JSON path");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Compare stencil, derivative and sum-over-states values at small L");
  oracle->add_option("--sites", oracle_args.sites, "Even chain length (<= 12, or 14 with --allow-l14)");
  oracle->add_option("--lambda", oracle_args.lambda, "Coupling ratio");
  oracle->add_option("--delta", oracle_args.delta, "Base stencil step h");
  oracle->add_option("--d3e-step", oracle_args.d3e_step, "Step of the energy third difference");
  oracle->add_option("--tol-chi2", oracle_args.tol_chi2, "Relative tolerance on chi2");
  oracle->add_option("--tol-chi3", oracle_args.tol_chi3, "Relative tolerance on chi3");
  oracle->add_option("--tol-d3e", oracle_args.tol_d3e, "Relative tolerance on d3E/dlambda3");
  oracle->add_option("--seed", oracle_args.seed, "Lanczos start-vector seed");
  oracle->add_flag("--allow-l14", oracle_args.allow_l14, "Permit L = 14 (dense dim 3432)");
  oracle->add_option("--out", oracle_args.out, "Optional JSON report path");

  PlotArgs plot_args;
  auto* plot = app.add_subcommand("plot", "Render a sweep column or a scaling fit as SVG");
  plot->add_option("--in", plot_args.in, "Sweep CSV or scaling JSON")->required();
  plot->add_option("--quantity", plot_args.quantities, "Sweep column(s) to plot")->delimiter(',');
  plot->add_option("--variable", plot_args.variable, "Scaling fit to draw (default: the primary one)");
  plot->add_option("--out", plot_args.out, "Output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string invocation = command_line(argc, argv);
  try {
    hofid::set_worker_count(workers);
    if (*sweep) return run_sweep(sweep_args, invocation);
    if (*peaks) return run_peaks(peaks_args, invocation);
    if (*scale) return run_scale(scale_args, invocation);
    if (*oracle) return run_oracle(oracle_args, invocation);
    if (*plot) return run_plot(plot_args, invocation);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const hofid::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
