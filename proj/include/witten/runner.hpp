#pragma once

#include <filesystem>

#include "witten/io.hpp"
#include "witten/ssf.hpp"

namespace witten {

struct RunContext {
  json config;
  std::filesystem::path config_dir;
  std::filesystem::path out_dir;
  int threads = 1;
  long seed = 0;

  json report_envelope() const {
    return json{{"config_hash", config_hash(config)}, {"seed", seed}};
  }
};

namespace detail {

// string values are file references (relative to the config), objects inline
inline json resolve_ref(const RunContext& ctx, const json& value) {
  if (value.is_string())
    return load_json_file(ctx.config_dir / value.get<std::string>());
  return value;
}

inline std::vector<double> parse_grid(const json& j) {
  if (j.is_array()) {
    auto g = j.get<std::vector<double>>();
    if (g.size() < 2) throw ValidationError("grid needs >= 2 points");
    return g;
  }
  const double lo = j.at("lo").get<double>();
  const double hi = j.at("hi").get<double>();
  const int points = j.at("points").get<int>();
  if (!(lo < hi) || points < 2) throw ValidationError("invalid grid spec");
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k)
    g[k] = lo + (hi - lo) * k / (points - 1.0);
  return g;
}

inline Complex parse_complex(const json& j, Complex fallback) {
  if (j.is_null()) return fallback;
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

inline SSFCurve parse_ssf_curve(const RunContext& ctx, const json& cfg) {
  SSFCurve curve;
  if (cfg.contains("ssf_csv")) {
    const auto path = ctx.config_dir / cfg.at("ssf_csv").get<std::string>();
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("x,", 0) == 0) continue;
      std::istringstream ls(line);
      double x, xi;
      char comma;
      if (!(ls >> x >> comma >> xi))
        throw ValidationError("malformed SSF CSV row: " + line);
      curve.grid.push_back(x);
      curve.values.push_back(xi);
    }
    curve.normalization = Normalization::Unnormalized;
  } else if (cfg.contains("ssf")) {
    const json c = cfg.at("ssf");
    if (c.contains("knots")) {
      curve.knots = c.at("knots").get<std::vector<double>>();
      curve.levels = c.at("levels").get<std::vector<double>>();
      if (curve.levels.size() != curve.knots.size() + 1)
        throw ValidationError("inline ssf: levels must be knots + 1");
    }
    if (c.contains("grid")) {
      curve.grid = c.at("grid").get<std::vector<double>>();
      if (c.contains("values"))
        curve.values = c.at("values").get<std::vector<double>>();
      else
        for (double x : curve.grid) curve.values.push_back(curve.eval(x));
    }
    curve.normalization = Normalization::Unnormalized;
  } else {
    throw ValidationError("witten config needs 'ssf_csv' or 'ssf'");
  }
  if (!curve.has_steps() && curve.grid.size() != curve.values.size())
    throw ValidationError("ssf curve: grid/values length mismatch");
  return curve;
}

inline OperatorPair parse_pair(const RunContext& ctx, const json& cfg) {
  const json pair_cfg = resolve_ref(ctx, cfg.at("pair"));
  const HermitianOperator base(parse_matrix(pair_cfg.at("base")));
  if (pair_cfg.contains("perturbed"))
    return OperatorPair(base,
                        HermitianOperator(parse_matrix(pair_cfg.at("perturbed"))));
  return OperatorPair(base, parse_matrix(pair_cfg.at("perturbation")));
}

}  // namespace detail

// SSF of a matrix pair: curve CSV plus Krein-residual diagnostics.
inline void run_ssf(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const OperatorPair pair = detail::parse_pair(ctx, cfg);
  const std::vector<double> grid = detail::parse_grid(cfg.at("grid"));
  const std::string method = cfg.value("method", "counting");
  SSFCurve curve;
  if (method == "counting") {
    curve = ssf_counting(pair, grid);
  } else if (method == "det_phase") {
    const double diam = 1e-5 * std::max(1.0, grid.back() - grid.front());
    curve = ssf_via_det_phase(pair, grid, cfg.value("epsilon", diam));
  } else if (method == "symmetrized") {
    const Complex z0 =
        detail::parse_complex(cfg.value("z0", json()), Complex(0.0, 1.0));
    curve = ssf_symmetrized(pair, grid, cfg.value("epsilon", 1e-6), z0);
    curve = cayley_normalize(curve, pair, z0);
  } else {
    throw ValidationError("run_ssf: unknown method '" + method + "'");
  }
  atomic_write(ctx.out_dir / "ssf_curve.csv", ssf_curve_csv(curve));

  json residuals = json::array();
  const SSFCurve counting = ssf_counting(pair, grid);
  for (Complex z : {Complex(0, 1), Complex(0, 2), Complex(-1, 1)}) {
    const Complex r = krein_residual(pair, counting, z);
    residuals.push_back(json{{"z", {z.real(), z.imag()}},
                             {"residual", {r.real(), r.imag()}},
                             {"abs", std::abs(r)}});
  }
  json rep = ctx.report_envelope();
  rep["method"] = method;
  rep["trace_perturbation"] = trace(pair.perturbation).real();
  rep["krein_residuals"] = std::move(residuals);
  atomic_write(ctx.out_dir / "krein_residual.json", rep.dump(2) + "\n");
}

// Dirac example pipeline: xi_n curve CSV + Witten report with the analytic
// reference (1/2pi) int phi.
inline void run_dirac(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const DiracProfile profile = parse_profile(cfg.at("profile"));
  const int n = cfg.value("n", 64);
  const double nu_max = cfg.value("nu_max", 5.0);
  const int nu_points = cfg.value("nu_points", 201);
  const double eps = cfg.value("eps", 0.0);
  const int nodes = cfg.value("nodes", 400);

  const DiracWittenReport rep = dirac_witten(profile, {n}, nu_max, nu_points,
                                             eps, nodes, ctx.threads);
  std::vector<double> nu_grid(nu_points);
  for (int k = 0; k < nu_points; ++k)
    nu_grid[k] = -nu_max + 2.0 * nu_max * k / (nu_points - 1.0);
  const SSFCurve curve =
      dirac_ssf(profile, nu_grid, n, eps, nodes, ctx.threads);
  atomic_write(ctx.out_dir / "dirac_ssf.csv", ssf_curve_csv(curve));

  json out = ctx.report_envelope();
  out["witten"] = witten_report_json(rep.report);
  out["reference"] = rep.reference;
  out["error"] = rep.error;
  out["n"] = rep.n_used;
  atomic_write(ctx.out_dir / "dirac_witten.json", out.dump(2) + "\n");
}

// chi_n convergence tables for a path: asymptote-pair table always, bold
// (time x space) table when requested.
inline void run_converge(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const OperatorPath path = parse_path(detail::resolve_ref(ctx, cfg.at("path")));
  const std::vector<int> n_values =
      cfg.value("n_values", std::vector<int>{1, 2, 4, 8, 16, 32, 64});

  const OperatorPair full = path.asymptote_pair();
  const CutoffFamily family =
      build_cutoff_family(path.a_minus, full.perturbation, n_values);
  const SSFCurve reference = ssf_counting(full, {});
  const auto rows = ssf_convergence_report(family, reference);
  atomic_write(ctx.out_dir / "convergence.csv", convergence_csv(rows));

  if (cfg.value("bold", false)) {
    const Complex z =
        detail::parse_complex(cfg.value("z", json()), Complex(0.0, 1.0));
    const auto bold = bold_convergence_table(path, n_values, z);
    atomic_write(ctx.out_dir / "bold_convergence.csv",
                 bold_convergence_csv(bold));
  }
}

// Hypothesis diagnostics + structural residuals of the model assembly.
inline void run_check(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const OperatorPath path = parse_path(detail::resolve_ref(ctx, cfg.at("path")));
  const TimeScheme scheme = cfg.value("scheme", std::string("fd")) == "spectral"
                                ? TimeScheme::SpectralPeriodic
                                : TimeScheme::FiniteDifferenceDirichlet;
  const Complex z0 =
      detail::parse_complex(cfg.value("z0", json()), Complex(0.0, 1.0));
  const ModelDiscretization model = assemble_DA(path, scheme);

  const HypothesisReport hyp = verify_hypotheses(path, model, z0);
  json hyp_json = ctx.report_envelope();
  hyp_json.update(hypothesis_report_json(hyp));
  atomic_write(ctx.out_dir / "hypothesis_report.json", hyp_json.dump(2) + "\n");

  const double decomp = decomposition_residual(model, path);
  const ResolventDiffTrace rdt =
      resolvent_diff_trace(model, path, Complex(-1.0, 0.0));
  json res = ctx.report_envelope();
  res["decomposition_residual"] = decomp;
  res["resolvent_diff_trace"] = {
      {"direct", {rdt.direct.real(), rdt.direct.imag()}},
      {"factorized", {rdt.factorized.real(), rdt.factorized.imag()}},
      {"relative_residual", rdt.relative_residual},
      {"sampled_residual", rdt.sampled_residual}};
  if (!model.warning.empty()) res["warning"] = model.warning;
  if (decomp > 1e-2)
    res["hint"] = "decomposition residual is O(h^2); refine the time grid";
  atomic_write(ctx.out_dir / "structural_residuals.json", res.dump(2) + "\n");
}

// Witten index from a supplied xi(.; A+, A-) curve, with the optional bold
// model Delta_r plateau cross-check.
inline void run_witten(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const SSFCurve xi_a = detail::parse_ssf_curve(ctx, cfg);
  WittenReport rep = witten_from_ssf(xi_a, cfg.value("h0", 0.5),
                                     cfg.value("consistency_tol", 1e-6));

  if (cfg.contains("path")) {
    const OperatorPath path =
        parse_path(detail::resolve_ref(ctx, cfg.at("path")));
    const ModelDiscretization model =
        assemble_DA(path, TimeScheme::FiniteDifferenceDirichlet);
    std::vector<double> lambdas;
    for (int j = 0; j <= 60; ++j)
      lambdas.push_back(-std::pow(10.0, 2.0 - j * 0.2));
    const DeltaRCurve curve = delta_r_curve(model, path, lambdas);
    rep.delta_r_samples.clear();
    for (size_t k = 0; k < curve.lambdas.size(); ++k)
      rep.delta_r_samples.emplace_back(curve.lambdas[k], curve.values[k]);
    if (curve.has_plateau)
      rep.plateau_window = std::make_pair(curve.window_lo, curve.window_hi);
  }

  json out = ctx.report_envelope();
  out.update(witten_report_json(rep));
  atomic_write(ctx.out_dir / "witten_report.json", out.dump(2) + "\n");
}

inline void run_command(const RunContext& ctx, const std::string& command) {
  std::filesystem::create_directories(ctx.out_dir);
  if (command == "ssf")
    run_ssf(ctx);
  else if (command == "dirac")
    run_dirac(ctx);
  else if (command == "converge")
    run_converge(ctx);
  else if (command == "check")
    run_check(ctx);
  else if (command == "witten")
    run_witten(ctx);
  else
    throw ValidationError("unknown command '" + command + "'");
}

}  // namespace witten
