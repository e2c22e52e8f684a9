#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynsamp/io.hpp"

namespace dynsamp {

// ---------------------------------------------------------------------------
// Scenario configs
//
// A scenario is a single JSON file: one operator, an optional sampling
// pattern and signal, and an ordered list of analyses. Parsing validates
// everything up front (unknown analysis names, inconsistent dimensions,
// ill-typed parameters all reject the config); run-time throws are then
// genuine analysis failures, not config mistakes.
//
// Exit codes: 0 success, 1 some analysis failed (partial reports retained),
// 2 invalid config.

struct AnalysisSpec {
  std::string name;
  json params;
};

struct Scenario {
  std::optional<EvolutionOperator> op;
  std::optional<SamplingPattern> pattern;
  std::optional<Vec> signal;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";
  std::vector<AnalysisSpec> analyses;
  json echo;  // the config as given, for the summary
};

inline EvolutionOperator operator_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    fail(Errc::config_invalid, "operator spec needs a string kind");
  const std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "diagonal") {
      if (!j.contains("lambda")) fail(Errc::config_invalid, "diagonal operator needs lambda");
      return EvolutionOperator::diagonal(complex_array_from_json(j["lambda"]));
    }
    if (kind == "circulant_heat") {
      OperatorSpec spec;
      spec.kind = OperatorSpec::Kind::circulant_heat;
      spec.dim = j.value("dim", Index{0});
      spec.tau = j.value("tau", -1.0);
      return make_operator(spec);
    }
    if (kind == "random_normal") {
      OperatorSpec spec;
      spec.kind = OperatorSpec::Kind::random_normal;
      spec.dim = j.value("dim", Index{0});
      spec.seed = j.value("seed", std::uint64_t{0});
      if (j.contains("eigenvalues")) {
        const json& ej = j["eigenvalues"];
        const std::string ekind = ej.value("kind", "disk");
        if (ekind == "disk") {
          spec.sampler.kind = EigenvalueSampler::Kind::disk;
          spec.sampler.radius = ej.value("radius", 1.0);
        } else if (ekind == "circle") {
          spec.sampler.kind = EigenvalueSampler::Kind::circle;
        } else if (ekind == "interval") {
          spec.sampler.kind = EigenvalueSampler::Kind::interval;
          spec.sampler.lo = ej.value("lo", 0.0);
          spec.sampler.hi = ej.value("hi", 1.0);
        } else {
          fail(Errc::config_invalid, "eigenvalue sampler kind must be disk|circle|interval");
        }
      }
      return make_operator(spec);
    }
    if (kind == "shift") {
      return EvolutionOperator::shift(j.value("dim", Index{0}));
    }
    if (kind == "dense") {
      if (!j.contains("matrix")) fail(Errc::config_invalid, "dense operator needs matrix");
      return EvolutionOperator::dense(matrix_from_json(j["matrix"]));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::config_invalid) throw;
    fail(Errc::config_invalid, std::string("operator spec rejected: ") + e.what());
  }
  fail(Errc::config_invalid, "unknown operator kind '" + kind + "'");
}

namespace detail {

inline double require_nonneg(const json& params, const char* key, double fallback) {
  const double v = params.value(key, fallback);
  if (!(v >= 0.0) || !std::isfinite(v))
    fail(Errc::config_invalid, std::string(key) + " must be finite and >= 0");
  return v;
}

inline Index require_positive_index(const json& params, const char* key, Index fallback) {
  const Index v = params.value(key, fallback);
  if (v < 1) fail(Errc::config_invalid, std::string(key) + " must be >= 1");
  return v;
}

}  // namespace detail

inline Scenario parse_scenario(const json& config) {
  if (!config.is_object()) fail(Errc::config_invalid, "config must be a JSON object");
  Scenario sc;
  sc.echo = config;

  if (!config.contains("operator")) fail(Errc::config_invalid, "config needs an operator");
  sc.op = operator_from_json(config["operator"]);
  const Index dim = sc.op->dim();

  if (config.contains("seed")) {
    if (!config["seed"].is_number_integer()) fail(Errc::config_invalid, "seed must be an integer");
    sc.seed = config["seed"].get<std::uint64_t>();
  }
  sc.noise_sigma = config.value("noise_sigma", 0.0);
  if (!(sc.noise_sigma >= 0.0) || !std::isfinite(sc.noise_sigma))
    fail(Errc::config_invalid, "noise_sigma must be finite and >= 0");
  if (config.contains("output_dir")) {
    if (!config["output_dir"].is_string()) fail(Errc::config_invalid, "output_dir must be a string");
    sc.output_dir = config["output_dir"].get<std::string>();
  }

  if (config.contains("pattern")) {
    sc.pattern = pattern_from_json(config["pattern"]);
    try {
      for (const PatternElement& el : sc.pattern->elements) el.probe.resolve(dim);
    } catch (const Error& e) {
      fail(Errc::config_invalid, std::string("pattern rejected: ") + e.what());
    }
  }

  if (config.contains("signal")) {
    const json& sj = config["signal"];
    if (sj.is_object() && sj.contains("vector")) {
      sc.signal = complex_array_from_json(sj["vector"]);
      if (sc.signal->size() != dim)
        fail(Errc::config_invalid, "signal length != operator dim");
    } else if (sj.is_object() && sj.contains("random_seed")) {
      if (!sj["random_seed"].is_number_integer())
        fail(Errc::config_invalid, "signal random_seed must be an integer");
      Rng rng(sj["random_seed"].get<std::uint64_t>());
      sc.signal = random_gaussian_vector(rng, dim);
    } else {
      fail(Errc::config_invalid, "signal must be {\"vector\": ...} or {\"random_seed\": n}");
    }
  }

  const json analyses = config.value("analyses", json::array());
  if (!analyses.is_array()) fail(Errc::config_invalid, "analyses must be an array");
  for (const json& aj : analyses) {
    if (!aj.is_object() || !aj.contains("name") || !aj["name"].is_string())
      fail(Errc::config_invalid, "each analysis needs a string name");
    AnalysisSpec spec;
    spec.name = aj["name"].get<std::string>();
    spec.params = aj;

    const bool needs_pattern = spec.name == "recover" || spec.name == "frame_report" ||
                               spec.name == "one_point_check" || spec.name == "minimality";
    const bool needs_signal = spec.name == "recover" || spec.name == "decay";
    const bool needs_diagonal = spec.name == "carleson" || spec.name == "one_point_check";
    if (needs_pattern && (!sc.pattern || sc.pattern->elements.empty()))
      fail(Errc::config_invalid, spec.name + " needs a non-empty pattern");
    if (needs_signal && !sc.signal) fail(Errc::config_invalid, spec.name + " needs a signal");
    if (needs_diagonal && !sc.op->is_diagonal())
      fail(Errc::config_invalid, spec.name + " needs a diagonal operator");

    if (spec.name == "recover") {
      // nothing beyond pattern+signal
    } else if (spec.name == "spectral") {
      detail::require_nonneg(spec.params, "group_tol", 1e-8);
    } else if (spec.name == "frame_report") {
      if (spec.params.contains("N")) detail::require_positive_index(spec.params, "N", 1);
    } else if (spec.name == "carleson") {
      // nothing
    } else if (spec.name == "one_point_check") {
      detail::require_nonneg(spec.params, "delta", 0.0);
      if (spec.params.contains("C")) {
        const json& c = spec.params["C"];
        if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
          fail(Errc::config_invalid, "one_point_check C must be [lo, hi]");
      }
    } else if (spec.name == "tight_frame") {
      detail::require_nonneg(spec.params, "tol", 1e-10);
      if (spec.params.contains("m")) detail::require_positive_index(spec.params, "m", 1);
    } else if (spec.name == "necessary_conditions") {
      // nothing
    } else if (spec.name == "decay") {
      detail::require_positive_index(spec.params, "n_max", 50);
      detail::require_nonneg(spec.params, "tol", 1e-8);
    } else if (spec.name == "minimality") {
      detail::require_positive_index(spec.params, "N", dim + 4);
    } else {
      fail(Errc::config_invalid, "unknown analysis '" + spec.name + "'");
    }
    sc.analyses.push_back(std::move(spec));
  }
  return sc;
}

namespace detail {

inline std::vector<Vec> pattern_probes(const Scenario& sc) {
  std::vector<Vec> g;
  for (const PatternElement& el : sc.pattern->elements) g.push_back(el.probe.resolve(sc.op->dim()));
  return g;
}

/// Runs one analysis, writes its side-channel CSV series, returns the report.
inline json run_analysis(const Scenario& sc, const AnalysisSpec& spec, const std::string& stem) {
  const EvolutionOperator& a = *sc.op;
  const std::filesystem::path dir = sc.output_dir;

  if (spec.name == "recover") {
    const SpaceTimeSamples samples =
        simulate_samples(a, *sc.signal, *sc.pattern, sc.noise_sigma, sc.seed);
    write_json_file(dir / (stem + "_samples.json"), samples_to_json(samples));
    const RecoveryResult res = recover(samples, a, *sc.pattern);
    const StabilityBounds bounds = stability_bounds(a, *sc.pattern);
    json report = recovery_to_json(res);
    report["error_norm"] = (res.f_hat - *sc.signal).norm();
    report["stability"] = stability_to_json(bounds);
    return report;
  }
  if (spec.name == "spectral") {
    return spectral_to_json(spectral_decomposition(a, spec.params.value("group_tol", 1e-8)));
  }
  if (spec.name == "frame_report") {
    const std::vector<Vec> g = pattern_probes(sc);
    const FrameReport report = spec.params.contains("N")
                                   ? frame_bounds_truncated(a, g, spec.params["N"].get<Index>())
                                   : frame_bounds_auto(a, g);
    std::vector<std::pair<double, double>> lower, upper;
    for (Index n = 1; n < report.truncation; n *= 2) {
      const FrameReport r = frame_bounds_truncated(a, g, n);
      lower.emplace_back(static_cast<double>(n), r.lower_est);
      upper.emplace_back(static_cast<double>(n), r.upper_est);
    }
    lower.emplace_back(static_cast<double>(report.truncation), report.lower_est);
    upper.emplace_back(static_cast<double>(report.truncation), report.upper_est);
    write_series_csv(dir / (stem + "_lower_vs_N.csv"), "N", "lower_est", lower);
    write_series_csv(dir / (stem + "_upper_vs_N.csv"), "N", "upper_est", upper);
    return frame_report_to_json(report);
  }
  if (spec.name == "carleson" || spec.name == "one_point_check") {
    const Vec& lambda_vec = std::get<DiagonalOp>(a.payload()).lambda;
    std::vector<Scalar> lambda(lambda_vec.data(), lambda_vec.data() + lambda_vec.size());
    if (spec.name == "carleson") {
      const CarlesonReport report = carleson_infimum(lambda);
      std::vector<std::pair<double, double>> rows;
      for (std::size_t n = 0; n < report.per_n_products.size(); ++n)
        rows.emplace_back(static_cast<double>(n), report.per_n_products[n]);
      write_series_csv(dir / (stem + "_products.csv"), "n", "product", rows);
      return carleson_to_json(report);
    }
    const Vec b = sc.pattern->elements.front().probe.resolve(a.dim());
    std::pair<double, double> c_bounds{0.0, 1e300};
    if (spec.params.contains("C"))
      c_bounds = {spec.params["C"][0].get<double>(), spec.params["C"][1].get<double>()};
    return one_point_to_json(
        one_point_frame_check(lambda, b, spec.params.value("delta", 0.0), c_bounds));
  }
  if (spec.name == "tight_frame") {
    const TightFrameSystem system =
        tight_frame_from_contraction(a, spec.params.value("tol", 1e-10));
    json report = tight_frame_to_json(system);
    if (sc.signal) {
      const TelescopingPoint p =
          verify_tight_frame(a, system, *sc.signal, spec.params.value("m", Index{30}));
      report["verify"] = json{{"partial_sum", p.partial_sum}, {"rhs", p.rhs}, {"gap", p.gap}};
    }
    return report;
  }
  if (spec.name == "necessary_conditions") {
    return necessary_conditions_to_json(spectral_necessary_conditions(a));
  }
  if (spec.name == "decay") {
    const DecayReport report = power_decay_check(a, *sc.signal, spec.params.value("n_max", Index{50}),
                                                 spec.params.value("tol", 1e-8));
    std::vector<std::pair<double, double>> rows;
    for (std::size_t n = 0; n < report.profile.size(); ++n)
      rows.emplace_back(static_cast<double>(n), report.profile[n]);
    write_series_csv(dir / (stem + "_profile.csv"), "n", "norm", rows);
    return decay_to_json(report);
  }
  if (spec.name == "minimality") {
    return minimality_defect_to_json(
        minimality_defect(a, pattern_probes(sc), spec.params.value("N", a.dim() + 4)));
  }
  fail(Errc::config_invalid, "unknown analysis '" + spec.name + "'");  // unreachable after parse
}

}  // namespace detail

inline int run_scenario(const Scenario& sc) {
  std::filesystem::create_directories(sc.output_dir);
  json results = json::array();
  bool any_failed = false;
  for (std::size_t i = 0; i < sc.analyses.size(); ++i) {
    const AnalysisSpec& spec = sc.analyses[i];
    char prefix[8];
    std::snprintf(prefix, sizeof(prefix), "%02zu", i);
    const std::string stem = std::string(prefix) + "_" + spec.name;
    json entry{{"name", spec.name}, {"report", stem + ".json"}};
    try {
      const json report = detail::run_analysis(sc, spec, stem);
      write_json_file(sc.output_dir / (stem + ".json"), report);
      entry["status"] = "ok";
    } catch (const Error& e) {
      any_failed = true;
      entry["status"] = "failed";
      entry["error"] = e.what();
      entry["error_kind"] = errc_name(e.code());
      entry.erase("report");
    }
    results.push_back(std::move(entry));
  }
  const int code = any_failed ? 1 : 0;
  write_json_file(sc.output_dir / "summary.json",
                  json{{"seed", sc.seed},
                       {"exit_code", code},
                       {"results", std::move(results)},
                       {"scenario", sc.echo}});
  return code;
}

// ---------------------------------------------------------------------------
// Suite generation: deterministic config families, one per theorem battery.

namespace detail {

inline Scalar sample_annulus(Rng& rng, double r_lo, double r_hi) {
  const double r = rng.uniform(r_lo, r_hi);
  const double t = 2.0 * kPi * rng.uniform();
  return {r * std::cos(t), r * std::sin(t)};
}

/// Pairwise-separated draws; redraws the whole set until separated.
inline std::vector<Scalar> separated_points(Rng& rng, Index count, double r_lo, double r_hi,
                                            double min_gap) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<Scalar> pts;
    for (Index i = 0; i < count; ++i) pts.push_back(sample_annulus(rng, r_lo, r_hi));
    bool ok = true;
    for (std::size_t i = 0; i < pts.size() && ok; ++i)
      for (std::size_t j = i + 1; j < pts.size() && ok; ++j)
        if (std::abs(pts[i] - pts[j]) < min_gap) ok = false;
    if (ok) return pts;
  }
  fail(Errc::bad_spec, "separated_points: rejection sampling did not converge");
}

inline json tad1_instance(Rng rng, const std::string& tag) {
  const Index dim = 6;
  const Index distinct = 2 + static_cast<Index>(rng.uniform() * 3.0);  // 2..4
  const std::vector<Scalar> lambdas = separated_points(rng, distinct, 0.3, 1.2, 0.25);

  // Random composition of dim into `distinct` positive parts.
  std::vector<Index> cuts;
  while (static_cast<Index>(cuts.size()) < distinct - 1) {
    const Index c = 1 + static_cast<Index>(rng.uniform() * (dim - 1));
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  cuts.push_back(0);
  cuts.push_back(dim);
  std::sort(cuts.begin(), cuts.end());

  Vec diag(dim);
  Index pos = 0;
  for (Index j = 0; j < distinct; ++j)
    for (Index k = cuts[static_cast<std::size_t>(j)]; k < cuts[static_cast<std::size_t>(j) + 1]; ++k)
      diag(pos++) = lambdas[static_cast<std::size_t>(j)];

  // A* = B^{-1} D B with a well-conditioned random B.
  Mat b;
  for (int attempt = 0;; ++attempt) {
    b = random_gaussian_matrix(rng, dim, dim);
    const RealVec sv = singular_values(b);
    if (sv(sv.size() - 1) > 0.0 && sv(0) / sv(sv.size() - 1) <= 1e3) break;
    if (attempt > 1000) fail(Errc::bad_spec, "tad1_instance: no well-conditioned B found");
  }
  const Mat a_star = b.inverse() * diag.asDiagonal() * b;
  const Mat a = a_star.adjoint();

  json elements = json::array();
  bool any = false;
  for (Index i = 0; i < dim; ++i)
    if (rng.uniform() < 0.5) {
      elements.push_back(json{{"probe", {{"index", i}}}, {"budget", "auto"}});
      any = true;
    }
  if (!any)
    elements.push_back(
        json{{"probe", {{"index", static_cast<Index>(rng.uniform() * dim)}}}, {"budget", "auto"}});

  return json{{"operator", {{"kind", "dense"}, {"matrix", matrix_to_json(a)}}},
              {"pattern", {{"elements", std::move(elements)}}},
              {"signal", {{"random_seed", rng.raw()}}},
              {"noise_sigma", 0.0},
              {"seed", rng.raw()},
              {"output_dir", tag + "_out"},
              {"analyses", json::array({json{{"name", "recover"}}})}};
}

inline json one_point_instance(Rng rng, const std::string& tag) {
  const Index count = 4 + static_cast<Index>(rng.uniform() * 5.0);  // 4..8
  const std::vector<Scalar> lambdas = separated_points(rng, count, 0.2, 0.9, 0.1);
  Vec b(count);
  for (Index k = 0; k < count; ++k)
    b(k) = Scalar(std::sqrt(1.0 - std::norm(lambdas[static_cast<std::size_t>(k)])), 0.0);
  // Condition (iii) threshold set from the instance itself so the verdict is
  // a deterministic pass.
  const double delta = 0.5 * carleson_infimum(lambdas).infimum;

  Vec lv(count);
  for (Index k = 0; k < count; ++k) lv(k) = lambdas[static_cast<std::size_t>(k)];
  json element{{"probe", {{"vector", complex_array_to_json(b)}}}, {"budget", "auto"}};
  return json{
      {"operator", {{"kind", "diagonal"}, {"lambda", complex_array_to_json(lv)}}},
      {"pattern", {{"elements", json::array({std::move(element)})}}},
      {"seed", rng.raw()},
      {"output_dir", tag + "_out"},
      {"analyses",
       json::array({json{{"name", "one_point_check"},
                         {"delta", delta},
                         {"C", json::array({0.9, 1.1})}},
                    json{{"name", "carleson"}}, json{{"name", "frame_report"}}})}};
}

inline json tight_frame_instance(Rng rng, const std::string& tag) {
  return json{{"operator",
               {{"kind", "random_normal"},
                {"dim", 8},
                {"eigenvalues", {{"kind", "disk"}, {"radius", 0.9}}},
                {"seed", rng.raw()}}},
              {"signal", {{"random_seed", rng.raw()}}},
              {"seed", rng.raw()},
              {"output_dir", tag + "_out"},
              {"analyses", json::array({json{{"name", "tight_frame"}, {"m", 30}},
                                        json{{"name", "decay"}, {"n_max", 200}, {"tol", 1e-6}},
                                        json{{"name", "necessary_conditions"}}})}};
}

inline json unitary_negative_instance(Rng rng, const std::string& tag) {
  const Index dim = 3 + static_cast<Index>(rng.uniform() * 6.0);  // 3..8
  // Unimodular spectrum with one repeated eigenvalue: the repeated eigenspace
  // always holds a direction orthogonal to the single generator's iterates,
  // so the truncated lower bound collapses while the upper bound grows.
  Vec lambda(dim);
  for (Index k = 0; k + 1 < dim; ++k) {
    const double t = 2.0 * kPi * rng.uniform();
    lambda(k) = Scalar(std::cos(t), std::sin(t));
  }
  lambda(dim - 1) = lambda(0);
  Rng urng = rng.derive(1);
  const Mat u = random_unitary(urng, dim);
  const Mat a = u * lambda.asDiagonal() * u.adjoint();
  Rng grng = rng.derive(2);
  const Vec g = random_gaussian_vector(grng, dim);

  json element{{"probe", {{"vector", complex_array_to_json(g)}}}, {"budget", 0}};
  return json{{"operator", {{"kind", "dense"}, {"matrix", matrix_to_json(a)}}},
              {"pattern", {{"elements", json::array({std::move(element)})}}},
              {"signal", {{"random_seed", rng.raw()}}},
              {"seed", rng.raw()},
              {"output_dir", tag + "_out"},
              {"analyses", json::array({json{{"name", "necessary_conditions"}},
                                        json{{"name", "decay"}, {"n_max", 50}, {"tol", 1e-8}},
                                        json{{"name", "frame_report"}, {"N", 200}}})}};
}

inline json redundancy_instance(Rng rng, const std::string& tag) {
  const Index dim = 4 + static_cast<Index>(rng.uniform() * 3.0);  // 4..6
  const Index gens = 1 + static_cast<Index>(rng.uniform() * 2.0);  // 1..2
  json elements = json::array();
  for (Index i = 0; i < gens; ++i) {
    Rng grng = rng.derive(static_cast<std::uint64_t>(i) + 10);
    const Vec g = random_gaussian_vector(grng, dim);
    elements.push_back(json{{"probe", {{"vector", complex_array_to_json(g)}}}, {"budget", 0}});
  }
  return json{{"operator",
               {{"kind", "random_normal"},
                {"dim", dim},
                {"eigenvalues", {{"kind", "disk"}, {"radius", 1.2}}},
                {"seed", rng.raw()}}},
              {"pattern", {{"elements", std::move(elements)}}},
              {"seed", rng.raw()},
              {"output_dir", tag + "_out"},
              {"analyses", json::array({json{{"name", "minimality"}, {"N", dim + 4}}})}};
}

}  // namespace detail

inline std::vector<json> generate_suite(const std::string& kind, std::uint64_t seed, Index count) {
  if (count < 1) fail(Errc::bad_spec, "generate_suite: count must be >= 1");
  json (*make)(Rng, const std::string&) = nullptr;
  if (kind == "tad1_equivalence")
    make = detail::tad1_instance;
  else if (kind == "one_point_frames")
    make = detail::one_point_instance;
  else if (kind == "tight_frames")
    make = detail::tight_frame_instance;
  else if (kind == "unitary_negative")
    make = detail::unitary_negative_instance;
  else if (kind == "redundancy")
    make = detail::redundancy_instance;
  else
    fail(Errc::unknown_kind, "unknown suite kind '" + kind + "'");

  const Rng root(seed);
  std::vector<json> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    char tag[32];
    std::snprintf(tag, sizeof(tag), "%s_%03lld", kind.c_str(), static_cast<long long>(i));
    out.push_back(make(root.derive(static_cast<std::uint64_t>(i)), tag));
  }
  return out;
}

}  // namespace dynsamp
