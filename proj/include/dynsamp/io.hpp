#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dynsamp/core.hpp"
#include "dynsamp/construction.hpp"
#include "dynsamp/frames.hpp"
#include "dynsamp/sampling.hpp"
#include "dynsamp/spectral.hpp"

namespace dynsamp {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Matrix / vector interchange
//
// JSON: {"rows": r, "cols": c, "data": [[re, im], ...]} in row-major order;
// vectors are the cols = 1 case. CSV: one line per matrix row, each cell
// "re±imi" (both parts always written, exponents allowed).

inline json complex_to_json(const Scalar& z) { return json::array({z.real(), z.imag()}); }

inline Scalar complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(Errc::config_invalid, "complex value must be a [re, im] number pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const Mat& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index k = 0; k < m.cols(); ++k) data.push_back(complex_to_json(m(i, k)));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline json vector_to_json(const Vec& v) { return matrix_to_json(v); }

inline Mat matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    fail(Errc::config_invalid, "matrix JSON needs rows, cols, data");
  if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer() || !j["data"].is_array())
    fail(Errc::config_invalid, "matrix JSON field types");
  const Index rows = j["rows"].get<Index>();
  const Index cols = j["cols"].get<Index>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != j["data"].size())
    fail(Errc::config_invalid, "matrix JSON data length != rows*cols");
  Mat m(rows, cols);
  std::size_t p = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(j["data"][p++]);
  return m;
}

inline Vec vector_from_json(const json& j) {
  const Mat m = matrix_from_json(j);
  if (m.cols() != 1) fail(Errc::config_invalid, "vector JSON must have cols = 1");
  return m.col(0);
}

// Inline vector form used inside configs and pattern probes: [[re, im], ...].
inline json complex_array_to_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(complex_to_json(v(i)));
  return a;
}

inline Vec complex_array_from_json(const json& j) {
  if (!j.is_array() || j.empty()) fail(Errc::config_invalid, "expected a non-empty [[re, im], ...] array");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = complex_from_json(j[i]);
  return v;
}

inline std::string format_complex_cell(const Scalar& z) {
  std::ostringstream os;
  os << std::setprecision(17) << z.real();
  os << (std::signbit(z.imag()) ? "-" : "+");
  os << std::setprecision(17) << std::abs(z.imag()) << "i";
  return os.str();
}

inline Scalar parse_complex_cell(std::string cell) {
  // Trim whitespace.
  const auto first = cell.find_first_not_of(" \t\r");
  const auto last = cell.find_last_not_of(" \t\r");
  if (first == std::string::npos) fail(Errc::config_invalid, "empty complex cell");
  cell = cell.substr(first, last - first + 1);

  if (cell.back() != 'i') {  // lenient: pure real cell
    try {
      return {std::stod(cell), 0.0};
    } catch (const std::exception&) {
      fail(Errc::config_invalid, "unparsable complex cell '" + cell + "'");
    }
  }
  // Split at the sign that starts the imaginary part: the last +/- whose
  // predecessor is not an exponent marker.
  std::size_t split = std::string::npos;
  for (std::size_t i = cell.size() - 1; i > 0; --i) {
    const char c = cell[i];
    if ((c == '+' || c == '-') && cell[i - 1] != 'e' && cell[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) fail(Errc::config_invalid, "complex cell '" + cell + "' has no imaginary sign");
  try {
    const double re = std::stod(cell.substr(0, split));
    const double im = std::stod(cell.substr(split, cell.size() - 1 - split));
    return {re, im};
  } catch (const std::exception&) {
    fail(Errc::config_invalid, "unparsable complex cell '" + cell + "'");
  }
}

inline std::string matrix_to_csv(const Mat& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = 0; k < m.cols(); ++k) {
      if (k) out += ',';
      out += format_complex_cell(m(i, k));
    }
    out += '\n';
  }
  return out;
}

inline Mat matrix_from_csv(const std::string& text) {
  std::vector<std::vector<Scalar>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<Scalar> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(parse_complex_cell(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(Errc::config_invalid, "empty CSV matrix");
  const std::size_t cols = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != cols) fail(Errc::config_invalid, "ragged CSV matrix");
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
  return m;
}

// ---------------------------------------------------------------------------
// Sampling pattern and samples

inline json pattern_to_json(const SamplingPattern& pattern) {
  json elements = json::array();
  for (const PatternElement& el : pattern.elements) {
    json probe;
    if (std::holds_alternative<Index>(el.probe.value))
      probe = json{{"index", std::get<Index>(el.probe.value)}};
    else
      probe = json{{"vector", complex_array_to_json(std::get<Vec>(el.probe.value))}};
    json budget = el.budget ? json(*el.budget) : json("auto");
    elements.push_back(json{{"probe", std::move(probe)}, {"budget", std::move(budget)}});
  }
  return json{{"elements", std::move(elements)}};
}

inline SamplingPattern pattern_from_json(const json& j) {
  if (!j.is_object() || !j.contains("elements") || !j["elements"].is_array())
    fail(Errc::config_invalid, "pattern JSON needs an elements array");
  SamplingPattern pattern;
  for (const json& el : j["elements"]) {
    if (!el.is_object() || !el.contains("probe") || !el.contains("budget"))
      fail(Errc::config_invalid, "pattern element needs probe and budget");
    const json& pj = el["probe"];
    Probe probe = Probe::coordinate(0);
    if (pj.is_object() && pj.contains("index") && pj["index"].is_number_integer())
      probe = Probe::coordinate(pj["index"].get<Index>());
    else if (pj.is_object() && pj.contains("vector"))
      probe = Probe::functional(complex_array_from_json(pj["vector"]));
    else
      fail(Errc::config_invalid, "probe must be {\"index\": i} or {\"vector\": ...}");
    std::optional<Index> budget;
    if (el["budget"].is_string()) {
      if (el["budget"].get<std::string>() != "auto")
        fail(Errc::config_invalid, "budget must be an integer or \"auto\"");
    } else if (el["budget"].is_number_integer()) {
      budget = el["budget"].get<Index>();
      if (*budget < 0) fail(Errc::config_invalid, "budget must be >= 0");
    } else {
      fail(Errc::config_invalid, "budget must be an integer or \"auto\"");
    }
    pattern.elements.push_back({std::move(probe), budget});
  }
  return pattern;
}

inline json samples_to_json(const SpaceTimeSamples& s) {
  json values = json::array();
  for (const auto& row : s.values) {
    json jr = json::array();
    for (const Scalar& v : row) jr.push_back(complex_to_json(v));
    values.push_back(std::move(jr));
  }
  return json{{"values", std::move(values)}, {"noise_sigma", s.noise_sigma}, {"seed", s.seed}};
}

inline SpaceTimeSamples samples_from_json(const json& j) {
  if (!j.is_object() || !j.contains("values") || !j["values"].is_array())
    fail(Errc::config_invalid, "samples JSON needs a values array");
  SpaceTimeSamples s;
  for (const json& jr : j["values"]) {
    if (!jr.is_array() || jr.empty()) fail(Errc::config_invalid, "sample rows must be non-empty arrays");
    std::vector<Scalar> row;
    for (const json& v : jr) row.push_back(complex_from_json(v));
    s.values.push_back(std::move(row));
  }
  s.noise_sigma = j.value("noise_sigma", 0.0);
  if (s.noise_sigma < 0.0) fail(Errc::config_invalid, "noise_sigma must be >= 0");
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

// ---------------------------------------------------------------------------
// Report serialization (one-way)

inline json spectral_to_json(const SpectralData& sd) {
  json eigenvalues = json::array();
  for (const Scalar& l : sd.eigenvalues) eigenvalues.push_back(complex_to_json(l));
  json projections = json::array();
  for (const Mat& p : sd.projections) projections.push_back(matrix_to_json(p));
  json classes = json::object();
  for (const auto& [mult, lambdas] : sd.classes) {
    json list = json::array();
    for (const Scalar& l : lambdas) list.push_back(complex_to_json(l));
    classes[std::to_string(mult)] = std::move(list);
  }
  return json{{"dim", sd.dim},
              {"eigenvalues", std::move(eigenvalues)},
              {"multiplicities", sd.multiplicities},
              {"classes", std::move(classes)},
              {"projections", std::move(projections)}};
}

inline json frame_report_to_json(const FrameReport& r) {
  return json{{"truncation", r.truncation},
              {"lower_est", r.lower_est},
              {"upper_est", r.upper_est},
              {"tail_bound", r.tail_summable ? json(r.tail_bound) : json(nullptr)},
              {"tail_summable", r.tail_summable},
              {"bessel", r.bessel},
              {"lower_frame", r.lower_frame},
              {"notes", r.notes}};
}

inline json carleson_to_json(const CarlesonReport& r) {
  return json{{"per_n_products", r.per_n_products}, {"infimum", r.infimum}};
}

inline json one_point_to_json(const OnePointFrameReport& r) {
  return json{{"in_disk", r.in_disk},
              {"max_modulus", r.max_modulus},
              {"moduli_sorted", r.moduli_sorted},
              {"carleson", r.carleson ? carleson_to_json(*r.carleson) : json(nullptr)},
              {"carleson_pass", r.carleson_pass},
              {"m_abs", r.m_abs},
              {"m_bounded", r.m_bounded},
              {"notes", r.notes}};
}

inline json decay_to_json(const DecayReport& r) {
  return json{{"decays", r.decays},
              {"profile", r.profile},
              {"analytic", r.analytic ? json(*r.analytic) : json(nullptr)},
              {"notes", r.notes}};
}

inline json necessary_conditions_to_json(const NecessaryConditionsReport& r) {
  return json{{"pass", r.pass},
              {"witness", r.witness ? complex_to_json(*r.witness) : json(nullptr)},
              {"min_modulus", r.min_modulus},
              {"max_modulus", r.max_modulus},
              {"notes", r.notes}};
}

inline json norm_bound_to_json(const NormBoundWitness& r) {
  return json{{"bound", r.bound}, {"realized", r.realized}, {"witness", vector_to_json(r.witness)}};
}

inline json minimality_defect_to_json(const MinimalityDefect& r) {
  return json{{"complete", r.complete},
              {"redundant", r.redundant},
              {"removable_indices", r.removable_indices}};
}

inline json recovery_to_json(const RecoveryResult& r) {
  return json{{"f_hat", vector_to_json(r.f_hat)},
              {"residual", r.residual},
              {"sigma_min", r.sigma_min},
              {"sigma_max", r.sigma_max},
              {"condition", r.condition}};
}

inline json stability_to_json(const StabilityBounds& r) {
  return json{{"C1", r.C1}, {"C2", r.C2}};
}

inline json tight_frame_to_json(const TightFrameSystem& s) {
  Mat gens(s.defect.rows(), static_cast<Index>(s.generators.size()));
  for (std::size_t i = 0; i < s.generators.size(); ++i)
    gens.col(static_cast<Index>(i)) = s.generators[i];
  return json{{"defect", matrix_to_json(s.defect)},
              {"defect_rank", s.defect_rank},
              {"generators", matrix_to_json(gens)}};
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::config_invalid, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Write-then-rename so readers never observe a partial file.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::bad_spec, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) fail(Errc::bad_spec, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  atomic_write_text(path, j.dump(2) + "\n");
}

inline json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail(Errc::config_invalid, "malformed JSON in " + path.string());
  return j;
}

/// Two-column plot series, e.g. (n, value) pairs.
inline void write_series_csv(const std::filesystem::path& path, const std::string& col_a,
                             const std::string& col_b,
                             const std::vector<std::pair<double, double>>& rows) {
  std::ostringstream os;
  os << col_a << ',' << col_b << '\n' << std::setprecision(17);
  for (const auto& [a, b] : rows) os << a << ',' << b << '\n';
  atomic_write_text(path, os.str());
}

}  // namespace dynsamp
