#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "witten/cutoff.hpp"
#include "witten/dirac.hpp"
#include "witten/model.hpp"
#include "witten/pushnitski.hpp"

namespace witten {

using nlohmann::json;

inline constexpr const char* kCsvHeader = "# witten-index-lab v1";

// FNV-1a over the canonical (sorted-key) dump; embedded in every report.
inline std::string config_hash(const json& config) {
  const std::string dump = config.dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

// temp + rename so partially written outputs never appear under the final name
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

// {"dim": n, "re": [[...]], "im": [[...]]}, row-major, finite doubles
inline Matrix parse_matrix(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re"))
    throw ValidationError("matrix JSON must contain dim and re");
  const int n = j.at("dim").get<int>();
  if (n <= 0) throw ValidationError("matrix dim must be positive");
  Matrix m = Matrix::Zero(n, n);
  auto fill = [&](const json& rows, bool imag_part) {
    if (static_cast<int>(rows.size()) != n)
      throw ValidationError("matrix row count does not match dim");
    for (int r = 0; r < n; ++r) {
      const auto& row = rows.at(r);
      if (static_cast<int>(row.size()) != n)
        throw ValidationError("matrix column count does not match dim");
      for (int c = 0; c < n; ++c) {
        const double v = row.at(c).get<double>();
        if (!std::isfinite(v)) throw ValidationError("non-finite matrix entry");
        if (imag_part)
          m(r, c) += Complex(0.0, v);
        else
          m(r, c) += Complex(v, 0.0);
      }
    }
  };
  fill(j.at("re"), false);
  if (j.contains("im")) fill(j.at("im"), true);
  return m;
}

inline json dump_matrix(const Matrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json rr = json::array(), ri = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

// {"t": [...], "a_minus": matrix, "b": [matrix...], "b_prime": [matrix...]}
inline OperatorPath parse_path(const json& j) {
  for (const char* key : {"t", "a_minus", "b", "b_prime"})
    if (!j.contains(key))
      throw ValidationError(std::string("path JSON missing field ") + key);
  std::vector<double> t = j.at("t").get<std::vector<double>>();
  const HermitianOperator a_minus(parse_matrix(j.at("a_minus")));
  auto matrices = [&](const json& arr) {
    std::vector<Matrix> out;
    out.reserve(arr.size());
    for (const auto& e : arr) out.push_back(parse_matrix(e));
    return out;
  };
  return OperatorPath(std::move(t), matrices(j.at("b")),
                      matrices(j.at("b_prime")), a_minus);
}

// {"profile": "gaussian"|"sech2", "amplitude": a, "width": w, "center": c}
inline DiracProfile parse_profile(const json& j) {
  for (const char* key : {"profile", "amplitude", "width"})
    if (!j.contains(key))
      throw ValidationError(std::string("profile JSON missing field ") + key);
  return DiracProfile(j.at("profile").get<std::string>(),
                      j.at("amplitude").get<double>(),
                      j.at("width").get<double>(),
                      j.value("center", 0.0));
}

inline std::string ssf_curve_csv(const SSFCurve& curve) {
  std::ostringstream os;
  os.precision(17);
  os << kCsvHeader << "\n"
     << "x,xi,normalization\n";
  for (size_t k = 0; k < curve.grid.size(); ++k)
    os << curve.grid[k] << ',' << curve.values[k] << ','
       << to_string(curve.normalization) << "\n";
  return os.str();
}

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << kCsvHeader << "\n"
     << "n,distance_B1,distance_wL1\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.distance_b1 << ',' << r.distance_wl1 << "\n";
  return os.str();
}

inline std::string bold_convergence_csv(
    const std::vector<BoldConvergenceRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << kCsvHeader << "\n"
     << "n,distance_B1,hs_distance_j1,hs_distance_j2\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.trace_norm_distance << ',' << r.hs_distance_j1 << ','
       << r.hs_distance_j2 << "\n";
  return os.str();
}

inline std::string log_det_branch_csv(const LogDetBranch& branch) {
  std::ostringstream os;
  os.precision(17);
  os << kCsvHeader << "\n"
     << "parameter,re,im_unwound\n";
  for (size_t k = 0; k < branch.parameters.size(); ++k)
    os << branch.parameters[k] << ',' << branch.values[k].real() << ','
       << branch.values[k].imag() << "\n";
  return os.str();
}

inline json witten_report_json(const WittenReport& rep) {
  json delta = json::array();
  for (const auto& [lam, val] : rep.delta_r_samples)
    delta.push_back(json::array({lam, val}));
  json j{{"lebesgue_right_H", rep.lebesgue_right_H},
         {"lebesgue_right_A", rep.lebesgue_right_A},
         {"lebesgue_left_A", rep.lebesgue_left_A},
         {"witten_index", rep.witten_index},
         {"delta_r_samples", std::move(delta)},
         {"diagnostics",
          {{"consistency_residual", rep.consistency_residual},
           {"delta_r_residual", rep.delta_r_residual}}}};
  if (rep.plateau_window)
    j["plateau_window"] =
        json::array({rep.plateau_window->first, rep.plateau_window->second});
  return j;
}

inline json hypothesis_report_json(const HypothesisReport& rep) {
  json per_n = json::array();
  for (const auto& [n, v] : rep.integral_bn_prime_trace)
    per_n.push_back(json{{"n", n}, {"integral_trace_norm", v}});
  return json{{"integral_bprime_opnorm", rep.integral_bprime_opnorm},
              {"sup_bprime_opnorm", rep.sup_bprime_opnorm},
              {"hs_bplus_resolvent", rep.hs_bplus_resolvent},
              {"hs_bprime_h0_resolvent", rep.hs_bprime_h0_resolvent},
              {"relative_bound_aprime", rep.relative_bound_aprime},
              {"integral_bn_prime_trace", std::move(per_n)},
              {"pass",
               {{"b1_integrable", rep.pass_b1_integrable},
                {"bprime_bounded", rep.pass_bprime_bounded},
                {"hs_bplus", rep.pass_hs_bplus},
                {"hs_bprime_h0", rep.pass_hs_bprime_h0},
                {"relative_bound", rep.pass_relative_bound},
                {"bn_prime_trace", rep.pass_bn_prime_trace},
                {"all", rep.all_pass()}}}};
}

}  // namespace witten
