#include "mvbif/report_io.hpp"

#include <cmath>
#include <cstdio>

#include "mvbif/errors.hpp"

namespace mvbif {

using json = nlohmann::json;

json to_json(const Eigen::MatrixXd& M) {
  json data = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) data.push_back(M(i, j));
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const MeanField& mf) { return {{"r_v", to_json(mf.r_v)}, {"r_k", to_json(mf.r_k)}}; }

json to_json(const FixedPointResult& r) {
  return {{"alpha", r.measure.alpha},
          {"meanfield", to_json(r.meanfield)},
          {"residual", r.residual_inf},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

json to_json(const MultiStartResult& r) {
  json sols = json::array();
  for (const auto& s : r.solutions) sols.push_back(to_json(s));
  return {{"count", r.solutions.size()}, {"non_converged", r.non_converged}, {"solutions", sols}};
}

json to_json(const SpectralReport& r, bool with_eigenvalues) {
  json j = {{"alpha", r.alpha},
            {"det2", r.det2},
            {"sign", r.sign},
            {"min_abs_one_plus_kappa", r.min_abs_one_plus_kappa}};
  if (with_eigenvalues) {
    json ev = json::array();
    for (const auto& z : r.eigenvalues) ev.push_back({z.real(), z.imag()});
    j["eigenvalues"] = std::move(ev);
  }
  return j;
}

json to_json(const CrossingScan& s) {
  json samples = json::array();
  for (const auto& x : s.samples) {
    json j = x.valid ? to_json(x.report) : json{{"alpha", x.alpha}};
    j["valid"] = x.valid;
    samples.push_back(std::move(j));
  }
  json brackets = json::array();
  for (const auto& [a, b] : s.brackets) brackets.push_back({a, b});
  return {{"samples", samples}, {"brackets", brackets}};
}

json to_json(const BifurcationReport& r) {
  json j = {{"model", r.model},
            {"alpha0", r.alpha0},
            {"sigma0", r.sigma0},
            {"trivial_rv", to_json(r.trivial_rv)},
            {"G_alpha0", to_json(r.G_alpha0)},
            {"J_alpha0", to_json(r.J_alpha0)},
            {"core", to_json(r.core)},
            {"M_K", to_json(r.M_K)},
            {"block", to_json(r.block)},
            {"rank_block", r.rank_block},
            {"rank_core", r.rank_core},
            {"multiplicity", r.multiplicity},
            {"multiplicity_odd", r.multiplicity_odd},
            {"min_abs_core_eigenvalue", r.min_abs_core_eigenvalue},
            {"rank_condition_holds", r.rank_condition_holds},
            {"scalar_check_used", r.scalar_check_used},
            {"v2_invertible", r.v2_invertible},
            {"v2_margin", r.v2_margin},
            {"det2_below", r.det2_below},
            {"det2_above", r.det2_above},
            {"det2_sign_change", r.det2_sign_change},
            {"verdict", r.verdict}};
  if (r.scalar_check_used) j["one_plus_M0"] = r.one_plus_M0;
  return j;
}

json to_json(const DawsonAudit& a) {
  json j = {{"beta", a.beta}, {"found", a.found}};
  if (!a.found) return j;
  j.update({{"alpha0", a.alpha0},
            {"sigma0", a.sigma0},
            {"alpha0_in_1_3", a.in_interval},
            {"m2", a.m2},
            {"m4", a.m4},
            {"m6", a.m6},
            {"alpha0_m2", a.alpha0_m2},
            {"ito_residual_2", a.ito_residual_2},
            {"ito_residual_4", a.ito_residual_4},
            {"hankel", a.hankel},
            {"one_plus_M0_integral", a.one_plus_M0_integral},
            {"one_plus_M0_closed", a.one_plus_M0_closed}});
  return j;
}

json to_json(const SimReport& r) {
  json moments = json::object();
  for (const auto& [k, v] : r.moments)
    moments[std::to_string(k)] = {{"mean", v.first}, {"se", v.second}};
  return {{"seed", r.seed},
          {"alpha", r.alpha},
          {"beta", r.beta},
          {"steps", r.steps},
          {"burn_steps", r.burn_steps},
          {"moments", moments},
          {"histogram", {{"lo", r.histogram_lo}, {"hi", r.histogram_hi}, {"counts", r.histogram}}}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  try {
    const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (Eigen::Index(data.size()) != rows * cols) throw ParseError("matrix data has the wrong length", "/data");
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = data[i * cols + c].get<double>();
    return M;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed matrix: ") + e.what(), "");
  }
}

namespace {

void write(std::string& out, const json& j, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(std::size_t(indent) * d, ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        newline(depth + 1);
        write(out, j[i], indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      // keep it a JSON float so the type survives a re-parse
      if (std::string_view(buf).find_first_of(".eEn") == std::string_view::npos) out += ".0";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  return out;
}

}  // namespace mvbif
