#include "mvbif/model_io.hpp"

#include <fstream>
#include <sstream>

#include "mvbif/errors.hpp"
#include "mvbif/expr.hpp"

namespace mvbif {

namespace {

using json = nlohmann::json;

std::string join(const std::string& base, const std::string& key) { return base + "/" + key; }

const json& require(const json& obj, const std::string& key, const std::string& at) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing required field '" + key + "'", join(at, key));
  return *it;
}

double number(const json& v, const std::string& at) {
  if (!v.is_number()) throw ParseError("expected a number", at);
  return v.get<double>();
}

const std::string& string(const json& v, const std::string& at) {
  if (!v.is_string()) throw ParseError("expected a string", at);
  return v.get_ref<const std::string&>();
}

Expression expression(const json& v, const std::string& at, const char* var = "x") {
  const std::string& text = string(v, at);
  try {
    return Expression::parse(text, var);
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + " (token '" + e.pointer() + "')", at);
  }
}

SmoothFn smooth(const json& v, const std::string& at) {
  Expression f = expression(v, at);
  Expression df;
  try {
    df = f.derivative();
  } catch (const ParseError& e) {
    throw ParseError(e.what(), at);
  }
  return {f, df};
}

std::vector<SmoothFn> basis(const json& obj, const std::string& key, const std::string& at) {
  std::vector<SmoothFn> out;
  auto it = obj.find(key);
  if (it == obj.end()) return out;
  const std::string here = join(at, key);
  if (!it->is_array()) throw ParseError("expected an array of expressions", here);
  for (std::size_t i = 0; i < it->size(); ++i)
    out.push_back(smooth((*it)[i], join(here, std::to_string(i))));
  return out;
}

Eigen::MatrixXd matrix(const json& obj, const std::string& key, Eigen::Index n,
                       const std::string& at) {
  auto it = obj.find(key);
  const std::string here = join(at, key);
  if (it == obj.end()) {
    if (n == 0) return Eigen::MatrixXd(0, 0);
    throw ParseError("missing required field '" + key + "'", here);
  }
  if (!it->is_array() || Eigen::Index(it->size()) != n)
    throw ParseError("expected " + std::to_string(n) + " rows", here);
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = (*it)[i];
    const std::string rp = join(here, std::to_string(i));
    if (!row.is_array() || Eigen::Index(row.size()) != n)
      throw ParseError("expected " + std::to_string(n) + " columns", rp);
    for (Eigen::Index j = 0; j < n; ++j) M(i, j) = number(row[j], join(rp, std::to_string(j)));
  }
  return M;
}

TemperatureMap temperature(const json& t, const std::string& at) {
  if (!t.is_object()) throw ParseError("expected an object", at);
  const std::string& kind = string(require(t, "kind", at), join(at, "kind"));
  TemperatureMap map;
  if (kind == "linear") {
    map = TemperatureMap::linear(number(require(t, "slope", at), join(at, "slope")), 0.0,
                                 std::numeric_limits<double>::infinity());
  } else if (kind == "expr") {
    Expression body = expression(require(t, "body", at), join(at, "body"), "alpha");
    Expression deriv = expression(require(t, "deriv", at), join(at, "deriv"), "alpha");
    map.theta = body;
    map.theta_prime = deriv;
  } else {
    throw ParseError("unknown theta kind '" + kind + "'", join(at, "kind"));
  }
  return map;
}

}  // namespace

ModelSpec load_model(const json& doc) {
  if (!doc.is_object()) throw ParseError("model document must be an object", "");
  ModelSpec m;
  m.name = string(require(doc, "name", ""), "/name");
  m.V0 = smooth(require(doc, "V0", ""), "/V0");
  m.temperature = temperature(require(doc, "theta", ""), "/theta");
  m.beta = number(require(doc, "beta", ""), "/beta");
  m.domain_L = number(require(doc, "domain_L", ""), "/domain_L");
  if (!(m.domain_L > 0)) throw ParseError("domain_L must be > 0", "/domain_L");

  if (auto it = doc.find("sigma_scale"); it != doc.end()) m.sigma_scale = number(*it, "/sigma_scale");
  if (auto it = doc.find("symmetric"); it != doc.end()) {
    if (!it->is_boolean()) throw ParseError("expected a boolean", "/symmetric");
    m.symmetric = it->get<bool>();
  }
  if (auto it = doc.find("alpha_range"); it != doc.end()) {
    if (!it->is_array() || it->size() != 2) throw ParseError("expected [lo, hi]", "/alpha_range");
    m.temperature.alpha_lo = number((*it)[0], "/alpha_range/0");
    m.temperature.alpha_hi = number((*it)[1], "/alpha_range/1");
  }

  FiniteRankKernel k;
  if (auto it = doc.find("V1"); it != doc.end()) k.V1 = smooth(*it, "/V1");
  k.v_basis = basis(doc, "v_basis", "");
  k.k_basis = basis(doc, "k_basis", "");
  k.J = matrix(doc, "J", k.l(), "");
  k.G = matrix(doc, "G", k.m(), "");
  m.kernel = std::move(k);

  // J and G symmetry, checked here so a bad file fails at load time.
  Quadrature q = build_grid(m.domain_L, 8, 8);
  validate(m, q);
  return m;
}

ModelSpec load_model_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), "");
  }
  return load_model(doc);
}

ModelSpec load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path.string() + "'", "");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model_text(ss.str());
}

}  // namespace mvbif
