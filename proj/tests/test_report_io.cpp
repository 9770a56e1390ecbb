#include "doctest.h"

#include <cmath>
#include <limits>

#include "mvbif/errors.hpp"
#include "mvbif/report_io.hpp"

using namespace mvbif;
using nlohmann::json;

TEST_CASE("floats are written with 17 significant digits") {
  json j = {{"a", 0.1}, {"b", 2.0}, {"c", 1e300}, {"d", -0.0}, {"n", 3}, {"s", "x"}, {"t", true}};
  const std::string s = dump_json(j, -1);
  CHECK(s == R"({"a":0.10000000000000001,"b":2.0,"c":1.0000000000000001e+300,"d":-0.0,"n":3,"s":"x","t":true})");
  json back = json::parse(s);
  CHECK(back["a"].get<double>() == 0.1);
  CHECK(back["b"].is_number_float());
  CHECK(back["n"].is_number_integer());
}

TEST_CASE("every double survives a round trip") {
  for (double v : {M_PI, 1.0 / 3.0, 5.94468752, 1e-310, -2.2250738585072014e-308, 123456789.0}) {
    json back = json::parse(dump_json(json{{"v", v}}));
    CHECK(back["v"].get<double>() == v);
  }
}

TEST_CASE("non-finite values become null") {
  json j = json::array({std::numeric_limits<double>::infinity(), std::nan("")});
  CHECK(dump_json(j, -1) == "[null,null]");
}

TEST_CASE("indentation and empty containers") {
  json j = {{"e", json::array()}, {"o", json::object()}, {"v", {1, 2}}};
  CHECK(dump_json(j) == "{\n  \"e\": [],\n  \"o\": {},\n  \"v\": [\n    1,\n    2\n  ]\n}");
}

TEST_CASE("matrices round trip row-major") {
  Eigen::MatrixXd M(2, 3);
  M << 1, 2, 3, 4, 5, 6.5;
  json j = to_json(M);
  CHECK(j["data"] == json({1.0, 2.0, 3.0, 4.0, 5.0, 6.5}));
  CHECK(matrix_from_json(json::parse(dump_json(j))) == M);
  CHECK_THROWS_AS(matrix_from_json(json{{"rows", 2}, {"cols", 2}, {"data", {1.0}}}), ParseError);
  CHECK_THROWS_AS(matrix_from_json(json{{"rows", 2}}), ParseError);
}

TEST_CASE("report objects carry their schema keys") {
  SpectralReport sr;
  sr.eigenvalues = {{0.5, 0.0}, {-0.2, 0.1}};
  json s = to_json(sr, true);
  CHECK(s["eigenvalues"][1] == json({-0.2, 0.1}));
  for (const char* k : {"alpha", "det2", "sign", "min_abs_one_plus_kappa"}) CHECK(s.contains(k));

  DawsonAudit missing;
  json a = to_json(missing);
  CHECK(a.size() == 2);
  CHECK(a["found"] == false);

  SimReport rep;
  rep.moments[2] = {0.9, 0.01};
  rep.histogram = {1, 2};
  json r = to_json(rep);
  CHECK(r["moments"]["2"]["se"].get<double>() == 0.01);
  CHECK(r["histogram"]["counts"] == json({1, 2}));
}
