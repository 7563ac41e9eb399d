#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "hofid/io.hpp"

using namespace hofid;

namespace {

std::vector<SweepRow> sample_rows() {
  std::vector<SweepRow> rows;
  for (int L : {8, 10}) {
    for (int i = 0; i < 3; ++i) {
      SweepRow r;
      r.sites = L;
      r.lambda = 0.1 * i;
      r.energy = -0.4 * L - 0.1 / 3.0 * i;
      r.gap = 1.0 / 7.0;
      r.f_plus_h = 1.0 - 1e-7 / 3.0;
      r.chi2 = 0.1 + i / 3.0;
      r.chi3 = -2.0 / 3.0 * i;
      r.chi3_abs = std::abs(r.chi3);
      r.fit_residual = 1.234567890123456789e-19;
      rows.push_back(r);
    }
  }
  rows.back().flag = "near_degenerate";
  rows.back().chi2 = std::numeric_limits<double>::quiet_NaN();
  return rows;
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::vector<SweepRow> parse(const std::string& text) {
  std::istringstream in(text);
  return read_sweep_csv(in);
}

}  // namespace

TEST_CASE("CSV round trip is exact") {
  const auto rows = sample_rows();
  std::ostringstream out;
  write_sweep_csv(out, rows);
  const std::string text = out.str();
  CHECK(text.rfind(std::string(kSweepHeader) + "\n", 0) == 0);
  const auto back = parse(text);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].sites == rows[i].sites);
    CHECK(same(back[i].lambda, rows[i].lambda));
    CHECK(same(back[i].energy, rows[i].energy));
    CHECK(same(back[i].gap, rows[i].gap));
    CHECK(same(back[i].f_plus_h, rows[i].f_plus_h));
    CHECK(same(back[i].chi2, rows[i].chi2));
    CHECK(same(back[i].chi3, rows[i].chi3));
    CHECK(same(back[i].chi3_abs, rows[i].chi3_abs));
    CHECK(same(back[i].fit_residual, rows[i].fit_residual));
    CHECK(back[i].flag == rows[i].flag);
  }
  std::ostringstream again;
  write_sweep_csv(again, back);
  CHECK(again.str() == text);
}

TEST_CASE("17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("malformed CSV reports the line") {
  const std::string header = std::string(kSweepHeader) + "\n";
  const std::string good = "8,0.1,-3.5,0.5,0.99,0.1,0.2,0.2,0,ok\n";
  try {
    parse(header + good + "8,0.2,-3.4,0.5,0.99,zero,0.2,0.2,0,ok\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("chi2") != std::string::npos);
  }
  try {
    parse(header + good + good + "8,0.3,-3.3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("L,lambda,energy\n8,0.1,-3\n"), ParseError);
}

TEST_CASE("columns are matched by name and blank lines are skipped") {
  const std::string text =
      "flag,chi3_abs,chi3,chi2,F_plus_h,gap,energy,lambda,L,fit_residual\n"
      "ok,0.5,-0.5,0.25,0.999,0.3,-3.0,0.2,8,0\n\n";
  const auto rows = parse(text);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].sites == 8);
  CHECK(rows[0].chi3 == -0.5);
}

TEST_CASE("columns by size keep finite values in grid order") {
  const auto cols = columns_by_size(sample_rows(), "chi2");
  REQUIRE(cols.size() == 2);
  CHECK(cols.at(8).values.size() == 3);
  CHECK(cols.at(10).values.size() == 2);
  CHECK(cols.at(10).lambdas[1] == 0.1);
  CHECK(is_sweep_quantity("chi3_abs"));
  CHECK_FALSE(is_sweep_quantity("chi4"));
  CHECK_THROWS_AS(columns_by_size(sample_rows(), "chi4"), std::invalid_argument);
}

TEST_CASE("peak JSON round trip") {
  PeakRecord p;
  p.sites = 16;
  p.lambda_peak = 0.2571234;
  p.peak_value = 3.5;
  p.grid_index = 25;
  p.refinement_offset = 0.0071234;
  p.prominence = 1.25;
  const auto q = peak_from_json(to_json(p));
  CHECK(q.sites == 16);
  CHECK(q.lambda_peak == p.lambda_peak);
  CHECK(q.grid_index == 25);
  CHECK(q.prominence == 1.25);
  CHECK_THROWS_AS(peak_from_json(nlohmann::json{{"L", 14}}), std::invalid_argument);
}

TEST_CASE("SVG rendering") {
  const auto rows = sample_rows();
  const auto svg = render_sweep_svg(rows, "chi3_abs");
  CHECK(svg.find("<svg") != std::string::npos);
  std::size_t lines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
  CHECK(lines == 2);
  CHECK(svg.find("chi3_abs") != std::string::npos);
  CHECK(svg.find("L=10") != std::string::npos);
  CHECK_THROWS_AS(render_sweep_svg({}, "chi2"), std::invalid_argument);
  CHECK_THROWS_AS(render_sweep_svg(rows, "bogus"), std::invalid_argument);

  ScalingResult r;
  r.points = {PeakRecord{14, 0.3}, PeakRecord{16, 0.29}, PeakRecord{18, 0.28}};
  r.slope = 0.8;
  r.lambda_c = 0.245;
  const auto fit = render_scaling_svg(r);
  CHECK(fit.find("<circle") != std::string::npos);
  CHECK(fit.find("<line") != std::string::npos);
  CHECK_THROWS_AS(render_scaling_svg(ScalingResult{}), std::invalid_argument);
}
