#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hofid/scaling.hpp"

using namespace hofid;

namespace {

std::vector<double> grid(double lo, double step, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + i * step);
  return g;
}

PeakRecord peak(int L, double at) {
  PeakRecord p;
  p.sites = L;
  p.lambda_peak = at;
  return p;
}

}  // namespace

TEST_CASE("parabola vertex between grid points is recovered exactly") {
  const auto x = grid(0.0, 0.01, 51);
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 - 40.0 * (v - 0.25) * (v - 0.25));
  // Shift so the vertex sits between grid points.
  std::vector<double> y_off;
  for (double v : x) y_off.push_back(3.0 - 40.0 * (v - 0.2537) * (v - 0.2537));
  const auto p = find_peak(x, y_off, relative_prominence(y_off));
  REQUIRE(p.has_value());
  CHECK(std::abs(p->lambda_peak - 0.2537) < 1e-12);
  CHECK(p->grid_index == 25);
  CHECK(std::abs(p->refinement_offset) <= 0.01);
  const auto q = find_peak(x, y, relative_prominence(y));
  REQUIRE(q.has_value());
  CHECK(std::abs(q->lambda_peak - 0.25) < 1e-12);

  SUBCASE("vertical scaling does not move the peak") {
    std::vector<double> scaled;
    for (double v : y_off) scaled.push_back(17.5 * v);
    const auto s = find_peak(x, scaled, relative_prominence(scaled));
    REQUIRE(s.has_value());
    CHECK(std::abs(s->lambda_peak - p->lambda_peak) < 1e-12);
  }
}

TEST_CASE("monotone and flat columns have no peak") {
  const auto x = grid(0.0, 0.01, 51);
  std::vector<double> up, flat(51, 2.0);
  for (double v : x) up.push_back(std::exp(5 * v));
  CHECK_FALSE(find_peak(x, up, relative_prominence(up)).has_value());
  CHECK_FALSE(find_peak(x, flat, relative_prominence(flat)).has_value());
}

TEST_CASE("edge maxima are not interior peaks") {
  const auto x = grid(0.0, 0.1, 6);
  const std::vector<double> y = {5, 1, 2, 1, 0.5, 6};
  const auto peaks = find_peaks(x, y, 0.5);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].grid_index == 2);
  CHECK(peaks[0].prominence == doctest::Approx(1.0));
}

TEST_CASE("prominence threshold suppresses small wiggles") {
  const auto x = grid(0.0, 0.1, 7);
  const std::vector<double> y = {0, 10, 9.9, 10.05, 5, 2, 0};
  const auto all = find_peaks(x, y, 0.0);
  CHECK(all.size() == 2);
  const auto strong = find_peaks(x, y, relative_prominence(y, 0.02));
  REQUIRE(strong.size() == 1);
  CHECK(strong[0].grid_index == 3);
  CHECK(find_peak(x, y, 0.0)->grid_index == 3);
}

TEST_CASE("peak search input errors") {
  const std::vector<double> short_x = {0, 1, 2, 3};
  CHECK_THROWS_AS(find_peak(short_x, short_x, 0.0), std::invalid_argument);
  const std::vector<double> unsorted = {0, 2, 1, 3, 4};
  CHECK_THROWS_AS(find_peak(unsorted, unsorted, 0.0), std::invalid_argument);
  const std::vector<double> x = {0, 1, 2, 3, 4};
  const std::vector<double> y = {0, 1, NAN, 1, 0};
  CHECK_THROWS_AS(find_peak(x, y, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(find_peak(x, std::vector<double>{1, 2}, 0.0), std::invalid_argument);
}

TEST_CASE("exact linear data is recovered") {
  std::vector<PeakRecord> peaks;
  for (int L : {14, 16, 18, 20}) peaks.push_back(peak(L, 0.24 + 0.5 / L));
  const auto r = extrapolate(peaks, ScalingVariable::inv_L);
  CHECK(std::abs(r.lambda_c - 0.24) < 1e-12);
  CHECK(std::abs(r.slope - 0.5) < 1e-10);
  CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.intercept_std_error < 1e-10);

  std::vector<PeakRecord> quad;
  for (int L : {14, 16, 18}) quad.push_back(peak(L, 0.2411 - 3.0 / (L * L)));
  CHECK(std::abs(extrapolate(quad, ScalingVariable::inv_L2).lambda_c - 0.2411) < 1e-12);
}

TEST_CASE("extrapolation does not depend on input order and reports errors") {
  std::vector<PeakRecord> peaks = {peak(14, 0.30), peak(16, 0.29), peak(18, 0.285), peak(20, 0.276)};
  const auto a = extrapolate(peaks, ScalingVariable::inv_L);
  std::mt19937 rng(3);
  std::shuffle(peaks.begin(), peaks.end(), rng);
  const auto b = extrapolate(peaks, ScalingVariable::inv_L);
  CHECK(a.lambda_c == doctest::Approx(b.lambda_c).epsilon(1e-14));
  CHECK(a.intercept_std_error > 0.0);
  CHECK(a.points.front().sites == 14);

  CHECK_THROWS_AS(extrapolate({peak(14, 0.3), peak(16, 0.29)}, ScalingVariable::inv_L), std::invalid_argument);
  CHECK_THROWS_AS(extrapolate({peak(14, 0.3), peak(14, 0.29), peak(16, 0.28)}, ScalingVariable::inv_L),
                  std::invalid_argument);
}

TEST_CASE("scaling variable names") {
  CHECK(parse_scaling_variable("inv_L") == ScalingVariable::inv_L);
  CHECK(parse_scaling_variable("inv_L2") == ScalingVariable::inv_L2);
  CHECK(std::string(to_string(ScalingVariable::inv_L2)) == "inv_L2");
  CHECK_THROWS_AS(parse_scaling_variable("L"), std::invalid_argument);
  CHECK(scaling_abscissa(ScalingVariable::inv_L2, 20) == doctest::Approx(1.0 / 400.0).epsilon(1e-15));
}
