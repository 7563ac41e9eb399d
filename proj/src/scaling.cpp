#include "hofid/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace hofid {

namespace {

void check_column(std::span<const double> lambdas, std::span<const double> values) {
  if (lambdas.size() != values.size()) throw std::invalid_argument("lambda and value columns differ in length");
  if (lambdas.size() < 5) throw std::invalid_argument("peak search needs at least 5 grid points");
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("lambda grid must be strictly ascending");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("peak search column contains non-finite values");
  }
}

double prominence_at(std::span<const double> y, std::size_t peak) {
  double left_min = y[peak];
  for (std::size_t j = peak; j-- > 0;) {
    if (y[j] > y[peak]) break;
    left_min = std::min(left_min, y[j]);
  }
  double right_min = y[peak];
  for (std::size_t j = peak + 1; j < y.size(); ++j) {
    if (y[j] > y[peak]) break;
    right_min = std::min(right_min, y[j]);
  }
  return y[peak] - std::max(left_min, right_min);
}

}  // namespace

std::vector<PeakRecord> find_peaks(std::span<const double> lambdas, std::span<const double> values,
                                   double min_prominence) {
  check_column(lambdas, values);
  std::vector<PeakRecord> peaks;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (!(values[i] > values[i - 1] && values[i] >= values[i + 1])) continue;
    const double prominence = prominence_at(values, i);
    if (prominence < min_prominence) continue;

    // Vertex of y = y1 + b t + a t^2 with t = lambda - lambda_i.
    const double d0 = lambdas[i - 1] - lambdas[i];
    const double d2 = lambdas[i + 1] - lambdas[i];
    const double s0 = (values[i - 1] - values[i]) / d0;
    const double s2 = (values[i + 1] - values[i]) / d2;
    const double a = (s0 - s2) / (d0 - d2);
    const double b = s0 - a * d0;
    double offset = a < 0.0 ? -b / (2.0 * a) : 0.0;
    offset = std::clamp(offset, d0, d2);

    PeakRecord peak;
    peak.lambda_peak = lambdas[i] + offset;
    peak.peak_value = values[i] + b * offset + a * offset * offset;
    peak.grid_index = i;
    peak.refinement_offset = offset;
    peak.prominence = prominence;
    peaks.push_back(peak);
  }
  return peaks;
}

std::optional<PeakRecord> find_peak(std::span<const double> lambdas, std::span<const double> values,
                                    double min_prominence) {
  const auto peaks = find_peaks(lambdas, values, min_prominence);
  if (peaks.empty()) return std::nullopt;
  return *std::max_element(peaks.begin(), peaks.end(), [&](const PeakRecord& a, const PeakRecord& b) {
    return values[a.grid_index] < values[b.grid_index];
  });
}

double relative_prominence(std::span<const double> values, double fraction) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return fraction * (*hi - *lo);
}

const char* to_string(ScalingVariable variable) {
  return variable == ScalingVariable::inv_L ? "inv_L" : "inv_L2";
}

ScalingVariable parse_scaling_variable(const std::string& text) {
  if (text == "inv_L") return ScalingVariable::inv_L;
  if (text == "inv_L2") return ScalingVariable::inv_L2;
  throw std::invalid_argument("unknown scaling variable '" + text + "' (expected inv_L or inv_L2)");
}

double scaling_abscissa(ScalingVariable variable, int sites) {
  const double inv = 1.0 / static_cast<double>(sites);
  return variable == ScalingVariable::inv_L ? inv : inv * inv;
}

ScalingResult extrapolate(std::vector<PeakRecord> peaks, ScalingVariable variable) {
  if (peaks.size() < 3) {
    throw std::invalid_argument("extrapolation needs at least 3 peaks, got " + std::to_string(peaks.size()));
  }
  std::set<int> seen;
  for (const auto& p : peaks) {
    if (p.sites <= 0) throw std::invalid_argument("peak record without a chain length");
    if (!seen.insert(p.sites).second) {
      throw std::invalid_argument("duplicate chain length L=" + std::to_string(p.sites) + " in peak list");
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const PeakRecord& a, const PeakRecord& b) { return a.sites < b.sites; });

  const auto n = static_cast<double>(peaks.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : peaks) {
    mean_x += scaling_abscissa(variable, p.sites);
    mean_y += p.lambda_peak;
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : peaks) {
    const double dx = scaling_abscissa(variable, p.sites) - mean_x;
    const double dy = p.lambda_peak - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("scaling abscissae are identical");

  ScalingResult result;
  result.variable = variable;
  result.slope = sxy / sxx;
  result.lambda_c = mean_y - result.slope * mean_x;

  double ssr = 0.0;
  for (const auto& p : peaks) {
    const double fit = result.lambda_c + result.slope * scaling_abscissa(variable, p.sites);
    ssr += (p.lambda_peak - fit) * (p.lambda_peak - fit);
  }
  const double sigma2 = ssr / (n - 2.0);
  result.slope_std_error = std::sqrt(sigma2 / sxx);
  result.intercept_std_error = std::sqrt(sigma2 * (1.0 / n + mean_x * mean_x / sxx));
  result.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  result.points = std::move(peaks);
  return result;
}

}  // namespace hofid
