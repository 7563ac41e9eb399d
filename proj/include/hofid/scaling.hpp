#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hofid {

struct PeakRecord {
  int sites = 0;
  /// Vertex of the parabola through the grid maximum and its two neighbours.
  double lambda_peak = 0.0;
  double peak_value = 0.0;
  std::size_t grid_index = 0;
  /// lambda_peak minus the grid abscissa of the maximum.
  double refinement_offset = 0.0;
  double prominence = 0.0;
};

/// Interior local maxima whose prominence (height above the higher of the
/// two bases, each base being the lowest point before a higher sample or the
/// column edge) reaches min_prominence. Ascending by grid index.
std::vector<PeakRecord> find_peaks(std::span<const double> lambdas, std::span<const double> values,
                                   double min_prominence);

/// Highest qualifying peak, or nothing (a featureless column).
std::optional<PeakRecord> find_peak(std::span<const double> lambdas, std::span<const double> values,
                                    double min_prominence);

/// fraction * (max - min) of the column, the default prominence threshold.
double relative_prominence(std::span<const double> values, double fraction = 0.02);

enum class ScalingVariable { inv_L, inv_L2 };

const char* to_string(ScalingVariable variable);
ScalingVariable parse_scaling_variable(const std::string& text);
double scaling_abscissa(ScalingVariable variable, int sites);

struct ScalingResult {
  ScalingVariable variable = ScalingVariable::inv_L;
  std::vector<PeakRecord> points;
  double slope = 0.0;
  /// Fitted lambda_peak at 1/L -> 0.
  double lambda_c = 0.0;
  double intercept_std_error = 0.0;
  double slope_std_error = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of lambda_peak against 1/L or 1/L^2.
ScalingResult extrapolate(std::vector<PeakRecord> peaks, ScalingVariable variable);

}  // namespace hofid
