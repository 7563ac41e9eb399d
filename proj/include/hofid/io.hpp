#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hofid/fidelity.hpp"
#include "hofid/scaling.hpp"

namespace hofid {

inline constexpr const char* kSweepHeader = "L,lambda,energy,gap,F_plus_h,chi2,chi3,chi3_abs,fit_residual,flag";

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// 17 significant digits, so parsing returns the identical double.
std::string format_double(double value);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

/// Names accepted by column_value: energy, gap, F_plus_h, chi2, chi3, chi3_abs, fit_residual.
bool is_sweep_quantity(const std::string& quantity);
double column_value(const SweepRow& row, const std::string& quantity);

struct SweepColumn {
  std::vector<double> lambdas;
  std::vector<double> values;
};

/// Finite entries of one quantity, grouped by chain length, in grid order.
std::map<int, SweepColumn> columns_by_size(const std::vector<SweepRow>& rows, const std::string& quantity);

nlohmann::json to_json(const PeakRecord& peak);
PeakRecord peak_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScalingResult& result);

/// One polyline per chain length.
std::string render_sweep_svg(const std::vector<SweepRow>& rows, const std::string& quantity);
/// Peak positions, the fitted line and the extrapolated intercept.
std::string render_scaling_svg(const ScalingResult& result);

}  // namespace hofid
