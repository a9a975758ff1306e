#include "csnk/csfd.hpp"

#include <algorithm>
#include <cstdlib>

#include "csnk/csv.hpp"

namespace csnk {

std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::FFD:
      return "FFD";
    case SchemeKind::CFD:
      return "CFD";
    case SchemeKind::CSFD1:
      return "CSFD1";
    case SchemeKind::CSFD2:
      return "CSFD2";
  }
  return "?";
}

DiffScheme::DiffScheme(SchemeKind k, double step) : kind(k), h(step) { detail::require_step(step); }

double relative_error(double approx, double exact) {
  return std::fabs(approx - exact) / std::max(std::fabs(exact), 1e-300);
}

std::vector<double> log_grid(int from_exp, int to_exp) {
  std::vector<double> grid;
  for (int e = from_exp; e >= to_exp; --e) grid.push_back(std::strtod(("1e" + std::to_string(e)).c_str(), nullptr));
  return grid;
}

void write_error_curve_csv(std::ostream& out, const std::vector<ErrorRow>& rows) {
  out << "scheme,h,rel_error\n";
  for (const auto& r : rows)
    out << scheme_name(r.scheme) << ',' << csv::format_double(r.h) << ',' << csv::format_double(r.rel_error) << '\n';
}

}  // namespace csnk
