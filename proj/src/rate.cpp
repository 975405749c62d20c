#include "pdm/rate.hpp"

#include <cmath>
#include <stdexcept>

namespace pdm {

FitResult fit_rate(const std::vector<std::pair<double, double>>& points) {
  const std::size_t n = points.size();
  if (n < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (points[i].first == points[j].first)
        throw std::invalid_argument("fit_rate: repeated abscissa makes the design singular");

  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  FitResult fit;
  fit.slope = sxy / sxx;
  double ssr = 0.0;
  const double intercept = my - fit.slope * mx;
  for (const auto& [x, y] : points) {
    const double r = y - (intercept + fit.slope * x);
    ssr += r * r;
  }
  const double sigma2 = ssr / static_cast<double>(n - 2);
  fit.slope_stderr = std::sqrt(sigma2 / sxx);
  fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

std::optional<FitResult> fit_log2_rows(const std::vector<RatePoint>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const RatePoint& r : rows) {
    if (!(r.error > 0.0)) return std::nullopt;
    pts.push_back({std::log2(r.resolution), std::log2(r.error)});
  }
  if (pts.size() < 3) return std::nullopt;
  return fit_rate(pts);
}

}  // namespace pdm
