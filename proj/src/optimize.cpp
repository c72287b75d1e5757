// SPDX-License-Identifier: Apache-2.0
#include "evoboss/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace evoboss {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool better(double fa, double xa, double fb, double xb) {
  return fa > fb || (fa == fb && xa < xb);
}

}  // namespace

Maximum1D maximize_1d(const std::function<double(double)>& f, double x0,
                      const Maximize1DOptions& options) {
  if (!(options.lower <= options.upper)) throw std::invalid_argument("maximize_1d: empty interval");
  if (!(options.rho_end > 0.0) || !(options.rho_begin >= options.rho_end)) {
    throw std::invalid_argument("maximize_1d: need rho_begin >= rho_end > 0");
  }
  Maximum1D result;
  auto eval = [&](double x) {
    ++result.evaluations;
    double v = f(x);
    return std::isfinite(v) ? v : kNegInf;
  };

  const double span = options.upper - options.lower;
  double x = std::clamp(x0, options.lower, options.upper);
  double fx = eval(x);
  double rho = std::min(options.rho_begin, std::max(span, options.rho_end));

  while (rho >= options.rho_end && result.evaluations < options.max_evaluations) {
    double xl = std::max(options.lower, x - rho);
    double xr = std::min(options.upper, x + rho);
    double fl = xl < x ? eval(xl) : kNegInf;
    double fr = xr > x ? eval(xr) : kNegInf;

    // Uphill move: prefer the left probe on ties.
    bool left_up = xl < x && better(fl, xl, fx, x);
    bool right_up = xr > x && fr > fx;
    if (left_up || right_up) {
      if (left_up && (!right_up || !(fr > fl))) {
        x = xl;
        fx = fl;
      } else {
        x = xr;
        fx = fr;
      }
      rho = std::min(rho * 2.0, std::max(span, options.rho_end));
      continue;
    }

    // Incumbent is best of the three; try the vertex of the interpolating quadratic.
    if (xl < x && xr > x && std::isfinite(fl) && std::isfinite(fr) && std::isfinite(fx)) {
      double d1 = x - xl;
      double d2 = xr - x;
      double s1 = (fx - fl) / d1;
      double s2 = (fr - fx) / d2;
      double curvature = (s2 - s1) / (xr - xl);
      if (curvature < 0.0) {
        double slope_mid = (s1 * d2 + s2 * d1) / (d1 + d2);
        double vertex = std::clamp(x - slope_mid / (2.0 * curvature), xl, xr);
        if (std::abs(vertex - x) > 0.0) {
          double fv = eval(vertex);
          if (better(fv, vertex, fx, x)) {
            x = vertex;
            fx = fv;
          }
        }
      }
    }
    rho *= 0.1;
  }
  result.x = x;
  result.value = fx;
  return result;
}

}  // namespace evoboss
