// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace evoboss {

struct Maximum1D {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

struct Maximize1DOptions {
  double lower = 0.0;
  double upper = 1.0;
  double rho_begin = 0.1;
  double rho_end = 1e-4;
  int max_evaluations = 500;
};

// Derivative-free local maximization on [lower, upper].
//
// A step of size rho probes both sides of the incumbent. An uphill probe is
// accepted and rho grows; when the incumbent beats both probes a quadratic
// model through the three points proposes its vertex, then rho shrinks by ten.
// Terminates once rho falls below rho_end, so the returned point is resolved to
// about rho_end. Non-finite objective values count as -inf. Equal values are
// resolved toward smaller x.
Maximum1D maximize_1d(const std::function<double(double)>& f, double x0,
                      const Maximize1DOptions& options);

}  // namespace evoboss
