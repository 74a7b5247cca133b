#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "gpso/error.hpp"

namespace gpso {

struct FdReport {
  double max_rel_err = 0.0;
  std::size_t worst_coord = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Central finite differences of `loss` against an analytic gradient, always
// in 64-bit. Relative error uses max(|analytic|, |numeric|, 1e-8) as the
// denominator, so a sabotaged (zeroed) coordinate reports an error near 1.
inline FdReport finite_diff_check(const std::function<double(const std::vector<double>&)>& loss,
                                  const std::vector<double>& analytic_grad,
                                  std::vector<double> params, double h = 1e-5) {
  if (analytic_grad.size() != params.size()) {
    throw InputError("finite_diff_check: gradient/parameter size mismatch");
  }
  if (!(h > 0.0)) throw InputError("finite_diff_check: h must be positive");
  FdReport rep;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params[i];
    params[i] = orig + h;
    const double up = loss(params);
    params[i] = orig - h;
    const double down = loss(params);
    params[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = analytic_grad[i];
    double denom = std::fabs(numeric);
    if (std::fabs(analytic) > denom) denom = std::fabs(analytic);
    if (denom < 1e-8) denom = 1e-8;
    const double rel = std::fabs(numeric - analytic) / denom;
    if (rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_coord = i;
      rep.worst_analytic = analytic;
      rep.worst_numeric = numeric;
    }
  }
  return rep;
}

}  // namespace gpso
