#include "qcrb/solver.hpp"

#include <cmath>
#include <deque>

namespace qcrb::detail {

DescentResult minimize_smooth(
    const std::function<double(const RealVector&, RealVector*)>& fg, RealVector x0,
    int max_iterations, double objective_tol, int stall_window) {
  DescentResult res;
  res.x = std::move(x0);
  if (res.x.size() == 0) {
    res.f = fg(res.x, nullptr);
    res.converged = true;
    return res;
  }

  RealVector grad(res.x.size());
  double f = fg(res.x, &grad);
  double f_best = f;
  RealVector x_prev = res.x, g_prev = grad;
  bool have_prev = false;
  double level_gap = 1e-2 * std::max(1.0, std::abs(f));
  std::deque<double> best_history;

  int it = 0;
  for (; it < max_iterations; ++it) {
    const double gnorm2 = grad.squaredNorm();
    if (gnorm2 < 1e-28) {
      res.converged = true;
      break;
    }

    double step;
    if (have_prev) {
      const RealVector s = res.x - x_prev;
      const RealVector y = grad - g_prev;
      const double sy = s.dot(y);
      step = (sy > 1e-30) ? s.squaredNorm() / sy
                          : (f - (f_best - level_gap)) / gnorm2;
    } else {
      step = (f - (f_best - level_gap)) / gnorm2;
    }
    if (!(step > 0.0) || !std::isfinite(step)) step = 1.0 / std::sqrt(gnorm2);

    // Armijo backtracking keeps the iteration monotone.
    double f_new = 0.0;
    RealVector x_new;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = res.x - step * grad;
      f_new = fg(x_new, nullptr);
      if (std::isfinite(f_new) && f_new <= f - 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }

    if (accepted) {
      x_prev = res.x;
      g_prev = grad;
      have_prev = true;
      res.x = x_new;
      f = fg(res.x, &grad);
      if (f < f_best) f_best = f;
    } else {
      level_gap *= 0.5;
      have_prev = false;
      if (level_gap < 1e-15 * std::max(1.0, std::abs(f_best))) {
        res.converged = true;
        ++it;
        break;
      }
    }

    best_history.push_back(f_best);
    if (static_cast<int>(best_history.size()) > stall_window) {
      const double old = best_history.front();
      best_history.pop_front();
      res.final_delta = old - f_best;
      if (res.final_delta <= objective_tol * std::max(1.0, std::abs(f_best))) {
        res.converged = true;
        ++it;
        break;
      }
    }
  }

  res.f = f;
  res.iterations = it;
  return res;
}

}  // namespace qcrb::detail
