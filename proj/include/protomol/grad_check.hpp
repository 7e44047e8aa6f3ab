#pragma once

#include <functional>
#include <vector>

#include "protomol/tape.hpp"
#include "protomol/tensor.hpp"

namespace protomol {

// Builds a scalar from the given leaves; must be a pure function of them.
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckEntry {
  int leaf = 0;
  int coord = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
  bool kink = false;  // one-sided slopes disagree; excluded from the verdict
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0.0;  // over non-kink coordinates
  int kinks_excluded = 0;
  double tol = 0.0;

  bool passed() const { return max_rel_err < tol; }
};

// Central-difference check of tape gradients: for each coordinate of each
// leaf, compares (f(x+h e) - f(x-h e)) / 2h against the recorded gradient
// with relative error |a-b| / max(1, |a|, |b|). Coordinates where the two
// one-sided slopes disagree are flagged as non-differentiable points and
// excluded.
GradCheckReport grad_check(const ScalarFn& f, std::vector<Tensor> point,
                           double h, double tol);

}  // namespace protomol
