#include "protomol/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "protomol/errors.hpp"

namespace protomol {

namespace {

double eval_at(const ScalarFn& f, const std::vector<Tensor>& point) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (const Tensor& t : point) {
    Tensor copy = t;
    copy.set_requires_grad(false);
    leaves.push_back(tape.leaf(std::move(copy)));
  }
  Var y = f(tape, leaves);
  const Tensor& out = tape.value(y);
  if (out.rows() != 1 || out.cols() != 1)
    throw NonScalarOutput("grad_check target must produce a scalar");
  return out[0];
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& f, std::vector<Tensor> point,
                           double h, double tol) {
  // Analytic pass.
  Tape tape;
  std::vector<Var> leaves;
  for (const Tensor& t : point) {
    Tensor copy = t;
    copy.set_requires_grad(true);
    leaves.push_back(tape.leaf(std::move(copy)));
  }
  Var y = f(tape, leaves);
  const Tensor& out = tape.value(y);
  if (out.rows() != 1 || out.cols() != 1)
    throw NonScalarOutput("grad_check target must produce a scalar");
  tape.backward(y);
  std::vector<Tensor> analytic;
  analytic.reserve(leaves.size());
  for (Var v : leaves) analytic.push_back(tape.grad(v));

  const double f0 = out[0];

  GradCheckReport report;
  report.tol = tol;
  for (size_t li = 0; li < point.size(); ++li) {
    for (int i = 0; i < point[li].size(); ++i) {
      const double orig = point[li][i];
      point[li][i] = orig + h;
      const double fp = eval_at(f, point);
      point[li][i] = orig - h;
      const double fm = eval_at(f, point);
      point[li][i] = orig;

      GradCheckEntry e;
      e.leaf = static_cast<int>(li);
      e.coord = i;
      e.analytic = analytic[li][i];
      e.numeric = (fp - fm) / (2.0 * h);

      const double dplus = (fp - f0) / h;
      const double dminus = (f0 - fm) / h;
      const double slope_scale = std::max({1.0, std::abs(dplus), std::abs(dminus)});
      e.kink = std::abs(dplus - dminus) > 1e-3 * slope_scale;

      e.rel_err = std::abs(e.analytic - e.numeric) /
                  std::max({1.0, std::abs(e.analytic), std::abs(e.numeric)});
      if (e.kink) {
        report.kinks_excluded++;
      } else {
        report.max_rel_err = std::max(report.max_rel_err, e.rel_err);
      }
      report.entries.push_back(e);
    }
  }
  return report;
}

}  // namespace protomol
