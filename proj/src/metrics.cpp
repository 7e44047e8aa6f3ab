#include "protomol/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "protomol/errors.hpp"

namespace protomol {

double roc_auc(const std::vector<double>& scores,
               const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw LengthMismatch("roc_auc: scores and labels differ in length");
  long npos = 0, nneg = 0;
  for (int y : labels) {
    if (y == 1) {
      ++npos;
    } else if (y == 0) {
      ++nneg;
    } else {
      throw SingleClassInput("roc_auc: labels must be 0 or 1");
    }
  }
  if (npos == 0 || nneg == 0)
    throw SingleClassInput("roc_auc: both classes must be present");

  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Midranks over tie groups; the positive rank sum gives the U statistic.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * double(i + 1 + j + 1);
    for (size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) pos_rank_sum += midrank;
    }
    i = j + 1;
  }
  const double u = pos_rank_sum - 0.5 * double(npos) * double(npos + 1);
  return u / (double(npos) * double(nneg));
}

double rmse(const std::vector<double>& predictions,
            const std::vector<double>& targets) {
  if (predictions.size() != targets.size() || predictions.empty())
    throw LengthMismatch("rmse: inputs must be nonempty and equal length");
  double sum = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    sum += d * d;
  }
  return std::sqrt(sum / double(predictions.size()));
}

}  // namespace protomol
