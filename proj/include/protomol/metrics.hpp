#pragma once

#include <vector>

namespace protomol {

// Rank-based (Mann-Whitney) ROC-AUC: the fraction of (positive, negative)
// pairs the scores order correctly, ties counting one half. Labels must be
// 0/1 with at least one of each.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

double rmse(const std::vector<double>& predictions,
            const std::vector<double>& targets);

}  // namespace protomol
