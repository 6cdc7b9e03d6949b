#pragma once

#include <cstddef>
#include <vector>

namespace motgnn {

double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// F1 of class 1; 0 when no true or predicted positives exist.
double f1_score(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Rank-sum AUC with average ranks for ties. Computed through an integer
// pair count so it matches exhaustive pair enumeration bit for bit.
double auc(const std::vector<int>& y_true, const std::vector<double>& scores);

struct Summary {
    double mean = 0.0;
    double sd = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Mean, sample standard deviation and 95% confidence interval
// mean +- t_{0.975,n-1} * sd / sqrt(n).
Summary summarize(const std::vector<double>& values);

// Two-sided 95% Student t critical value; exact table for df <= 200,
// normal limit beyond.
double t_quantile_975(std::size_t df);

} // namespace motgnn
