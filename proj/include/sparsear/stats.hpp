#pragma once

#include <cstddef>
#include <vector>

namespace sparsear {

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
};

/// Quantile with linear interpolation between order statistics
/// (q in [0, 1]); `sorted` must be ascending and nonempty.
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Throws InvalidInputError on an empty sample.
Summary summarize(std::vector<double> values);

}  // namespace sparsear
