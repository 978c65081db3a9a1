#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fafkit/errors.hpp"

namespace faf {

/// Outcome of a sampled estimator run.
struct EstimateReport {
  double mean = 0.0;
  double std_error = 0.0;
  long n_shots = 0;
  int n_batches = 1;
  uint64_t seed = 0;
  std::vector<double> batch_means;  // empty when batching is not used
  std::optional<std::string> warning;
};

/// Number of median-of-means batches for failure probability delta:
/// ceil(8 ln(1/delta)), at least 1.
int mom_batch_count(double delta);

/// Median of a list (copies; average of the middle two for even length).
double median(std::vector<double> xs);

double sample_mean(std::span<const double> xs);
/// Unbiased sample variance; zero for fewer than two points.
double sample_variance(std::span<const double> xs);

/// Plain-mean report: mean, std error sqrt(var/N).
EstimateReport mean_report(std::span<const double> xs, uint64_t seed);

/// Median-of-means over `n_batches` equal contiguous batches. The reported
/// std_error is the spread of the batch means around the median scaled by
/// 1/sqrt(n_batches).
EstimateReport median_of_means_report(std::span<const double> xs,
                                      int n_batches, uint64_t seed);

}  // namespace faf
