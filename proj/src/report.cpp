#include "fafkit/report.hpp"

#include <algorithm>
#include <cmath>

namespace faf {

int mom_batch_count(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ContractError("mom_batch_count: delta must be in (0, 1)");
  return std::max(1, static_cast<int>(std::ceil(8.0 * std::log(1.0 / delta))));
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw ContractError("median: empty input");
  const size_t m = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + m, xs.end());
  double hi = xs[m];
  if (xs.size() % 2 == 1) return hi;
  std::nth_element(xs.begin(), xs.begin() + m - 1, xs.begin() + m);
  return 0.5 * (xs[m - 1] + hi);
}

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) throw ContractError("sample_mean: empty input");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

EstimateReport mean_report(std::span<const double> xs, uint64_t seed) {
  EstimateReport r;
  r.mean = sample_mean(xs);
  r.std_error = std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
  r.n_shots = static_cast<long>(xs.size());
  r.n_batches = 1;
  r.seed = seed;
  return r;
}

EstimateReport median_of_means_report(std::span<const double> xs,
                                      int n_batches, uint64_t seed) {
  if (n_batches < 1) throw ContractError("median_of_means: n_batches < 1");
  if (xs.size() < static_cast<size_t>(n_batches))
    throw ContractError("median_of_means: fewer samples than batches");
  const size_t per = xs.size() / static_cast<size_t>(n_batches);
  std::vector<double> means(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    // Trailing remainder shots fold into the last batch.
    const size_t lo = per * static_cast<size_t>(b);
    const size_t hi = (b == n_batches - 1) ? xs.size() : lo + per;
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += xs[i];
    means[b] = s / static_cast<double>(hi - lo);
  }
  EstimateReport r;
  r.mean = median(means);
  const double spread = std::sqrt(sample_variance(means));
  r.std_error = spread / std::sqrt(static_cast<double>(n_batches));
  r.n_shots = static_cast<long>(xs.size());
  r.n_batches = n_batches;
  r.seed = seed;
  r.batch_means = std::move(means);
  return r;
}

}  // namespace faf
