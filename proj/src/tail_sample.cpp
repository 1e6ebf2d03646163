#include "tailrisk/tail_sample.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace tailrisk {

OrderStatistics::OrderStatistics(std::span<const double> series)
    : desc_(series.begin(), series.end()) {
  for (double x : desc_) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("series contains a non-finite value");
    }
    if (x > 0.0) ++m_positive_;
  }
  std::stable_sort(desc_.begin(), desc_.end(), std::greater<>());
}

TailSample::TailSample(const OrderStatistics& stats, std::size_t k)
    : n_(stats.size()), m_positive_(stats.positive_count()) {
  if (n_ < 3) {
    throw std::invalid_argument("tail sample needs at least 3 observations, got " +
                                std::to_string(n_));
  }
  if (k < 1 || k > n_ - 1) {
    throw std::invalid_argument("k = " + std::to_string(k) + " outside [1, " +
                                std::to_string(n_ - 1) + "]");
  }
  threshold_ = stats.largest(k + 1);
  if (!(threshold_ > 0.0)) {
    throw std::domain_error("threshold X_{n-k,n} = " + std::to_string(threshold_) +
                            " is not positive at k = " + std::to_string(k));
  }
  const double log_thr = std::log(threshold_);
  top_log_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    top_log_[i] = std::log(stats.largest(i + 1)) - log_thr;
  }
}

TailSample build_tail_sample(std::span<const double> series, std::size_t k) {
  return TailSample(OrderStatistics(series), k);
}

}  // namespace tailrisk
