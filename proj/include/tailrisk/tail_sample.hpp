#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tailrisk {

/// Descending-sorted copy of a series. Built once and shared by every
/// estimator that sweeps k over the same data.
class OrderStatistics {
 public:
  explicit OrderStatistics(std::span<const double> series);

  std::size_t size() const { return desc_.size(); }
  std::size_t positive_count() const { return m_positive_; }

  /// X_{n-i+1,n}, i.e. the i-th largest observation (1-based).
  double largest(std::size_t i) const { return desc_[i - 1]; }

  std::span<const double> descending() const { return desc_; }

 private:
  std::vector<double> desc_;
  std::size_t m_positive_ = 0;
};

/// The k log-spacings log X_{n-i+1,n} - log X_{n-k,n}, i = 1..k, together
/// with the threshold X_{n-k,n}.
///
/// Invariants: 1 <= k <= n-1, threshold > 0, top_log is non-negative and
/// non-increasing.
class TailSample {
 public:
  /// Throws std::invalid_argument when n < 3 or k is outside [1, n-1], and
  /// std::domain_error when X_{n-k,n} <= 0.
  TailSample(const OrderStatistics& stats, std::size_t k);

  std::size_t n() const { return n_; }
  std::size_t k() const { return top_log_.size(); }
  double threshold() const { return threshold_; }
  std::size_t m_positive() const { return m_positive_; }
  std::span<const double> top_log() const { return top_log_; }

 private:
  std::size_t n_;
  std::size_t m_positive_;
  double threshold_;
  std::vector<double> top_log_;
};

TailSample build_tail_sample(std::span<const double> series, std::size_t k);

}  // namespace tailrisk
