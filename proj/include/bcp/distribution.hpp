#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "bcp/errors.hpp"

namespace bcp {

// Neumaier-compensated accumulator. The enumeration sums run over millions
// of terms spanning many orders of magnitude; plain summation would eat the
// 1e-12 tolerances the exact tables are held to.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// A finite measure stored as (configuration, log weight) pairs. Weights are
// accumulated in log space and exponentiated once against the running
// maximum, so tables stay usable at parameter corners where raw weights span
// dozens of decades.
template <class Key>
class FiniteDistribution {
 public:
  void reserve(std::size_t n) {
    keys_.reserve(n);
    log_weight_.reserve(n);
  }

  void add(const Key& k, double log_weight) {
    keys_.push_back(k);
    log_weight_.push_back(log_weight);
  }

  // Computes probabilities and the log normalizing constant. Must be called
  // once after the last add().
  void normalize() {
    if (keys_.empty()) throw validation_error("distribution: empty support");
    double m = -std::numeric_limits<double>::infinity();
    for (double lw : log_weight_) m = std::max(m, lw);
    if (!std::isfinite(m)) throw validation_error("distribution: no finite weight");
    KahanSum z;
    prob_.resize(keys_.size());
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      prob_[i] = std::exp(log_weight_[i] - m);
      z.add(prob_[i]);
    }
    const double total = z.value();
    for (double& p : prob_) p /= total;
    log_total_ = m + std::log(total);
  }

  std::size_t size() const { return keys_.size(); }
  const Key& config(std::size_t i) const { return keys_[i]; }
  double log_weight(std::size_t i) const { return log_weight_[i]; }
  double probability(std::size_t i) const { return prob_[i]; }

  // log of the partition function (sum of raw weights).
  double log_total() const { return log_total_; }
  double total() const { return std::exp(log_total_); }

  template <class Pred>
  double probability_where(Pred&& pred) const {
    KahanSum s;
    for (std::size_t i = 0; i < keys_.size(); ++i)
      if (pred(keys_[i])) s.add(prob_[i]);
    return s.value();
  }

  template <class Fn>
  double expectation(Fn&& fn) const {
    KahanSum s;
    for (std::size_t i = 0; i < keys_.size(); ++i)
      s.add(prob_[i] * fn(keys_[i]));
    return s.value();
  }

 private:
  std::vector<Key> keys_;
  std::vector<double> log_weight_;
  std::vector<double> prob_;
  double log_total_ = -std::numeric_limits<double>::infinity();
};

}  // namespace bcp
