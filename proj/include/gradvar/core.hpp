#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gradvar/errors.hpp"
#include "gradvar/loss.hpp"
#include "gradvar/point.hpp"

namespace gradvar {

/// max{1, ln x}; ln of a nonpositive argument is treated as -inf.
inline double log_plus(double x) { return x > 1.0 ? std::max(1.0, std::log(x)) : 1.0; }

enum class HintMode { zero, previous_gradient, external_stream };

/// Produces the optimistic hint h_t available before round t.
class HintPolicy {
 public:
  explicit HintPolicy(HintMode mode = HintMode::previous_gradient) : mode_(mode) {}
  explicit HintPolicy(std::vector<Point> stream)
      : mode_(HintMode::external_stream), stream_(std::move(stream)) {}

  HintMode mode() const noexcept { return mode_; }

  /// Hint for the round following `history` (history holds g_1..g_{t-1}).
  Point hint(const std::vector<Point>& history, std::size_t dim) const {
    switch (mode_) {
      case HintMode::zero:
        return Point::zeros(dim);
      case HintMode::previous_gradient:
        return history.empty() ? Point::zeros(dim) : history.back();
      case HintMode::external_stream:
        if (history.size() >= stream_.size())
          throw StreamError("external hint stream exhausted at round " + std::to_string(history.size() + 1));
        return stream_[history.size()];
    }
    return Point::zeros(dim);
  }

 private:
  HintMode mode_;
  std::vector<Point> stream_;
};

/// Per-round regret bookkeeping for a fixed or moving comparator.
class RegretLedger {
 public:
  struct Round {
    std::size_t t;
    double loss_learner;
    double loss_comparator;
    double linearized;  // <g_t, w_t - u_t>
  };

  void record_round(std::size_t t, double loss_learner, const Point& gradient, const Point& decision,
                    const Point& comparator, double loss_comparator) {
    if (!rounds_.empty() && t <= rounds_.back().t)
      throw ConfigError("ledger rounds must be strictly increasing");
    const double lin = dot(gradient, decision - comparator);
    rounds_.push_back({t, loss_learner, loss_comparator, lin});
    sum_learner_ += loss_learner;
    sum_comparator_ += loss_comparator;
    linearized_ += lin;
  }

  double regret() const noexcept { return sum_learner_ - sum_comparator_; }
  double linearized_regret() const noexcept { return linearized_; }
  double learner_loss() const noexcept { return sum_learner_; }
  double comparator_loss() const noexcept { return sum_comparator_; }
  const std::vector<Round>& rounds() const noexcept { return rounds_; }

 private:
  std::vector<Round> rounds_;
  double sum_learner_ = 0.0;
  double sum_comparator_ = 0.0;
  double linearized_ = 0.0;
};

}  // namespace gradvar
