#pragma once

// N-way replicated storage with strict-majority voting. Writes store the
// value in every replica; reads return the value held by more than N/2
// replicas, repair the minority, and feed the adaptive-redundancy policy.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpm::rt {

class NoMajority : public std::runtime_error {
 public:
  explicit NoMajority(const std::string& name)
      : std::runtime_error("no majority among replicas of '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Replica-count adjustment rule: grow by two when the failure-risk estimate
/// exceeds `escalate_threshold`, shrink by two after `deescalate_after`
/// consecutive windows of discrepancy-free reads.
struct AdaptPolicy {
  std::size_t window = 16;
  double escalate_threshold = 0.25;
  std::size_t deescalate_after = 4;
  int n_min = 3;
  int n_max = 9;

  void validate() const {
    if (window == 0) throw std::invalid_argument("AdaptPolicy: window must be positive");
    if (n_min < 3 || n_min % 2 == 0 || n_max % 2 == 0 || n_min > n_max) {
      throw std::invalid_argument("AdaptPolicy: n_min and n_max must be odd with 3 <= n_min <= n_max");
    }
    if (escalate_threshold < 0.0 || escalate_threshold > 1.0) {
      throw std::invalid_argument("AdaptPolicy: escalate_threshold must lie in [0, 1]");
    }
  }
};

struct VoteStats {
  std::uint64_t reads = 0;
  std::uint64_t vote_failures = 0;
  std::map<int, std::uint64_t> discrepancy_histogram;
  std::deque<int> window;  // discrepancy count of the most recent reads
  double failure_risk = 0.0;
};

struct Adaptation {
  int from = 0;
  int to = 0;
  friend bool operator==(const Adaptation&, const Adaptation&) = default;
};

template <typename T>
struct ReadOutcome {
  T value;
  int discrepancies = 0;
  std::optional<Adaptation> adaptation;
};

template <typename T>
class ReplicaSet {
 public:
  explicit ReplicaSet(std::string name, int replicas = 3, AdaptPolicy policy = {},
                      std::size_t bank_stride_bytes = 4096)
      : name_(std::move(name)), policy_(policy) {
    policy_.validate();
    if (replicas < 3 || replicas % 2 == 0) {
      throw std::invalid_argument("replica count must be odd and >= 3");
    }
    stride_ = std::max<std::size_t>(1, (bank_stride_bytes + sizeof(T) - 1) / sizeof(T));
    resize(replicas, T{});
  }

  const std::string& name() const { return name_; }
  int size() const { return n_; }
  const AdaptPolicy& policy() const { return policy_; }
  const VoteStats& stats() const { return stats_; }
  /// Elements between consecutive replicas in the backing store.
  std::size_t bank_stride() const { return stride_; }

  const T& replica(std::size_t i) const { return banks_.at(check_index(i) * stride_); }
  std::vector<T> replicas() const {
    std::vector<T> out;
    for (int i = 0; i < n_; ++i) out.push_back(banks_[static_cast<std::size_t>(i) * stride_]);
    return out;
  }

  void write(const T& value) {
    for (int i = 0; i < n_; ++i) banks_[static_cast<std::size_t>(i) * stride_] = value;
  }

  /// Voted read. Throws NoMajority (leaving replicas untouched) when no value
  /// is held by a strict majority.
  ReadOutcome<T> read() {
    std::optional<T> winner;
    int votes = 0;
    for (int i = 0; i < n_ && !winner; ++i) {
      const T& candidate = banks_[static_cast<std::size_t>(i) * stride_];
      int count = 0;
      for (int j = 0; j < n_; ++j) {
        if (banks_[static_cast<std::size_t>(j) * stride_] == candidate) ++count;
      }
      if (2 * count > n_) {
        winner = candidate;
        votes = count;
      }
    }
    if (!winner) {
      ++stats_.vote_failures;
      throw NoMajority(name_);
    }

    ReadOutcome<T> out{*winner, n_ - votes, std::nullopt};
    write(*winner);  // repair the minority
    ++stats_.reads;
    ++stats_.discrepancy_histogram[out.discrepancies];
    stats_.window.push_back(out.discrepancies);
    if (stats_.window.size() > policy_.window) stats_.window.pop_front();
    update_risk();

    if (out.discrepancies == 0) {
      if (++clean_streak_ == policy_.window) {
        clean_streak_ = 0;
        ++clean_windows_;
      }
    } else {
      clean_streak_ = 0;
      clean_windows_ = 0;
    }

    if (stats_.failure_risk > policy_.escalate_threshold && n_ < policy_.n_max) {
      out.adaptation = Adaptation{n_, std::min(n_ + 2, policy_.n_max)};
    } else if (clean_windows_ >= policy_.deescalate_after && n_ > policy_.n_min) {
      out.adaptation = Adaptation{n_, std::max(n_ - 2, policy_.n_min)};
    }
    if (out.adaptation) {
      resize(out.adaptation->to, *winner);
      stats_.window.clear();
      clean_streak_ = 0;
      clean_windows_ = 0;
      update_risk();
    }
    return out;
  }

  /// Overwrites one replica, modelling a memory upset.
  void inject_fault(std::size_t index, const T& corrupt) { banks_[check_index(index) * stride_] = corrupt; }

 private:
  std::size_t check_index(std::size_t i) const {
    if (i >= static_cast<std::size_t>(n_)) {
      throw std::out_of_range("replica index " + std::to_string(i) + " out of range for '" +
                              name_ + "' (" + std::to_string(n_) + " replicas)");
    }
    return i;
  }

  void resize(int n, const T& fill) {
    banks_.resize(static_cast<std::size_t>(n) * stride_);
    n_ = n;
    write(fill);
  }

  // Discrepancies that threaten the majority: at least floor(N/2) replicas
  // disagreeing with the winner.
  void update_risk() {
    const int critical = n_ / 2;
    const auto risky = std::count_if(stats_.window.begin(), stats_.window.end(),
                                     [&](int d) { return d >= critical && d > 0; });
    stats_.failure_risk = static_cast<double>(risky) / static_cast<double>(policy_.window);
  }

  std::string name_;
  AdaptPolicy policy_;
  std::size_t stride_ = 1;
  int n_ = 0;
  std::vector<T> banks_;
  VoteStats stats_;
  std::size_t clean_streak_ = 0;
  std::size_t clean_windows_ = 0;
};

}  // namespace cpm::rt
