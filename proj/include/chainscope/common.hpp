#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace chainscope {

inline constexpr const char* kToolName = "chainscope";
inline constexpr const char* kVersion = "0.1.0";

using NodeId = std::uint32_t;

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent run configuration. CLI exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Requested scale is below what the model can resolve. CLI exit code 2.
class ResolutionError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

// A configured cap (node count, state count, enumeration size) was hit.
// CLI exit code 3.
class CapacityError : public Error {
public:
  using Error::Error;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

// Fixed-size bitset over node ids.
class NodeSet {
public:
  NodeSet() = default;
  explicit NodeSet(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  std::size_t universe_size() const { return n_; }

  void set(std::size_t i) { w_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
  void clear(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool test(std::size_t i) const {
    return (w_[i >> 6] >> (i & 63)) & 1;
  }
  void reset() { std::fill(w_.begin(), w_.end(), 0); }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto x : w_) c += static_cast<std::size_t>(std::popcount(x));
    return c;
  }
  bool empty() const {
    for (auto x : w_)
      if (x) return false;
    return true;
  }

  NodeSet& operator|=(const NodeSet& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
  }
  NodeSet& operator&=(const NodeSet& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
  }

  bool is_subset_of(const NodeSet& o) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i] & ~o.w_[i]) return false;
    return true;
  }

  friend bool operator==(const NodeSet& a, const NodeSet& b) {
    return a.n_ == b.n_ && a.w_ == b.w_;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto x : w_) {
      h ^= x;
      h *= 0x100000001b3ull;
    }
    return h;
  }

  template <class F>
  void for_each(F f) const {
    for (std::size_t wi = 0; wi < w_.size(); ++wi) {
      std::uint64_t x = w_[wi];
      while (x) {
        unsigned b = static_cast<unsigned>(std::countr_zero(x));
        f(static_cast<NodeId>(wi * 64 + b));
        x &= x - 1;
      }
    }
  }

  std::vector<NodeId> to_vector() const {
    std::vector<NodeId> out;
    for_each([&](NodeId v) { out.push_back(v); });
    return out;
  }

private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

// Least-squares slope of y against x.
inline double least_squares_slope(std::span<const double> xs,
                                  std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw Error("least_squares_slope: need at least two samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  if (den == 0) throw Error("least_squares_slope: degenerate x range");
  return num / den;
}

// Runs fn(i) for i in [0, n). Work is chunked over `jobs` threads; results
// must be written to per-index slots so the outcome is order-independent.
inline void parallel_for(std::size_t n, unsigned jobs,
                         const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::atomic<std::size_t> next{0};
  for (unsigned t = 0; t < jobs; ++t) {
    threads.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace chainscope
