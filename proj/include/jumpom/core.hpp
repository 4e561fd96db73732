#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace jumpom {

constexpr int kMaxDim = 2;

/// State vector of dimension 1 or 2. Fixed upper bound keeps it off the heap.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Vec make_vec(const std::vector<double>& values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

enum class ErrorKind {
  input,       // malformed config, expression or file
  validation,  // model violates a stated invariant
  numerical,   // solver or simulation failure at run time
};

/// Library error. Carries the originating module so the CLI can name it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based split of a master seed: every (index, channel) pair gets its own stream.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index, std::uint64_t channel) {
  return splitmix64(splitmix64(master ^ splitmix64(channel + 0x632BE59BD9B4E019ULL)) + index);
}

inline Engine make_engine(std::uint64_t master, std::uint64_t index, std::uint64_t channel) {
  return Engine(substream_seed(master, index, channel));
}

/// Channels used by the simulators. Fixed so that streams line up across modules.
namespace channel {
constexpr std::uint64_t noise = 1;
constexpr std::uint64_t jumps = 2;
constexpr std::uint64_t bootstrap = 3;
constexpr std::uint64_t initial = 4;
}  // namespace channel

// ---------------------------------------------------------------------------
// Parallel loops
// ---------------------------------------------------------------------------

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n). Work is split into contiguous blocks, so callers
/// that write results by index and reduce afterwards in index order get
/// output independent of the thread count.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(n, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace jumpom
