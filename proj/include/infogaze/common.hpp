#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace infogaze {

inline constexpr const char* kToolName = "infogaze";
inline constexpr const char* kToolVersion = "1.0.0";

// Machine-readable error kinds. The CLI maps these to the "error" field of
// the JSON emitted on stderr; library users can switch on them.
enum class Errc {
  all_zero,
  negative_value,
  non_finite,
  negative_sigma,
  empty_points,
  zero_density_at_fixation,
  image_mismatch,
  degenerate_bounds,
  single_image,
  empty_grids,
  too_few_subjects,
  missing_grid,
  constant_model,
  out_of_support,
  bad_magic,
  truncated_file,
  version_unsupported,
  malformed_header,
  malformed_row,
  validation_failed,
  missing_artifact,
  zero_prior,
  support_violation,
  empty_list,
  degenerate_anchors,
  constant_vector,
  non_finite_objective,
  missing_map,
  io_error,
  bad_config,
};

std::string_view errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  Errc code() const { return code_; }
  const std::string& message() const { return message_; }

 private:
  Errc code_;
  std::string message_;
};

// FNV-1a, used to stamp outputs with a stable hash of the run config.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Runs fn(0..n-1) on up to `jobs` threads. Work items must write only to
// their own slots; results are then independent of the schedule.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace infogaze
