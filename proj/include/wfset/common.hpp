#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wfset {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double inf = std::numeric_limits<double>::infinity();

enum class ErrorCode {
  invalid_spec,
  invalid_element,
  spec_mismatch,
  outside_orbit,
  unsupported,
  precondition,
  quadrature,
  config,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_spec: return "invalid-spec";
    case ErrorCode::invalid_element: return "invalid-element";
    case ErrorCode::spec_mismatch: return "spec-mismatch";
    case ErrorCode::outside_orbit: return "outside-orbit";
    case ErrorCode::unsupported: return "unsupported-combination";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::quadrature: return "quadrature";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

//! Thread count: WFSET_THREADS overrides the OpenMP default.
inline int thread_count() {
  if (const char* env = std::getenv("WFSET_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/**
 * @brief Data-parallel loop over [0, n).
 *
 * Callers write into pre-sized per-index slots and reduce afterwards in index
 * order, so results do not depend on the thread count.
 */
template <typename F>
void parallel_for(std::int64_t n, F&& f) {
#ifdef _OPENMP
  const int nt = thread_count();
  std::exception_ptr first;
  std::int64_t first_index = n;
  std::mutex m;
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
      std::lock_guard lock(m);
      if (i < first_index) {
        first_index = i;
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
#else
  for (std::int64_t i = 0; i < n; ++i) f(i);
#endif
}

}  // namespace wfset
