#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "modlab/error.hpp"

namespace modlab {

namespace detail {
// The FFTW planner is not re-entrant; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

enum class FftDirection { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

// Unnormalized 1-D complex DFT of fixed length. forward uses exp(-2 pi i jk/N),
// backward exp(+2 pi i jk/N). execute() is safe to call from several threads.
class FftPlan {
 public:
  FftPlan(std::size_t n, FftDirection dir) : n_(n) {
    if (n == 0) throw ConfigError("FFT length must be positive");
    std::vector<std::complex<double>> a(n), b(n);
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(a.data()),
                             reinterpret_cast<fftw_complex*>(b.data()), static_cast<int>(dir),
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_ == nullptr) throw Error("FFTW failed to create a plan");
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  ~FftPlan() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }

  std::size_t size() const noexcept { return n_; }

  void execute(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const {
    if (in.size() != n_ || out.size() != n_) throw ConfigError("FFT buffer length mismatch");
    // FFTW does not write the input of an out-of-place complex transform.
    fftw_execute_dft(plan_,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
  }

 private:
  std::size_t n_;
  fftw_plan plan_ = nullptr;
};

}  // namespace modlab
