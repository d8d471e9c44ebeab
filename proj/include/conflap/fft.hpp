#pragma once

// Thin complex-DFT layer over FFTW with a per-size plan cache.

#include <complex>
#include <cstddef>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "conflap/errors.hpp"

namespace conflap::fft {

using cvec = std::vector<std::complex<double>>;

namespace detail {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  // Plans are created with FFTW_ESTIMATE on scratch buffers, then reused via
  // the new-array interface. Planner calls are not thread safe, hence the lock.
  PlanPair get(int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
    auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
    PlanPair pair;
    pair.forward = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    pair.backward = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(n, pair);
    return pair;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [n, pair] : plans_) {
      fftw_destroy_plan(pair.forward);
      fftw_destroy_plan(pair.backward);
    }
  }

  std::mutex mutex_;
  std::map<int, PlanPair> plans_;
};

inline cvec execute(const cvec& input, bool forward) {
  const int n = static_cast<int>(input.size());
  if (n == 0) return {};
  const PlanPair plans = PlanCache::instance().get(n);
  // New-array execution requires the same alignment the plan was made with.
  auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
  auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
  std::memcpy(in, input.data(), sizeof(fftw_complex) * static_cast<std::size_t>(n));
  fftw_execute_dft(forward ? plans.forward : plans.backward, in, out);
  cvec result(static_cast<std::size_t>(n));
  std::memcpy(static_cast<void*>(result.data()), out, sizeof(fftw_complex) * static_cast<std::size_t>(n));
  fftw_free(in);
  fftw_free(out);
  return result;
}

}  // namespace detail

/// Unnormalized forward DFT, X_k = sum_j x_j exp(-2 pi i jk/N).
inline cvec forward(const cvec& x) { return detail::execute(x, true); }

/// Inverse DFT including the 1/N factor.
inline cvec inverse(const cvec& X) {
  cvec x = detail::execute(X, false);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : x) v *= scale;
  return x;
}

inline cvec forward_real(const std::vector<double>& x) {
  cvec c(x.begin(), x.end());
  return forward(c);
}

inline std::vector<double> inverse_real(const cvec& X) {
  const cvec x = inverse(X);
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i].real();
  return r;
}

/// Signed frequency index of bin k: 0, 1, ..., N/2, -(N/2-1), ..., -1.
inline int signed_index(int k, int n) { return k <= n / 2 ? k : k - n; }

/// Multiply the spectrum of real samples x by symbol(signed index) and transform back.
/// With zero_nyquist the N/2 bin is dropped, which keeps odd symbols real.
template <class Symbol>
std::vector<double> apply_symbol(const std::vector<double>& x, Symbol&& symbol, bool zero_nyquist = false) {
  const int n = static_cast<int>(x.size());
  cvec X = forward_real(x);
  for (int k = 0; k < n; ++k) {
    const int j = signed_index(k, n);
    if (zero_nyquist && n % 2 == 0 && k == n / 2) {
      X[static_cast<std::size_t>(k)] = 0.0;
    } else {
      X[static_cast<std::size_t>(k)] *= symbol(j);
    }
  }
  return inverse_real(X);
}

inline bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

}  // namespace conflap::fft
