#ifndef NFHN_FFT_HPP
#define NFHN_FFT_HPP

/*
 * Thin deterministic wrapper around FFTW complex transforms.  Plans are
 * created once per (size, direction) with FFTW_ESTIMATE and reused through
 * the new-array execute interface; a mutex guards the cache because plan
 * creation is not thread safe.
 */

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace nfhn {

namespace detail {

inline fftw_plan fft_plan(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(n, sign);
  const auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> tmp(n);
  fftw_plan p = fftw_plan_dft_1d(
      n, reinterpret_cast<fftw_complex*>(tmp.data()),
      reinterpret_cast<fftw_complex*>(tmp.data()), sign,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

}

// In-place unnormalized forward transform.
inline void fft_forward(std::vector<std::complex<double>>& a) {
  auto* d = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(detail::fft_plan(static_cast<int>(a.size()), FFTW_FORWARD),
                   d, d);
}

// In-place inverse transform normalized by 1/n.
inline void fft_inverse(std::vector<std::complex<double>>& a) {
  auto* d = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(detail::fft_plan(static_cast<int>(a.size()), FFTW_BACKWARD),
                   d, d);
  const double s = 1.0 / static_cast<double>(a.size());
  for (auto& z : a) z *= s;
}

}

#endif
