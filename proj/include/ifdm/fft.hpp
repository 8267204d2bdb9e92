// FFTW workspace management for real 3-d transforms.
//
// Array layout matches Field storage: FFTW dims (d0,d1,d2) = (x3,x2,x1),
// so the halved r2c axis is x1. Plans use FFTW_ESTIMATE so the algorithm
// choice (and hence rounding) is reproducible run to run. Each thread owns
// its workspaces; plan creation is serialized globally.
#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>

#include "ifdm/grid.hpp"

namespace ifdm {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(int n) : n_(n), nc_(static_cast<std::size_t>(n) * n * (n / 2 + 1)) {
    const std::size_t np = static_cast<std::size_t>(n) * n * n;
    real_ = fftw_alloc_real(np);
    cplx_ = fftw_alloc_complex(nc_);
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fwd_ = fftw_plan_dft_r2c_3d(n, n, n, real_, cplx_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_3d(n, n, n, cplx_, real_, FFTW_ESTIMATE);
  }

  ~SpectralWorkspace() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(cplx_);
  }

  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  int n() const { return n_; }
  std::size_t complex_size() const { return nc_; }
  std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  // Forward transform of a real component into the internal complex buffer.
  void forward(const Real* src) {
    for (std::size_t i = 0; i < real_size(); ++i) real_[i] = src[i];
    fftw_execute(fwd_);
  }

  // Inverse transform of the internal complex buffer, including the 1/n^3
  // normalization (FFTW transforms are unnormalized).
  void inverse(Real* dst) {
    fftw_execute(bwd_);
    const Real scale = 1.0 / static_cast<Real>(real_size());
    for (std::size_t i = 0; i < real_size(); ++i) dst[i] = real_[i] * scale;
  }

  std::complex<Real>* modes() {
    return reinterpret_cast<std::complex<Real>*>(cplx_);
  }

  void copy_modes_to(std::complex<Real>* dst) const {
    const std::complex<Real>* src = reinterpret_cast<const std::complex<Real>*>(cplx_);
    for (std::size_t i = 0; i < nc_; ++i) dst[i] = src[i];
  }

  void load_modes(const std::complex<Real>* src) {
    std::complex<Real>* dst = modes();
    for (std::size_t i = 0; i < nc_; ++i) dst[i] = src[i];
  }

  // Integer wavenumber along a full-range axis (x2, x3), wrapped to
  // [-n/2, n/2). The n/2 mode reports as -n/2 here; use keff for operators.
  int wavenumber(int j) const { return j <= n_ / 2 ? j : j - n_; }

  // Wavenumber with the (unsigned) Nyquist mode's coefficient zeroed, the
  // convention that keeps odd-order spectral operators skew-adjoint.
  int keff(int j) const {
    if (n_ % 2 == 0 && j == n_ / 2) return 0;
    return wavenumber(j);
  }

  // Iterate modes: f(linear_index, k1eff, k2eff, k3eff). x1 is the halved
  // axis: j1 = 0..n/2; x2,x3 run the full range.
  template <class F>
  void for_each_mode(F&& f) const {
    const int nh = n_ / 2 + 1;
    std::size_t idx = 0;
    for (int j3 = 0; j3 < n_; ++j3) {
      const int k3 = keff(j3);
      for (int j2 = 0; j2 < n_; ++j2) {
        const int k2 = keff(j2);
        for (int j1 = 0; j1 < nh; ++j1, ++idx) {
          const int k1 = (n_ % 2 == 0 && j1 == n_ / 2) ? 0 : j1;
          f(idx, k1, k2, k3);
        }
      }
    }
  }

 private:
  int n_;
  std::size_t nc_;
  Real* real_;
  fftw_complex* cplx_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

// Per-thread workspace cache keyed by grid size.
inline SpectralWorkspace& workspace_for(int n) {
  thread_local std::map<int, std::unique_ptr<SpectralWorkspace>> cache;
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, std::make_unique<SpectralWorkspace>(n)).first;
  return *it->second;
}

}  // namespace ifdm
