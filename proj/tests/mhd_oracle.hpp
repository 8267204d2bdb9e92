// Test-side oracle: RK4 integration of the vector-form incompressible MHD
// system (v, B), assembled from plain vector operators. Deliberately
// independent of the tensor transport path it cross-checks.
#pragma once

#include "ifdm/integrator.hpp"

namespace ifdm::test {

struct VecState {
  Field v, B;
};

inline VecState vec_rhs(const VecState& s, Real nu, Real eta, bool dealias) {
  const PeriodicGrid& g = s.v.grid;
  Field flux = make_tensor(g);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Real* out = flux.comp(tensor_comp(i, j));
      const Real* vi = s.v.comp(i);
      const Real* vj = s.v.comp(j);
      const Real* bi = s.B.comp(i);
      const Real* bj = s.B.comp(j);
      for (std::size_t q = 0; q < g.points(); ++q)
        out[q] = vi[q] * vj[q] - bi[q] * bj[q];
    }
  VecState r;
  Field divflux = div_tensor_rowwise(flux, Backend::spectral, dealias);
  scale(divflux, -1.0);
  r.v = leray_project(divflux);
  if (nu > 0.0) axpy(nu, laplacian(s.v), r.v);

  Field bxv = make_vector(g);
  for (int p = 0; p < 3; ++p)
    for (int m = 0; m < 3; ++m)
      for (int sx = 0; sx < 3; ++sx) {
        const int e = levi_civita(p, m, sx);
        if (e == 0) continue;
        const Real* bm = s.B.comp(m);
        const Real* vs = s.v.comp(sx);
        Real* out = bxv.comp(p);
        for (std::size_t q = 0; q < g.points(); ++q)
          out[q] += e * bm[q] * vs[q];
      }
  r.B = curl_vector(bxv, Backend::spectral, dealias);
  scale(r.B, -1.0);
  if (eta > 0.0) axpy(eta, laplacian(s.B), r.B);
  return r;
}

inline VecState vec_step(const VecState& s, Real dt, Real nu, Real eta,
                         bool dealias) {
  VecState k1 = vec_rhs(s, nu, eta, dealias);
  VecState s2{lincomb(1.0, s.v, 0.5 * dt, k1.v), lincomb(1.0, s.B, 0.5 * dt, k1.B)};
  VecState k2 = vec_rhs(s2, nu, eta, dealias);
  VecState s3{lincomb(1.0, s.v, 0.5 * dt, k2.v), lincomb(1.0, s.B, 0.5 * dt, k2.B)};
  VecState k3 = vec_rhs(s3, nu, eta, dealias);
  VecState s4{lincomb(1.0, s.v, dt, k3.v), lincomb(1.0, s.B, dt, k3.B)};
  VecState k4 = vec_rhs(s4, nu, eta, dealias);
  VecState out;
  out.v = s.v;
  axpy(dt / 6.0, k1.v, out.v);
  axpy(dt / 3.0, k2.v, out.v);
  axpy(dt / 3.0, k3.v, out.v);
  axpy(dt / 6.0, k4.v, out.v);
  out.v = leray_project(out.v);
  out.B = s.B;
  axpy(dt / 6.0, k1.B, out.B);
  axpy(dt / 3.0, k2.B, out.B);
  axpy(dt / 3.0, k3.B, out.B);
  axpy(dt / 6.0, k4.B, out.B);
  return out;
}

}  // namespace ifdm::test
