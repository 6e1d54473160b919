#include "wsireg/kernels.hpp"

#include "kernels_impl.hpp"

namespace wsireg::kernels {

namespace {

using detail::OpsTable;

#if WSIREG_HAVE_AVX2_SOURCES
bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }
#endif

const OpsTable* table_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &detail::scalar_table();
    case Backend::avx2:
#if WSIREG_HAVE_AVX2_SOURCES
      if (cpu_has_avx2()) return &detail::avx2_table();
#endif
      return nullptr;
    case Backend::neon:
#if WSIREG_HAVE_NEON_SOURCES
      return &detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

struct Dispatch {
  const OpsTable* ops;
  Backend backend;
};

Dispatch& dispatch() {
  static Dispatch d = [] {
    if (const OpsTable* t = table_for(Backend::avx2))
      return Dispatch{t, Backend::avx2};
    if (const OpsTable* t = table_for(Backend::neon))
      return Dispatch{t, Backend::neon};
    return Dispatch{&detail::scalar_table(), Backend::scalar};
  }();
  return d;
}

}  // namespace

void reset_auto() {
  Dispatch& d = dispatch();
  if (const OpsTable* t = table_for(Backend::avx2)) {
    d = {t, Backend::avx2};
  } else if (const OpsTable* t = table_for(Backend::neon)) {
    d = {t, Backend::neon};
  } else {
    d = {&detail::scalar_table(), Backend::scalar};
  }
}

bool select(Backend b) {
  const OpsTable* t = table_for(b);
  if (!t) return false;
  dispatch() = {t, b};
  return true;
}

Backend active() { return dispatch().backend; }

bool available(Backend b) { return table_for(b) != nullptr; }

const char* name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "?";
}

double sum_sq_diff(const float* a, const float* b, std::size_t n) {
  return dispatch().ops->sum_sq_diff(a, b, n);
}

void convolve_row(const float* padded, float* dst, std::size_t n,
                  const float* k, int taps) {
  dispatch().ops->convolve_row_f(padded, dst, n, k, taps);
}

void convolve_row(const double* padded, double* dst, std::size_t n,
                  const double* k, int taps) {
  dispatch().ops->convolve_row_d(padded, dst, n, k, taps);
}

void axpy(float a, const float* x, float* y, std::size_t n) {
  dispatch().ops->axpy_f(a, x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  dispatch().ops->axpy_d(a, x, y, n);
}

void downsample2x2(const float* r0, const float* r1, float* dst,
                   std::size_t pairs) {
  dispatch().ops->downsample2x2(r0, r1, dst, pairs);
}

double warp_ssd_row(const float* fixed_row, int n, const float* moving,
                    int mw, int mh, double sx0, double sy0, double stepx,
                    double stepy, float fill) {
  return dispatch().ops->warp_ssd_row(fixed_row, n, moving, mw, mh, sx0, sy0,
                                      stepx, stepy, fill);
}

}  // namespace wsireg::kernels
