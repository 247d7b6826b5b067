#pragma once

#include <cstddef>

namespace afford::linalg {

#if defined(__SIZEOF_FLOAT128__)
using accum_t = __float128;
#else
using accum_t = long double;
#endif

// y = W x, W is m x n row-major.
inline void matvec(const double* w, int m, int n, const double* x, double* y) {
  for (int i = 0; i < m; ++i) {
    const double* wi = w + static_cast<size_t>(i) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += wi[j] * x[j];
    y[i] = s;
  }
}

// y += W x
inline void matvec_add(const double* w, int m, int n, const double* x, double* y) {
  for (int i = 0; i < m; ++i) {
    const double* wi = w + static_cast<size_t>(i) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += wi[j] * x[j];
    y[i] += s;
  }
}

// dx += W^T dy, W is m x n row-major, dy length m, dx length n.
inline void matvec_t_add(const double* w, int m, int n, const double* dy, double* dx) {
  for (int i = 0; i < m; ++i) {
    const double* wi = w + static_cast<size_t>(i) * n;
    double g = dy[i];
    if (g == 0.0) continue;
    for (int j = 0; j < n; ++j) dx[j] += g * wi[j];
  }
}

// dW += a b^T, a length m, b length n.
inline void outer_add(double* dw, const double* a, int m, const double* b, int n) {
  for (int i = 0; i < m; ++i) {
    double ai = a[i];
    if (ai == 0.0) continue;
    double* row = dw + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) row[j] += ai * b[j];
  }
}

inline void add(double* y, const double* x, int n) {
  for (int i = 0; i < n; ++i) y[i] += x[i];
}

inline void copy(double* y, const double* x, int n) {
  for (int i = 0; i < n; ++i) y[i] = x[i];
}

inline double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace afford::linalg
