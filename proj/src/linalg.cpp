#include "ghshift/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace ghshift {

Mat3 Mat3::identity() { return diag(1.0, 1.0, 1.0); }

Mat3 Mat3::diag(cplx d0, cplx d1, cplx d2) {
  Mat3 m;
  m(0, 0) = d0;
  m(1, 1) = d1;
  m(2, 2) = d2;
  return m;
}

Mat3 operator*(const Mat3& lhs, const Mat3& rhs) {
  Mat3 out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      cplx s = 0.0;
      for (int k = 0; k < 3; ++k) s += lhs(r, k) * rhs(k, c);
      out(r, c) = s;
    }
  return out;
}

Mat3 operator+(const Mat3& lhs, const Mat3& rhs) {
  Mat3 out;
  for (int i = 0; i < 9; ++i) out.a[i] = lhs.a[i] + rhs.a[i];
  return out;
}

Mat3 operator-(const Mat3& lhs, const Mat3& rhs) {
  Mat3 out;
  for (int i = 0; i < 9; ++i) out.a[i] = lhs.a[i] - rhs.a[i];
  return out;
}

Mat3 operator*(cplx s, const Mat3& m) {
  Mat3 out;
  for (int i = 0; i < 9; ++i) out.a[i] = s * m.a[i];
  return out;
}

Vec3 operator*(const Mat3& m, const Vec3& v) {
  Vec3 out{};
  for (int r = 0; r < 3; ++r) {
    cplx s = 0.0;
    for (int c = 0; c < 3; ++c) s += m(r, c) * v[c];
    out[r] = s;
  }
  return out;
}

double inf_norm(const Mat3& m) {
  double best = 0.0;
  for (int r = 0; r < 3; ++r) {
    double row = 0.0;
    for (int c = 0; c < 3; ++c) row += std::abs(m(r, c));
    best = std::max(best, row);
  }
  return best;
}

Mat3 invert3(const Mat3& m) {
  // Augmented [M | I], forward elimination with row pivoting, back substitution.
  // Rows are pre-scaled by exact powers of two so that a pivot test relative
  // to the matrix norm stays meaningful when row magnitudes differ by many
  // orders (face-transfer matrices carry e^{pL} against O(1) rows).  Scaling
  // the identity half too makes the eliminated right half equal M^-1 directly.
  cplx aug[3][6];
  for (int r = 0; r < 3; ++r) {
    double row_max = 0.0;
    for (int c = 0; c < 3; ++c) row_max = std::max(row_max, std::abs(m(r, c)));
    const double s = row_max > 0.0 ? std::exp2(-std::ilogb(row_max)) : 1.0;
    for (int c = 0; c < 3; ++c) {
      aug[r][c] = s * m(r, c);
      aug[r][c + 3] = (r == c) ? cplx(s, 0.0) : cplx(0.0, 0.0);
    }
  }
  double eq_norm = 0.0;
  for (int r = 0; r < 3; ++r) {
    double row = 0.0;
    for (int c = 0; c < 3; ++c) row += std::abs(aug[r][c]);
    eq_norm = std::max(eq_norm, row);
  }
  const double tol = 1e-12 * eq_norm;

  for (int k = 0; k < 3; ++k) {
    int piv = k;
    for (int r = k + 1; r < 3; ++r)
      if (std::abs(aug[r][k]) > std::abs(aug[piv][k])) piv = r;
    if (std::abs(aug[piv][k]) <= tol)
      throw Error(Errc::singular_system, "3x3 inverse: pivot below 1e-12 of equilibrated matrix norm");
    if (piv != k)
      for (int c = 0; c < 6; ++c) std::swap(aug[k][c], aug[piv][c]);
    const cplx inv_p = 1.0 / aug[k][k];
    for (int r = 0; r < 3; ++r) {
      if (r == k) continue;
      const cplx f = aug[r][k] * inv_p;
      for (int c = k; c < 6; ++c) aug[r][c] -= f * aug[k][c];
    }
    for (int c = k; c < 6; ++c) aug[k][c] *= inv_p;
  }

  Mat3 out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out(r, c) = aug[r][c + 3];
  return out;
}

void solve_dense(std::vector<cplx>& A, std::vector<cplx>& b, std::size_t n) {
  double max_row = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < n; ++c) row += std::abs(A[r * n + c]);
    max_row = std::max(max_row, row);
  }
  const double tol = 1e-12 * max_row;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(A[r * n + k]) > std::abs(A[piv * n + k])) piv = r;
    if (std::abs(A[piv * n + k]) <= tol)
      throw Error(Errc::singular_system, "dense solve: pivot below 1e-12 of max row norm");
    if (piv != k) {
      for (std::size_t c = k; c < n; ++c) std::swap(A[k * n + c], A[piv * n + c]);
      std::swap(b[k], b[piv]);
    }
    const cplx inv_p = 1.0 / A[k * n + k];
    for (std::size_t r = k + 1; r < n; ++r) {
      const cplx f = A[r * n + k] * inv_p;
      if (f == cplx(0.0)) continue;
      for (std::size_t c = k; c < n; ++c) A[r * n + c] -= f * A[k * n + c];
      b[r] -= f * b[k];
    }
  }
  for (std::size_t ri = n; ri-- > 0;) {
    cplx s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= A[ri * n + c] * b[c];
    b[ri] = s / A[ri * n + ri];
  }
}

Mat3 exp3(const Mat3& m) {
  // Scale so the norm is below 1/2, run the Taylor series to machine
  // precision, square back up.
  int squarings = 0;
  double nrm = inf_norm(m);
  while (nrm > 0.5) {
    nrm *= 0.5;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  Mat3 x = cplx(scale) * m;

  Mat3 sum = Mat3::identity();
  Mat3 term = Mat3::identity();
  for (int k = 1; k <= 20; ++k) {
    term = cplx(1.0 / k) * (term * x);
    sum = sum + term;
    if (inf_norm(term) < 1e-18 * inf_norm(sum)) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace ghshift
