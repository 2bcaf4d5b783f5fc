#pragma once

#include <cstddef>
#include <vector>

#include "ghshift/types.hpp"

// Small dense complex linear algebra: 3x3 matrices stored row-major, an
// in-place NxN Gaussian elimination with partial pivoting, and a 3x3 matrix
// exponential.  Everything is plain loops; determinism matters more than
// speed at these sizes.

namespace ghshift {

struct Mat3 {
  cplx a[9]{};

  cplx& operator()(int r, int c) { return a[3 * r + c]; }
  const cplx& operator()(int r, int c) const { return a[3 * r + c]; }

  static Mat3 identity();
  static Mat3 diag(cplx d0, cplx d1, cplx d2);
};

Mat3 operator*(const Mat3& lhs, const Mat3& rhs);
Mat3 operator+(const Mat3& lhs, const Mat3& rhs);
Mat3 operator-(const Mat3& lhs, const Mat3& rhs);
Mat3 operator*(cplx s, const Mat3& m);
Vec3 operator*(const Mat3& m, const Vec3& v);

inline Vec3 operator*(cplx s, const Vec3& v) { return {s * v[0], s * v[1], s * v[2]}; }
inline Vec3 operator+(const Vec3& u, const Vec3& v) { return {u[0] + v[0], u[1] + v[1], u[2] + v[2]}; }

double inf_norm(const Mat3& m);

// Inverse by partial-pivot elimination after exact power-of-two row
// equilibration, so strongly row-graded matrices are handled. Throws
// Errc::singular_system when a pivot falls below 1e-12 times the
// equilibrated inf-norm.
Mat3 invert3(const Mat3& m);

// Solves A x = b in place for n right-hand-side-free unknowns; A is n x n
// row-major, b has n entries. Partial pivoting; the singularity threshold is
// 1e-12 times the largest row norm of the original matrix.
void solve_dense(std::vector<cplx>& A, std::vector<cplx>& b, std::size_t n);

// exp(M) by scaling-and-squaring on a truncated Taylor series; accurate to
// ~1e-14 relative for the matrix norms this library produces.
Mat3 exp3(const Mat3& m);

}  // namespace ghshift
