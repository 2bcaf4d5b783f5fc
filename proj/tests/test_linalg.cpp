#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ghshift/linalg.hpp"

using namespace ghshift;

namespace {

std::mt19937 rng(12345);

cplx random_cplx() {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  return {d(rng), d(rng)};
}

Mat3 random_mat() {
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = random_cplx();
  return m;
}

double max_abs_diff(const Mat3& a, const Mat3& b) {
  double worst = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
  return worst;
}

}  // namespace

TEST_CASE("matrix product against hand-expanded entries") {
  Mat3 a, b;
  a(0, 0) = {1, 0}; a(0, 1) = {2, 0}; a(0, 2) = {0, 1};
  a(1, 0) = {0, 0}; a(1, 1) = {1, 0}; a(1, 2) = {3, 0};
  a(2, 0) = {0, -1}; a(2, 1) = {0, 0}; a(2, 2) = {2, 0};
  b(0, 0) = {0, 0}; b(0, 1) = {1, 0}; b(0, 2) = {0, 0};
  b(1, 0) = {1, 0}; b(1, 1) = {0, 0}; b(1, 2) = {0, 2};
  b(2, 0) = {0, 0}; b(2, 1) = {0, 1}; b(2, 2) = {1, 0};
  const Mat3 p = a * b;
  CHECK(std::abs(p(0, 0) - cplx(2, 0)) < 1e-15);
  CHECK(std::abs(p(0, 1) - cplx(0, 0)) < 1e-15);    // 1*1 + i*i cancels
  CHECK(std::abs(p(0, 2) - cplx(0, 5)) < 1e-15);    // 2*2i + i*1
  CHECK(std::abs(p(2, 1) - cplx(0, 1)) < 1e-15);    // -i*1 + 2*i
}

TEST_CASE("identity and diagonal constructors") {
  const Mat3 id = Mat3::identity();
  const Mat3 d = Mat3::diag({2, 0}, {0, 1}, {-1, 0});
  const Mat3 m = random_mat();
  CHECK(max_abs_diff(id * m, m) == 0.0);
  CHECK(max_abs_diff(m * id, m) == 0.0);
  CHECK(std::abs((d * id)(1, 1) - cplx(0, 1)) < 1e-15);
  CHECK(std::abs(d(0, 1)) == 0.0);
}

TEST_CASE("vector operations") {
  const Vec3 u = {cplx(1, 0), cplx(0, 1), cplx(2, -1)};
  const Vec3 v = {cplx(0, 0), cplx(1, 0), cplx(0, 1)};
  const Vec3 sum = u + v;
  CHECK(std::abs(sum[2] - cplx(2, 0)) < 1e-15);
  const Vec3 scaled = cplx(0, 1) * u;
  CHECK(std::abs(scaled[0] - cplx(0, 1)) < 1e-15);
  CHECK(std::abs(scaled[1] - cplx(-1, 0)) < 1e-15);
  const Mat3 id = Mat3::identity();
  const Vec3 w = id * u;
  CHECK(std::abs(w[1] - u[1]) == 0.0);
}

TEST_CASE("inverse of random matrices") {
  for (int trial = 0; trial < 50; ++trial) {
    const Mat3 m = random_mat();
    Mat3 mi;
    try {
      mi = invert3(m);
    } catch (const Error&) {
      continue;  // the random draw was (nearly) singular; skip
    }
    CHECK(max_abs_diff(m * mi, Mat3::identity()) < 1e-12);
    CHECK(max_abs_diff(mi * m, Mat3::identity()) < 1e-12);
  }
}

TEST_CASE("singular matrix is rejected") {
  Mat3 m;
  m(0, 0) = {1, 0}; m(0, 1) = {2, 0}; m(0, 2) = {3, 0};
  m(1, 0) = {2, 0}; m(1, 1) = {4, 0}; m(1, 2) = {6, 0};  // row 1 = 2 * row 0
  m(2, 0) = {0, 0}; m(2, 1) = {1, 0}; m(2, 2) = {1, 0};
  CHECK_THROWS_AS(invert3(m), Error);
  try {
    invert3(m);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::singular_system);
  }
}

TEST_CASE("dense solver reproduces a known solution") {
  const std::size_t n = 12;
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<cplx> A(n * n), x_true(n), b(n, cplx(0, 0));
    for (auto& v : A) v = {d(rng), d(rng)};
    for (auto& v : x_true) v = {d(rng), d(rng)};
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) b[r] += A[r * n + c] * x_true[c];
    std::vector<cplx> A2 = A, b2 = b;
    solve_dense(A2, b2, n);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(b2[i] - x_true[i]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("dense solver rejects a singular system") {
  const std::size_t n = 4;
  std::vector<cplx> A(n * n, cplx(0, 0)), b(n, cplx(1, 0));
  for (std::size_t c = 0; c < n; ++c) {
    A[0 * n + c] = {1.0, 0.0};
    A[1 * n + c] = {1.0, 0.0};  // duplicate row
    A[2 * n + c] = {double(c), 0.0};
    A[3 * n + c] = {double(c * c), 0.0};
  }
  CHECK_THROWS_AS(solve_dense(A, b, n), Error);
}

TEST_CASE("matrix exponential of a diagonal matrix") {
  const Mat3 d = Mat3::diag({0.3, 1.2}, {-2.0, 0.4}, {0.0, -3.0});
  const Mat3 e = exp3(d);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(e(i, i) - std::exp(d(i, i))) < 1e-13);
  CHECK(std::abs(e(0, 1)) < 1e-15);
  CHECK(std::abs(e(2, 0)) < 1e-15);
}

TEST_CASE("matrix exponential of a nilpotent matrix terminates exactly") {
  Mat3 n;
  n(0, 1) = {2.0, 0.0};
  n(1, 2) = {0.0, 1.0};
  // exp(N) = I + N + N^2/2 for N^3 = 0
  const Mat3 e = exp3(n);
  CHECK(std::abs(e(0, 0) - cplx(1, 0)) < 1e-14);
  CHECK(std::abs(e(0, 1) - cplx(2, 0)) < 1e-14);
  CHECK(std::abs(e(0, 2) - cplx(0, 1)) < 1e-14);  // (2)(i)/2
  CHECK(std::abs(e(1, 2) - cplx(0, 1)) < 1e-14);
  CHECK(std::abs(e(2, 0)) < 1e-15);
}

TEST_CASE("matrix exponential inverts under negation") {
  for (int trial = 0; trial < 20; ++trial) {
    Mat3 m = random_mat();
    m = cplx(2.0, 0.0) * m;  // push the norm above the scaling threshold
    const Mat3 prod = exp3(m) * exp3(cplx(-1.0, 0.0) * m);
    CHECK(max_abs_diff(prod, Mat3::identity()) < 1e-11);
  }
}

TEST_CASE("matrix exponential matches the defining series at small norm") {
  Mat3 m = random_mat();
  m = cplx(1e-4, 0.0) * m;
  Mat3 series = Mat3::identity();
  Mat3 term = Mat3::identity();
  for (int k = 1; k <= 10; ++k) {
    term = cplx(1.0 / k, 0.0) * (term * m);
    series = series + term;
  }
  CHECK(max_abs_diff(exp3(m), series) < 1e-15);
}
