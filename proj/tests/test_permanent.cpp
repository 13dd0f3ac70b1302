#include <doctest.h>

#include <complex>

#include "loopsoup/harness.hpp"
#include "loopsoup/permanent.hpp"

using namespace loopsoup;

namespace {

// Ryser's formula for the ordinary permanent.
double ryser(const MatrixXd& a) {
  const Index n = a.rows();
  double total = 0.0;
  for (unsigned long mask = 1; mask < (1ul << n); ++mask) {
    double prod = 1.0;
    for (Index i = 0; i < n; ++i) {
      double row = 0.0;
      for (Index j = 0; j < n; ++j)
        if (mask & (1ul << j)) row += a(i, j);
      prod *= row;
    }
    total += (__builtin_popcountl(mask) % 2 == n % 2 ? 1.0 : -1.0) * prod;
  }
  return total;
}

MatrixXd random_matrix(Index n, Rng& rng) {
  MatrixXd a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = 2.0 * uniform01(rng) - 1.0;
  return a;
}

}  // namespace

TEST_CASE("small permanents") {
  MatrixXd one(1, 1);
  one << 2.5;
  CHECK(alpha_permanent(one, 0.7) == doctest::Approx(0.7 * 2.5));
  CHECK(alpha_permanent(one, 0.7, true) == 0.0);

  MatrixXd two(2, 2);
  two << 1.5, 2.0, -3.0, 0.5;
  const double al = 1.3;
  CHECK(alpha_permanent(two, al) == doctest::Approx(al * al * 1.5 * 0.5 + al * 2.0 * -3.0));
  CHECK(alpha_permanent(two, al, true) == doctest::Approx(al * 2.0 * -3.0));
  CHECK(alpha_permanent(MatrixXd(0, 0), 2.0) == 1.0);
}

TEST_CASE("cycle counts") {
  CHECK(cycle_count({0, 1, 2}) == 3);
  CHECK(cycle_count({1, 2, 0}) == 1);
  CHECK(cycle_count({1, 0, 3, 2}) == 2);
}

TEST_CASE("alpha = -1 gives det(-A); alpha = 1 gives the permanent") {
  Rng rng = stream(41, {});
  for (Index n = 1; n <= 8; ++n) {
    const MatrixXd a = random_matrix(n, rng);
    CHECK(alpha_permanent(a, -1.0) == doctest::Approx((-a).determinant()).epsilon(1e-10));
    CHECK(alpha_permanent(a, 1.0) == doctest::Approx(ryser(a)).epsilon(1e-10));
  }
}

TEST_CASE("alpha polynomial") {
  Rng rng = stream(42, {});
  for (Index n = 1; n <= 4; ++n) {
    const Generator g = random_transient_generator(n + 1, rng);
    StateSet pts(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) pts[std::size_t(i)] = i;
    const MatrixXd v = principal(potential(g).V, pts);
    for (bool zero : {false, true}) {
      const VectorXd c = alpha_permanent_polynomial(v, zero);
      CHECK(c.minCoeff() >= 0.0);
      CHECK(c(0) == 0.0);
      for (double al : {0.5, 1.0, 2.5}) {
        double horner = 0.0;
        for (Index k = c.size() - 1; k >= 0; --k) horner = horner * al + c(k);
        CHECK(alpha_permanent(v, al, zero) == doctest::Approx(horner).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("complex scalar instantiation") {
  Eigen::MatrixXcd a(2, 2);
  a << std::complex<double>(1, 1), 2.0, 3.0, std::complex<double>(0, -1);
  const std::complex<double> al(0.5, 0.25);
  const std::complex<double> expect = al * al * a(0, 0) * a(1, 1) + al * a(0, 1) * a(1, 0);
  CHECK(std::abs(alpha_permanent(a, al) - expect) < 1e-14);
}

TEST_CASE("size guard") {
  CHECK_THROWS_AS(alpha_permanent(MatrixXd::Ones(11, 11), 1.0), Error);
  CHECK_THROWS_AS(alpha_permanent(MatrixXd::Ones(2, 3), 1.0), Error);
}
