#include <catch_amalgamated.hpp>

#include <cmath>

#include "nhblockade/hilbert.hpp"

using namespace nhblockade;

namespace {

// Oracle: build a_mode on a product basis by explicit index arithmetic.
Matrix destroy_by_indices(const std::vector<std::size_t>& dims, std::size_t mode) {
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  for (std::size_t col = 0; col < total; ++col) {
    std::vector<std::size_t> occ(dims.size());
    std::size_t rest = col;
    for (std::size_t k = dims.size(); k-- > 0;) {
      occ[k] = rest % dims[k];
      rest /= dims[k];
    }
    if (occ[mode] == 0) continue;
    const double amp = std::sqrt(static_cast<double>(occ[mode]));
    occ[mode] -= 1;
    std::size_t row = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) row = row * dims[k] + occ[k];
    a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = amp;
  }
  return a;
}

Matrix random_matrix(Eigen::Index n, unsigned seed) {
  std::srand(seed);
  return Matrix::Random(n, n);
}

}  // namespace

TEST_CASE("FockLayout validates dims and indexes with the first mode most significant") {
  FockLayout l{2, 3, 4};
  CHECK(l.total_dim() == 24);
  CHECK(l.modes() == 3);
  CHECK(l.index({1, 2, 3}) == 1 * 12 + 2 * 4 + 3);
  for (std::size_t i = 0; i < l.total_dim(); ++i) CHECK(l.index(l.occupation(i)) == i);
  CHECK_THROWS_AS(FockLayout({}), LayoutError);
  CHECK_THROWS_AS(FockLayout({3, 1}), LayoutError);
  CHECK_THROWS_AS(l.index({2, 0, 0}), LayoutError);
}

TEST_CASE("destroy on a two-level truncation") {
  const auto a = destroy(FockLayout{2}, 0);
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 1) = 1.0;
  CHECK(max_abs_diff(a.entries, expected) == 0.0);
}

TEST_CASE("destroy carries sqrt(n) ladder coefficients") {
  const auto a = destroy(FockLayout{3}, 0);
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 1) = 1.0;
  expected(1, 2) = std::sqrt(2.0);
  CHECK(max_abs_diff(a.entries, expected) < 1e-15);
}

TEST_CASE("destroy on [3,3] mode 1 matches index arithmetic and kron(I, a)") {
  const auto a = destroy(FockLayout{3, 3}, 1);
  CHECK(max_abs_diff(a.entries, destroy_by_indices({3, 3}, 1)) < 1e-15);
  const auto k = kron(identity(FockLayout{3}), destroy(FockLayout{3}, 0));
  CHECK(k.layout == a.layout);
  CHECK(max_abs_diff(a.entries, k.entries) < 1e-15);
}

TEST_CASE("destroy matches index arithmetic on three-mode layouts") {
  const std::vector<std::size_t> dims{2, 3, 4};
  for (std::size_t mode = 0; mode < 3; ++mode) {
    CHECK(max_abs_diff(destroy(FockLayout(dims), mode).entries, destroy_by_indices(dims, mode)) < 1e-15);
  }
}

TEST_CASE("destroy rejects an out-of-range mode") {
  CHECK_THROWS_AS(destroy(FockLayout{3, 3}, 2), LayoutError);
}

TEST_CASE("compose(create, destroy) is the number operator") {
  const FockLayout l{4};
  const auto n = compose(create(l, 0), destroy(l, 0));
  Matrix expected = Matrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) expected(k, k) = k;
  CHECK(max_abs_diff(n.entries, expected) < 1e-14);
  CHECK(max_abs_diff(n.entries, number(l, 0).entries) < 1e-14);
}

TEST_CASE("[a, a^dag] = 1 away from the truncation edge") {
  const FockLayout l{8};
  const auto c = compose(destroy(l, 0), create(l, 0)) - compose(create(l, 0), destroy(l, 0));
  CHECK(max_abs_diff(c.entries.topLeftCorner(7, 7), Matrix::Identity(7, 7)) < 1e-12);
}

TEST_CASE("identity is neutral and adjoint is an involution") {
  const FockLayout l{3, 2};
  const Operator x(l, random_matrix(6, 7));
  CHECK(max_abs_diff(compose(x, identity(l)).entries, x.entries) == 0.0);
  CHECK(max_abs_diff(adjoint(adjoint(x)).entries, x.entries) == 0.0);
  CHECK(scale(x, 0.0).entries.cwiseAbs().maxCoeff() == 0.0);
  CHECK(max_abs_diff((x + x).entries, (2.0 * x).entries) < 1e-15);
}

TEST_CASE("adjoint(destroy) has sqrt(n) on the subdiagonal") {
  const auto ad = adjoint(destroy(FockLayout{5}, 0));
  for (int n = 1; n < 5; ++n) CHECK(std::abs(ad(n, n - 1) - std::sqrt(double(n))) < 1e-15);
  CHECK(max_abs_diff(ad.entries, create(FockLayout{5}, 0).entries) == 0.0);
}

TEST_CASE("operations on mismatched layouts throw") {
  const auto a = destroy(FockLayout{3}, 0);
  const auto b = destroy(FockLayout{4}, 0);
  CHECK_THROWS_AS(compose(a, b), LayoutError);
  CHECK_THROWS_AS(add(a, b), LayoutError);
  CHECK_THROWS_AS(Operator(FockLayout{3}, Matrix::Zero(2, 2)), LayoutError);
}

TEST_CASE("canonical commutator holds on every layout and mode below the top level") {
  for (const auto& dims : std::vector<std::vector<std::size_t>>{{4}, {3, 3}, {2, 3, 4}, {4, 4, 3}}) {
    const FockLayout l(dims);
    for (std::size_t mode = 0; mode < l.modes(); ++mode) {
      const auto a = destroy(l, mode);
      const auto c = (a * adjoint(a)) - (adjoint(a) * a);
      for (std::size_t i = 0; i < l.total_dim(); ++i) {
        if (l.occupation(i)[mode] + 1 == l.dim(mode)) continue;
        for (std::size_t j = 0; j < l.total_dim(); ++j) {
          const double expected = i == j ? 1.0 : 0.0;
          CHECK(std::abs(c(i, j) - expected) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("operators of distinct modes commute") {
  const FockLayout l{3, 4, 2};
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t q = 0; q < 3; ++q) {
      if (p == q) continue;
      const auto a = destroy(l, p);
      const auto bd = create(l, q);
      CHECK(max_abs_diff((a * bd).entries, (bd * a).entries) < 1e-12);
    }
  }
}

TEST_CASE("Kronecker placement is associative") {
  const FockLayout l{2, 3, 4};
  const auto direct = destroy(l, 1);
  const auto left = kron(destroy(FockLayout{2, 3}, 1), identity(FockLayout{4}));
  const auto right = kron(identity(FockLayout{2}), destroy(FockLayout{3, 4}, 0));
  CHECK(left.layout == l);
  CHECK(right.layout == l);
  CHECK(max_abs_diff(direct.entries, left.entries) == 0.0);
  CHECK(max_abs_diff(direct.entries, right.entries) == 0.0);
}
