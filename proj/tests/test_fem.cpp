#include <cmath>
#include <random>

#include <Eigen/LU>

#include "doctest.h"
#include "viscoflow/fem.hpp"

using namespace viscoflow;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

const std::array<Eigen::Vector2d, 3> kCorners{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};

// Flux and first moment of v . n over the edge a -> b, by Simpson's rule
// (exact for the quadratic integrands of linear fields).
template <typename Field>
Eigen::Vector2d edge_moments(const Field& v, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d t = b - a;
  const double len = t.norm();
  const Eigen::Vector2d n(t.y() / len, -t.x() / len);
  const double s[3] = {-1.0, 0.0, 1.0};
  const double w[3] = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int g = 0; g < 3; ++g) {
    const double vn = v(a + 0.5 * (s[g] + 1.0) * t).dot(n);
    out[0] += len * w[g] * vn;
    out[1] += len * w[g] * vn * s[g];
  }
  return out;
}

Mesh random_cell(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (;;) {
    Eigen::Vector2d a(u(rng), u(rng)), b(u(rng), u(rng)), c(u(rng), u(rng));
    const double cross = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    if (std::abs(cross) < 0.2) continue;
    if (cross < 0) std::swap(b, c);
    Mesh m;
    m.vertices = {a, b, c};
    m.cells = {{0, 1, 2}};
    return m;
  }
}

Eigen::Vector2d to_reference(const CellGeometry& g, const Eigen::Vector2d& x) {
  return g.jacobian.inverse() * (x - g.origin);
}

}  // namespace

TEST_SUITE("fem") {
  TEST_CASE("quadrature integrates monomials exactly") {
    for (int degree = 1; degree <= 6; ++degree) {
      const QuadratureRule& rule = quadrature(degree);
      CHECK(rule.degree >= degree);
      double sum = 0.0;
      for (double w : rule.weights) {
        CHECK(w > 0.0);
        sum += w;
      }
      CHECK(sum == doctest::Approx(0.5).epsilon(1e-14));
      for (int a = 0; a <= degree; ++a) {
        for (int b = 0; a + b <= degree; ++b) {
          double q = 0.0;
          for (std::size_t g = 0; g < rule.size(); ++g)
            q += rule.weights[g] * std::pow(rule.point(g).x(), a) * std::pow(rule.point(g).y(), b);
          const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
          CHECK(std::abs(q - exact) < 1e-14);
        }
      }
    }
    double x2y2 = 0.0;
    const QuadratureRule& four = quadrature(4);
    for (std::size_t g = 0; g < four.size(); ++g)
      x2y2 += four.weights[g] * std::pow(four.point(g).x() * four.point(g).y(), 2);
    CHECK(x2y2 == doctest::Approx(1.0 / 180.0).epsilon(1e-14));
    CHECK_THROWS_AS(quadrature(0), std::invalid_argument);
    CHECK_THROWS_AS(quadrature(7), std::invalid_argument);
  }

  TEST_CASE("gauss-legendre rules") {
    for (int n = 1; n <= 5; ++n) {
      const LineRule& rule = gauss_legendre(n);
      for (int k = 0; k < 2 * n; ++k) {
        double q = 0.0;
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) q += rule.weights[g] * std::pow(rule.nodes[g], k);
        const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
        CHECK(std::abs(q - exact) < 1e-14);
      }
    }
    CHECK_THROWS_AS(gauss_legendre(6), std::invalid_argument);
  }

  TEST_CASE("discontinuous linear tensor basis") {
    for (int i = 0; i < 3; ++i) {
      const auto basis = eval_p1disc_tensor_basis(kCorners[i]);
      for (int a = 0; a < 12; ++a) {
        Eigen::Matrix2d expected = Eigen::Matrix2d::Zero();
        if (a / 4 == i) expected((a % 4) / 2, a % 2) = 1.0;
        CHECK((basis[a] - expected).norm() < 1e-15);
      }
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::Vector2d ref(u(rng), u(rng));
      if (ref.sum() > 1.0) ref = Eigen::Vector2d(1.0, 1.0) - ref;
      const auto basis = eval_p1disc_tensor_basis(ref);
      Eigen::Matrix2d unity = Eigen::Matrix2d::Zero();
      for (const auto& b : basis) unity += b;
      CHECK((unity - Eigen::Matrix2d::Ones()).norm() < 1e-14);

      // T(x) = A + x B + y C is interpolated exactly from its vertex values.
      const Eigen::Matrix2d A = Eigen::Matrix2d::Random(), B = Eigen::Matrix2d::Random(), C = Eigen::Matrix2d::Random();
      auto field = [&](const Eigen::Vector2d& x) -> Eigen::Matrix2d { return A + x.x() * B + x.y() * C; };
      Eigen::Matrix2d interp = Eigen::Matrix2d::Zero();
      for (int a = 0; a < 12; ++a) interp += field(kCorners[a / 4])((a % 4) / 2, a % 2) * basis[a];
      CHECK((interp - field(ref)).norm() < 1e-14);
    }
  }

  TEST_CASE("reference BDM basis is dual to the edge moments") {
    for (int k = 0; k < 6; ++k) {
      auto v = [k](const Eigen::Vector2d& x) { return eval_bdm1_reference(x).values[k]; };
      for (int j = 0; j < 3; ++j) {
        const Eigen::Vector2d m = edge_moments(v, kCorners[(j + 1) % 3], kCorners[(j + 2) % 3]);
        for (int mm = 0; mm < 2; ++mm) CHECK(std::abs(m[mm] - (2 * j + mm == k ? 1.0 : 0.0)) < 1e-12);
      }
    }
  }

  TEST_CASE("first-moment function of edge 0 has no flux on the other edges") {
    auto v = [](const Eigen::Vector2d& x) { return eval_bdm1_reference(x).values[1]; };
    for (int j : {1, 2}) {
      // Normal trace vanishes pointwise, not just in the moments.
      const Eigen::Vector2d a = kCorners[(j + 1) % 3], b = kCorners[(j + 2) % 3];
      const Eigen::Vector2d t = b - a;
      const Eigen::Vector2d n = Eigen::Vector2d(t.y(), -t.x()).normalized();
      for (double s : {0.0, 0.3, 1.0}) CHECK(std::abs(v(a + s * t).dot(n)) < 1e-13);
    }
  }

  TEST_CASE("mapped basis: duality, divergence and divergence theorem") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const Mesh m = random_cell(rng);
      const CellGeometry g = cell_geometry(m, 0);
      const auto& p = m.vertices;
      for (int k = 0; k < 6; ++k) {
        auto v = [&](const Eigen::Vector2d& x) { return eval_bdm1_row_basis(g, to_reference(g, x)).values[k]; };
        double boundary_flux = 0.0;
        for (int j = 0; j < 3; ++j) {
          const Eigen::Vector2d mom = edge_moments(v, p[(j + 1) % 3], p[(j + 2) % 3]);
          for (int mm = 0; mm < 2; ++mm) CHECK(std::abs(mom[mm] - (2 * j + mm == k ? 1.0 : 0.0)) < 1e-12);
          boundary_flux += mom[0];
        }
        // Divergence by central differences in physical coordinates.
        const Eigen::Vector2d x0 = g.map(Eigen::Vector2d(0.3, 0.2));
        const double h = 1e-5;
        const double div_fd = (v(x0 + Eigen::Vector2d(h, 0)).x() - v(x0 - Eigen::Vector2d(h, 0)).x() +
                               v(x0 + Eigen::Vector2d(0, h)).y() - v(x0 - Eigen::Vector2d(0, h)).y()) /
                              (2 * h);
        const double div = eval_bdm1_row_basis(g, Eigen::Vector2d(0.3, 0.2)).divergence[k];
        CHECK(div == doctest::Approx(div_fd).epsilon(1e-7));
        CHECK(div * g.area == doctest::Approx(boundary_flux).epsilon(1e-12));
        CHECK(div * g.det == doctest::Approx(eval_bdm1_reference(Eigen::Vector2d(0.3, 0.2)).divergence[k]));
      }
    }
  }

  TEST_CASE("constant fields are reproduced by their edge moments") {
    std::mt19937_64 rng(23);
    const Mesh m = random_cell(rng);
    const CellGeometry g = cell_geometry(m, 0);
    const Eigen::Vector2d c(0.7, -1.3);
    auto constant = [&](const Eigen::Vector2d&) { return c; };
    std::array<double, 6> coeffs{};
    for (int j = 0; j < 3; ++j) {
      const Eigen::Vector2d mom = edge_moments(constant, m.vertices[(j + 1) % 3], m.vertices[(j + 2) % 3]);
      coeffs[2 * j] = mom[0];
      coeffs[2 * j + 1] = mom[1];
    }
    const QuadratureRule& rule = quadrature(4);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bdm1Values b = eval_bdm1_row_basis(g, rule.point(q));
      Eigen::Vector2d v = Eigen::Vector2d::Zero();
      for (int k = 0; k < 6; ++k) v += coeffs[k] * b.values[k];
      CHECK((v - c).norm() < 1e-12);
    }
  }

  TEST_CASE("normal traces agree across a shared edge") {
    const Mesh m = build_crossed_rect(1, 1);
    for (Index e = 0; e < m.num_edges(); ++e) {
      if (m.is_boundary(e)) continue;
      const Eigen::Vector2d a = m.vertices[m.edges[e][0]], b = m.vertices[m.edges[e][1]];
      const Eigen::Vector2d t = b - a;
      const Eigen::Vector2d n = Eigen::Vector2d(t.y(), -t.x()).normalized();  // one fixed global normal
      for (int moment = 0; moment < 2; ++moment) {
        for (double s : {0.1, 0.3, 0.8}) {
          double trace[2];
          for (int side = 0; side < 2; ++side) {
            const Index c = m.edge_cells[e][side];
            int j = 0;
            while (m.cell_edges[c][j].edge != e) ++j;
            const CellGeometry g = cell_geometry(m, c);
            const auto signs = bdm1_signs(m.cell_edges[c]);
            const Bdm1Values v = eval_bdm1_row_basis(g, to_reference(g, a + s * t), signs);
            trace[side] = v.values[2 * j + moment].dot(n);
          }
          CHECK(trace[0] == doctest::Approx(trace[1]).epsilon(1e-12));
          CHECK(std::abs(trace[0]) > 1e-3);
        }
      }
    }
  }

  TEST_CASE("dof layout") {
    const DofLayout one = build_dof_layout(build_crossed_rect(1, 1));
    CHECK(one.total_dofs == 145);
    const DofLayout big = build_dof_layout(build_crossed_rect(100, 100));
    const Index C = 40000, E = 60200;
    CHECK(big.size(Field::Theta) == 12 * C);
    CHECK(big.size(Field::Sigma) == 4 * E);
    CHECK(big.size(Field::U) == 2 * C);
    CHECK(big.size(Field::UHat) == C);
    CHECK(big.size(Field::Phi) == C);
    CHECK(big.size(Field::Lambda) == 1);
    CHECK(big.size(Field::Q) == 12 * C);
    CHECK(big.total_dofs == 28 * C + 4 * E + 1);
    Index next = 0;
    for (int f = 0; f < kNumFields; ++f) {
      CHECK(big.offset[f] == next);
      next += big.count[f];
    }
    CHECK(next == big.total_dofs);
    CHECK(one.sigma(7, 1, 1) == one.begin(Field::Sigma) + 31);
    CHECK(one.q(3, 11) == one.total_dofs - 1);
    CHECK_THROWS_AS(build_dof_layout(Mesh{}), std::invalid_argument);
  }
}
