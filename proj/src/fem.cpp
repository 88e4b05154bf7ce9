#include "viscoflow/fem.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

namespace viscoflow {

namespace {

// Dunavant-type symmetric rules; weights normalized to sum to one.
struct Orbit {
  enum Kind { Center, Pair, Generic } kind;
  double a, b;  // Pair: (a, a, 1-2a). Generic: (a, b, 1-a-b) and its permutations.
  double w;
};

QuadratureRule make_rule(int degree, std::initializer_list<Orbit> orbits) {
  QuadratureRule rule;
  rule.degree = degree;
  auto add = [&](double b0, double b1, double b2, double w) {
    rule.barycentric.emplace_back(b0, b1, b2);
    rule.weights.push_back(0.5 * w);
  };
  for (const auto& o : orbits) {
    switch (o.kind) {
      case Orbit::Center:
        add(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, o.w);
        break;
      case Orbit::Pair: {
        const double c = 1.0 - 2.0 * o.a;
        add(c, o.a, o.a, o.w);
        add(o.a, c, o.a, o.w);
        add(o.a, o.a, c, o.w);
        break;
      }
      case Orbit::Generic: {
        const double c = 1.0 - o.a - o.b;
        add(o.a, o.b, c, o.w);
        add(o.b, c, o.a, o.w);
        add(c, o.a, o.b, o.w);
        add(o.b, o.a, c, o.w);
        add(o.a, c, o.b, o.w);
        add(c, o.b, o.a, o.w);
        break;
      }
    }
  }
  return rule;
}

const QuadratureRule& rule_1() {
  static const QuadratureRule r = make_rule(1, {{Orbit::Center, 0, 0, 1.0}});
  return r;
}
const QuadratureRule& rule_2() {
  static const QuadratureRule r = make_rule(2, {{Orbit::Pair, 1.0 / 6.0, 0, 1.0 / 3.0}});
  return r;
}
const QuadratureRule& rule_4() {
  static const QuadratureRule r =
      make_rule(4, {{Orbit::Pair, 0.44594849091596488631832925388305, 0, 0.22338158967801146569500700843312},
                    {Orbit::Pair, 0.091576213509770743459571463402202, 0, 0.10995174365532186763832632490021}});
  return r;
}
const QuadratureRule& rule_5() {
  static const QuadratureRule r =
      make_rule(5, {{Orbit::Center, 0, 0, 0.225},
                    {Orbit::Pair, 0.47014206410511508977044120951345, 0, 0.13239415278850618073764938783315},
                    {Orbit::Pair, 0.10128650732345633880098736191512, 0, 0.12593918054482715259568394550018}});
  return r;
}
const QuadratureRule& rule_6() {
  static const QuadratureRule r = make_rule(
      6, {{Orbit::Pair, 0.24928674517091042129163855310702, 0, 0.11678627572637936602528961138558},
          {Orbit::Pair, 0.063089014491502228340331602870819, 0, 0.050844906370206816920936809106869},
          {Orbit::Generic, 0.053145049844816947353249671631398, 0.31035245103378440541660773395655,
           0.082851075618373575193553456420442}});
  return r;
}

// Coefficients of the reference BDM1 basis in the monomial basis
// (1,0), (0,1), (x,0), (0,x), (y,0), (0,y); column k is basis function k.
const Eigen::Matrix<double, 6, 6>& reference_bdm1_coefficients() {
  static const Eigen::Matrix<double, 6, 6> coeffs = [] {
    const std::array<Eigen::Vector2d, 3> corner{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
    auto monomial = [](int k, const Eigen::Vector2d& x) -> Eigen::Vector2d {
      const double scale = k < 2 ? 1.0 : (k < 4 ? x.x() : x.y());
      return (k % 2 == 0 ? Eigen::Vector2d(scale, 0.0) : Eigen::Vector2d(0.0, scale));
    };
    const LineRule& line = gauss_legendre(3);
    Eigen::Matrix<double, 6, 6> functionals;  // row: dof, column: monomial
    for (int j = 0; j < 3; ++j) {
      const Eigen::Vector2d a = corner[(j + 1) % 3];
      const Eigen::Vector2d b = corner[(j + 2) % 3];
      const Eigen::Vector2d t = b - a;
      const double len = t.norm();
      const Eigen::Vector2d n(t.y() / len, -t.x() / len);
      for (int k = 0; k < 6; ++k) {
        double flux = 0.0, moment = 0.0;
        for (std::size_t g = 0; g < line.nodes.size(); ++g) {
          const double s = line.nodes[g];
          const Eigen::Vector2d x = a + 0.5 * (s + 1.0) * t;
          const double w = 0.5 * len * line.weights[g];
          const double vn = monomial(k, x).dot(n);
          flux += w * vn;
          moment += w * vn * s;
        }
        functionals(2 * j, k) = flux;
        functionals(2 * j + 1, k) = moment;
      }
    }
    return Eigen::Matrix<double, 6, 6>(functionals.fullPivLu().inverse());
  }();
  return coeffs;
}

}  // namespace

const QuadratureRule& quadrature(int degree) {
  switch (degree) {
    case 1: return rule_1();
    case 2: return rule_2();
    case 3:
    case 4: return rule_4();
    case 5: return rule_5();
    case 6: return rule_6();
    default: throw std::invalid_argument("unsupported quadrature degree " + std::to_string(degree));
  }
}

const LineRule& gauss_legendre(int n) {
  static const std::array<LineRule, 5> rules = [] {
    std::array<LineRule, 5> r;
    r[0] = {{0.0}, {2.0}};
    const double a2 = 1.0 / std::sqrt(3.0);
    r[1] = {{-a2, a2}, {1.0, 1.0}};
    const double a3 = std::sqrt(0.6);
    r[2] = {{-a3, 0.0, a3}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
    const double i4 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double o4 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double wi4 = (18.0 + std::sqrt(30.0)) / 36.0, wo4 = (18.0 - std::sqrt(30.0)) / 36.0;
    r[3] = {{-o4, -i4, i4, o4}, {wo4, wi4, wi4, wo4}};
    const double i5 = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double o5 = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double wi5 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0, wo5 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    r[4] = {{-o5, -i5, 0.0, i5, o5}, {wo5, wi5, 128.0 / 225.0, wi5, wo5}};
    return r;
  }();
  if (n < 1 || n > 5) throw std::invalid_argument("unsupported Gauss-Legendre order");
  return rules[n - 1];
}

std::array<Eigen::Matrix2d, 12> eval_p1disc_tensor_basis(const Eigen::Vector2d& ref) {
  const Eigen::Vector3d lam = barycentric_of(ref);
  std::array<Eigen::Matrix2d, 12> basis;
  for (int i = 0; i < 3; ++i) {
    for (int kl = 0; kl < 4; ++kl) {
      Eigen::Matrix2d t = Eigen::Matrix2d::Zero();
      t(kl / 2, kl % 2) = lam[i];
      basis[4 * i + kl] = t;
    }
  }
  return basis;
}

Bdm1Values eval_bdm1_reference(const Eigen::Vector2d& ref) {
  const auto& c = reference_bdm1_coefficients();
  Bdm1Values out;
  for (int k = 0; k < 6; ++k) {
    const auto col = c.col(k);
    out.values[k] = Eigen::Vector2d(col[0] + col[2] * ref.x() + col[4] * ref.y(),
                                    col[1] + col[3] * ref.x() + col[5] * ref.y());
    out.divergence[k] = col[2] + col[5];
  }
  return out;
}

Bdm1Values eval_bdm1_row_basis(const CellGeometry& geom, const Eigen::Vector2d& ref,
                               const std::array<double, 6>& signs) {
  if (!(geom.det > 0.0)) throw std::invalid_argument("degenerate cell in Piola map");
  Bdm1Values out = eval_bdm1_reference(ref);
  const double inv_det = 1.0 / geom.det;
  for (int k = 0; k < 6; ++k) {
    out.values[k] = signs[k] * inv_det * (geom.jacobian * out.values[k]);
    out.divergence[k] *= signs[k] * inv_det;
  }
  return out;
}

std::array<double, 6> bdm1_signs(const std::array<CellEdge, 3>& cell_edges) {
  std::array<double, 6> s{};
  for (int j = 0; j < 3; ++j) {
    s[2 * j] = static_cast<double>(cell_edges[j].sign);
    s[2 * j + 1] = 1.0;
  }
  return s;
}

DofLayout build_dof_layout(const Mesh& mesh) {
  if (mesh.num_cells() == 0) throw std::invalid_argument("cannot lay out dofs on an empty mesh");
  DofLayout layout;
  layout.cells = mesh.num_cells();
  layout.edges = mesh.num_edges();
  const Index c = layout.cells;
  layout.count = {12 * c, 4 * layout.edges, 2 * c, c, c, 1, 12 * c};
  Index running = 0;
  for (int f = 0; f < kNumFields; ++f) {
    layout.offset[f] = running;
    running += layout.count[f];
  }
  layout.total_dofs = running;
  return layout;
}

}  // namespace viscoflow
