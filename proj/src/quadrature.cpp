#include "thermidor/quadrature.hpp"

#include <stdexcept>

namespace thermidor {

namespace {

void push_permutations(std::vector<Eigen::Vector3d>& pts, std::vector<double>& w, double a,
                       double b, double c, double weight) {
  // Distinct cyclic/mirror permutations of a barycentric triple.
  std::vector<Eigen::Vector3d> perms = {{a, b, c}, {b, c, a}, {c, a, b},
                                        {a, c, b}, {c, b, a}, {b, a, c}};
  std::vector<Eigen::Vector3d> unique;
  for (const auto& p : perms) {
    bool seen = false;
    for (const auto& u : unique)
      if ((p - u).norm() < 1e-14) seen = true;
    if (!seen) unique.push_back(p);
  }
  for (const auto& p : unique) {
    pts.push_back(p);
    w.push_back(weight);
  }
}

}  // namespace

QuadRule make_quad_rule(int degree) {
  std::vector<Eigen::Vector3d> pts;
  std::vector<double> w;

  switch (degree) {
    case 1:
    case 2: {
      // 3-point midpoint-of-edges rule, exact through degree 2.
      push_permutations(pts, w, 0.5, 0.5, 0.0, 1.0 / 3.0);
      break;
    }
    case 3:
    case 4: {
      // Dunavant degree-4, 6 points.
      const double a1 = 0.445948490915965, w1 = 0.223381589678011;
      const double a2 = 0.091576213509771, w2 = 0.109951743655322;
      push_permutations(pts, w, a1, a1, 1.0 - 2.0 * a1, w1);
      push_permutations(pts, w, a2, a2, 1.0 - 2.0 * a2, w2);
      break;
    }
    case 5:
    case 6: {
      // Dunavant degree-6, 12 points.
      const double a1 = 0.063089014491502, w1 = 0.050844906370207;
      const double a2 = 0.249286745170910, w2 = 0.116786275726379;
      const double b = 0.310352451033785, c = 0.053145049844816;
      const double w3 = 0.082851075618374;
      push_permutations(pts, w, a1, a1, 1.0 - 2.0 * a1, w1);
      push_permutations(pts, w, a2, a2, 1.0 - 2.0 * a2, w2);
      push_permutations(pts, w, b, 1.0 - b - c, c, w3);
      break;
    }
    default:
      throw std::invalid_argument("make_quad_rule: supported degrees are 1..6");
  }

  QuadRule rule;
  rule.degree = degree <= 2 ? 2 : (degree <= 4 ? 4 : 6);
  rule.bary.resize(3, static_cast<Eigen::Index>(pts.size()));
  rule.weights.resize(static_cast<Eigen::Index>(w.size()));
  for (size_t i = 0; i < pts.size(); ++i) {
    rule.bary.col(static_cast<Eigen::Index>(i)) = pts[i];
    rule.weights[static_cast<Eigen::Index>(i)] = w[i];
  }
  // Renormalize so the weights sum to exactly 1 in floating point.
  rule.weights /= rule.weights.sum();
  return rule;
}

Mat2X physical_quad_points(const Mesh& mesh, const QuadRule& rule) {
  const int nq = rule.n_points();
  Mat2X pts(2, static_cast<Eigen::Index>(mesh.n_triangles()) * nq);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<size_t>(t)];
    const Vec2 a = mesh.vertex(tri[0]), b = mesh.vertex(tri[1]), c = mesh.vertex(tri[2]);
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector3d lam = rule.bary.col(q);
      pts.col(static_cast<Eigen::Index>(t) * nq + q) = lam[0] * a + lam[1] * b + lam[2] * c;
    }
  }
  return pts;
}

}  // namespace thermidor
