#include "thermidor/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "thermidor/errors.hpp"
#include "thermidor/parallel.hpp"

namespace thermidor {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes/weights on [-1, 1], positive half.
struct GaussRule {
  std::vector<double> x, w;  // full rule, expanded to all nodes
};

GaussRule expand(std::initializer_list<double> xs, std::initializer_list<double> ws) {
  GaussRule r;
  auto xi = xs.begin();
  auto wi = ws.begin();
  for (; xi != xs.end(); ++xi, ++wi) {
    r.x.push_back(-*xi);
    r.w.push_back(*wi);
    r.x.push_back(*xi);
    r.w.push_back(*wi);
  }
  return r;
}

const GaussRule& gauss10() {
  static const GaussRule r = expand({0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                     0.8650633666889845, 0.9739065285171717},
                                    {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                     0.1494513491505806, 0.0666713443086881});
  return r;
}

const GaussRule& gauss12() {
  static const GaussRule r =
      expand({0.1252334085114689, 0.3678314989981802, 0.5873179542866175, 0.7699026741943047,
              0.9041172563704749, 0.9815606342467192},
             {0.2491470458134028, 0.2334925365383548, 0.2031674267230659, 0.1600783285433462,
              0.1069393259953184, 0.0471753363865118});
  return r;
}

// Reduced radial mass integral int_0^1 exp((1/d^2) rho^2/(rho^2-1)) rho drho.
// The exp(-1/d^2) peak factor is folded out so the value stays representable
// for any delta.
double reduced_radial_mass(double delta, int panels) {
  const double inv_d2 = 1.0 / (delta * delta);
  const GaussRule& g = gauss12();
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels;
    const double b = static_cast<double>(p + 1) / panels;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (size_t i = 0; i < g.x.size(); ++i) {
      const double rho = mid + half * g.x[i];
      const double denom = rho * rho - 1.0;
      if (denom >= 0.0) continue;
      const double e = inv_d2 * rho * rho / denom;
      if (e < -700.0) continue;
      total += half * g.w[i] * std::exp(e) * rho;
    }
  }
  return total;
}

}  // namespace

MollifierKernel make_kernel(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("make_kernel: delta must be positive");

  int panels = std::max(128, static_cast<int>(std::ceil(8.0 / delta)));
  double coarse = reduced_radial_mass(delta, panels);
  double fine = reduced_radial_mass(delta, 2 * panels);
  while (std::abs(fine - coarse) > 1e-12 * std::abs(fine) && panels < (1 << 22)) {
    panels *= 2;
    coarse = fine;
    fine = reduced_radial_mass(delta, 2 * panels);
  }

  MollifierKernel k;
  k.delta = delta;
  k.delta2 = delta * delta;
  k.scaled_inv_mass = 1.0 / (2.0 * kPi * delta * delta * fine);
  k.norm_const = k.scaled_inv_mass * std::exp(1.0 / (delta * delta));
  return k;
}

Mat2X MollifiedGradientOperator::apply(const VecX& coeffs) const {
  Mat2X out(2, gx.rows());
  out.row(0) = (gx * coeffs).transpose();
  out.row(1) = (gy * coeffs).transpose();
  return out;
}

namespace {

// Scratch accumulator per eval point: vertex -> accumulated gradient weight.
struct VertexAccumulator {
  std::vector<Vec2> value;
  std::vector<char> touched;
  std::vector<int> touched_list;

  explicit VertexAccumulator(int n_vertices)
      : value(static_cast<size_t>(n_vertices), Vec2::Zero()),
        touched(static_cast<size_t>(n_vertices), 0) {}

  void add(int vertex, const Vec2& g) {
    if (!touched[static_cast<size_t>(vertex)]) {
      touched[static_cast<size_t>(vertex)] = 1;
      touched_list.push_back(vertex);
    }
    value[static_cast<size_t>(vertex)] += g;
  }

  void reset() {
    for (int v : touched_list) {
      value[static_cast<size_t>(v)] = Vec2::Zero();
      touched[static_cast<size_t>(v)] = 0;
    }
    touched_list.clear();
  }
};

struct TriangleWork {
  const MollifierKernel* kernel;
  const QuadRule* rule;
  Vec2 x;
  const std::array<int, 3>* parent_vertices;
  VertexAccumulator* accum;
  Vec2 kernel_moment = Vec2::Zero();  // quadrature of grad J over the swept region

  // Composite quadrature over one (sub)triangle; barycentric coordinates of
  // the corners with respect to the parent element ride along so the P1
  // basis weights refer to the mesh element.
  void integrate(const Vec2& a, const Vec2& b, const Vec2& c, const Eigen::Vector3d& la,
                 const Eigen::Vector3d& lb, const Eigen::Vector3d& lc, int base_levels,
                 int cut_levels) {
    const double delta = kernel->delta;
    if (point_triangle_distance(x, a, b, c) >= delta) return;

    bool fully_inside = (x - a).norm() <= delta && (x - b).norm() <= delta &&
                        (x - c).norm() <= delta;
    if (base_levels > 0 || (!fully_inside && cut_levels > 0)) {
      const Vec2 mab = 0.5 * (a + b), mbc = 0.5 * (b + c), mca = 0.5 * (c + a);
      const Eigen::Vector3d lab = 0.5 * (la + lb), lbc = 0.5 * (lb + lc), lca = 0.5 * (lc + la);
      const int nb = std::max(base_levels - 1, 0);
      const int nc = base_levels > 0 ? cut_levels : cut_levels - 1;
      integrate(a, mab, mca, la, lab, lca, nb, nc);
      integrate(mab, b, mbc, lab, lb, lbc, nb, nc);
      integrate(mca, mbc, c, lca, lbc, lc, nb, nc);
      integrate(mab, mbc, mca, lab, lbc, lca, nb, nc);
      return;
    }

    const double area = signed_area(a, b, c);
    for (int q = 0; q < rule->n_points(); ++q) {
      const Eigen::Vector3d lam = rule->bary.col(q);
      const Vec2 y = lam[0] * a + lam[1] * b + lam[2] * c;
      const Vec2 s = x - y;
      const double gf = kernel->grad_factor(s.squaredNorm());
      if (gf == 0.0) continue;
      const Vec2 g = (rule->weights[q] * area * gf) * s;
      const Eigen::Vector3d parent_lam = lam[0] * la + lam[1] * lb + lam[2] * lc;
      for (int k = 0; k < 3; ++k) accum->add((*parent_vertices)[k], parent_lam[k] * g);
      kernel_moment += g;
    }
  }
};

int levels_for(double diameter, double target, int cap) {
  if (diameter <= target) return 0;
  return std::min(cap, static_cast<int>(std::ceil(std::log2(diameter / target))));
}

}  // namespace

std::vector<MollifiedGradientOperator> build_mollified_gradient_operators(
    const MollifierKernel& kernel, const Mesh& mesh, std::span<const FeSpace* const> spaces,
    const Mat2X& points, const SpatialIndex& index, const MollifierQuadSpec& spec,
    const std::vector<int>* element_hint) {
  const int n_points = static_cast<int>(points.cols());
  const int n_spaces = static_cast<int>(spaces.size());
  const QuadRule rule = make_quad_rule(spec.rule_degree);
  const double target = spec.child_diameter_factor * kernel.delta;

  // One triplet buffer per (thread chunk, space, component); merged below.
  struct ChunkOut {
    std::vector<std::vector<Triplet>> gx, gy;
  };
  const int n_threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<ChunkOut> chunks(static_cast<size_t>(n_threads));
  for (auto& c : chunks) {
    c.gx.resize(static_cast<size_t>(n_spaces));
    c.gy.resize(static_cast<size_t>(n_spaces));
  }

  parallel_chunks(
      n_points,
      [&](int chunk_id, int begin, int end) {
        VertexAccumulator accum(mesh.n_vertices());
        ChunkOut& out = chunks[static_cast<size_t>(chunk_id)];
        for (int p = begin; p < end; ++p) {
          const Vec2 x = points.col(p);
          TriangleWork work{&kernel, &rule, x, nullptr, &accum};
          for (int t : index.query(x, kernel.delta)) {
            const auto& tri = mesh.triangles[static_cast<size_t>(t)];
            work.parent_vertices = &tri;
            const int base = levels_for(mesh.triangle_diameter(t), target, spec.max_levels);
            work.integrate(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]),
                           {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, base, spec.cut_levels);
          }

          // For interior points the exact kernel moment over the ball is
          // zero; subtracting the quadrature moment against the local P1
          // weights makes constants mollify to exactly zero.
          if (mesh.domain.boundary_distance(x) >= kernel.delta) {
            const int elem = element_hint ? (*element_hint)[static_cast<size_t>(p)]
                                          : locate_triangle(mesh, index, x);
            if (elem >= 0) {
              const auto& tri = mesh.triangles[static_cast<size_t>(elem)];
              const Eigen::Vector3d lam = barycentric(mesh, elem, x);
              for (int k = 0; k < 3; ++k) accum.add(tri[k], -lam[k] * work.kernel_moment);
            }
          }

          for (int v : accum.touched_list) {
            const Vec2 g = accum.value[static_cast<size_t>(v)];
            for (int s = 0; s < n_spaces; ++s) {
              const int dof = spaces[static_cast<size_t>(s)]->dof_of_vertex[static_cast<size_t>(v)];
              if (dof < 0) continue;
              out.gx[static_cast<size_t>(s)].emplace_back(p, dof, g.x());
              out.gy[static_cast<size_t>(s)].emplace_back(p, dof, g.y());
            }
          }
          accum.reset();
        }
      },
      n_threads);

  std::vector<MollifiedGradientOperator> ops(static_cast<size_t>(n_spaces));
  for (int s = 0; s < n_spaces; ++s) {
    std::vector<Triplet> tx, ty;
    for (const auto& c : chunks) {
      tx.insert(tx.end(), c.gx[static_cast<size_t>(s)].begin(), c.gx[static_cast<size_t>(s)].end());
      ty.insert(ty.end(), c.gy[static_cast<size_t>(s)].begin(), c.gy[static_cast<size_t>(s)].end());
    }
    auto& op = ops[static_cast<size_t>(s)];
    op.gx.resize(n_points, spaces[static_cast<size_t>(s)]->n_dofs);
    op.gy.resize(n_points, spaces[static_cast<size_t>(s)]->n_dofs);
    op.gx.setFromTriplets(tx.begin(), tx.end());
    op.gy.setFromTriplets(ty.begin(), ty.end());
    op.gx.makeCompressed();
    op.gy.makeCompressed();
  }
  return ops;
}

MollifiedGradientOperator build_mollified_gradient_operator(const MollifierKernel& kernel,
                                                            const FeSpace& space,
                                                            const Mat2X& points,
                                                            const SpatialIndex& index,
                                                            const MollifierQuadSpec& spec,
                                                            const std::vector<int>* element_hint) {
  const FeSpace* ptr = &space;
  return build_mollified_gradient_operators(kernel, *space.mesh, std::span(&ptr, 1), points,
                                            index, spec, element_hint)[0];
}

Mat2X mollified_gradient_discrete(const MollifierKernel& kernel, const FeSpace& space,
                                  const VecX& coeffs, const Mat2X& points,
                                  const SpatialIndex& index, const MollifierQuadSpec& spec) {
  return build_mollified_gradient_operator(kernel, space, points, index, spec).apply(coeffs);
}

namespace {

// Radial profile of the convolution integrand along one ray: with
// s = r u, grad J(s) = grad_factor(r^2) r u, so the angular direction
// factors out and the radial integral is scalar.
struct RayIntegrand {
  const MollifierKernel* kernel;
  const ScalarField* f;
  Vec2 x;
  Vec2 u;
  double shift;  // f value subtracted for interior points

  double operator()(double r) const {
    const double gf = kernel->grad_factor(r * r);
    if (gf == 0.0) return 0.0;
    return gf * r * r * ((*f)(x - r * u) - shift);
  }
};

// Breakpoints (fractions of delta) resolving the bump's sharp radial decay.
constexpr double kRadialBreaks[] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.85, 1.0};

double integrate_ray(const RayIntegrand& ray, double rmax, double delta) {
  const GaussRule& g = gauss10();
  double total = 0.0;
  for (size_t p = 0; p + 1 < std::size(kRadialBreaks); ++p) {
    const double a = std::min(kRadialBreaks[p] * delta, rmax);
    const double b = std::min(kRadialBreaks[p + 1] * delta, rmax);
    if (b <= a) break;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (size_t i = 0; i < g.x.size(); ++i) total += half * g.w[i] * ray(mid + half * g.x[i]);
  }
  return total;
}

double ray_exit(const Rect& rect, const Vec2& x, const Vec2& u) {
  // Exit radius of y(r) = x - r u from the rectangle.
  double r = std::numeric_limits<double>::infinity();
  if (u.x() > 0.0) r = std::min(r, (x.x() - rect.lo.x()) / u.x());
  if (u.x() < 0.0) r = std::min(r, (rect.hi.x() - x.x()) / -u.x());
  if (u.y() > 0.0) r = std::min(r, (x.y() - rect.lo.y()) / u.y());
  if (u.y() < 0.0) r = std::min(r, (rect.hi.y() - x.y()) / -u.y());
  return r;
}

struct PolarIntegrator {
  const MollifierKernel* kernel;
  const ScalarField* f;
  Rect domain;
  Vec2 x;
  double shift;
  double tol;
  double achieved = 0.0;

  Vec2 arc_value(double phi_a, double phi_b) const {
    const GaussRule& g = gauss10();
    const double mid = 0.5 * (phi_a + phi_b), half = 0.5 * (phi_b - phi_a);
    Vec2 total = Vec2::Zero();
    for (size_t i = 0; i < g.x.size(); ++i) {
      const double phi = mid + half * g.x[i];
      const Vec2 u{std::cos(phi), std::sin(phi)};
      RayIntegrand ray{kernel, f, x, u, shift};
      const double rmax = std::min(kernel->delta, ray_exit(domain, x, u));
      total += (half * g.w[i] * integrate_ray(ray, rmax, kernel->delta)) * u;
    }
    return total;
  }

  Vec2 adaptive_arc(double phi_a, double phi_b, double tol_share, int depth) {
    const Vec2 whole = arc_value(phi_a, phi_b);
    const double mid = 0.5 * (phi_a + phi_b);
    const Vec2 split = arc_value(phi_a, mid) + arc_value(mid, phi_b);
    const double est = (whole - split).cwiseAbs().maxCoeff();
    if (est <= tol_share || depth >= 14) {
      achieved += est;
      return split;
    }
    return adaptive_arc(phi_a, mid, 0.5 * tol_share, depth + 1) +
           adaptive_arc(mid, phi_b, 0.5 * tol_share, depth + 1);
  }
};

std::vector<double> critical_angles(const Rect& rect, const Vec2& x, double delta) {
  std::vector<double> angles;
  auto push = [&angles](double phi) {
    phi = std::fmod(phi, 2.0 * kPi);
    if (phi < 0.0) phi += 2.0 * kPi;
    angles.push_back(phi);
  };

  // Corners inside the ball: the exit side switches across these rays.
  for (const Vec2 corner : {rect.lo, Vec2{rect.hi.x(), rect.lo.y()}, rect.hi,
                            Vec2{rect.lo.x(), rect.hi.y()}}) {
    const Vec2 d = x - corner;
    if (d.norm() < delta) push(std::atan2(d.y(), d.x()));
  }
  // Tangency angles where a side starts truncating the ball.
  const double dl = x.x() - rect.lo.x(), dr = rect.hi.x() - x.x();
  const double db = x.y() - rect.lo.y(), dt = rect.hi.y() - x.y();
  if (dl < delta) {
    push(std::acos(dl / delta));
    push(-std::acos(dl / delta));
  }
  if (dr < delta) {
    push(kPi - std::acos(dr / delta));
    push(kPi + std::acos(dr / delta));
  }
  if (db < delta) {
    push(0.5 * kPi - std::acos(db / delta));
    push(0.5 * kPi + std::acos(db / delta));
  }
  if (dt < delta) {
    push(1.5 * kPi - std::acos(dt / delta));
    push(1.5 * kPi + std::acos(dt / delta));
  }

  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-13; }),
               angles.end());
  return angles;
}

}  // namespace

Mat2X mollified_gradient_analytic(const MollifierKernel& kernel, const ScalarField& f,
                                  const Rect& domain, const Mat2X& points, double tol) {
  for (Eigen::Index p = 0; p < points.cols(); ++p)
    if (!domain.contains(points.col(p)))
      throw std::invalid_argument("mollified_gradient_analytic: point outside the domain");

  Mat2X out(2, points.cols());
  std::vector<double> achieved(static_cast<size_t>(points.cols()), 0.0);
  parallel_chunks(static_cast<int>(points.cols()), [&](int, int begin, int end) {
    for (int p = begin; p < end; ++p) {
      const Vec2 x = points.col(p);
      const bool interior = domain.boundary_distance(x) >= kernel.delta;
      PolarIntegrator integ{&kernel, &f, domain, x, interior ? f(x) : 0.0, tol};

      std::vector<double> marks =
          interior ? std::vector<double>{} : critical_angles(domain, x, kernel.delta);
      if (marks.empty()) marks = {0.0, 0.5 * kPi, kPi, 1.5 * kPi};

      Vec2 total = Vec2::Zero();
      for (size_t a = 0; a < marks.size(); ++a) {
        const double phi_a = marks[a];
        const double phi_b = (a + 1 < marks.size()) ? marks[a + 1] : marks[0] + 2.0 * kPi;
        if (phi_b - phi_a < 1e-14) continue;
        total += integ.adaptive_arc(phi_a, phi_b, tol * (phi_b - phi_a) / (2.0 * kPi) * 0.5, 0);
      }
      achieved[static_cast<size_t>(p)] = integ.achieved;
      out.col(p) = total;
    }
  });

  const double worst = *std::max_element(achieved.begin(), achieved.end());
  if (worst > tol)
    throw AccuracyError("mollified_gradient_analytic: tolerance not met", worst);
  return out;
}

}  // namespace thermidor
