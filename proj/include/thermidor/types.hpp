#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace thermidor {

using Vec2 = Eigen::Vector2d;
using VecX = Eigen::VectorXd;
using Mat2X = Eigen::Matrix2Xd;
using MatX = Eigen::MatrixXd;

// Compressed sparse row storage; column indices strictly increasing within
// each row once compressed.
using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

struct Rect {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{1.0, 1.0};

  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
  double area() const { return width() * height(); }
  bool contains(const Vec2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
  // Distance from an interior point to the rectangle's boundary.
  double boundary_distance(const Vec2& p) const {
    return std::min(std::min(p.x() - lo.x(), hi.x() - p.x()),
                    std::min(p.y() - lo.y(), hi.y() - p.y()));
  }
};

inline Rect unit_square() { return Rect{{0.0, 0.0}, {1.0, 1.0}}; }

}  // namespace thermidor
