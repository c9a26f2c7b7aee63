#pragma once

#include <cstdint>
#include <vector>

#include "clothsim/geometry.hpp"

namespace clothsim {

struct PointSampleSet {
  std::vector<Vec3> points;
};

/// Area-weighted surface samples, reproducible from the seed.
PointSampleSet sample_surface(const TriMesh& mesh, int n, uint64_t seed);

/// Symmetric mean of squared nearest-neighbor distances:
/// 0.5 mean_A d(a,B)^2 + 0.5 mean_B d(b,A)^2.
double chamfer_distance(const PointSampleSet& a, const PointSampleSet& b);

/// Percentage in [0, 100]; tau is an unsquared distance threshold.
double f_score(const PointSampleSet& a, const PointSampleSet& b, double tau);

/// Distance to the surface, negative inside. The sign comes from the
/// generalized winding number; requires a closed, consistently oriented
/// mesh (throws MetricError otherwise).
double signed_distance(const Vec3& point, const TriMesh& body);

/// Mean over cloth vertices of max(0, -signed_distance).
double penetration_depth(const TriMesh& cloth, const TriMesh& body);

/// Unsigned distance from a point to a triangle.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Nearest-neighbor index over a fixed point set (median-split kd-tree).
class NearestNeighborIndex {
 public:
  explicit NearestNeighborIndex(const std::vector<Vec3>& points);
  /// Squared distance from q to the nearest indexed point.
  double nearest_squared(const Vec3& q) const;

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int axis = 0;
    int point = -1;
  };
  int build(int begin, int end, int depth);
  void search(int node, const Vec3& q, double& best) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace clothsim
