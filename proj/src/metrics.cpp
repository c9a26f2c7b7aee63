#include "clothsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace clothsim {

namespace {

// Fixed mapping from engine output to [0, 1); std:: distributions are not
// reproducible across standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

PointSampleSet sample_surface(const TriMesh& mesh, int n, uint64_t seed) {
  if (n < 1) throw MetricError("sample count must be >= 1");
  const auto frames = face_frames(mesh);
  std::vector<double> cumulative(frames.size());
  double total = 0.0;
  for (size_t f = 0; f < frames.size(); ++f) {
    total += frames[f].area;
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw MetricError("mesh has zero surface area");

  std::mt19937_64 rng(seed);
  PointSampleSet out;
  out.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double pick = uniform01(rng) * total;
    const size_t f =
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
    const auto& tri = mesh.faces[std::min(f, frames.size() - 1)];
    const double r1 = std::sqrt(uniform01(rng));
    const double r2 = uniform01(rng);
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    out.points.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
  }
  return out;
}

NearestNeighborIndex::NearestNeighborIndex(const std::vector<Vec3>& points) : points_(points) {
  if (points_.empty()) throw MetricError("nearest-neighbor index needs a nonempty point set");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(points_.size());
  root_ = build(0, static_cast<int>(points_.size()), 0);
}

int NearestNeighborIndex::build(int begin, int end, int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int lhs, int rhs) { return points_[lhs][axis] < points_[rhs][axis]; });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{});
  nodes_[id].axis = axis;
  nodes_[id].point = order_[mid];
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid + 1, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void NearestNeighborIndex::search(int node, const Vec3& q, double& best) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  best = std::min(best, (points_[n.point] - q).squaredNorm());
  const double delta = q[n.axis] - points_[n.point][n.axis];
  const int near = delta < 0.0 ? n.left : n.right;
  const int far = delta < 0.0 ? n.right : n.left;
  search(near, q, best);
  if (delta * delta < best) search(far, q, best);
}

double NearestNeighborIndex::nearest_squared(const Vec3& q) const {
  double best = std::numeric_limits<double>::max();
  search(root_, q, best);
  return best;
}

double chamfer_distance(const PointSampleSet& a, const PointSampleSet& b) {
  if (a.points.empty() || b.points.empty()) {
    throw MetricError("chamfer distance needs two nonempty sets");
  }
  const NearestNeighborIndex index_a(a.points);
  const NearestNeighborIndex index_b(b.points);
  double sum_ab = 0.0;
  for (const Vec3& p : a.points) sum_ab += index_b.nearest_squared(p);
  double sum_ba = 0.0;
  for (const Vec3& p : b.points) sum_ba += index_a.nearest_squared(p);
  return 0.5 * sum_ab / a.points.size() + 0.5 * sum_ba / b.points.size();
}

double f_score(const PointSampleSet& a, const PointSampleSet& b, double tau) {
  if (!(tau > 0.0)) throw MetricError("f-score threshold must be > 0");
  if (a.points.empty() || b.points.empty()) {
    throw MetricError("f-score needs two nonempty sets");
  }
  const NearestNeighborIndex index_a(a.points);
  const NearestNeighborIndex index_b(b.points);
  const double tau2 = tau * tau;
  int hits_a = 0;
  for (const Vec3& p : a.points) hits_a += index_b.nearest_squared(p) <= tau2 ? 1 : 0;
  int hits_b = 0;
  for (const Vec3& p : b.points) hits_b += index_a.nearest_squared(p) <= tau2 ? 1 : 0;
  const double precision = static_cast<double>(hits_a) / a.points.size();
  const double recall = static_cast<double>(hits_b) / b.points.size();
  if (precision + recall == 0.0) return 0.0;
  return 200.0 * precision * recall / (precision + recall);
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Closest point on the triangle by barycentric region tests.
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double t = d1 / (d1 - d3);
    return (p - (a + t * ab)).norm();
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double t = d2 / (d2 - d6);
    return (p - (a + t * ac)).norm();
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + t * (c - b))).norm();
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return (p - (a + v * ab + w * ac)).norm();
}

namespace {

// Solid angle of triangle (a,b,c) seen from the origin-shifted point.
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = a.norm(), lb = b.norm(), lc = c.norm();
  const double numerator = a.dot(b.cross(c));
  const double denominator =
      la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
  return 2.0 * std::atan2(numerator, denominator);
}

}  // namespace

namespace {

double signed_distance_unchecked(const Vec3& point, const TriMesh& body) {
  double best = std::numeric_limits<double>::max();
  double winding = 0.0;
  for (const auto& tri : body.faces) {
    const Vec3& a = body.vertices[tri[0]];
    const Vec3& b = body.vertices[tri[1]];
    const Vec3& c = body.vertices[tri[2]];
    best = std::min(best, point_triangle_distance(point, a, b, c));
    winding += solid_angle(a - point, b - point, c - point);
  }
  winding /= 4.0 * M_PI;
  return winding > 0.5 ? -best : best;
}

}  // namespace

double signed_distance(const Vec3& point, const TriMesh& body) {
  if (!is_closed_manifold(body)) {
    throw MetricError("signed distance requires a closed, consistently oriented mesh");
  }
  return signed_distance_unchecked(point, body);
}

double penetration_depth(const TriMesh& cloth, const TriMesh& body) {
  if (cloth.vertices.empty()) throw MetricError("penetration depth needs cloth vertices");
  if (!is_closed_manifold(body)) {
    throw MetricError("penetration depth requires a closed, consistently oriented body");
  }
  double sum = 0.0;
  for (const Vec3& v : cloth.vertices) {
    sum += std::max(0.0, -signed_distance_unchecked(v, body));
  }
  return sum / cloth.vertices.size();
}

}  // namespace clothsim
