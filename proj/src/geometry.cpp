#include "sflow/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace sflow {

Pose2D transform_to_frame(const Pose2D& point, const Pose2D& frame) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  const double dx = point.x - frame.x;
  const double dy = point.y - frame.y;
  return {c * dx + s * dy, -s * dx + c * dy, normalize_angle(point.theta - frame.theta)};
}

Pose2D transform_from_frame(const Pose2D& local, const Pose2D& frame) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  return {frame.x + c * local.x - s * local.y, frame.y + s * local.x + c * local.y,
          normalize_angle(local.theta + frame.theta)};
}

Aabb Aabb::of(std::span<const Vec2> pts) {
  Aabb box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2& p : pts) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

// ----------------------------------------------------------------------- path

Path::Path(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("path needs at least two vertices");
  cumulative_.assign(points_.size(), 0.0);
  lengths_.resize(points_.size() - 1);
  headings_.resize(points_.size() - 1);
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const Vec2 d = points_[i + 1] - points_[i];
    lengths_[i] = norm(d);
    headings_[i] = std::atan2(d.y, d.x);
    cumulative_[i + 1] = cumulative_[i] + lengths_[i];
  }
  bounds_ = Aabb::of(points_);
}

Path Path::from_polyline(const StaticPolyline& line) {
  std::vector<Vec2> pts;
  pts.reserve(line.vectors.size());
  for (const auto& v : line.vectors) pts.push_back({v.x, v.y});
  return Path(std::move(pts));
}

PathProjection Path::project_range(Vec2 p, std::size_t first, std::size_t last) const {
  PathProjection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = first; i <= last; ++i) {
    const Vec2 a = points_[i];
    const Vec2 d = points_[i + 1] - a;
    const double len2 = d.x * d.x + d.y * d.y;
    double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q{a.x + t * d.x, a.y + t * d.y};
    const Vec2 r = p - q;
    const double d2 = r.x * r.x + r.y * r.y;
    if (d2 < best_d2) {
      best_d2 = d2;
      best.segment = i;
      best.arclength = cumulative_[i] + t * lengths_[i];
      best.lateral_offset = lengths_[i] > 0.0 ? cross(d, p - a) / lengths_[i] : 0.0;
      best.segment_heading = headings_[i];
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

PathProjection Path::project(Vec2 p) const { return project_range(p, 0, segment_count() - 1); }

PathProjection Path::project_window(Vec2 p, double s_lo, double s_hi) const {
  // first segment whose end lies at or beyond s_lo, last whose start lies at or before s_hi
  auto lo = std::lower_bound(cumulative_.begin() + 1, cumulative_.end(), s_lo);
  std::size_t first = std::min<std::size_t>(lo - cumulative_.begin() - 1, segment_count() - 1);
  auto hi = std::upper_bound(cumulative_.begin(), cumulative_.end() - 1, s_hi);
  std::size_t last = hi == cumulative_.begin() ? 0 : static_cast<std::size_t>(hi - cumulative_.begin() - 1);
  last = std::min(last, segment_count() - 1);
  if (last < first) last = first;
  return project_range(p, first, last);
}

Pose2D Path::pose_at(double s) const {
  std::size_t seg;
  if (s <= 0.0) {
    seg = 0;
  } else if (s >= length()) {
    seg = segment_count() - 1;
  } else {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    seg = std::min<std::size_t>(it - cumulative_.begin() - 1, segment_count() - 1);
  }
  const double t = lengths_[seg] > 0.0 ? (s - cumulative_[seg]) / lengths_[seg] : 0.0;
  const Vec2 a = points_[seg];
  const Vec2 d = points_[seg + 1] - a;
  return {a.x + t * d.x, a.y + t * d.y, headings_[seg]};
}

PathProjection project_onto_path(Vec2 point, const Path& path) { return path.project(point); }

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
  return distance(p, Vec2{a.x + t * d.x, a.y + t * d.y});
}

// ------------------------------------------------------------------- polygons

Polygon::Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) throw std::invalid_argument("polygon needs at least three vertices");
  bounds_ = Aabb::of(vertices_);
}

bool Polygon::contains(Vec2 p) const {
  constexpr double kOnEdge = 1e-9;
  if (!bounds_.contains(p, kOnEdge)) return false;
  bool inside = false;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = vertices_[j];
    const Vec2 b = vertices_[i];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  if (inside) return true;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (point_segment_distance(p, vertices_[j], vertices_[i]) <= kOnEdge) return true;
  }
  return false;
}

// ---------------------------------------------------------------- footprints

std::array<Vec2, 4> OrientedBox::corners() const {
  const double c = std::cos(center.theta);
  const double s = std::sin(center.theta);
  const Vec2 f{0.5 * length * c, 0.5 * length * s};
  const Vec2 l{-0.5 * width * s, 0.5 * width * c};
  const Vec2 o = center.position();
  return {o + f + l, o - f + l, o - f - l, o + f - l};
}

namespace {

bool separated_on(Vec2 axis, const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b) {
  double amin = dot(axis, a[0]), amax = amin;
  double bmin = dot(axis, b[0]), bmax = bmin;
  for (int i = 1; i < 4; ++i) {
    const double pa = dot(axis, a[i]);
    const double pb = dot(axis, b[i]);
    amin = std::min(amin, pa);
    amax = std::max(amax, pa);
    bmin = std::min(bmin, pb);
    bmax = std::max(bmax, pb);
  }
  return amax < bmin || bmax < amin;
}

}  // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const Vec2 axes[4] = {{std::cos(a.center.theta), std::sin(a.center.theta)},
                        {-std::sin(a.center.theta), std::cos(a.center.theta)},
                        {std::cos(b.center.theta), std::sin(b.center.theta)},
                        {-std::sin(b.center.theta), std::cos(b.center.theta)}};
  for (const Vec2& axis : axes) {
    if (separated_on(axis, ca, cb)) return false;
  }
  return true;
}

}  // namespace sflow
