#include "hiersim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

#include "hiersim/errors.hpp"
#include "hiersim/rng.hpp"

namespace hiersim {

namespace {

double cross2(const Point2& a, const Point2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

bool point_in_rect(const Point2& p, const Rect& r) {
  return p.x() >= r.xmin && p.x() <= r.xmax && p.y() >= r.ymin &&
         p.y() <= r.ymax;
}

int orientation(const Point2& a, const Point2& b, const Point2& c) {
  const double v = cross2(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point2& a1, const Point2& a2, const Point2& b1,
                        const Point2& b2) {
  const int o1 = orientation(a1, a2, b1);
  const int o2 = orientation(a1, a2, b2);
  const int o3 = orientation(b1, b2, a1);
  const int o4 = orientation(b1, b2, a2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a1, a2, b1)) return true;
  if (o2 == 0 && on_segment(a1, a2, b2)) return true;
  if (o3 == 0 && on_segment(b1, b2, a1)) return true;
  if (o4 == 0 && on_segment(b1, b2, a2)) return true;
  return false;
}

}  // namespace

double point_rect_distance(const Point2& p, const Rect& r) {
  const double dx = std::max({r.xmin - p.x(), 0.0, p.x() - r.xmax});
  const double dy = std::max({r.ymin - p.y(), 0.0, p.y() - r.ymax});
  return std::hypot(dx, dy);
}

double point_segment_distance(const Point2& p, const Point2& a,
                              const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

double segment_segment_distance(const Point2& a1, const Point2& a2,
                                const Point2& b1, const Point2& b2) {
  if (segments_intersect(a1, a2, b1, b2)) return 0.0;
  // Non-crossing planar segments attain their minimum at an endpoint.
  return std::min(std::min(point_segment_distance(a1, b1, b2),
                           point_segment_distance(a2, b1, b2)),
                  std::min(point_segment_distance(b1, a1, a2),
                           point_segment_distance(b2, a1, a2)));
}

double segment_rect_distance(const Point2& a, const Point2& b, const Rect& r) {
  if (point_in_rect(a, r) || point_in_rect(b, r)) return 0.0;
  const Point2 c00(r.xmin, r.ymin), c10(r.xmax, r.ymin);
  const Point2 c11(r.xmax, r.ymax), c01(r.xmin, r.ymax);
  double d = segment_segment_distance(a, b, c00, c10);
  d = std::min(d, segment_segment_distance(a, b, c10, c11));
  d = std::min(d, segment_segment_distance(a, b, c11, c01));
  d = std::min(d, segment_segment_distance(a, b, c01, c00));
  return d;
}

bool point_clear(const Point2& p, const Workspace& ws) {
  const double eps = ws.clearance;
  const Rect& b = ws.bounds;
  if (p.x() < b.xmin + eps || p.x() > b.xmax - eps || p.y() < b.ymin + eps ||
      p.y() > b.ymax - eps) {
    return false;
  }
  for (const Rect& obs : ws.obstacles) {
    if (point_rect_distance(p, obs) < eps) return false;
  }
  return true;
}

bool segment_clear(const Point2& a, const Point2& b, const Workspace& ws) {
  // The deflated bounding box is convex, so endpoint containment suffices.
  if (!point_clear(a, ws) || !point_clear(b, ws)) return false;
  for (const Rect& obs : ws.obstacles) {
    if (segment_rect_distance(a, b, obs) < ws.clearance) return false;
  }
  return true;
}

Roadmap build_prm(const Workspace& ws, int n_samples, int k_neighbors,
                  std::uint64_t rng_seed) {
  if (n_samples < 2) {
    throw std::invalid_argument("build_prm: need at least start and goal");
  }
  if (k_neighbors < 1) {
    throw std::invalid_argument("build_prm: k_neighbors must be >= 1");
  }
  if (!point_clear(ws.start, ws) || !point_clear(ws.goal, ws)) {
    throw NoPath("build_prm: start or goal violates the clearance");
  }

  Roadmap map;
  map.seed = rng_seed;
  map.nodes.push_back(ws.start);
  map.nodes.push_back(ws.goal);

  Rng rng(rng_seed);
  long rejected = 0;
  const long reject_cap = 100L * n_samples;
  while (static_cast<int>(map.nodes.size()) < n_samples) {
    const Point2 p(rng.uniform(ws.bounds.xmin, ws.bounds.xmax),
                   rng.uniform(ws.bounds.ymin, ws.bounds.ymax));
    if (point_clear(p, ws)) {
      map.nodes.push_back(p);
    } else if (++rejected >= reject_cap) {
      throw SamplingExhausted("build_prm: rejection budget exhausted");
    }
  }

  const int n = static_cast<int>(map.nodes.size());
  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<double, int>> order;
  order.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    order.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) order.emplace_back((map.nodes[j] - map.nodes[i]).norm(), j);
    }
    std::sort(order.begin(), order.end());  // ties break on node index
    int connected = 0;
    for (const auto& [dist, j] : order) {
      if (connected >= k_neighbors) break;
      if (!segment_clear(map.nodes[i], map.nodes[j], ws)) continue;
      ++connected;
      const int lo = std::min(i, j), hi = std::max(i, j);
      if (seen.insert({lo, hi}).second) {
        map.edges.push_back({lo, hi, dist});
      }
    }
  }
  return map;
}

std::vector<Point2> shortest_path(const Roadmap& roadmap, const Point2& start,
                                  const Point2& goal) {
  const int n = static_cast<int>(roadmap.nodes.size());
  auto find_node = [&](const Point2& p, const char* what) {
    for (int i = 0; i < n; ++i) {
      if (roadmap.nodes[i].x() == p.x() && roadmap.nodes[i].y() == p.y()) {
        return i;
      }
    }
    throw std::invalid_argument(std::string("shortest_path: ") + what +
                                " is not a roadmap node");
  };
  const int s = find_node(start, "start");
  const int g = find_node(goal, "goal");

  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& e : roadmap.edges) {
    adj[e.a].emplace_back(e.b, e.length);
    adj[e.b].emplace_back(e.a, e.length);
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[s] = 0.0;
  queue.push({0.0, s});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    if (u == g) break;
    for (const auto& [v, w] : adj[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        prev[v] = u;
        queue.push({dist[v], v});
      }
    }
  }
  if (dist[g] == inf) throw NoPath("shortest_path: goal unreachable");

  std::vector<Point2> path;
  for (int v = g; v != -1; v = prev[v]) path.push_back(roadmap.nodes[v]);
  std::reverse(path.begin(), path.end());
  return path;
}

double SegmentProfile::speed(double local_t) const {
  if (local_t <= 0.0 || local_t >= duration) return 0.0;
  if (ramp <= 0.0) return peak;
  if (local_t < ramp) return peak * local_t / ramp;
  if (local_t > duration - ramp) return peak * (duration - local_t) / ramp;
  return peak;
}

double SegmentProfile::distance(double local_t) const {
  if (local_t <= 0.0) return 0.0;
  if (local_t >= duration) return length;
  if (ramp <= 0.0) return peak * local_t;
  if (local_t <= ramp) return 0.5 * peak * local_t * local_t / ramp;
  const double d_ramp = 0.5 * peak * ramp;
  if (local_t <= duration - ramp) return d_ramp + peak * (local_t - ramp);
  const double tail = duration - local_t;
  return length - 0.5 * peak * tail * tail / ramp;
}

Point2 ControlProfile::velocity(double t) const {
  for (const auto& seg : segments) {
    if (t >= seg.t0 && t <= seg.t0 + seg.duration) {
      return seg.speed(t - seg.t0) * seg.dir;
    }
  }
  return Point2::Zero();
}

Point2 ControlProfile::position(double t) const {
  if (segments.empty()) return Point2::Zero();
  if (t <= 0.0) return segments.front().from;
  for (const auto& seg : segments) {
    if (t <= seg.t0 + seg.duration) {
      return seg.from + seg.distance(t - seg.t0) * seg.dir;
    }
  }
  const auto& last = segments.back();
  return last.from + last.length * last.dir;
}

ControlProfile path_to_control(const std::vector<Point2>& waypoints,
                               double u_max, double ramp_time) {
  if (!(u_max > 0.0)) throw std::invalid_argument("path_to_control: u_max <= 0");
  if (ramp_time < 0.0) {
    throw std::invalid_argument("path_to_control: negative ramp_time");
  }
  if (waypoints.size() < 2) {
    throw std::invalid_argument("path_to_control: need at least two waypoints");
  }

  ControlProfile profile;
  profile.u_max = u_max;
  profile.ramp_time = ramp_time;
  double t = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Point2 delta = waypoints[i + 1] - waypoints[i];
    const double length = delta.norm();
    if (length < 1e-12) {
      throw DegeneratePath("path_to_control: consecutive waypoints coincide");
    }
    SegmentProfile seg;
    seg.t0 = t;
    seg.length = length;
    seg.from = waypoints[i];
    seg.dir = delta / length;
    if (ramp_time <= 0.0) {
      seg.ramp = 0.0;
      seg.peak = u_max;
      seg.duration = length / u_max;
    } else if (length >= u_max * ramp_time) {
      // Trapezoid: area u_max * (duration - ramp_time) covers the leg.
      seg.ramp = ramp_time;
      seg.peak = u_max;
      seg.duration = length / u_max + ramp_time;
    } else {
      // Leg too short to reach cruise; triangular profile with the same
      // acceleration u_max / ramp_time.
      seg.peak = std::sqrt(length * u_max / ramp_time);
      seg.ramp = seg.peak * ramp_time / u_max;
      seg.duration = 2.0 * seg.ramp;
    }
    t += seg.duration;
    profile.segments.push_back(seg);
  }
  profile.total_time = t;
  return profile;
}

}  // namespace hiersim
