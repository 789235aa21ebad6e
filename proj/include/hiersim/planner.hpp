#pragma once

#include <cstdint>
#include <vector>

#include "hiersim/types.hpp"

namespace hiersim {

struct Rect {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
};

struct Workspace {
  Rect bounds;
  std::vector<Rect> obstacles;
  Point2 start{0.0, 0.0};
  Point2 goal{0.0, 0.0};
  double goal_radius = 0.0;
  double clearance = 0.0;  // required distance from obstacles and walls
};

double point_rect_distance(const Point2& p, const Rect& r);
double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);
double segment_segment_distance(const Point2& a1, const Point2& a2,
                                const Point2& b1, const Point2& b2);
// 0 when the segment touches or enters the rectangle.
double segment_rect_distance(const Point2& a, const Point2& b, const Rect& r);

// Clear iff the point keeps >= clearance from every obstacle and sits inside
// the bounding box deflated by clearance. Exact, no sampling.
bool point_clear(const Point2& p, const Workspace& ws);
bool segment_clear(const Point2& a, const Point2& b, const Workspace& ws);

struct Roadmap {
  struct Edge {
    int a = 0, b = 0;
    double length = 0.0;
  };
  std::vector<Point2> nodes;  // node 0 = start, node 1 = goal
  std::vector<Edge> edges;
  std::uint64_t seed = 0;
};

// Uniform rejection sampling of clear nodes (start and goal always included
// and counted), each node connected to its k nearest neighbors with clear
// straight edges. Deterministic for a given seed. Throws SamplingExhausted
// after 100 * n_samples rejected draws.
Roadmap build_prm(const Workspace& ws, int n_samples, int k_neighbors,
                  std::uint64_t rng_seed);

// Dijkstra over edge lengths. start/goal must be roadmap nodes. Throws
// NoPath when disconnected.
std::vector<Point2> shortest_path(const Roadmap& roadmap, const Point2& start,
                                  const Point2& goal);

/// One polyline leg with a trapezoidal (or triangular, when too short to
/// reach cruise) speed profile. The leg starts and ends at rest, so the
/// velocity is continuous through every corner.
struct SegmentProfile {
  double t0 = 0.0;        // start time
  double duration = 0.0;
  double ramp = 0.0;      // accel/decel time actually used
  double peak = 0.0;      // peak speed
  double length = 0.0;
  Point2 from{0.0, 0.0};
  Point2 dir{0.0, 0.0};  // unit direction

  double speed(double local_t) const;
  double distance(double local_t) const;  // exact integral of speed
};

/// Piecewise-linear velocity signal tracing the waypoints exactly.
struct ControlProfile {
  std::vector<SegmentProfile> segments;
  double u_max = 0.0;
  double ramp_time = 0.0;
  double total_time = 0.0;

  Point2 velocity(double t) const;  // zero outside [0, total_time]
  Point2 position(double t) const;  // holds the final waypoint afterwards
};

// Builds the velocity signal: cruise at u_max with linear ramps of
// ramp_time at the ends of every leg; ramp_time 0 gives constant-speed
// legs. ||u2(t)|| <= u_max everywhere and the integrated trajectory passes
// through every waypoint. Throws DegeneratePath on coincident consecutive
// waypoints.
ControlProfile path_to_control(const std::vector<Point2>& waypoints,
                               double u_max, double ramp_time);

}  // namespace hiersim
