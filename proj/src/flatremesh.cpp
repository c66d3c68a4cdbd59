#include "isospec/flatremesh.hpp"

#include "isospec/errors.hpp"
#include "isospec/geometry_detail.hpp"
#include "isospec/operators.hpp"
#include "isospec/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <set>
#include <unordered_map>

namespace isospec {

namespace {

using predicates::orient2d;

std::uint64_t key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

///
/// Incremental (Bowyer-Watson) Delaunay triangulation with constraint recovery by edge
/// flips. Triangles are kept counter-clockwise; a directed-edge map gives adjacency.
///
class ConstrainedTriangulation {
 public:
  explicit ConstrainedTriangulation(std::vector<Eigen::Vector2d> points) : pts_(std::move(points)) {
    Eigen::Vector2d lo = pts_.front(), hi = pts_.front();
    for (const auto& p : pts_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Eigen::Vector2d center = 0.5 * (lo + hi);
    const double span = std::max((hi - lo).maxCoeff(), 1e-12);
    const int base = static_cast<int>(pts_.size());
    pts_.push_back(center + Eigen::Vector2d(-40.0 * span, -30.0 * span));
    pts_.push_back(center + Eigen::Vector2d(40.0 * span, -30.0 * span));
    pts_.push_back(center + Eigen::Vector2d(0.0, 40.0 * span));
    n_real_ = base;
    add_triangle({base, base + 1, base + 2});
  }

  void insert(int p) {
    const Eigen::Vector2d& P = pts_[p];
    int seed = -1;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!alive_[t]) continue;
      const auto& v = tris_[t];
      if (orient2d(pts_[v[0]], pts_[v[1]], P) >= 0 && orient2d(pts_[v[1]], pts_[v[2]], P) >= 0 &&
          orient2d(pts_[v[2]], pts_[v[0]], P) >= 0) {
        seed = t;
        break;
      }
    }
    if (seed < 0) throw Error("retriangulate: point location failed");

    std::set<int> forced{seed};
    // A point on an edge of the seed triangle needs the triangle across that edge too.
    for (int c = 0; c < 3; ++c) {
      const int a = tris_[seed][c], b = tris_[seed][(c + 1) % 3];
      if (orient2d(pts_[a], pts_[b], P) == 0) {
        const int across = triangle_with_edge(b, a);
        if (across >= 0) forced.insert(across);
      }
    }

    std::set<int> excluded;
    std::vector<int> cavity;
    for (int attempt = 0;; ++attempt) {
      cavity = grow_cavity(forced, excluded, P);
      const int bad = invisible_owner(cavity, forced, P);
      if (bad < 0) break;
      if (attempt > 1000) throw Error("retriangulate: cavity repair did not converge");
      excluded.insert(bad);
    }

    std::set<int> in_cavity(cavity.begin(), cavity.end());
    std::vector<std::array<int, 2>> rim;
    for (int t : cavity) {
      for (int c = 0; c < 3; ++c) {
        const int a = tris_[t][c], b = tris_[t][(c + 1) % 3];
        const int across = triangle_with_edge(b, a);
        if (across < 0 || !in_cavity.count(across)) rim.push_back({a, b});
      }
    }
    for (int t : cavity) remove_triangle(t);
    for (const auto& e : rim) add_triangle({e[0], e[1], p});
  }

  bool has_edge(int a, int b) const { return dir_.count(key(a, b)) || dir_.count(key(b, a)); }

  void enforce_constraint(int a, int b) {
    if (has_edge(a, b)) return;
    std::deque<std::array<int, 2>> crossing;
    for (const auto& [k, t] : dir_) {
      const int u = static_cast<int>(k >> 32);
      const int v = static_cast<int>(k & 0xffffffffu);
      if (u > v && dir_.count(key(v, u))) continue;  // visit each interior edge once
      if (u == a || u == b || v == a || v == b) continue;
      if (predicates::segments_cross_properly(pts_[a], pts_[b], pts_[u], pts_[v])) crossing.push_back({u, v});
    }
    std::size_t guard = 0;
    while (!crossing.empty()) {
      if (++guard > 200000) throw Error("retriangulate: constraint recovery did not terminate");
      const auto [u, v] = crossing.front();
      crossing.pop_front();
      const int t1 = triangle_with_edge(u, v);
      const int t2 = triangle_with_edge(v, u);
      if (t1 < 0 || t2 < 0) throw Error("retriangulate: constraint crosses the triangulation hull");
      const int w1 = apex(t1, u, v);
      const int w2 = apex(t2, v, u);
      if (!predicates::segments_cross_properly(pts_[u], pts_[v], pts_[w1], pts_[w2])) {
        crossing.push_back({u, v});
        continue;
      }
      flip(t1, t2, u, v, w1, w2);
      if (w1 != a && w1 != b && w2 != a && w2 != b &&
          predicates::segments_cross_properly(pts_[a], pts_[b], pts_[w1], pts_[w2])) {
        crossing.push_back({w1, w2});
      }
    }
    if (!has_edge(a, b)) throw Error("retriangulate: failed to recover a boundary edge");
  }

  /// Lawson flips on unconstrained edges until locally Delaunay.
  void restore_delaunay(const std::set<std::uint64_t>& constrained) {
    for (int pass = 0; pass < 100; ++pass) {
      bool changed = false;
      for (int t1 = 0; t1 < static_cast<int>(tris_.size()); ++t1) {
        if (!alive_[t1]) continue;
        for (int c = 0; c < 3; ++c) {
          const int u = tris_[t1][c], v = tris_[t1][(c + 1) % 3];
          if (constrained.count(key(std::min(u, v), std::max(u, v)))) continue;
          const int t2 = triangle_with_edge(v, u);
          if (t2 < 0) continue;
          const int w1 = apex(t1, u, v);
          const int w2 = apex(t2, v, u);
          if (predicates::incircle(pts_[u], pts_[v], pts_[w1], pts_[w2]) <= 0.0) continue;
          if (!predicates::segments_cross_properly(pts_[u], pts_[v], pts_[w1], pts_[w2])) continue;
          flip(t1, t2, u, v, w1, w2);
          changed = true;
          break;
        }
      }
      if (!changed) return;
    }
  }

  std::vector<Triangle> real_triangles() const {
    std::vector<Triangle> out;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!alive_[t]) continue;
      const auto& v = tris_[t];
      if (v[0] >= n_real_ || v[1] >= n_real_ || v[2] >= n_real_) continue;
      out.push_back({v[0], v[1], v[2]});
    }
    return out;
  }

  const Eigen::Vector2d& point(int i) const { return pts_[i]; }

 private:
  std::vector<int> grow_cavity(const std::set<int>& forced, const std::set<int>& excluded,
                               const Eigen::Vector2d& P) const {
    std::vector<int> cavity(forced.begin(), forced.end());
    std::set<int> seen(forced.begin(), forced.end());
    for (std::size_t i = 0; i < cavity.size(); ++i) {
      const auto& v = tris_[cavity[i]];
      for (int c = 0; c < 3; ++c) {
        const int across = triangle_with_edge(v[(c + 1) % 3], v[c]);
        if (across < 0 || seen.count(across) || excluded.count(across)) continue;
        const auto& w = tris_[across];
        if (predicates::incircle(pts_[w[0]], pts_[w[1]], pts_[w[2]], P) > 0.0) {
          seen.insert(across);
          cavity.push_back(across);
        }
      }
    }
    return cavity;
  }

  // A non-forced cavity triangle owning a rim edge that P does not see strictly, or -1.
  int invisible_owner(const std::vector<int>& cavity, const std::set<int>& forced, const Eigen::Vector2d& P) const {
    std::set<int> in_cavity(cavity.begin(), cavity.end());
    for (int t : cavity) {
      for (int c = 0; c < 3; ++c) {
        const int a = tris_[t][c], b = tris_[t][(c + 1) % 3];
        const int across = triangle_with_edge(b, a);
        if (across >= 0 && in_cavity.count(across)) continue;
        if (orient2d(pts_[a], pts_[b], P) > 0) continue;
        if (!forced.count(t)) return t;
        if (across >= 0 && !in_cavity.count(across)) continue;  // collinear rim on a forced triangle
        throw Error("retriangulate: point lies on the triangulation hull");
      }
    }
    return -1;
  }

  int triangle_with_edge(int a, int b) const {
    auto it = dir_.find(key(a, b));
    return it == dir_.end() ? -1 : it->second;
  }

  int apex(int t, int a, int b) const {
    for (int v : tris_[t]) {
      if (v != a && v != b) return v;
    }
    return -1;
  }

  void flip(int t1, int t2, int u, int v, int w1, int w2) {
    remove_triangle(t1);
    remove_triangle(t2);
    add_triangle({u, w2, w1});
    add_triangle({w2, v, w1});
  }

  int add_triangle(std::array<int, 3> v) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back(v);
    alive_.push_back(1);
    for (int c = 0; c < 3; ++c) dir_[key(v[c], v[(c + 1) % 3])] = id;
    return id;
  }

  void remove_triangle(int t) {
    alive_[t] = 0;
    const auto& v = tris_[t];
    for (int c = 0; c < 3; ++c) {
      auto it = dir_.find(key(v[c], v[(c + 1) % 3]));
      if (it != dir_.end() && it->second == t) dir_.erase(it);
    }
  }

  std::vector<Eigen::Vector2d> pts_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<char> alive_;
  std::unordered_map<std::uint64_t, int> dir_;
  int n_real_ = 0;
};

std::vector<Eigen::Vector2d> sample_interior(const std::vector<Loop2d>& loops, int target, std::uint64_t seed) {
  std::vector<Eigen::Vector2d> best;
  if (target <= 0) return best;
  double area = 0.0;
  Eigen::Vector2d lo = loops[0][0], hi = loops[0][0];
  for (const auto& loop : loops) {
    area += std::abs(loop_signed_area(loop)) * (&loop == &loops[0] ? 1.0 : -1.0);
    for (const auto& p : loop) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  area = std::abs(area);
  // Triangular lattice: one point per sqrt(3)/2 h^2.
  double h = std::sqrt(area / (0.8660254037844386 * target));
  for (int iter = 0; iter < 40; ++iter) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.15 * h, 0.15 * h);
    std::vector<Eigen::Vector2d> pts;
    const double dy = 0.8660254037844386 * h;
    const double margin = 0.6 * h;
    int row = 0;
    for (double y = lo.y() + 0.5 * dy; y < hi.y(); y += dy, ++row) {
      for (double x = lo.x() + (row % 2 ? 0.5 * h : 0.0); x < hi.x() + h; x += h) {
        Eigen::Vector2d p(x + jitter(rng), y + jitter(rng));
        if (!inside_loops(loops, p)) continue;
        bool near = false;
        for (const auto& loop : loops) {
          for (std::size_t i = 0; i < loop.size() && !near; ++i) {
            near = point_segment_distance(p, loop[i], loop[(i + 1) % loop.size()]) < margin;
          }
          if (near) break;
        }
        if (!near) pts.push_back(p);
      }
    }
    const int count = static_cast<int>(pts.size());
    if (best.empty() || std::abs(count - target) < std::abs(static_cast<int>(best.size()) - target)) best = pts;
    if (std::abs(count - target) <= std::max(1, target / 20)) break;
    h *= std::sqrt(std::max(count, 1) / static_cast<double>(target));
  }
  return best;
}

}  // namespace

double loop_signed_area(const Loop2d& loop) {
  double s = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto& a = loop[i];
    const auto& b = loop[(i + 1) % loop.size()];
    s += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * s;
}

bool inside_loops(const std::vector<Loop2d>& loops, const Eigen::Vector2d& p) {
  bool inside = false;
  for (const auto& loop : loops) {
    for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
      const auto& a = loop[i];
      const auto& b = loop[j];
      if ((a.y() > p.y()) != (b.y() > p.y())) {
        const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
        if (p.x() < x) inside = !inside;
      }
    }
  }
  return inside;
}

void check_simple_loops(const std::vector<Loop2d>& loops) {
  struct Segment {
    Eigen::Vector2d a, b;
    int loop, index, global;
  };
  std::vector<Segment> segs;
  for (int l = 0; l < static_cast<int>(loops.size()); ++l) {
    const auto& loop = loops[l];
    if (loop.size() < 3) throw SelfIntersectionError("boundary loop with fewer than 3 points", -1, -1);
    for (int i = 0; i < static_cast<int>(loop.size()); ++i) {
      segs.push_back({loop[i], loop[(i + 1) % loop.size()], l, i, static_cast<int>(segs.size())});
    }
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const Segment& s = segs[i];
      const Segment& t = segs[j];
      const int len = static_cast<int>(loops[s.loop].size());
      const bool adjacent = s.loop == t.loop && ((s.index + 1) % len == t.index || (t.index + 1) % len == s.index);
      if (adjacent) {
        // Neighbors share one endpoint; they must not fold back onto each other.
        const Eigen::Vector2d& shared = (s.index + 1) % len == t.index ? s.b : s.a;
        const Eigen::Vector2d& p = (s.index + 1) % len == t.index ? s.a : s.b;
        const Eigen::Vector2d& q = (s.index + 1) % len == t.index ? t.b : t.a;
        if (orient2d(p, shared, q) == 0 && (p - shared).dot(q - shared) > 0.0) {
          throw SelfIntersectionError("boundary segments " + std::to_string(s.global) + " and " +
                                          std::to_string(t.global) + " overlap",
                                      s.global, t.global);
        }
        continue;
      }
      if (predicates::segments_intersect(s.a, s.b, t.a, t.b)) {
        throw SelfIntersectionError(
            "boundary segments " + std::to_string(s.global) + " and " + std::to_string(t.global) + " intersect",
            s.global, t.global);
      }
    }
  }
}

RetriangulationResult retriangulate(const std::vector<Loop2d>& loops, int target_interior, std::uint64_t seed) {
  if (loops.empty()) throw std::invalid_argument("retriangulate: no boundary loops");
  check_simple_loops(loops);

  std::vector<Eigen::Vector2d> points;
  std::vector<std::array<int, 2>> constraints;
  for (const auto& loop : loops) {
    const int start = static_cast<int>(points.size());
    for (std::size_t i = 0; i < loop.size(); ++i) {
      points.push_back(loop[i]);
      constraints.push_back({start + static_cast<int>(i), start + static_cast<int>((i + 1) % loop.size())});
    }
  }
  const int n_boundary = static_cast<int>(points.size());
  for (const auto& p : sample_interior(loops, target_interior, seed)) points.push_back(p);

  ConstrainedTriangulation cdt(points);
  for (int i = 0; i < static_cast<int>(points.size()); ++i) cdt.insert(i);
  std::set<std::uint64_t> constrained;
  for (const auto& [a, b] : constraints) {
    cdt.enforce_constraint(a, b);
    constrained.insert(key(std::min(a, b), std::max(a, b)));
  }
  cdt.restore_delaunay(constrained);

  std::vector<Triangle> kept;
  for (const Triangle& t : cdt.real_triangles()) {
    const Eigen::Vector2d centroid = (cdt.point(t[0]) + cdt.point(t[1]) + cdt.point(t[2])) / 3.0;
    if (inside_loops(loops, centroid)) kept.push_back(t);
  }

  // Compact: boundary points keep their indices, unused interior points are dropped.
  std::vector<int> remap(points.size(), -1);
  for (int i = 0; i < n_boundary; ++i) remap[i] = i;
  int next = n_boundary;
  for (Triangle& t : kept) {
    for (int& v : t) {
      if (remap[v] < 0) remap[v] = next++;
      v = remap[v];
    }
  }
  RetriangulationResult result;
  result.vertices.resize(next, 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (remap[i] >= 0) result.vertices.row(remap[i]) = points[i].transpose();
  }
  result.topology = MeshTopology(next, std::move(kept));
  result.boundary_map.resize(n_boundary);
  for (int i = 0; i < n_boundary; ++i) result.boundary_map[i] = i;

  for (const auto& [a, b] : constraints) {
    const int e = result.topology.find_edge(a, b);
    if (e < 0 || !result.topology.edges()[e].is_boundary()) {
      throw Error("retriangulate: boundary segment (" + std::to_string(a) + ", " + std::to_string(b) +
                  ") is not a boundary edge of the result");
    }
  }
  if (result.topology.n_boundary_edges() != static_cast<int>(constraints.size())) {
    throw Error("retriangulate: unexpected boundary edges in the result");
  }
  const std::vector<double> areas = signed_triangle_areas(result.vertices, result.topology);
  double mean = 0.0;
  for (double a : areas) mean += a;
  mean /= static_cast<double>(std::max<std::size_t>(areas.size(), 1));
  for (std::size_t f = 0; f < areas.size(); ++f) {
    if (areas[f] < 1e-12 * mean || areas[f] <= 0.0) {
      throw DegenerateError("retriangulate: produced a degenerate triangle", static_cast<int>(f));
    }
  }
  return result;
}

std::vector<Loop2d> boundary_polygons(const MeshTopology& topology, const VertexMatrix& vertices) {
  std::vector<Loop2d> out;
  for (const auto& loop : boundary_loops(topology)) {
    Loop2d poly;
    for (int v : loop) poly.emplace_back(vertices(v, 0), vertices(v, 1));
    out.push_back(std::move(poly));
  }
  return out;
}

RetriangulationResult retriangulate(const MeshTopology& topology, const VertexMatrix& vertices, int target_interior,
                                    std::uint64_t seed) {
  if (vertices.cols() != 2) throw std::invalid_argument("retriangulate requires a 2D mesh");
  const auto loops = boundary_loops(topology);
  if (loops.empty()) throw std::invalid_argument("retriangulate: mesh has no boundary");
  std::vector<Loop2d> polys;
  std::vector<int> order;
  for (const auto& loop : loops) {
    Loop2d poly;
    for (int v : loop) {
      poly.emplace_back(vertices(v, 0), vertices(v, 1));
      order.push_back(v);
    }
    polys.push_back(std::move(poly));
  }
  RetriangulationResult local = retriangulate(polys, target_interior, seed);
  std::vector<int> by_old(topology.n_vertices(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) by_old[order[i]] = local.boundary_map[i];
  local.boundary_map = std::move(by_old);
  return local;
}

VertexMatrix relax_interior(const MeshTopology& topology, const VertexMatrix& vertices, int iterations) {
  if (vertices.cols() != 2) throw std::invalid_argument("relax_interior requires a 2D mesh");
  VertexMatrix V = vertices;
  const auto& tris = topology.triangles();
  for (int sweep = 0; sweep < iterations; ++sweep) {
    for (int v = 0; v < topology.n_vertices(); ++v) {
      if (topology.is_boundary_vertex(v)) continue;
      const auto nbrs = topology.neighbors(v);
      if (nbrs.empty()) continue;
      Eigen::RowVector2d target = Eigen::RowVector2d::Zero();
      for (int u : nbrs) target += V.row(u);
      target /= static_cast<double>(nbrs.size());
      const Eigen::RowVector2d old = V.row(v);
      std::vector<double> before;
      for (int f : topology.vertex_triangles(v)) before.push_back(detail::twice_signed_area(V, tris[f]));
      V.row(v) = target;
      std::size_t i = 0;
      for (int f : topology.vertex_triangles(v)) {
        if (before[i++] > 0.0 && detail::twice_signed_area(V, tris[f]) <= 0.0) {
          V.row(v) = old;
          break;
        }
      }
    }
  }
  return V;
}

double interior_edge_energy(const MeshTopology& topology, const VertexMatrix& vertices) {
  double sum = 0.0;
  for (const Edge& e : topology.edges()) {
    if (topology.is_boundary_vertex(e.v[0]) && topology.is_boundary_vertex(e.v[1])) continue;
    sum += (vertices.row(e.v[0]) - vertices.row(e.v[1])).squaredNorm();
  }
  return sum;
}

}  // namespace isospec
