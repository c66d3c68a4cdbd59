#include "isospec/shapes.hpp"

#include "isospec/errors.hpp"
#include "isospec/operators.hpp"

#include <Eigen/Geometry>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace isospec::shapes {

namespace {

constexpr double kPi = std::numbers::pi;

Mesh make_mesh(const VertexMatrix& vertices, std::vector<Triangle> triangles) {
  Mesh mesh;
  mesh.topology = MeshTopology(static_cast<int>(vertices.rows()), std::move(triangles));
  mesh.vertices = vertices;
  return mesh;
}

// Flips every triangle whose normal points toward the origin (star-shaped closed surfaces).
void orient_outward(const VertexMatrix& V, std::vector<Triangle>& tris) {
  for (Triangle& t : tris) {
    const Eigen::Vector3d a = V.row(t[0]).transpose();
    const Eigen::Vector3d b = V.row(t[1]).transpose();
    const Eigen::Vector3d c = V.row(t[2]).transpose();
    const Eigen::Vector3d n = (b - a).cross(c - a);
    if (n.dot(a + b + c) < 0.0) std::swap(t[1], t[2]);
  }
}

double loop_length(const Loop2d& loop) {
  double len = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) len += (loop[(i + 1) % loop.size()] - loop[i]).norm();
  return len;
}

}  // namespace

Mesh rectangle_grid(double width, double height, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("rectangle_grid needs at least one cell per side");
  VertexMatrix V((nx + 1) * (ny + 1), 2);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) V.row(id(i, j)) << width * i / nx, height * j / ny;
  }
  std::vector<Triangle> tris;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return make_mesh(V, std::move(tris));
}

Mesh unit_cube() {
  VertexMatrix V(8, 3);
  for (int i = 0; i < 8; ++i) V.row(i) << (i & 1), (i >> 1) & 1, (i >> 2) & 1;
  std::vector<Triangle> tris = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                                {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  Eigen::MatrixXd centered = V.rowwise() - Eigen::RowVector3d(0.5, 0.5, 0.5);
  orient_outward(centered, tris);
  return make_mesh(V, std::move(tris));
}

Mesh tetrahedron() {
  VertexMatrix V(4, 3);
  V << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
  std::vector<Triangle> tris = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  orient_outward(V, tris);
  return make_mesh(V, std::move(tris));
}

Mesh cube_sphere(int m, double jitter, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("cube_sphere needs m >= 1");
  std::map<std::array<int, 3>, int> index;
  std::vector<Eigen::Vector3d> points;
  auto vertex = [&](std::array<int, 3> g) {
    auto [it, inserted] = index.emplace(g, static_cast<int>(points.size()));
    if (inserted) {
      // Equal-angle parametrization spreads vertices more evenly than a flat grid.
      Eigen::Vector3d p;
      for (int c = 0; c < 3; ++c) p[c] = std::tan(0.25 * kPi * (2.0 * g[c] / m - 1.0));
      points.push_back(p.normalized());
    }
    return it->second;
  };
  std::vector<Triangle> tris;
  for (int axis = 0; axis < 3; ++axis) {
    for (int side : {0, m}) {
      const int u = (axis + 1) % 3, w = (axis + 2) % 3;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          auto g = [&](int a, int b) {
            std::array<int, 3> r{};
            r[axis] = side;
            r[u] = a;
            r[w] = b;
            return vertex(r);
          };
          const int v00 = g(i, j), v10 = g(i + 1, j), v11 = g(i + 1, j + 1), v01 = g(i, j + 1);
          tris.push_back({v00, v10, v11});
          tris.push_back({v00, v11, v01});
        }
      }
    }
  }
  VertexMatrix V(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) V.row(i) = points[i].transpose();
  if (jitter > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double amp = jitter * 0.5 * kPi / m;
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
      Eigen::Vector3d p = V.row(i).transpose();
      const double dx = uni(rng), dy = uni(rng), dz = uni(rng);
      p += amp * Eigen::Vector3d(dx, dy, dz);
      V.row(i) = p.normalized().transpose();
    }
  }
  orient_outward(V, tris);
  return make_mesh(V, std::move(tris));
}

Mesh octa_sphere(int levels) {
  if (levels < 0) throw std::invalid_argument("octa_sphere needs levels >= 0");
  std::vector<Eigen::Vector3d> points = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<Triangle> tris = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                                {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  for (int level = 0; level < levels; ++level) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto [it, inserted] = mid.emplace(key, static_cast<int>(points.size()));
      if (inserted) points.push_back((points[a] + points[b]).normalized());
      return it->second;
    };
    std::vector<Triangle> next;
    for (const auto& t : tris) {
      const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({ab, t[1], bc});
      next.push_back({ca, bc, t[2]});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }
  VertexMatrix V(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) V.row(i) = points[i].transpose();
  orient_outward(V, tris);
  return make_mesh(V, std::move(tris));
}

Mesh sphere_with_vertices(int n, double jitter, std::uint64_t seed) {
  const int m = std::max(1, static_cast<int>(std::lround(std::sqrt(std::max(n - 2, 6) / 6.0))));
  return cube_sphere(m, jitter, seed);
}

VertexMatrix scaled(const VertexMatrix& vertices, double sx, double sy, double sz) {
  VertexMatrix out = vertices;
  out.col(0) *= sx;
  out.col(1) *= sy;
  if (out.cols() > 2) out.col(2) *= sz;
  return out;
}

VertexMatrix stretch_bend(const VertexMatrix& vertices, double s) {
  if (vertices.cols() != 3) throw std::invalid_argument("stretch_bend requires 3D vertices");
  VertexMatrix out(vertices.rows(), 3);
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    const double x = vertices(i, 0), y = vertices(i, 1), z = vertices(i, 2);
    out(i, 0) = x * (1.0 + 0.8 * s) + 0.15 * s * y * y;
    out(i, 1) = y * (1.0 - 0.2 * s);
    out(i, 2) = z * (1.0 - 0.1 * s) + s * (0.25 * x * x + 0.1 * x * x * x);
  }
  return out;
}

Loop2d radial_loop(const std::function<double(double)>& radius, int n_points) {
  if (n_points < 3) throw std::invalid_argument("radial_loop needs at least 3 points");
  Loop2d loop;
  for (int i = 0; i < n_points; ++i) {
    const double t = 2.0 * kPi * i / n_points;
    const double r = radius(t);
    loop.emplace_back(r * std::cos(t), r * std::sin(t));
  }
  return loop;
}

Loop2d ellipse_loop(double a, double b, int n_points) {
  Loop2d loop;
  for (int i = 0; i < n_points; ++i) {
    const double t = 2.0 * kPi * i / n_points;
    loop.emplace_back(a * std::cos(t), b * std::sin(t));
  }
  return loop;
}

Loop2d star_loop(int n_points, double amplitude) {
  return radial_loop([amplitude](double t) { return 1.0 + amplitude * std::cos(3.0 * t); }, n_points);
}

Loop2d mickey_loop(int n_points) {
  struct Circle {
    Eigen::Vector2d c;
    double r;
  };
  const Circle circles[] = {{{0.0, 0.0}, 1.0}, {{-0.95, 0.95}, 0.55}, {{0.95, 0.95}, 0.55}};
  return radial_loop(
      [&circles](double t) {
        const Eigen::Vector2d d(std::cos(t), std::sin(t));
        double best = 0.0;
        for (const Circle& circle : circles) {
          const double dc = d.dot(circle.c);
          const double disc = dc * dc - circle.c.squaredNorm() + circle.r * circle.r;
          if (disc >= 0.0) best = std::max(best, dc + std::sqrt(disc));
        }
        return best;
      },
      n_points);
}

Loop2d resample_loop(const Loop2d& loop, int n_points) {
  if (n_points < 3) throw std::invalid_argument("resample_loop needs at least 3 points");
  const std::size_t m = loop.size();
  std::vector<double> cumulative(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) cumulative[i + 1] = cumulative[i] + (loop[(i + 1) % m] - loop[i]).norm();
  const double total = cumulative[m];
  Loop2d out;
  std::size_t seg = 0;
  for (int k = 0; k < n_points; ++k) {
    const double s = total * k / n_points;
    while (seg + 1 < m && cumulative[seg + 1] <= s) ++seg;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double t = len > 0.0 ? (s - cumulative[seg]) / len : 0.0;
    out.push_back(loop[seg] + t * (loop[(seg + 1) % m] - loop[seg]));
  }
  return out;
}

double loops_area(const std::vector<Loop2d>& loops) {
  double area = 0.0;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    area += (i == 0 ? 1.0 : -1.0) * std::abs(loop_signed_area(loops[i]));
  }
  return area;
}

double loops_perimeter(const std::vector<Loop2d>& loops) {
  double p = 0.0;
  for (const auto& loop : loops) p += loop_length(loop);
  return p;
}

std::vector<Loop2d> scale_to_area(std::vector<Loop2d> loops, double area) {
  const double s = std::sqrt(area / loops_area(loops));
  for (auto& loop : loops) {
    for (auto& p : loop) p *= s;
  }
  return loops;
}

int boundary_count(double area, double perimeter, int n_total) {
  // n_interior ~ area / (sqrt(3)/2 h^2) and n_boundary ~ perimeter / h; solve for 1/h.
  const double a = area / 0.8660254037844386;
  const double u = (-perimeter + std::sqrt(perimeter * perimeter + 4.0 * a * n_total)) / (2.0 * a);
  return std::max(3, static_cast<int>(std::lround(perimeter * u)));
}

Mesh polygon_mesh(const std::vector<Loop2d>& loops, int n_total, std::uint64_t seed) {
  if (loops.empty()) throw std::invalid_argument("polygon_mesh needs at least one loop");
  const double area = loops_area(loops);
  const double perimeter = loops_perimeter(loops);
  const int n_boundary = boundary_count(area, perimeter, n_total);
  std::vector<Loop2d> resampled;
  int used = 0;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    int count = static_cast<int>(std::lround(n_boundary * loop_length(loops[i]) / perimeter));
    if (i + 1 == loops.size()) count = std::max(3, n_boundary - used);
    count = std::max(3, count);
    used += count;
    Loop2d loop = resample_loop(loops[i], count);
    // Outer loop counter-clockwise, holes clockwise.
    const bool ccw = loop_signed_area(loop) > 0.0;
    if (ccw != (i == 0)) std::reverse(loop.begin() + 1, loop.end());
    resampled.push_back(std::move(loop));
  }
  RetriangulationResult r = retriangulate(resampled, std::max(0, n_total - used), seed);
  Mesh mesh;
  mesh.vertices = relax_interior(r.topology, r.vertices, 50);
  mesh.topology = std::move(r.topology);
  return mesh;
}

Mesh ellipse_mesh(double a, double b, int n_total, std::uint64_t seed) {
  return polygon_mesh({ellipse_loop(a, b, 512)}, n_total, seed);
}

Mesh annulus(double r_in, double r_out, int n_total, std::uint64_t seed) {
  if (!(0.0 < r_in && r_in < r_out)) throw std::invalid_argument("annulus needs 0 < r_in < r_out");
  Loop2d hole = ellipse_loop(r_in, r_in, 512);
  std::reverse(hole.begin() + 1, hole.end());
  return polygon_mesh({ellipse_loop(r_out, r_out, 512), hole}, n_total, seed);
}

Mesh bar(double length, double width, int nx, int ny, bool folded) {
  if (nx % 3 != 0) throw std::invalid_argument("bar needs nx divisible by 3 so the folds lie on grid lines");
  Mesh flat = rectangle_grid(length, width, nx, ny);
  VertexMatrix V(flat.vertices.rows(), 3);
  const double third = length / 3.0;
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    const double x = flat.vertices(i, 0), y = flat.vertices(i, 1);
    if (!folded || x <= third) {
      V.row(i) << x, y, 0.0;
    } else if (x <= 2.0 * third) {
      V.row(i) << third, y, x - third;
    } else {
      V.row(i) << x - third, y, third;
    }
  }
  return make_mesh(V, flat.topology.triangles());
}

VertexMatrix tutte_embedding(const MeshTopology& topology, const VertexMatrix& boundary) {
  const int n = topology.n_vertices();
  std::vector<int> slot(n, -1);
  int n_free = 0;
  for (int v = 0; v < n; ++v) {
    if (!topology.is_boundary_vertex(v)) slot[v] = n_free++;
  }
  VertexMatrix out = boundary;
  if (n_free == 0) return out;
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n_free, boundary.cols());
  for (int v = 0; v < n; ++v) {
    if (slot[v] < 0) continue;
    const auto nbrs = topology.neighbors(v);
    entries.emplace_back(slot[v], slot[v], static_cast<double>(nbrs.size()));
    for (int u : nbrs) {
      if (slot[u] >= 0) {
        entries.emplace_back(slot[v], slot[u], -1.0);
      } else {
        rhs.row(slot[v]) += boundary.row(u);
      }
    }
  }
  Eigen::SparseMatrix<double> L(n_free, n_free);
  L.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
  if (solver.info() != Eigen::Success) throw MeshError("tutte_embedding: interior system is singular");
  const Eigen::MatrixXd x = solver.solve(rhs);
  for (int v = 0; v < n; ++v) {
    if (slot[v] >= 0) out.row(v) = x.row(slot[v]);
  }
  return out;
}

VertexMatrix ellipse_embedding(const MeshTopology& topology, const VertexMatrix& vertices, double a, double b) {
  const auto loops = boundary_loops(topology);
  if (loops.size() != 1) throw std::invalid_argument("ellipse_embedding requires exactly one boundary loop");
  const auto& loop = loops[0];
  const std::size_t m = loop.size();
  std::vector<double> cumulative(m + 1, 0.0);
  double orientation = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::Vector2d p(vertices(loop[i], 0), vertices(loop[i], 1));
    const Eigen::Vector2d q(vertices(loop[(i + 1) % m], 0), vertices(loop[(i + 1) % m], 1));
    cumulative[i + 1] = cumulative[i] + (q - p).norm();
    orientation += p.x() * q.y() - p.y() * q.x();
  }
  const double sign = orientation >= 0.0 ? 1.0 : -1.0;
  VertexMatrix pinned = VertexMatrix::Zero(vertices.rows(), 2);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = sign * 2.0 * kPi * cumulative[i] / cumulative[m];
    pinned.row(loop[i]) << a * std::cos(t), b * std::sin(t);
  }
  return tutte_embedding(topology, pinned);
}

double mesh_area(const MeshTopology& topology, const VertexMatrix& vertices) {
  double area = 0.0;
  for (double a : triangle_areas(vertices, topology)) area += a;
  return area;
}

VertexMatrix with_area(const MeshTopology& topology, const VertexMatrix& vertices, double area) {
  const double current = mesh_area(topology, vertices);
  if (!(current > 0.0)) throw DegenerateError("with_area: mesh has zero area", -1);
  const Eigen::RowVectorXd center = vertices.colwise().mean();
  return ((vertices.rowwise() - center) * std::sqrt(area / current)).rowwise() + center;
}

}  // namespace isospec::shapes
