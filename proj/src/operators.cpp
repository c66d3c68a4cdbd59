#include "isospec/operators.hpp"

#include "isospec/errors.hpp"
#include "isospec/geometry_detail.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

namespace isospec {

std::vector<Triplet> SparseSymmetric::entries() const {
  std::vector<Triplet> out;
  for (int col = 0; col < matrix_.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix_, col); it; ++it) {
      if (it.row() <= it.col()) out.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
    }
  }
  return out;
}

void SparseSymmetric::write_triplets(std::ostream& out) const {
  const auto old = out.precision(17);
  for (const Triplet& t : entries()) out << t.row << ' ' << t.col << ' ' << t.value << '\n';
  out.precision(old);
}

void DiagonalMass::write_triplets(std::ostream& out) const {
  const auto old = out.precision(17);
  for (Eigen::Index i = 0; i < values.size(); ++i) out << i << ' ' << i << ' ' << values[i] << '\n';
  out.precision(old);
}

std::vector<double> edge_lengths(const VertexMatrix& vertices, const MeshTopology& topology) {
  std::vector<double> out(topology.n_edges());
  for (int e = 0; e < topology.n_edges(); ++e) {
    const Edge& edge = topology.edges()[e];
    out[e] = (vertices.row(edge.v[0]) - vertices.row(edge.v[1])).norm();
    if (out[e] == 0.0) {
      throw DegenerateError("edge " + std::to_string(e) + " (" + std::to_string(edge.v[0]) + ", " +
                                std::to_string(edge.v[1]) + ") has zero length",
                            e);
    }
  }
  return out;
}

std::vector<double> triangle_areas(const VertexMatrix& vertices, const MeshTopology& topology) {
  std::vector<double> out(topology.n_triangles());
  for (int f = 0; f < topology.n_triangles(); ++f) out[f] = detail::triangle_area(vertices, topology.triangles()[f]);
  return out;
}

std::vector<double> signed_triangle_areas(const VertexMatrix& vertices, const MeshTopology& topology) {
  if (vertices.cols() != 2) throw std::invalid_argument("signed_triangle_areas requires d=2");
  std::vector<double> out(topology.n_triangles());
  for (int f = 0; f < topology.n_triangles(); ++f) {
    out[f] = 0.5 * detail::twice_signed_area(vertices, topology.triangles()[f]);
  }
  return out;
}

SparseSymmetric stiffness(const VertexMatrix& vertices, const MeshTopology& topology) {
  const int n = topology.n_vertices();
  const std::vector<double> areas = triangle_areas(vertices, topology);
  const double threshold = detail::degenerate_area_threshold(areas);
  std::vector<double> weight(topology.n_edges(), 0.0);
  for (int f = 0; f < topology.n_triangles(); ++f) {
    const double area = areas[f];
    if (area <= threshold) {
      throw DegenerateError("triangle " + std::to_string(f) + " has degenerate area " + std::to_string(area), f);
    }
    const Triangle& t = topology.triangles()[f];
    const detail::CornerSquares s = detail::opposite_squared_lengths(vertices, t);
    const auto& te = topology.triangle_edges(f);
    for (int c = 0; c < 3; ++c) {
      weight[te[c]] += (s[c] - s[(c + 1) % 3] - s[(c + 2) % 3]) / (8.0 * area);
    }
  }

  std::vector<double> diagonal(n, 0.0);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * topology.n_edges() + n);
  for (int e = 0; e < topology.n_edges(); ++e) {
    const auto [a, b] = topology.edges()[e].v;
    trip.emplace_back(a, b, weight[e]);
    trip.emplace_back(b, a, weight[e]);
  }
  // Diagonal accumulated in the same order a row is stored, so a row sum cancels exactly.
  for (int v = 0; v < n; ++v) {
    double sum = 0.0;
    for (int u : topology.neighbors(v)) sum += weight[topology.find_edge(u, v)];
    diagonal[v] = -sum;
    trip.emplace_back(v, v, diagonal[v]);
  }
  Eigen::SparseMatrix<double> W(n, n);
  W.setFromTriplets(trip.begin(), trip.end());
  return SparseSymmetric(std::move(W));
}

DiagonalMass mass(const VertexMatrix& vertices, const MeshTopology& topology) {
  DiagonalMass out;
  out.values = Eigen::VectorXd::Zero(topology.n_vertices());
  const std::vector<double> areas = triangle_areas(vertices, topology);
  for (int f = 0; f < topology.n_triangles(); ++f) {
    for (int v : topology.triangles()[f]) out.values[v] += areas[f] / 3.0;
  }
  for (int v = 0; v < topology.n_vertices(); ++v) {
    if (!(out.values[v] > 0.0)) throw DegenerateError("vertex " + std::to_string(v) + " has zero mass", v);
  }
  return out;
}

SparseSymmetric graph_laplacian(const MeshTopology& topology) {
  const int n = topology.n_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * topology.n_edges() + n);
  for (const Edge& e : topology.edges()) {
    trip.emplace_back(e.v[0], e.v[1], -1.0);
    trip.emplace_back(e.v[1], e.v[0], -1.0);
  }
  for (int v = 0; v < n; ++v) trip.emplace_back(v, v, static_cast<double>(topology.neighbors(v).size()));
  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(trip.begin(), trip.end());
  return SparseSymmetric(std::move(L));
}

double signed_volume(const VertexMatrix& vertices, const MeshTopology& topology) {
  if (vertices.cols() != 3) throw std::invalid_argument("signed_volume requires d=3");
  if (!topology.is_closed()) throw std::invalid_argument("signed_volume requires a closed mesh");
  double sum = 0.0;
  for (const Triangle& t : topology.triangles()) {
    const Eigen::Vector3d a = vertices.row(t[0]).transpose();
    const Eigen::Vector3d b = vertices.row(t[1]).transpose();
    const Eigen::Vector3d c = vertices.row(t[2]).transpose();
    sum += a.dot(b.cross(c));
  }
  return sum / 6.0;
}

}  // namespace isospec
