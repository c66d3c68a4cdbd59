#include "isospec/mesh.hpp"

#include "isospec/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace isospec {

namespace {

struct HalfEdgeRecord {
  int lo;
  int hi;
  int face;
  int corner;  // corner of `face` opposite this edge
};

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) { parent_[find(a)] = find(b); }

 private:
  std::vector<int> parent_;
};

double triangle_area_3(const Eigen::MatrixXd& V, const Triangle& t) {
  Eigen::Vector3d p[3];
  for (int c = 0; c < 3; ++c) {
    p[c].setZero();
    for (int k = 0; k < std::min<int>(3, V.cols()); ++k) p[c][k] = V(t[c], k);
  }
  return 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
}

RawMesh read_off(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(strip_comment(line));
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  if (tokens.empty() || tokens[0] != "OFF") throw MeshError("OFF: missing header");
  std::size_t pos = 1;
  auto next_int = [&]() -> long {
    if (pos >= tokens.size()) throw MeshError("OFF: unexpected end of file");
    const std::string& t = tokens[pos++];
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(t, &used);
    } catch (const std::exception&) {
      throw MeshError("OFF: expected integer, got '" + t + "'");
    }
    if (used != t.size()) throw MeshError("OFF: expected integer, got '" + t + "'");
    return v;
  };
  auto next_real = [&]() -> double {
    if (pos >= tokens.size()) throw MeshError("OFF: unexpected end of file");
    const std::string& t = tokens[pos++];
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw MeshError("OFF: expected number, got '" + t + "'");
    }
    if (used != t.size()) throw MeshError("OFF: expected number, got '" + t + "'");
    return v;
  };
  const long nv = next_int();
  const long nf = next_int();
  next_int();  // edge count, unused
  if (nv < 0 || nf < 0) throw MeshError("OFF: negative element count");
  RawMesh raw;
  raw.vertices.resize(nv, 3);
  for (long i = 0; i < nv; ++i) {
    for (int k = 0; k < 3; ++k) raw.vertices(i, k) = next_real();
  }
  raw.triangles.reserve(nf);
  for (long f = 0; f < nf; ++f) {
    const long arity = next_int();
    if (arity != 3) {
      throw MeshError("OFF: face " + std::to_string(f) + " has " + std::to_string(arity) +
                      " vertices; only triangles are supported");
    }
    Triangle t;
    for (int c = 0; c < 3; ++c) {
      const long idx = next_int();
      if (idx < 0 || idx >= nv) throw MeshError("OFF: vertex index out of range in face " + std::to_string(f));
      t[c] = static_cast<int>(idx);
    }
    raw.triangles.push_back(t);
  }
  return raw;
}

RawMesh read_obj(std::istream& in) {
  std::vector<Eigen::Vector3d> verts;
  std::vector<std::array<long, 3>> faces;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = strip_comment(line);
    if (is_blank(body)) continue;
    std::istringstream ls(body);
    std::string kind;
    ls >> kind;
    if (kind == "v") {
      Eigen::Vector3d p;
      if (!(ls >> p[0] >> p[1])) throw MeshError("OBJ: bad vertex on line " + std::to_string(line_no));
      if (!(ls >> p[2])) p[2] = 0.0;
      verts.push_back(p);
    } else if (kind == "f") {
      std::vector<long> idx;
      std::string tok;
      while (ls >> tok) {
        // Keep only the position index of "v/vt/vn".
        const std::string head = tok.substr(0, tok.find('/'));
        std::size_t used = 0;
        long v = 0;
        try {
          v = std::stol(head, &used);
        } catch (const std::exception&) {
          throw MeshError("OBJ: bad face index on line " + std::to_string(line_no));
        }
        if (used != head.size() || v == 0) throw MeshError("OBJ: bad face index on line " + std::to_string(line_no));
        idx.push_back(v > 0 ? v - 1 : static_cast<long>(verts.size()) + v);
      }
      if (idx.size() != 3) {
        throw MeshError("OBJ: face on line " + std::to_string(line_no) + " has " + std::to_string(idx.size()) +
                        " vertices; only triangles are supported");
      }
      faces.push_back({idx[0], idx[1], idx[2]});
    }
  }
  RawMesh raw;
  raw.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) raw.vertices.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
  for (const auto& f : faces) {
    Triangle t;
    for (int c = 0; c < 3; ++c) {
      if (f[c] < 0 || f[c] >= static_cast<long>(verts.size())) throw MeshError("OBJ: vertex index out of range");
      t[c] = static_cast<int>(f[c]);
    }
    raw.triangles.push_back(t);
  }
  return raw;
}

}  // namespace

MeshTopology::MeshTopology(int n_vertices, std::vector<Triangle> triangles)
    : n_vertices_(n_vertices), triangles_(std::move(triangles)) {
  if (n_vertices_ < 0) throw MeshError("negative vertex count");
  std::vector<HalfEdgeRecord> records;
  records.reserve(triangles_.size() * 3);
  for (int f = 0; f < n_triangles(); ++f) {
    const Triangle& t = triangles_[f];
    for (int c = 0; c < 3; ++c) {
      if (t[c] < 0 || t[c] >= n_vertices_) {
        throw MeshError("triangle " + std::to_string(f) + " references vertex " + std::to_string(t[c]) +
                        " outside [0, " + std::to_string(n_vertices_) + ")");
      }
    }
    for (int c = 0; c < 3; ++c) {
      const int a = t[(c + 1) % 3];
      const int b = t[(c + 2) % 3];
      if (a == b) continue;
      records.push_back({std::min(a, b), std::max(a, b), f, c});
    }
  }
  std::sort(records.begin(), records.end(), [](const HalfEdgeRecord& x, const HalfEdgeRecord& y) {
    return std::tie(x.lo, x.hi, x.face, x.corner) < std::tie(y.lo, y.hi, y.face, y.corner);
  });

  triangle_edges_.assign(triangles_.size(), {-1, -1, -1});
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    while (j < records.size() && records[j].lo == records[i].lo && records[j].hi == records[i].hi) ++j;
    const std::size_t count = j - i;
    if (count > 2) {
      throw MeshError("non-manifold edge (" + std::to_string(records[i].lo) + ", " + std::to_string(records[i].hi) +
                      ") shared by " + std::to_string(count) + " triangles");
    }
    Edge e;
    e.v = {records[i].lo, records[i].hi};
    e.kind = count == 2 ? EdgeKind::interior : EdgeKind::boundary;
    e.faces = {records[i].face, count == 2 ? records[i + 1].face : -1};
    const int id = static_cast<int>(edges_.size());
    for (std::size_t r = i; r < j; ++r) triangle_edges_[records[r].face][records[r].corner] = id;
    edges_.push_back(e);
    if (e.is_boundary()) ++n_boundary_edges_;
    i = j;
  }

  // One-ring adjacency in CSR form, neighbors sorted ascending.
  std::vector<int> degree(n_vertices_, 0);
  for (const Edge& e : edges_) {
    ++degree[e.v[0]];
    ++degree[e.v[1]];
  }
  neighbor_offsets_.assign(n_vertices_ + 1, 0);
  for (int v = 0; v < n_vertices_; ++v) neighbor_offsets_[v + 1] = neighbor_offsets_[v] + degree[v];
  neighbor_list_.assign(neighbor_offsets_.back(), 0);
  std::vector<int> fill(neighbor_offsets_.begin(), neighbor_offsets_.end() - 1);
  for (const Edge& e : edges_) {
    neighbor_list_[fill[e.v[0]]++] = e.v[1];
    neighbor_list_[fill[e.v[1]]++] = e.v[0];
  }
  for (int v = 0; v < n_vertices_; ++v) {
    std::sort(neighbor_list_.begin() + neighbor_offsets_[v], neighbor_list_.begin() + neighbor_offsets_[v + 1]);
  }

  std::vector<int> fdeg(n_vertices_, 0);
  for (const Triangle& t : triangles_) {
    for (int c = 0; c < 3; ++c) ++fdeg[t[c]];
  }
  face_offsets_.assign(n_vertices_ + 1, 0);
  for (int v = 0; v < n_vertices_; ++v) face_offsets_[v + 1] = face_offsets_[v] + fdeg[v];
  face_list_.assign(face_offsets_.back(), 0);
  std::vector<int> ffill(face_offsets_.begin(), face_offsets_.end() - 1);
  for (int f = 0; f < n_triangles(); ++f) {
    for (int c = 0; c < 3; ++c) face_list_[ffill[triangles_[f][c]]++] = f;
  }

  boundary_vertex_.assign(n_vertices_, 0);
  for (const Edge& e : edges_) {
    if (e.is_boundary()) {
      boundary_vertex_[e.v[0]] = 1;
      boundary_vertex_[e.v[1]] = 1;
    }
  }
}

int MeshTopology::find_edge(int a, int b) const {
  if (a < 0 || b < 0 || a >= n_vertices_ || b >= n_vertices_ || a == b) return -1;
  const int lo = std::min(a, b);
  const int hi = std::max(a, b);
  for (int f : vertex_triangles(lo)) {
    for (int e : triangle_edges_[f]) {
      if (e >= 0 && edges_[e].v[0] == lo && edges_[e].v[1] == hi) return e;
    }
  }
  return -1;
}

std::span<const int> MeshTopology::neighbors(int v) const {
  return {neighbor_list_.data() + neighbor_offsets_[v],
          static_cast<std::size_t>(neighbor_offsets_[v + 1] - neighbor_offsets_[v])};
}

std::span<const int> MeshTopology::vertex_triangles(int v) const {
  return {face_list_.data() + face_offsets_[v], static_cast<std::size_t>(face_offsets_[v + 1] - face_offsets_[v])};
}

MeshFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return MeshFormat::off;
  if (ext == ".obj") return MeshFormat::obj;
  throw MeshError("unrecognized mesh extension '" + ext + "' (expected .off or .obj)");
}

RawMesh read_raw_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open " + path.string());
  return format == MeshFormat::off ? read_off(in) : read_obj(in);
}

RawMesh read_raw_mesh(const std::filesystem::path& path) { return read_raw_mesh(path, format_from_path(path)); }

Mesh load_mesh(const std::filesystem::path& path, MeshFormat format, const LoadOptions& options) {
  RawMesh raw = read_raw_mesh(path, format);
  Mesh mesh;
  mesh.topology = MeshTopology(static_cast<int>(raw.vertices.rows()), std::move(raw.triangles));
  if (options.flat) {
    if (raw.vertices.rows() > 0 && raw.vertices.col(2).cwiseAbs().maxCoeff() != 0.0) {
      throw MeshError(path.string() + ": --flat requested but z coordinates are not all zero");
    }
    mesh.vertices = raw.vertices.leftCols(2);
    mesh.topology = orient_ccw(mesh.topology, mesh.vertices);
  } else {
    mesh.vertices = std::move(raw.vertices);
  }
  if (!mesh.vertices.allFinite()) throw MeshError(path.string() + ": non-finite coordinates");
  return mesh;
}

Mesh load_mesh(const std::filesystem::path& path, const LoadOptions& options) {
  return load_mesh(path, format_from_path(path), options);
}

void save_mesh(const std::filesystem::path& path, MeshFormat format, const MeshTopology& topology,
               const VertexMatrix& vertices) {
  if (vertices.rows() != topology.n_vertices()) throw MeshError("save_mesh: vertex count does not match topology");
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write " + path.string());
  out << std::setprecision(17);
  auto coord = [&](Eigen::Index i, int k) { return k < vertices.cols() ? vertices(i, k) : 0.0; };
  if (format == MeshFormat::off) {
    out << "OFF\n" << topology.n_vertices() << ' ' << topology.n_triangles() << " 0\n";
    for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
      out << coord(i, 0) << ' ' << coord(i, 1) << ' ' << coord(i, 2) << '\n';
    }
    for (const Triangle& t : topology.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  } else {
    for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
      out << "v " << coord(i, 0) << ' ' << coord(i, 1) << ' ' << coord(i, 2) << '\n';
    }
    for (const Triangle& t : topology.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
  if (!out) throw MeshError("write failed for " + path.string());
}

void save_mesh(const std::filesystem::path& path, const MeshTopology& topology, const VertexMatrix& vertices) {
  save_mesh(path, format_from_path(path), topology, vertices);
}

std::vector<std::vector<int>> boundary_loops(const MeshTopology& topology) {
  // Directed boundary half-edges a -> b, taken from the single adjacent triangle.
  std::multimap<int, int> outgoing;
  for (const Edge& e : topology.edges()) {
    if (!e.is_boundary()) continue;
    const Triangle& t = topology.triangles()[e.faces[0]];
    for (int c = 0; c < 3; ++c) {
      const int a = t[c];
      const int b = t[(c + 1) % 3];
      if ((a == e.v[0] && b == e.v[1]) || (a == e.v[1] && b == e.v[0])) {
        outgoing.emplace(a, b);
        break;
      }
    }
  }
  std::vector<std::vector<int>> loops;
  while (!outgoing.empty()) {
    auto it = outgoing.begin();
    const int start = it->first;
    std::vector<int> loop{start};
    int current = it->second;
    outgoing.erase(it);
    while (current != start) {
      loop.push_back(current);
      auto next = outgoing.find(current);
      if (next == outgoing.end()) break;  // inconsistent orientation, emit the open chain
      current = next->second;
      outgoing.erase(next);
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

ValidationReport validate(int n_vertices, const std::vector<Triangle>& triangles, const Eigen::MatrixXd& vertices) {
  ValidationReport report;
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> directed;  // undirected key -> (from, to)
  UnionFind uf(std::max(n_vertices, 0));
  std::vector<double> areas;
  bool index_ok = true;
  for (const Triangle& t : triangles) {
    bool repeated = t[0] == t[1] || t[1] == t[2] || t[0] == t[2];
    bool in_range = true;
    for (int c = 0; c < 3; ++c) in_range = in_range && t[c] >= 0 && t[c] < n_vertices;
    if (!in_range) {
      index_ok = false;
      continue;
    }
    if (repeated) report.has_degenerate_triangles = true;
    for (int c = 0; c < 3; ++c) {
      const int a = t[c];
      const int b = t[(c + 1) % 3];
      uf.unite(a, b);
      if (a != b) directed[{std::min(a, b), std::max(a, b)}].push_back({a, b});
    }
    areas.push_back(vertices.rows() == n_vertices ? triangle_area_3(vertices, t) : 0.0);
  }
  if (!index_ok) report.is_manifold = false;

  std::map<int, std::vector<int>> boundary_adj;
  for (const auto& [key, uses] : directed) {
    if (uses.size() > 2) report.is_manifold = false;
    if (uses.size() == 2 && uses[0].first == uses[1].first) report.orientation_consistent = false;
    if (uses.size() == 1) {
      boundary_adj[key.first].push_back(key.second);
      boundary_adj[key.second].push_back(key.first);
    }
  }

  if (!areas.empty()) {
    const double mean = std::accumulate(areas.begin(), areas.end(), 0.0) / static_cast<double>(areas.size());
    for (double a : areas) {
      if (a < 1e-12 * mean || a == 0.0) report.has_degenerate_triangles = true;
    }
  }

  if (n_vertices > 0) {
    const int root = uf.find(0);
    for (int v = 1; v < n_vertices; ++v) {
      if (uf.find(v) != root) {
        report.is_connected = false;
        break;
      }
    }
  }

  // Boundary loops = connected components of the boundary-edge graph.
  std::map<int, int> seen;
  for (const auto& [v, adj] : boundary_adj) {
    if (seen.count(v)) continue;
    ++report.boundary_loop_count;
    std::vector<int> stack{v};
    seen[v] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int w : boundary_adj[u]) {
        if (!seen.count(w)) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  return report;
}

ValidationReport validate(const MeshTopology& topology, const VertexMatrix& vertices) {
  return validate(topology.n_vertices(), topology.triangles(), vertices);
}

MeshTopology orient_ccw(const MeshTopology& topology, const VertexMatrix& vertices) {
  if (vertices.cols() != 2) throw MeshError("orient_ccw requires a 2D embedding");
  double total = 0.0;
  for (const Triangle& t : topology.triangles()) {
    const Eigen::Vector2d a = vertices.row(t[0]).transpose();
    const Eigen::Vector2d b = vertices.row(t[1]).transpose();
    const Eigen::Vector2d c = vertices.row(t[2]).transpose();
    total += (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  }
  if (total >= 0.0) return topology;
  std::vector<Triangle> flipped = topology.triangles();
  for (Triangle& t : flipped) std::swap(t[1], t[2]);
  return MeshTopology(topology.n_vertices(), std::move(flipped));
}

}  // namespace isospec
