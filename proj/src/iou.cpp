#include "isospec/iou.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace isospec {

namespace {

// Inside intervals of one scanline under the even-odd rule.
std::vector<std::pair<double, double>> spans(const std::vector<Loop2d>& loops, double y) {
  std::vector<double> xs;
  for (const auto& loop : loops) {
    for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
      const auto& p = loop[i];
      const auto& q = loop[j];
      if ((p.y() > y) != (q.y() > y)) xs.push_back(p.x() + (y - p.y()) * (q.x() - p.x()) / (q.y() - p.y()));
    }
  }
  std::sort(xs.begin(), xs.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < xs.size(); i += 2) out.emplace_back(xs[i], xs[i + 1]);
  return out;
}

double total_length(const std::vector<std::pair<double, double>>& s) {
  double len = 0.0;
  for (const auto& [lo, hi] : s) len += hi - lo;
  return len;
}

double overlap_length(const std::vector<std::pair<double, double>>& a, const std::vector<std::pair<double, double>>& b) {
  double len = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].first, b[j].first);
    const double hi = std::min(a[i].second, b[j].second);
    if (hi > lo) len += hi - lo;
    if (a[i].second < b[j].second) {
      ++i;
    } else {
      ++j;
    }
  }
  return len;
}

void bounds(const std::vector<Loop2d>& loops, double& lo, double& hi) {
  for (const auto& loop : loops) {
    for (const auto& p : loop) {
      lo = std::min(lo, p.y());
      hi = std::max(hi, p.y());
    }
  }
}

void require_shape(const std::vector<Loop2d>& loops, const char* name) {
  bool any = false;
  for (const auto& loop : loops) any = any || loop.size() >= 3;
  if (!any) throw std::invalid_argument(std::string("iou: ") + name + " polygon is empty");
}

// Nelder-Mead in three variables, maximizing f.
std::array<double, 3> nelder_mead(const std::function<double(const std::array<double, 3>&)>& f,
                                  std::array<double, 3> x0, const std::array<double, 3>& step, int iterations) {
  std::array<std::array<double, 3>, 4> simplex{};
  std::array<double, 4> value{};
  simplex[0] = x0;
  for (int i = 0; i < 3; ++i) {
    simplex[i + 1] = x0;
    simplex[i + 1][i] += step[i];
  }
  for (int i = 0; i < 4; ++i) value[i] = f(simplex[i]);
  for (int it = 0; it < iterations; ++it) {
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return value[a] > value[b]; });
    const int worst = order[3];
    std::array<double, 3> centroid{};
    for (int k = 0; k < 3; ++k) {
      for (int d = 0; d < 3; ++d) centroid[d] += simplex[order[k]][d] / 3.0;
    }
    auto along = [&](double t) {
      std::array<double, 3> p{};
      for (int d = 0; d < 3; ++d) p[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
      return p;
    };
    const auto reflected = along(-1.0);
    const double fr = f(reflected);
    if (fr > value[order[0]]) {
      const auto expanded = along(-2.0);
      const double fe = f(expanded);
      if (fe > fr) {
        simplex[worst] = expanded;
        value[worst] = fe;
      } else {
        simplex[worst] = reflected;
        value[worst] = fr;
      }
    } else if (fr > value[order[2]]) {
      simplex[worst] = reflected;
      value[worst] = fr;
    } else {
      const auto contracted = along(0.5);
      const double fc = f(contracted);
      if (fc > value[worst]) {
        simplex[worst] = contracted;
        value[worst] = fc;
      } else {
        const auto& best = simplex[order[0]];
        for (int k = 1; k < 4; ++k) {
          for (int d = 0; d < 3; ++d) simplex[order[k]][d] = best[d] + 0.5 * (simplex[order[k]][d] - best[d]);
          value[order[k]] = f(simplex[order[k]]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (value[i] > value[best]) best = i;
  }
  return simplex[best];
}

}  // namespace

double polygon_iou(const std::vector<Loop2d>& a, const std::vector<Loop2d>& b, int rows) {
  require_shape(a, "first");
  require_shape(b, "second");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  bounds(a, lo, hi);
  bounds(b, lo, hi);
  if (!(hi > lo)) throw std::invalid_argument("iou: polygons have zero height");
  double inter = 0.0, uni = 0.0;
  const double dy = (hi - lo) / rows;
  for (int r = 0; r < rows; ++r) {
    const double y = lo + (r + 0.5) * dy;
    const auto sa = spans(a, y);
    const auto sb = spans(b, y);
    const double both = overlap_length(sa, sb);
    inter += both;
    uni += total_length(sa) + total_length(sb) - both;
  }
  if (!(uni > 0.0)) throw std::invalid_argument("iou: polygons have zero area");
  return std::clamp(inter / uni, 0.0, 1.0);
}

Eigen::Vector2d RigidMotion2d::apply(const Eigen::Vector2d& p) const {
  Eigen::Vector2d q = p - pivot;
  if (reflect) q.y() = -q.y();
  const double c = std::cos(angle), s = std::sin(angle);
  return Eigen::Vector2d(c * q.x() - s * q.y(), s * q.x() + c * q.y()) + pivot + translation;
}

std::vector<Loop2d> RigidMotion2d::apply(const std::vector<Loop2d>& loops) const {
  std::vector<Loop2d> out = loops;
  for (auto& loop : out) {
    for (auto& p : loop) p = apply(p);
  }
  return out;
}

Eigen::Vector2d loops_centroid(const std::vector<Loop2d>& loops) {
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  double area = 0.0;
  for (const auto& loop : loops) {
    // Holes subtract regardless of their orientation.
    double loop_area = 0.0;
    Eigen::Vector2d moment = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const auto& p = loop[i];
      const auto& q = loop[(i + 1) % loop.size()];
      const double cross = p.x() * q.y() - q.x() * p.y();
      loop_area += 0.5 * cross;
      moment += cross * (p + q) / 6.0;
    }
    const double orient = loop_area >= 0.0 ? 1.0 : -1.0;
    const double role = &loop == &loops.front() ? 1.0 : -1.0;
    sum += role * orient * moment;
    area += role * orient * loop_area;
  }
  return area != 0.0 ? Eigen::Vector2d(sum / area) : Eigen::Vector2d::Zero();
}

AlignedIou aligned_iou(const std::vector<Loop2d>& a, const std::vector<Loop2d>& b, int rows) {
  require_shape(a, "first");
  require_shape(b, "second");
  const Eigen::Vector2d ca = loops_centroid(a);
  const Eigen::Vector2d cb = loops_centroid(b);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  bounds(a, lo, hi);
  const double size = std::max(hi - lo, 1e-12);

  auto motion_of = [&](bool reflect, const std::array<double, 3>& x) {
    RigidMotion2d m;
    m.reflect = reflect;
    m.angle = x[0];
    m.pivot = cb;
    m.translation = ca - cb + Eigen::Vector2d(x[1], x[2]);
    return m;
  };

  struct Start {
    double value;
    bool reflect;
    double angle;
  };
  std::vector<Start> starts;
  constexpr int kRotations = 64;
  for (int reflect = 0; reflect < 2; ++reflect) {
    for (int r = 0; r < kRotations; ++r) {
      const double angle = 2.0 * std::numbers::pi * r / kRotations;
      const double value = polygon_iou(a, motion_of(reflect != 0, {angle, 0.0, 0.0}).apply(b), rows);
      starts.push_back({value, reflect != 0, angle});
    }
  }
  std::stable_sort(starts.begin(), starts.end(), [](const Start& x, const Start& y) { return x.value > y.value; });

  AlignedIou best;
  best.iou = starts.front().value;
  best.motion = motion_of(starts.front().reflect, {starts.front().angle, 0.0, 0.0});
  const int refine = std::min<int>(4, static_cast<int>(starts.size()));
  for (int s = 0; s < refine; ++s) {
    const bool reflect = starts[s].reflect;
    auto objective = [&](const std::array<double, 3>& x) { return polygon_iou(a, motion_of(reflect, x).apply(b), rows); };
    const auto x = nelder_mead(objective, {starts[s].angle, 0.0, 0.0},
                               {std::numbers::pi / kRotations, 0.02 * size, 0.02 * size}, 60);
    const double value = objective(x);
    if (value > best.iou) {
      best.iou = value;
      best.motion = motion_of(reflect, x);
    }
  }
  return best;
}

double iou(const std::vector<Loop2d>& a, const std::vector<Loop2d>& b, bool align, int rows) {
  return align ? aligned_iou(a, b, rows).iou : polygon_iou(a, b, rows);
}

std::vector<Loop2d> mesh_outline(const MeshTopology& topology, const VertexMatrix& vertices) {
  return boundary_polygons(topology, vertices);
}

}  // namespace isospec
