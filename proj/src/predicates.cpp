#include "isospec/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace isospec::predicates {

namespace {

// Error-free transformations (Knuth two-sum, FMA two-product).
inline void two_sum(double a, double b, double& s, double& err) {
  s = a + b;
  const double bv = s - a;
  const double av = s - bv;
  err = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& p, double& err) {
  p = a * b;
  err = std::fma(a, b, -p);
}

// Adds b to a nonoverlapping expansion (increasing magnitude), keeping it exact.
void grow_expansion(std::vector<double>& e, double b) {
  double q = b;
  std::vector<double> h;
  h.reserve(e.size() + 1);
  for (double component : e) {
    double s = 0.0, err = 0.0;
    two_sum(q, component, s, err);
    if (err != 0.0) h.push_back(err);
    q = s;
  }
  if (q != 0.0) h.push_back(q);
  e = std::move(h);
}

int exact_orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  // det = ax*by - ax*cy - bx*ay + bx*cy + cx*ay - cx*by
  const double terms[6][3] = {{a.x(), b.y(), 1.0},  {a.x(), c.y(), -1.0}, {b.x(), a.y(), -1.0},
                              {b.x(), c.y(), 1.0},  {c.x(), a.y(), 1.0},  {c.x(), b.y(), -1.0}};
  std::vector<double> expansion;
  for (const auto& t : terms) {
    double p = 0.0, err = 0.0;
    two_product(t[0], t[1], p, err);
    grow_expansion(expansion, t[2] * err);
    grow_expansion(expansion, t[2] * p);
  }
  if (expansion.empty()) return 0;
  const double top = expansion.back();
  return top > 0.0 ? 1 : (top < 0.0 ? -1 : 0);
}

}  // namespace

int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const double left = (a.x() - c.x()) * (b.y() - c.y());
  const double right = (a.y() - c.y()) * (b.x() - c.x());
  const double det = left - right;
  const double bound = (3.0 + 16.0 * std::numeric_limits<double>::epsilon()) *
                       std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return exact_orient(a, b, c);
}

double incircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                const Eigen::Vector2d& d) {
  using R = long double;
  const R adx = R(a.x()) - d.x(), ady = R(a.y()) - d.y();
  const R bdx = R(b.x()) - d.x(), bdy = R(b.y()) - d.y();
  const R cdx = R(c.x()) - d.x(), cdy = R(c.y()) - d.y();
  const R alift = adx * adx + ady * ady;
  const R blift = bdx * bdx + bdy * bdy;
  const R clift = cdx * cdx + cdy * cdy;
  const R det = alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) + clift * (adx * bdy - ady * bdx);
  return static_cast<double>(det);
}

bool segments_cross_properly(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r,
                             const Eigen::Vector2d& s) {
  const int o1 = orient2d(p, q, r);
  const int o2 = orient2d(p, q, s);
  const int o3 = orient2d(r, s, p);
  const int o4 = orient2d(r, s, q);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

bool segments_intersect(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r,
                        const Eigen::Vector2d& s) {
  const int o1 = orient2d(p, q, r);
  const int o2 = orient2d(p, q, s);
  const int o3 = orient2d(r, s, p);
  const int o4 = orient2d(r, s, q);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  auto on_segment = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& x) {
    return std::min(a.x(), b.x()) <= x.x() && x.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= x.y() &&
           x.y() <= std::max(a.y(), b.y());
  };
  if (o1 == 0 && on_segment(p, q, r)) return true;
  if (o2 == 0 && on_segment(p, q, s)) return true;
  if (o3 == 0 && on_segment(r, s, p)) return true;
  if (o4 == 0 && on_segment(r, s, q)) return true;
  return false;
}

}  // namespace isospec::predicates
