#pragma once

#include <Eigen/Core>

namespace isospec::predicates {

/// Sign of the determinant |b-a, c-a|: +1 counter-clockwise, -1 clockwise, 0 collinear.
/// Exact: falls back to expansion arithmetic when the floating-point filter is inconclusive.
int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

/// Positive when d lies strictly inside the circumcircle of the counter-clockwise triangle abc.
/// Floating point only (long double); used for Delaunay quality, never for validity.
double incircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                const Eigen::Vector2d& d);

/// Segments pq and rs cross at a single interior point of both.
bool segments_cross_properly(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r,
                             const Eigen::Vector2d& s);

/// Segments pq and rs share at least one point (touching and collinear overlap included).
bool segments_intersect(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r,
                        const Eigen::Vector2d& s);

}  // namespace isospec::predicates
