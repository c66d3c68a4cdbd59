#pragma once

#include <stdexcept>
#include <string>

namespace isospec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files, non-triangular faces, non-manifold connectivity.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// Zero-length edges, zero-area triangles, zero-mass vertices. `element` is the offending
/// edge/triangle/vertex index, or -1 when not applicable.
class DegenerateError : public Error {
 public:
  DegenerateError(const std::string& what, int element) : Error(what), element_(element) {}
  int element() const { return element_; }

 private:
  int element_;
};

/// Gradient requested for part of a numerically repeated eigenvalue.
class ClusterSplitError : public Error {
 public:
  using Error::Error;
};

/// Boundary polygon that crosses itself; carries the indices of two offending segments.
class SelfIntersectionError : public Error {
 public:
  SelfIntersectionError(const std::string& what, int seg_a, int seg_b)
      : Error(what), seg_a_(seg_a), seg_b_(seg_b) {}
  int first_segment() const { return seg_a_; }
  int second_segment() const { return seg_b_; }

 private:
  int seg_a_;
  int seg_b_;
};

/// The optimizer hit a state it cannot continue from (non-finite gradient, unrecoverable
/// degeneracy).
class NumericalAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace isospec
