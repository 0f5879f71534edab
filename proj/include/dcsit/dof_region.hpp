#pragma once

#include <span>
#include <string>
#include <vector>

#include "dcsit/channel_csit.hpp"
#include "dcsit/rational.hpp"

namespace dcsit {

struct DofPoint {
  Rational d1;
  Rational d2;

  friend bool operator==(const DofPoint&, const DofPoint&) = default;
};

// c1*d1 + c2*d2 <= rhs
struct Facet {
  Rational c1;
  Rational c2;
  Rational rhs;

  friend bool operator==(const Facet&, const Facet&) = default;
  bool satisfied_by(const DofPoint& p) const { return c1 * p.d1 + c2 * p.d2 <= rhs; }
  bool tight_at(const DofPoint& p) const { return c1 * p.d1 + c2 * p.d2 == rhs; }
  std::string describe() const;
};

/// The achievable DoF polygon for one CSIT quality pair.
///
/// `corners` run counterclockwise from the origin with duplicates and
/// collinear points removed. `inequalities` holds the non-negativity facets,
/// the two box facets d_i <= 1 and the two sum-rate facets; all-zero facets
/// (alpha = 1) and duplicates (beta_dd = alpha) are dropped.
struct DofRegion {
  QualityPair q;
  Rational beta_dd;
  bool optimal = false;
  std::vector<DofPoint> corners;
  std::vector<Facet> inequalities;
};

// min{beta, (1 + 2 alpha) / 3}
Rational beta_dd(const QualityPair& q);

DofRegion region(const QualityPair& q);

// Exact, boundary inclusive.
bool contains(const DofRegion& r, const DofPoint& p);

// Floating-point membership in the region grown outward by `tolerance`
// (Euclidean distance from each facet line).
bool contains_expanded(const DofRegion& r, double d1, double d2, double tolerance);

// True iff beta >= (1 + 2 alpha) / 3, i.e. the region equals the beta = 1 one.
bool perfect_delayed_equivalent(const QualityPair& q);

// Membership in {(0,0),(0,1),(alpha,1),(1,alpha),(1,0)}, reachable without
// any delayed CSIT.
bool pentagon_contains(const Rational& alpha, const DofPoint& p);

// Symmetric-DoF loss against perfect delayed CSIT: max{0, (1+2a-3b)/6}.
Rational delayed_penalty(const QualityPair& q);

struct SymmetricDofSample {
  Rational beta;
  Rational dof;  // (1 + beta_dd) / 2
};

/// Symmetric DoF along a beta grid at fixed alpha. Every grid value must lie
/// in [alpha, 1]; throws DomainError otherwise.
std::vector<SymmetricDofSample> symmetric_dof_sweep(const Rational& alpha, std::span<const Rational> beta_grid);

}  // namespace dcsit
