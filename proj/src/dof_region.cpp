#include "dcsit/dof_region.hpp"

#include <algorithm>
#include <cmath>

#include "dcsit/errors.hpp"

namespace dcsit {
namespace {

Rational cross(const DofPoint& o, const DofPoint& a, const DofPoint& b) {
  return (a.d1 - o.d1) * (b.d2 - o.d2) - (a.d2 - o.d2) * (b.d1 - o.d1);
}

// Drops repeated and collinear vertices of a closed polygon.
std::vector<DofPoint> canonical_polygon(std::vector<DofPoint> pts) {
  bool changed = true;
  while (changed && pts.size() > 2) {
    changed = false;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
      const DofPoint& prev = pts[(i + n - 1) % n];
      const DofPoint& cur = pts[i];
      const DofPoint& next = pts[(i + 1) % n];
      if (cur == prev || cross(prev, cur, next) == 0) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return pts;
}

void check_normalized(const QualityPair& q) {
  if (q.alpha < 0 || q.beta > 1 || q.alpha > q.beta) {
    throw DomainError("quality pair must satisfy 0 <= alpha <= beta <= 1");
  }
}

}  // namespace

std::string Facet::describe() const {
  std::string out;
  auto term = [&](const Rational& c, const char* var) {
    if (c == 0) return;
    Rational mag = c;
    if (c < 0) {
      out += out.empty() ? "-" : " - ";
      mag = -c;
    } else if (!out.empty()) {
      out += " + ";
    }
    if (mag != 1) out += to_string(mag) + " ";
    out += var;
  };
  term(c1, "d1");
  term(c2, "d2");
  if (out.empty()) out = "0";
  return out + " <= " + to_string(rhs);
}

Rational beta_dd(const QualityPair& q) {
  const Rational cap = (1 + 2 * q.alpha) / 3;
  return q.beta < cap ? q.beta : cap;
}

DofRegion region(const QualityPair& q) {
  check_normalized(q);
  DofRegion r;
  r.q = q;
  r.beta_dd = beta_dd(q);
  r.optimal = perfect_delayed_equivalent(q);

  const Rational& a = q.alpha;
  const Rational sym = (1 + r.beta_dd) / 2;
  r.corners = canonical_polygon({
      {0, 0},
      {1, 0},
      {1, a},
      {sym, sym},
      {a, 1},
      {0, 1},
  });

  const Rational lead = 1 + r.beta_dd - 2 * a;
  const Rational trail = 1 - r.beta_dd;
  const Rational rhs = (1 + r.beta_dd) * (1 - a);
  const std::vector<Facet> candidates = {
      {-1, 0, 0}, {0, -1, 0}, {1, 0, 1}, {0, 1, 1}, {lead, trail, rhs}, {trail, lead, rhs},
  };
  for (const auto& f : candidates) {
    if (f.c1 == 0 && f.c2 == 0) continue;
    if (std::find(r.inequalities.begin(), r.inequalities.end(), f) != r.inequalities.end()) continue;
    r.inequalities.push_back(f);
  }
  return r;
}

bool contains(const DofRegion& r, const DofPoint& p) {
  return std::all_of(r.inequalities.begin(), r.inequalities.end(),
                     [&](const Facet& f) { return f.satisfied_by(p); });
}

bool contains_expanded(const DofRegion& r, double d1, double d2, double tolerance) {
  for (const auto& f : r.inequalities) {
    const double c1 = to_double(f.c1);
    const double c2 = to_double(f.c2);
    const double norm = std::hypot(c1, c2);
    if (c1 * d1 + c2 * d2 > to_double(f.rhs) + tolerance * norm) return false;
  }
  return true;
}

bool perfect_delayed_equivalent(const QualityPair& q) { return 3 * q.beta >= 1 + 2 * q.alpha; }

bool pentagon_contains(const Rational& alpha, const DofPoint& p) {
  if (alpha < 0 || alpha > 1) throw DomainError("alpha must lie in [0,1]");
  return p.d1 >= 0 && p.d2 >= 0 && p.d1 <= 1 && p.d2 <= 1 && p.d1 + p.d2 <= 1 + alpha;
}

Rational delayed_penalty(const QualityPair& q) {
  const Rational gap = (1 + 2 * q.alpha - 3 * q.beta) / 6;
  return gap > 0 ? gap : Rational(0);
}

std::vector<SymmetricDofSample> symmetric_dof_sweep(const Rational& alpha, std::span<const Rational> beta_grid) {
  if (alpha < 0 || alpha > 1) throw DomainError("alpha must lie in [0,1]");
  std::vector<SymmetricDofSample> out;
  out.reserve(beta_grid.size());
  for (const auto& beta : beta_grid) {
    if (beta < alpha || beta > 1) {
      throw DomainError("beta grid value " + to_string(beta) + " outside [alpha, 1]");
    }
    out.push_back({beta, (1 + beta_dd({alpha, beta})) / 2});
  }
  return out;
}

}  // namespace dcsit
