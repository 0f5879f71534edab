#include "dcsit/phase_plan.hpp"

#include <boost/multiprecision/integer.hpp>

#include "dcsit/errors.hpp"

namespace dcsit {
namespace {

Rational power(const Rational& base, int exponent) {
  Rational out = 1;
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

PhaseSpec regular_phase(const QualityPair& q, Integer duration) {
  const Rational gap = q.beta - q.alpha;
  PhaseSpec p;
  p.duration = std::move(duration);
  p.c = StreamSpec{1 - q.beta, 1};
  p.a = StreamSpec{q.beta, q.beta};
  p.a_prime = StreamSpec{gap, gap};
  p.b = StreamSpec{q.beta, q.beta};
  p.b_prime = StreamSpec{gap, gap};
  p.quant_prelog = 2 * gap;
  return p;
}

PhaseSpec final_phase(const QualityPair& q, Integer duration) {
  PhaseSpec p;
  p.duration = std::move(duration);
  p.c = StreamSpec{1 - q.alpha, 1};
  p.a = StreamSpec{q.alpha, q.alpha};
  p.b = StreamSpec{q.alpha, q.alpha};
  p.quant_prelog = 0;
  return p;
}

Rational private_rate(const std::optional<StreamSpec>& s) { return s ? s->rate : Rational(0); }

Rational cross(const DofPoint& o, const DofPoint& a, const DofPoint& b) {
  return (a.d1 - o.d1) * (b.d2 - o.d2) - (a.d2 - o.d2) * (b.d1 - o.d1);
}

}  // namespace

std::string to_string(PlanRoute route) {
  switch (route) {
    case PlanRoute::multiphase: return "multiphase";
    case PlanRoute::timeshare: return "timeshare";
    case PlanRoute::perfect_csit: return "perfect_csit";
  }
  return "unknown";
}

std::string to_string(CommonOwner owner) { return owner == CommonOwner::user1 ? "user1" : "user2"; }

std::string to_string(CornerScheme scheme) {
  switch (scheme) {
    case CornerScheme::idle: return "idle";
    case CornerScheme::single_user1: return "single_user1";
    case CornerScheme::single_user2: return "single_user2";
    case CornerScheme::x2_user1: return "x2_user1";
    case CornerScheme::x2_user2: return "x2_user2";
    case CornerScheme::x1: return "x1";
  }
  return "unknown";
}

QualityPair planning_quality(const QualityPair& q, const PlanOptions& options) {
  if (options.degrade_to_beta_dd || q.beta == 1) return {q.alpha, beta_dd(q)};
  return q;
}

PlanRoute route_for(const QualityPair& q, const PlanOptions& options) {
  if (q.alpha == 1) return PlanRoute::perfect_csit;
  const QualityPair eff = planning_quality(q, options);
  if (eff.beta == eff.alpha) return PlanRoute::timeshare;
  return PlanRoute::multiphase;
}

Integer PhasePlan::total_duration() const {
  Integer total = 0;
  for (const auto& p : phases) total += p.duration;
  return total;
}

PhasePlan plan_x1(const QualityPair& q, int S, std::optional<Integer> T1, const PlanOptions& options) {
  if (q.alpha < 0 || q.beta > 1 || q.alpha > q.beta) {
    throw PlanningError("quality pair must satisfy 0 <= alpha <= beta <= 1");
  }
  if (S < 2) throw PlanningError("the multi-phase plan needs S >= 2, got " + std::to_string(S));
  const PlanRoute route = route_for(q, options);
  if (route != PlanRoute::multiphase) {
    throw PlanningError("no multi-phase plan for alpha=" + to_string(q.alpha) + " beta=" + to_string(q.beta) +
                        " (route: " + to_string(route) + ")");
  }

  PhasePlan plan;
  plan.requested = q;
  plan.q = planning_quality(q, options);
  plan.S = S;
  const Rational gap = plan.q.beta - plan.q.alpha;
  plan.xi = 2 * gap / (1 - plan.q.beta);
  plan.zeta = 2 * gap / (1 - plan.q.alpha);

  // Duration of phase s (1-based) per unit T1.
  std::vector<Rational> ratios;
  for (int s = 1; s < S; ++s) ratios.push_back(power(plan.xi, s - 1));
  ratios.push_back(power(plan.xi, S - 2) * plan.zeta);

  Integer t1;
  if (T1) {
    if (*T1 <= 0) throw PlanningError("T1 must be positive");
    t1 = *T1;
    for (const auto& r : ratios) {
      if (!is_integer(r * t1)) {
        throw PlanningError("T1=" + t1.str() + " leaves a non-integral phase duration " + to_string(r * t1));
      }
    }
  } else {
    t1 = 1;
    for (const auto& r : ratios) t1 = boost::multiprecision::lcm(t1, denominator_of(r));
    if (t1 > options.t1_cap) {
      throw PlanningError("smallest integral T1 is " + t1.str() + ", above the cap " + options.t1_cap.str());
    }
  }

  for (int s = 1; s <= S; ++s) {
    const Integer duration = numerator_of(ratios[static_cast<std::size_t>(s - 1)] * t1);
    plan.phases.push_back(s < S ? regular_phase(plan.q, duration) : final_phase(plan.q, duration));
  }
  return plan;
}

DofPoint plan_dof(const PhasePlan& plan) {
  Rational bits1 = 0;
  Rational bits2 = 0;
  for (std::size_t i = 0; i < plan.phases.size(); ++i) {
    const PhaseSpec& p = plan.phases[i];
    const Rational t(p.duration);
    bits1 += t * (private_rate(p.a) + private_rate(p.a_prime));
    bits2 += t * (private_rate(p.b) + private_rate(p.b_prime));
    if (i == 0 && p.c) {
      bits1 += t * p.c->rate / 2;
      bits2 += t * p.c->rate / 2;
    }
  }
  const Rational total(plan.total_duration());
  return {bits1 / total, bits2 / total};
}

Rational plan_dof_closed_form(const PhasePlan& plan) {
  const Rational& a = plan.q.alpha;
  const Rational& b = plan.q.beta;
  const Rational tail = power(plan.xi, plan.S - 2) * plan.zeta;
  Rational series = 0;
  for (int i = 0; i <= plan.S - 2; ++i) series += power(plan.xi, i);
  return 2 * b - a + ((1 - b) / 2 + 2 * tail * (a - b)) / (series + tail);
}

DofPoint asymptotic_dof(const QualityPair& q) {
  const Rational d = (1 + beta_dd(q)) / 2;
  return {d, d};
}

X2Plan plan_x2(const QualityPair& q, CommonOwner owner) {
  X2Plan plan;
  plan.owner = owner;
  plan.slot.duration = 1;
  plan.slot.c = StreamSpec{1 - q.alpha, 1};
  plan.slot.a = StreamSpec{q.alpha, q.alpha};
  plan.slot.b = StreamSpec{q.alpha, q.alpha};
  plan.slot.quant_prelog = 0;
  plan.dof = owner == CommonOwner::user1 ? DofPoint{1, q.alpha} : DofPoint{q.alpha, 1};
  return plan;
}

TimesharePlan plan_timeshare(const QualityPair& q, const DofPoint& target) {
  const DofRegion r = region(q);
  for (const auto& f : r.inequalities) {
    if (!f.satisfied_by(target)) {
      throw DomainError("target (" + to_string(target.d1) + ", " + to_string(target.d2) +
                        ") violates facet " + f.describe());
    }
  }

  auto scheme_for = [&](const DofPoint& c) {
    if (c == DofPoint{0, 0}) return CornerScheme::idle;
    if (c == DofPoint{1, 0}) return CornerScheme::single_user1;
    if (c == DofPoint{0, 1}) return CornerScheme::single_user2;
    if (c == DofPoint{1, q.alpha}) return CornerScheme::x2_user1;
    if (c == DofPoint{q.alpha, 1}) return CornerScheme::x2_user2;
    return CornerScheme::x1;
  };

  TimesharePlan plan;
  plan.target = target;
  auto add = [&](const DofPoint& c, const Rational& w) {
    if (w > 0) plan.components.push_back({scheme_for(c), c, w});
  };

  if (target == DofPoint{0, 0}) {
    add(r.corners.front(), 1);
    return plan;
  }

  // Fan triangulation from the origin: find the wedge between consecutive
  // corners that holds the target, then solve the 2x2 system exactly.
  const DofPoint origin{0, 0};
  for (std::size_t i = 1; i + 1 < r.corners.size(); ++i) {
    const DofPoint& lo = r.corners[i];
    const DofPoint& hi = r.corners[i + 1];
    if (cross(origin, lo, target) < 0 || cross(origin, target, hi) < 0) continue;
    const Rational det = lo.d1 * hi.d2 - lo.d2 * hi.d1;
    const Rational w_lo = (target.d1 * hi.d2 - target.d2 * hi.d1) / det;
    const Rational w_hi = (lo.d1 * target.d2 - lo.d2 * target.d1) / det;
    add(origin, 1 - w_lo - w_hi);
    add(lo, w_lo);
    add(hi, w_hi);
    return plan;
  }
  throw DomainError("target lies outside every corner wedge");
}

}  // namespace dcsit
