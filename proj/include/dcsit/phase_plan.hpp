#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcsit/channel_csit.hpp"
#include "dcsit/dof_region.hpp"
#include "dcsit/rational.hpp"

namespace dcsit {

// One symbol stream: each symbol carries rate * log P bits at power P^power_exp.
struct StreamSpec {
  Rational rate;
  Rational power_exp;

  friend bool operator==(const StreamSpec&, const StreamSpec&) = default;
};

struct PhaseSpec {
  Integer duration;
  std::optional<StreamSpec> c;
  std::optional<StreamSpec> a;
  std::optional<StreamSpec> a_prime;
  std::optional<StreamSpec> b;
  std::optional<StreamSpec> b_prime;
  Rational quant_prelog;  // interference bits fed forward, per slot, over log P

  friend bool operator==(const PhaseSpec&, const PhaseSpec&) = default;
};

enum class PlanRoute {
  multiphase,    // the geometric-progression scheme
  timeshare,     // effective beta == alpha: mix the two single-slot corners
  perfect_csit,  // alpha == 1: zero-forcing every slot
};

std::string to_string(PlanRoute route);

struct PlanOptions {
  // Always plan with beta_dd instead of the supplied beta. Without it, beta_dd
  // is substituted only at beta = 1, where the progression is undefined.
  bool degrade_to_beta_dd = false;
  Integer t1_cap = 1'000'000;
};

// Quality pair the transmitter actually plans with.
QualityPair planning_quality(const QualityPair& q, const PlanOptions& options = {});

PlanRoute route_for(const QualityPair& q, const PlanOptions& options = {});

/// Multi-phase superposition plan. Phases 1..S-1 send a common symbol at full
/// power plus two private layers per user; phase S sends one private layer
/// per user. From phase 2 on, common symbols carry the quantized delayed
/// interference of the previous phase, so durations follow
/// T_s = T_1 xi^{s-1} (s < S), T_S = T_1 xi^{S-2} zeta.
struct PhasePlan {
  QualityPair requested;  // normalized pair the channel is drawn with
  QualityPair q;          // planning pair (see planning_quality)
  int S = 0;
  Rational xi;
  Rational zeta;
  std::vector<PhaseSpec> phases;

  friend bool operator==(const PhasePlan&, const PhasePlan&) = default;

  Integer total_duration() const;
};

// Throws PlanningError unless route_for(q) is multiphase, S >= 2, and the
// durations come out integral (for a given T1, or for some T1 <= t1_cap).
PhasePlan plan_x1(const QualityPair& q, int S, std::optional<Integer> T1 = std::nullopt,
                  const PlanOptions& options = {});

// d1 = d2 by summing per-phase bits; the first phase's common bits are split
// evenly between the users.
DofPoint plan_dof(const PhasePlan& plan);

// Same value through the geometric-series closed form in xi and zeta, without
// touching the phase list.
Rational plan_dof_closed_form(const PhasePlan& plan);

// ((1 + beta_dd) / 2, (1 + beta_dd) / 2)
DofPoint asymptotic_dof(const QualityPair& q);

enum class CommonOwner { user1, user2 };

std::string to_string(CommonOwner owner);

// Single-slot scheme: common symbol at power P with rate 1 - alpha, one
// zero-forced private symbol per user at power P^alpha with rate alpha.
struct X2Plan {
  PhaseSpec slot;
  CommonOwner owner = CommonOwner::user1;
  DofPoint dof;
};

X2Plan plan_x2(const QualityPair& q, CommonOwner owner);

enum class CornerScheme { idle, single_user1, single_user2, x2_user1, x2_user2, x1 };

std::string to_string(CornerScheme scheme);

struct TimeshareComponent {
  CornerScheme scheme;
  DofPoint corner;
  Rational weight;
};

struct TimesharePlan {
  DofPoint target;
  std::vector<TimeshareComponent> components;  // weights > 0, summing to one
};

/// Convex combination of region corners hitting `target` exactly. Throws
/// DomainError naming the violated facet if the target is outside region(q).
TimesharePlan plan_timeshare(const QualityPair& q, const DofPoint& target);

}  // namespace dcsit
