// Exit-gate checks. One line per criterion; nonzero exit if any fails.
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dcsit/dof_region.hpp"
#include "dcsit/errors.hpp"
#include "dcsit/phase_plan.hpp"
#include "dcsit/serialize.hpp"
#include "dcsit/sim_harness.hpp"
#include "oracles.hpp"

using namespace dcsit;

namespace {

Rational R(long long n, long long d = 1) { return Rational(n, d); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int n, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d %s: %s (%s)\n", n, name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::vector<Integer> durations(const PhasePlan& p) {
  std::vector<Integer> t;
  for (const auto& ph : p.phases) t.push_back(ph.duration);
  return t;
}

// Fitted points collected from the simulation criteria, rechecked in criterion 10.
struct Fitted {
  QualityPair q;
  std::string label;
  double d1, d2;
};
std::vector<Fitted> fitted_points;

ExperimentConfig x1_config() {
  ExperimentConfig c;
  c.q = {R(1, 2), R(3, 4)};
  c.scheme = Scheme::x1;
  c.S = 4;
  c.T1 = Integer(1);
  c.trials = 10000;
  c.workers = 0;
  return c;
}

}  // namespace

int main() {
  criterion(1, "region corners", [] {
    const auto a = region({0, 1}).corners;
    const auto b = region({R(1, 2), 1}).corners;
    const std::vector<DofPoint> ea{{0, 0}, {1, 0}, {R(2, 3), R(2, 3)}, {0, 1}};
    const std::vector<DofPoint> eb{{0, 0}, {1, 0}, {1, R(1, 2)}, {R(5, 6), R(5, 6)}, {R(1, 2), 1}, {0, 1}};
    return Outcome{a == ea && b == eb, "(0,1) and (1/2,1) exact"};
  });

  criterion(2, "beta_dd saturation", [] {
    std::mt19937_64 gen(2024);
    int checked = 0;
    bool ok = true;
    while (checked < 20) {
      const long long den = 2 + static_cast<long long>(gen() % 11);
      const Rational a(static_cast<long long>(gen() % (den + 1)), den);
      const Rational lo = (1 + 2 * a) / 3;
      const Rational b = lo + (1 - lo) * Rational(static_cast<long long>(gen() % 7), 6);
      if (b > 1) continue;
      ok = ok && region({a, b}).corners == region({a, 1}).corners &&
           region({a, b}).corners == oracle::region_corners(a, 1);
      ++checked;
    }
    return Outcome{ok, std::to_string(checked) + " pairs"};
  });

  criterion(3, "plan identities", [] {
    std::mt19937_64 gen(77);
    int checked = 0, skipped = 0;
    bool ok = true;
    std::string first_bad;
    while (checked < 50) {
      const long long den = 2 + static_cast<long long>(gen() % 9);
      const long long an = static_cast<long long>(gen() % den);
      const long long bn = an + 1 + static_cast<long long>(gen() % (den - an));
      if (bn >= den) continue;
      const QualityPair q{Rational(an, den), Rational(bn, den)};
      const int S = 2 + static_cast<int>(gen() % 6);
      PhasePlan p;
      try {
        p = plan_x1(q, S);
      } catch (const PlanningError&) {
        ++skipped;
        continue;
      }
      const Rational& A = p.q.alpha;
      const Rational& B = p.q.beta;
      const auto T = durations(p);
      bool good = true;
      for (std::size_t s = 0; s + 1 < T.size(); ++s) {
        const Rational next_rate = (s + 2 == T.size()) ? 1 - A : 1 - B;
        good = good && Rational(T[s + 1]) * next_rate == Rational(T[s]) * 2 * (B - A);
      }
      const DofPoint d = plan_dof(p);
      good = good && d.d1 == d.d2 && d.d1 == plan_dof_closed_form(p) && d.d1 == oracle::displayed_dof(A, B, T);
      good = good && T.front() == oracle::brute_force_t1(p.xi, p.zeta, S);
      if (!good && first_bad.empty()) first_bad = " first bad " + to_string(q.alpha) + "," + to_string(q.beta);
      ok = ok && good;
      ++checked;
    }
    return Outcome{ok, std::to_string(checked) + " plans, " + std::to_string(skipped) + " over the T1 cap" + first_bad};
  });

  criterion(4, "convergence at (0,1/3)", [] {
    const QualityPair q{0, R(1, 3)};
    const bool exact = plan_dof(plan_x1(q, 3, Integer(3))).d1 == R(5, 8);
    Rational prev = -1;
    bool mono = true;
    for (int S = 2; S <= 30; ++S) {
      const Rational d = plan_dof(plan_x1(q, S)).d1;
      mono = mono && d >= prev;
      prev = d;
    }
    const double gap = std::abs(to_double(prev) - 2.0 / 3.0);
    return Outcome{exact && mono && gap <= 1e-2,
                   "S=3 gives " + std::string(exact ? "5/8" : "other") + ", S=30 gap " + fmt(gap) +
                       (mono ? ", monotone" : ", not monotone")};
  });

  criterion(5, "power ladder exponents", [] {
    ExperimentConfig c = x1_config();
    c.snr_db = {40.0, 60.0};
    const auto rows = verify_power_ladder(c);
    bool ok = rows.size() == 12;
    double worst = 0.0;
    for (const auto& r : rows) {
      ok = ok && r.pass;
      worst = std::max(worst, std::abs(r.fitted - to_double(r.predicted)));
    }
    return Outcome{ok, std::to_string(rows.size()) + " rows, worst deviation " + fmt(worst)};
  });

  criterion(6, "quantizer distortion scaling", [] {
    ExperimentConfig c = x1_config();
    c.snr_db = {40.0, 80.0};
    const auto rep = run_experiment(c);
    const double ratio = rep.rows[1].metric("quant_mse") / rep.rows[0].metric("quant_mse");
    return Outcome{ratio <= 1.5, "mse(80 dB)/mse(40 dB) = " + fmt(ratio) + ", bound 1.5"};
  });

  criterion(7, "X2 corner DoF", [] {
    bool ok = true;
    std::string detail;
    for (auto owner : {CommonOwner::user1, CommonOwner::user2}) {
      ExperimentConfig c;
      c.q = {R(1, 2), R(1, 2)};
      c.scheme = Scheme::x2;
      c.owner = owner;
      c.snr_db = {30.0, 50.0};
      c.trials = 10000;
      c.workers = 0;
      const auto rep = run_experiment(c);
      const double e1 = owner == CommonOwner::user1 ? 1.0 : 0.5;
      const double e2 = 1.5 - e1;
      const double d1 = rep.fitted_d1(), d2 = rep.fitted_d2();
      ok = ok && std::abs(d1 - e1) <= kX2DofTolerance && std::abs(d2 - e2) <= kX2DofTolerance;
      fitted_points.push_back({c.q, "x2 " + to_string(owner), d1, d2});
      detail += to_string(owner) + " (" + fmt(d1) + "," + fmt(d2) + ") ";
    }
    detail.pop_back();
    return Outcome{ok, detail};
  });

  criterion(8, "X1 DoF and MIMO slope", [] {
    const ExperimentConfig c = x1_config();
    const auto rep = run_experiment(c);
    const double expect = 73.0 / 88.0;
    const double d1 = rep.fitted_d1(), d2 = rep.fitted_d2();
    const double m1 = rep.slope("mimo_user1").fit.slope, m2 = rep.slope("mimo_user2").fit.slope;
    fitted_points.push_back({c.q, "x1", d1, d2});
    const bool ok = std::abs(d1 - expect) <= kX1DofTolerance && std::abs(d2 - expect) <= kX1DofTolerance &&
                    std::abs(m1 - 1.0) <= kX1DofTolerance && std::abs(m2 - 1.0) <= kX1DofTolerance;
    return Outcome{ok, "d=(" + fmt(d1) + "," + fmt(d2) + ") vs " + fmt(expect) + ", mimo slopes " + fmt(m1) + "," +
                           fmt(m2)};
  });

  criterion(9, "determinism", [] {
    bool ok = true;
    ExperimentConfig x1 = x1_config();
    x1.trials = 500;
    ExperimentConfig x2;
    x2.q = {R(1, 3), R(2, 3)};
    x2.scheme = Scheme::x2;
    x2.trials = 500;
    for (ExperimentConfig c : {x1, x2}) {
      c.workers = 1;
      const std::string a = report_to_json(run_experiment(c)).dump();
      const std::string b = report_to_json(run_experiment(c)).dump();
      c.workers = 4;
      const std::string w = report_to_json(run_experiment(c)).dump();
      ok = ok && a == b && a == w;
    }
    return Outcome{ok, "repeat and 1 vs 4 workers, x1 and x2"};
  });

  criterion(10, "fitted points inside the region", [] {
    ExperimentConfig base;
    base.trials = 10000;
    base.workers = 0;
    const std::vector<Scheme> schemes{Scheme::x1, Scheme::x2};
    bool ok = true;
    std::size_t count = 0;
    for (const auto& f : fitted_points) {
      ok = ok && contains_expanded(region(f.q), f.d1, f.d2, kRegionTolerance);
      ++count;
    }
    for (const QualityPair& q : {QualityPair{0, 0}, QualityPair{R(1, 3), R(2, 3)}, QualityPair{R(1, 2), 1}}) {
      const auto v = region_vs_simulation(q, schemes, base);
      for (const auto& s : v.schemes) ok = ok && s.inside;
      count += v.schemes.size();
    }
    return Outcome{ok, std::to_string(count) + " points"};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
