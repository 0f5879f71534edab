#include "dcsit/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "dcsit/errors.hpp"
#include "dcsit/rng.hpp"
#include "dcsit/tx_chain.hpp"

namespace dcsit {
namespace {

constexpr std::size_t kMaxSlotsPerTrial = 100'000;
constexpr double kZ95 = 1.959963984540054;

std::uint64_t lane(Lane l) { return static_cast<std::uint64_t>(l); }

std::size_t to_size(const Integer& n) { return n.convert_to<std::size_t>(); }

double gain2(const CVec2& channel, const CVec2& beam) { return std::norm(effective_gain(channel, beam)); }

// Runs fn(trial) for every trial index; results are stored by index so the
// caller's aggregation order never depends on scheduling.
template <class F>
std::vector<std::vector<double>> run_trials(std::size_t trials, unsigned workers, F&& fn) {
  std::vector<std::vector<double>> out(trials);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));
  if (workers <= 1) {
    for (std::size_t i = 0; i < trials; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = trials;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct Moments {
  std::vector<double> mean;
  std::vector<double> se;
};

Moments aggregate(const std::vector<std::vector<double>>& per_trial) {
  Moments m;
  if (per_trial.empty()) return m;
  const std::size_t width = per_trial.front().size();
  const double n = static_cast<double>(per_trial.size());
  m.mean.assign(width, 0.0);
  m.se.assign(width, 0.0);
  for (const auto& row : per_trial)
    for (std::size_t k = 0; k < width; ++k) m.mean[k] += row[k];
  for (auto& x : m.mean) x /= n;
  if (per_trial.size() > 1) {
    for (const auto& row : per_trial)
      for (std::size_t k = 0; k < width; ++k) m.se[k] += (row[k] - m.mean[k]) * (row[k] - m.mean[k]);
    for (auto& x : m.se) x = std::sqrt(x / (n - 1.0) / n);
  }
  return m;
}

// One rate curve over the SNR grid.
struct Series {
  std::string name;
  std::optional<double> predicted;
  std::vector<double> value;
  std::vector<double> se;
};

struct SchemeRun {
  Series user1{"d1", std::nullopt, {}, {}};
  Series user2{"d2", std::nullopt, {}, {}};
  std::vector<Series> extra;
  std::vector<SnrRow> rows;
  std::vector<ExponentRow> ladder;
  std::vector<ExponentRow> exponents;
  std::size_t regularized = 0;
};

Series& series_named(std::vector<Series>& list, const std::string& name, std::optional<double> predicted) {
  for (auto& s : list)
    if (s.name == name) return s;
  list.push_back({name, predicted, {}, {}});
  return list.back();
}

ExponentRow& exponent_named(std::vector<ExponentRow>& list, const std::string& term, int user,
                            const Rational& predicted) {
  for (auto& r : list)
    if (r.term == term && r.user == user) return r;
  list.push_back({term, user, predicted, {}, 0.0, false});
  return list.back();
}

void init_rows(SchemeRun& run, const ExperimentConfig& cfg) {
  for (double db : cfg.snr_db) run.rows.push_back({db, std::log2(db_to_linear(db)), {}});
}

// ---- x1 --------------------------------------------------------------------

namespace x1m {
enum : std::size_t {
  common1_user1,
  common1_user2,
  common1_min,
  last_user1,
  last_user2,
  mimo1_bits,
  mimo2_bits,
  final1_bits,
  final2_bits,
  total1,
  total2,
  residual1,
  residual2,
  noise_own1,
  noise_cross1,
  noise_own2,
  noise_cross2,
  payload_bits,
  carrier_bits,
  tx_power,
  regularized,
  quant_mse,
  ladder_begin,
  width = ladder_begin + 12,
};
}

const char* const kLadderTerms1[6] = {"c", "a", "a_prime", "check_iota1", "residual1", "awgn"};
const char* const kLadderTerms2[6] = {"c", "b", "b_prime", "check_iota2", "residual2", "awgn"};

std::vector<double> evaluate_x1_trial(const TrialRecord& rec) {
  std::vector<double> m(x1m::width, 0.0);
  const std::vector<PhaseDecode> decode = backward_decode_chain(rec);
  const std::size_t S = rec.phases.size();
  std::size_t total_slots = 0;
  std::size_t mid_slots = 0;
  double common_share = 0.0;

  for (std::size_t s = 0; s < S; ++s) {
    const PhaseRecord& ph = rec.phases[s];
    const bool last = s + 1 == S;
    total_slots += ph.slots.size();
    for (const auto& q : ph.carried_payload) m[x1m::payload_bits] += static_cast<double>(q.size());

    for (std::size_t t = 0; t < ph.slots.size(); ++t) {
      const SlotRecord& slot = ph.slots[t];
      const CommonRate cr = common_rate(slot.sample, ph.spec, slot.bf);
      m[x1m::tx_power] += transmit_slot(ph.spec, slot.bf, slot.sym).squaredNorm() / slot.sample.snr;
      if (s == 0) {
        m[x1m::common1_user1] += cr.user1;
        m[x1m::common1_user2] += cr.user2;
        m[x1m::common1_min] += cr.min();
        common_share += cr.min() / 2.0;
      } else {
        m[x1m::carrier_bits] += cr.min();
      }
      if (last) {
        m[x1m::last_user1] += cr.user1;
        m[x1m::last_user2] += cr.user2;
        const FinalPrivateRates fr = final_private_rates(slot.sample, slot.bf, ph.powers);
        m[x1m::final1_bits] += fr.user1;
        m[x1m::final2_bits] += fr.user2;
        continue;
      }

      ++mid_slots;
      const PhaseDecode& d = decode[s];
      const MimoRate r1 = mimo_private_rate(d.mimo_user1[t]);
      const MimoRate r2 = mimo_private_rate(d.mimo_user2[t]);
      m[x1m::mimo1_bits] += r1.bits;
      m[x1m::mimo2_bits] += r2.bits;
      m[x1m::regularized] += (r1.regularized ? 1.0 : 0.0) + (r2.regularized ? 1.0 : 0.0);
      m[x1m::noise_own1] += d.mimo_user1[t].noise_cov(0, 0).real();
      m[x1m::noise_cross1] += d.mimo_user1[t].noise_cov(1, 1).real();
      m[x1m::noise_own2] += d.mimo_user2[t].noise_cov(1, 1).real();
      m[x1m::noise_cross2] += d.mimo_user2[t].noise_cov(0, 0).real();

      const auto& sm = slot.sample;
      const auto& bf = slot.bf;
      const auto& sy = slot.sym;
      const auto& it = slot.interference;
      const double pc = std::norm(sy.c.value_or(Complex{}));
      double* l = &m[x1m::ladder_begin];
      l[0] += gain2(sm.h, bf.w) * pc;
      l[1] += std::norm(effective_gain(sm.h, bf.u) * sy.a.value_or(Complex{}));
      l[2] += std::norm(effective_gain(sm.h, bf.u_prime) * sy.a_prime.value_or(Complex{}));
      l[3] += std::norm(it.check_iota1);
      l[4] += std::norm(it.iota1 - it.check_iota1);
      l[5] += std::norm(slot.z1);
      l[6] += gain2(sm.g, bf.w) * pc;
      l[7] += std::norm(effective_gain(sm.g, bf.v) * sy.b.value_or(Complex{}));
      l[8] += std::norm(effective_gain(sm.g, bf.v_prime) * sy.b_prime.value_or(Complex{}));
      l[9] += std::norm(it.check_iota2);
      l[10] += std::norm(it.iota2 - it.check_iota2);
      l[11] += std::norm(slot.z2);
      m[x1m::quant_mse] += (std::norm(it.qerr1) + std::norm(it.qerr2)) / 2.0;
    }
  }

  const double T1 = static_cast<double>(rec.phases.front().slots.size());
  const double TS = static_cast<double>(rec.phases.back().slots.size());
  const double mid = static_cast<double>(mid_slots);
  const double total = static_cast<double>(total_slots);
  for (auto k : {x1m::common1_user1, x1m::common1_user2, x1m::common1_min}) m[k] /= T1;
  for (auto k : {x1m::last_user1, x1m::last_user2}) m[k] /= TS;
  m[x1m::total1] = (common_share + m[x1m::mimo1_bits] + m[x1m::final1_bits]) / total;
  m[x1m::total2] = (common_share + m[x1m::mimo2_bits] + m[x1m::final2_bits]) / total;
  for (std::size_t s = 0; s + 1 < S; ++s) {
    const double w = static_cast<double>(rec.phases[s].slots.size()) / mid;
    m[x1m::residual1] += decode[s].residual_power1 * w;
    m[x1m::residual2] += decode[s].residual_power2 * w;
  }
  for (auto k : {x1m::noise_own1, x1m::noise_cross1, x1m::noise_own2, x1m::noise_cross2, x1m::quant_mse}) m[k] /= mid;
  for (std::size_t k = 0; k < 12; ++k) m[x1m::ladder_begin + k] /= mid;
  m[x1m::tx_power] /= total;
  return m;
}

SchemeRun run_x1(const ExperimentConfig& cfg, const PhasePlan& plan) {
  SchemeRun run;
  init_rows(run, cfg);
  const Integer total = plan.total_duration();
  if (total > Integer(kMaxSlotsPerTrial))
    throw PlanningError("plan spans " + total.str() + " slots per trial; the simulator caps trials at " +
                        std::to_string(kMaxSlotsPerTrial));

  const QualityPair& pq = plan.q;
  const QualityPair& tq = plan.requested;
  const PhaseSpec& first = plan.phases.front();
  const Rational pb = first.b->power_exp;
  const Rational pbp = first.b_prime->power_exp;
  const Rational check_exp = std::max<Rational>(pb - tq.alpha, pbp);
  const Rational residual_exp = std::max<Rational>(pb, pbp) - tq.beta;
  const Rational ladder_pred[6] = {first.c->power_exp, first.a->power_exp, first.a_prime->power_exp, check_exp,
                                   residual_exp, Rational(0)};

  const double T1 = to_double(Rational(first.duration));
  const double TS = to_double(Rational(plan.phases.back().duration));
  const double total_d = to_double(Rational(total));
  const double mid = total_d - TS;
  const double dof_pred = to_double(plan_dof(plan).d1);
  run.user1.predicted = dof_pred;
  run.user2.predicted = dof_pred;
  const double mimo_pred = to_double(2 * pq.beta - pq.alpha);

  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    const double snr = db_to_linear(cfg.snr_db[i]);
    const int bits = interference_bits(pq, snr, cfg.quant_margin_bits);
    const auto per_trial = run_trials(cfg.trials, cfg.workers, [&](std::size_t trial) {
      const TrialRecord rec = simulate_x1_trial(plan, snr, {cfg.seed, i, trial}, bits);
      return evaluate_x1_trial(rec);
    });
    const Moments mo = aggregate(per_trial);
    auto mean = [&](std::size_t k) { return mo.mean[k]; };
    auto se = [&](std::size_t k) { return mo.se[k]; };

    const double common_first = std::min(mean(x1m::common1_user1), mean(x1m::common1_user2));
    const double common_first_se = std::max(se(x1m::common1_user1), se(x1m::common1_user2));
    const double common_last = std::min(mean(x1m::last_user1), mean(x1m::last_user2));
    const double common_last_se = std::max(se(x1m::last_user1), se(x1m::last_user2));
    const double user1 = (T1 * common_first / 2.0 + mean(x1m::mimo1_bits) + mean(x1m::final1_bits)) / total_d;
    const double user2 = (T1 * common_first / 2.0 + mean(x1m::mimo2_bits) + mean(x1m::final2_bits)) / total_d;

    run.user1.value.push_back(user1);
    run.user1.se.push_back(se(x1m::total1));
    run.user2.value.push_back(user2);
    run.user2.se.push_back(se(x1m::total2));

    auto add_series = [&](const std::string& name, std::optional<double> pred, double v, double e) {
      Series& s = series_named(run.extra, name, pred);
      s.value.push_back(v);
      s.se.push_back(e);
    };
    add_series("common_first", to_double(1 - pq.beta), common_first, common_first_se);
    add_series("common_last", to_double(1 - pq.alpha), common_last, common_last_se);
    add_series("mimo_user1", mimo_pred, mean(x1m::mimo1_bits) / mid, se(x1m::mimo1_bits) / mid);
    add_series("mimo_user2", mimo_pred, mean(x1m::mimo2_bits) / mid, se(x1m::mimo2_bits) / mid);
    add_series("final_private_user1", to_double(pq.alpha), mean(x1m::final1_bits) / TS, se(x1m::final1_bits) / TS);
    add_series("final_private_user2", to_double(pq.alpha), mean(x1m::final2_bits) / TS, se(x1m::final2_bits) / TS);

    for (std::size_t k = 0; k < 6; ++k) {
      exponent_named(run.ladder, kLadderTerms1[k], 1, ladder_pred[k]).mean_power.push_back(mean(x1m::ladder_begin + k));
    }
    for (std::size_t k = 0; k < 6; ++k) {
      exponent_named(run.ladder, kLadderTerms2[k], 2, ladder_pred[k])
          .mean_power.push_back(mean(x1m::ladder_begin + 6 + k));
    }
    exponent_named(run.exponents, "residual", 1, residual_exp).mean_power.push_back(mean(x1m::residual1));
    exponent_named(run.exponents, "residual", 2, residual_exp).mean_power.push_back(mean(x1m::residual2));
    exponent_named(run.exponents, "noise_own", 1, 0).mean_power.push_back(mean(x1m::noise_own1));
    exponent_named(run.exponents, "noise_own", 2, 0).mean_power.push_back(mean(x1m::noise_own2));
    exponent_named(run.exponents, "noise_cross", 1, 0).mean_power.push_back(mean(x1m::noise_cross1));
    exponent_named(run.exponents, "noise_cross", 2, 0).mean_power.push_back(mean(x1m::noise_cross2));

    const std::size_t regularized = static_cast<std::size_t>(std::llround(mean(x1m::regularized) * cfg.trials));
    run.regularized += regularized;

    SnrRow& row = run.rows[i];
    row.metrics = {
        {"user1_rate", user1},
        {"user2_rate", user2},
        {"common_first", common_first},
        {"common_first_per_realization_min", mean(x1m::common1_min)},
        {"common_last", common_last},
        {"mimo_user1", mean(x1m::mimo1_bits) / mid},
        {"mimo_user2", mean(x1m::mimo2_bits) / mid},
        {"final_private_user1", mean(x1m::final1_bits) / TS},
        {"final_private_user2", mean(x1m::final2_bits) / TS},
        {"residual_user1", mean(x1m::residual1)},
        {"residual_user2", mean(x1m::residual2)},
        {"noise_own_user1", mean(x1m::noise_own1)},
        {"noise_cross_user1", mean(x1m::noise_cross1)},
        {"noise_own_user2", mean(x1m::noise_own2)},
        {"noise_cross_user2", mean(x1m::noise_cross2)},
        {"quant_bits_per_value", static_cast<double>(bits)},
        {"quant_mse", mean(x1m::quant_mse)},
        {"payload_bits", mean(x1m::payload_bits)},
        {"carrier_capacity_bits", mean(x1m::carrier_bits)},
        {"tx_power_over_p", mean(x1m::tx_power)},
        {"regularized", static_cast<double>(regularized)},
    };
  }
  return run;
}

// ---- x2 and single-user slots ---------------------------------------------

struct SlotDraw {
  ChannelSample sample;
  std::uint64_t slot_key = 0;
};

SlotDraw draw_slot(const ExperimentConfig& cfg, const QualityPair& truth, double snr, std::size_t snr_index,
                   std::size_t trial) {
  SlotDraw d;
  d.slot_key = derive_key({cfg.seed, snr_index, trial, 0, 0});
  RngStream ch(derive_key({d.slot_key, lane(Lane::channel)}));
  d.sample = draw_sample(ch, snr, truth);
  return d;
}

SchemeRun run_x2(const ExperimentConfig& cfg, const QualityPair& truth, const X2Plan& plan) {
  SchemeRun run;
  init_rows(run, cfg);
  run.user1.predicted = to_double(plan.dof.d1);
  run.user2.predicted = to_double(plan.dof.d2);
  const double own1 = plan.owner == CommonOwner::user1 ? 1.0 : 0.0;
  const double own2 = 1.0 - own1;

  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    const double snr = db_to_linear(cfg.snr_db[i]);
    const auto per_trial = run_trials(cfg.trials, cfg.workers, [&](std::size_t trial) {
      const SlotDraw d = draw_slot(cfg, truth, snr, i, trial);
      const BeamformerSet bf = build_beamformers(d.sample.current(), d.slot_key, cfg.seed);
      const X2Rates r = x2_rates(d.sample, bf, plan);
      return std::vector<double>{r.common.user1,
                                 r.common.user2,
                                 r.private_a,
                                 r.private_b,
                                 own1 * r.common.min() + r.private_a,
                                 own2 * r.common.min() + r.private_b};
    });
    const Moments mo = aggregate(per_trial);
    const double common = std::min(mo.mean[0], mo.mean[1]);
    const double user1 = own1 * common + mo.mean[2];
    const double user2 = own2 * common + mo.mean[3];
    run.user1.value.push_back(user1);
    run.user1.se.push_back(mo.se[4]);
    run.user2.value.push_back(user2);
    run.user2.se.push_back(mo.se[5]);

    auto add_series = [&](const std::string& name, std::optional<double> pred, double v, double e) {
      Series& s = series_named(run.extra, name, pred);
      s.value.push_back(v);
      s.se.push_back(e);
    };
    const double alpha = to_double(plan.slot.a->rate);
    add_series("common", 1.0 - alpha, common, std::max(mo.se[0], mo.se[1]));
    add_series("private_a", alpha, mo.mean[2], mo.se[2]);
    add_series("private_b", alpha, mo.mean[3], mo.se[3]);

    run.rows[i].metrics = {
        {"user1_rate", user1},          {"user2_rate", user2},           {"common", common},
        {"common_user1", mo.mean[0]},   {"common_user2", mo.mean[1]},    {"private_a", mo.mean[2]},
        {"private_b", mo.mean[3]},
    };
  }
  return run;
}

// Full power to one user along its current channel estimate.
SchemeRun run_single_user(const ExperimentConfig& cfg, const QualityPair& truth, int user) {
  SchemeRun run;
  init_rows(run, cfg);
  run.user1.predicted = user == 1 ? 1.0 : 0.0;
  run.user2.predicted = user == 1 ? 0.0 : 1.0;
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    const double snr = db_to_linear(cfg.snr_db[i]);
    const auto per_trial = run_trials(cfg.trials, cfg.workers, [&](std::size_t trial) {
      const SlotDraw d = draw_slot(cfg, truth, snr, i, trial);
      const CVec2& est = user == 1 ? d.sample.hat_h : d.sample.hat_g;
      const CVec2& ch = user == 1 ? d.sample.h : d.sample.g;
      const double n = est.norm();
      if (n == 0.0) throw DegenerateInputError("single-user beam: zero channel estimate");
      const CVec2 w = est.conjugate() / n;
      return std::vector<double>{siso_rate(gain2(ch, w) * snr, 0.0)};
    });
    const Moments mo = aggregate(per_trial);
    Series& served = user == 1 ? run.user1 : run.user2;
    Series& idle = user == 1 ? run.user2 : run.user1;
    served.value.push_back(mo.mean[0]);
    served.se.push_back(mo.se[0]);
    idle.value.push_back(0.0);
    idle.se.push_back(0.0);
    run.rows[i].metrics = {{"user1_rate", run.user1.value.back()}, {"user2_rate", run.user2.value.back()}};
  }
  return run;
}

SchemeRun run_idle(const ExperimentConfig& cfg) {
  SchemeRun run;
  init_rows(run, cfg);
  run.user1.predicted = 0.0;
  run.user2.predicted = 0.0;
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    run.user1.value.push_back(0.0);
    run.user1.se.push_back(0.0);
    run.user2.value.push_back(0.0);
    run.user2.se.push_back(0.0);
    run.rows[i].metrics = {{"user1_rate", 0.0}, {"user2_rate", 0.0}};
  }
  return run;
}

PlanOptions options_of(const ExperimentConfig& cfg) {
  PlanOptions o;
  o.degrade_to_beta_dd = cfg.degrade_to_beta_dd;
  return o;
}

PhasePlan plan_for(const ExperimentConfig& cfg, const QualityPair& q) {
  if (cfg.plan) return *cfg.plan;
  return plan_x1(q, cfg.S, cfg.T1, options_of(cfg));
}

SchemeRun run_timeshare(const ExperimentConfig& cfg, const QualityPair& q, const TimesharePlan& ts) {
  SchemeRun run;
  init_rows(run, cfg);
  run.user1.value.assign(cfg.snr_db.size(), 0.0);
  run.user1.se.assign(cfg.snr_db.size(), 0.0);
  run.user2.value = run.user1.value;
  run.user2.se = run.user1.se;
  double pred1 = 0.0;
  double pred2 = 0.0;

  for (std::size_t k = 0; k < ts.components.size(); ++k) {
    const TimeshareComponent& comp = ts.components[k];
    ExperimentConfig sub = cfg;
    sub.seed = derive_key({cfg.seed, lane(Lane::component), k});
    SchemeRun part;
    switch (comp.scheme) {
      case CornerScheme::idle: part = run_idle(sub); break;
      case CornerScheme::single_user1: part = run_single_user(sub, q, 1); break;
      case CornerScheme::single_user2: part = run_single_user(sub, q, 2); break;
      case CornerScheme::x2_user1: part = run_x2(sub, q, plan_x2(q, CommonOwner::user1)); break;
      case CornerScheme::x2_user2: part = run_x2(sub, q, plan_x2(q, CommonOwner::user2)); break;
      case CornerScheme::x1: part = run_x1(sub, plan_for(sub, q)); break;
    }
    const double w = to_double(comp.weight);
    pred1 += w * part.user1.predicted.value_or(0.0);
    pred2 += w * part.user2.predicted.value_or(0.0);
    run.regularized += part.regularized;
    const std::string prefix = "component" + std::to_string(k + 1) + "_" + to_string(comp.scheme);
    for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
      run.user1.value[i] += w * part.user1.value[i];
      run.user2.value[i] += w * part.user2.value[i];
      run.user1.se[i] += w * w * part.user1.se[i] * part.user1.se[i];
      run.user2.se[i] += w * w * part.user2.se[i] * part.user2.se[i];
      run.rows[i].metrics.emplace_back(prefix + "_user1", part.user1.value[i]);
      run.rows[i].metrics.emplace_back(prefix + "_user2", part.user2.value[i]);
    }
  }
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    run.user1.se[i] = std::sqrt(run.user1.se[i]);
    run.user2.se[i] = std::sqrt(run.user2.se[i]);
    auto& m = run.rows[i].metrics;
    m.insert(m.begin(), {{"user1_rate", run.user1.value[i]}, {"user2_rate", run.user2.value[i]}});
  }
  run.user1.predicted = pred1;
  run.user2.predicted = pred2;
  return run;
}

// ---- fitting and checks ------------------------------------------------------

SlopeSummary summarize(const Series& s, const std::vector<double>& x) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i) pts.emplace_back(x[i], s.value[i]);
  SlopeSummary out;
  out.name = s.name;
  out.fit = fit_slope(pts);
  out.predicted = s.predicted;
  double mx = 0.0;
  for (double v : x) mx += v;
  mx /= static_cast<double>(x.size());
  double sxx = 0.0;
  for (double v : x) sxx += (v - mx) * (v - mx);
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = (x[i] - mx) / sxx;
    var += w * w * s.se[i] * s.se[i];
  }
  out.mc_half_width = kZ95 * std::sqrt(var);
  return out;
}

void fit_exponents(std::vector<ExponentRow>& rows, const std::vector<double>& x) {
  for (auto& r : rows) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < x.size(); ++i) pts.emplace_back(x[i], std::log2(r.mean_power[i]));
    r.fitted = fit_slope(pts).slope;
    r.pass = std::abs(r.fitted - to_double(r.predicted)) <= kExponentTolerance;
  }
}

// Largest signed Euclidean distance of (d1, d2) outside any facet.
double outward_distance(const DofRegion& r, double d1, double d2) {
  double worst = -1e300;
  for (const auto& f : r.inequalities) {
    const double c1 = to_double(f.c1);
    const double c2 = to_double(f.c2);
    worst = std::max(worst, (c1 * d1 + c2 * d2 - to_double(f.rhs)) / std::hypot(c1, c2));
  }
  return worst;
}

void add_check(SimulationReport& rep, std::string name, double measured, double expected, double tol) {
  rep.checks.push_back({std::move(name), measured, expected, tol, std::abs(measured - expected) <= tol});
}

double snr_span(const std::vector<double>& db) {
  const auto [lo, hi] = std::minmax_element(db.begin(), db.end());
  return *hi - *lo;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw DomainError("trials must be at least 1");
  if (cfg.snr_db.size() < 2) throw DomainError("slope fits need at least two SNR points");
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    if (!std::isfinite(cfg.snr_db[i]) || cfg.snr_db[i] <= 0.0)
      throw DomainError("SNR points must be positive and finite (dB)");
    for (std::size_t j = 0; j < i; ++j)
      if (cfg.snr_db[i] == cfg.snr_db[j]) throw DomainError("duplicate SNR point");
  }
  if (cfg.quant_margin_bits < 0) throw DomainError("quant_margin_bits must be non-negative");
}

}  // namespace

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::x1: return "x1";
    case Scheme::x2: return "x2";
    case Scheme::timeshare: return "timeshare";
  }
  return "?";
}

double SnrRow::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  throw DomainError("no metric named " + name);
}

const SlopeSummary& SimulationReport::slope(const std::string& name) const {
  for (const auto& s : slopes)
    if (s.name == name) return s;
  throw DomainError("no slope named " + name);
}

bool SimulationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

SlopeFit fit_slope(std::span<const std::pair<double, double>> points) {
  const std::size_t n = points.size();
  if (n < 2) throw DomainError("fit_slope: need at least two points");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (points[i].first == points[j].first) throw DomainError("fit_slope: duplicate abscissa");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (const auto& [x, y] : points) {
      const double e = y - fit.intercept - fit.slope * x;
      rss += e * e;
    }
    const double df = static_cast<double>(n - 2);
    const double t = boost::math::quantile(boost::math::students_t(df), 0.975);
    fit.half_width = t * std::sqrt(rss / df / sxx);
  }
  return fit;
}

TrialRecord simulate_x1_trial(const PhasePlan& plan, double snr, const TrialKey& key, int bits_per_value) {
  TrialRecord rec;
  rec.phases.reserve(plan.phases.size());
  std::vector<BitString> pending;
  for (std::size_t s = 0; s < plan.phases.size(); ++s) {
    PhaseRecord ph;
    ph.spec = plan.phases[s];
    ph.powers = stream_powers(ph.spec, snr);
    const std::size_t T = to_size(ph.spec.duration);
    ph.slots.reserve(T);
    if (s > 0) ph.carried_payload = std::move(pending);

    for (std::size_t t = 0; t < T; ++t) {
      const std::uint64_t slot_key = derive_key({key.seed, key.snr_index, key.trial, s + 1, t});
      SlotRecord slot;
      RngStream ch(derive_key({slot_key, lane(Lane::channel)}));
      slot.sample = draw_sample(ch, snr, plan.requested);
      slot.bf = build_beamformers(slot.sample.current(), slot_key, key.seed);
      RngStream sy(derive_key({slot_key, lane(Lane::symbols)}));
      slot.sym = draw_symbols(sy, ph.spec, snr);
      const CVec2 x = transmit_slot(ph.spec, slot.bf, slot.sym);
      RngStream nz(derive_key({slot_key, lane(Lane::noise)}));
      slot.z1 = nz.complex_gaussian(1.0);
      slot.z2 = nz.complex_gaussian(1.0);
      slot.y1 = effective_gain(slot.sample.h, x) + slot.z1;
      slot.y2 = effective_gain(slot.sample.g, x) + slot.z2;
      slot.interference = delayed_interference(slot.sample, slot.bf, slot.sym);
      ph.slots.push_back(std::move(slot));
    }

    if (s + 1 < plan.phases.size()) {
      std::vector<Complex> values;
      values.reserve(2 * T);
      for (const auto& sl : ph.slots) values.push_back(sl.interference.check_iota1);
      for (const auto& sl : ph.slots) values.push_back(sl.interference.check_iota2);
      QuantizedBatch batch = quantize_interference(values, bits_per_value);
      for (std::size_t t = 0; t < T; ++t) {
        InterferenceRecord& ir = ph.slots[t].interference;
        ir.qbar_iota1 = batch.values[t];
        ir.qbar_iota2 = batch.values[T + t];
        ir.qerr1 = ir.check_iota1 - ir.qbar_iota1;
        ir.qerr2 = ir.check_iota2 - ir.qbar_iota2;
        ir.bits_used = 2 * static_cast<std::size_t>(bits_per_value);
      }
      pending = pack_common(batch.bits, to_size(plan.phases[s + 1].duration));
      ph.quantized = std::move(batch);
    }
    rec.phases.push_back(std::move(ph));
  }
  return rec;
}

Rational symmetric_corner(const QualityPair& q) {
  const DofRegion r = region(q);
  std::optional<Rational> best;
  for (const auto& f : r.inequalities) {
    const Rational s = f.c1 + f.c2;
    if (s <= 0) continue;
    const Rational d = f.rhs / s;
    if (!best || d < *best) best = d;
  }
  return best.value_or(Rational(0));
}

SimulationReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const QualityPair q = normalize_quality(cfg.q.alpha, cfg.q.beta).q;
  SimulationReport rep;
  rep.config = cfg;
  rep.config.q = q;
  rep.asymptotic_dof = asymptotic_dof(q);

  const DofRegion reg = region(q);
  SchemeRun run;
  double tolerance = kX1DofTolerance;

  switch (cfg.scheme) {
    case Scheme::x1: {
      const PlanRoute route = cfg.plan ? PlanRoute::multiphase : route_for(q, options_of(cfg));
      rep.route = to_string(route);
      if (route == PlanRoute::multiphase) {
        const PhasePlan plan = plan_for(cfg, q);
        rep.plan = plan;
        rep.plan_dof = plan_dof(plan);
        run = run_x1(cfg, plan);
      } else if (route == PlanRoute::timeshare) {
        const Rational d = symmetric_corner(q);
        rep.timeshare = plan_timeshare(q, {d, d});
        run = run_timeshare(cfg, q, *rep.timeshare);
      } else {
        run = run_x2(cfg, q, plan_x2(q, CommonOwner::user1));
        tolerance = kX2DofTolerance;
      }
      break;
    }
    case Scheme::x2: {
      rep.route = "single_slot";
      run = run_x2(cfg, q, plan_x2(q, cfg.owner));
      tolerance = kX2DofTolerance;
      break;
    }
    case Scheme::timeshare: {
      rep.route = "timeshare";
      DofPoint target;
      if (cfg.target) {
        target = *cfg.target;
      } else {
        const Rational d = symmetric_corner(q);
        target = {d, d};
      }
      rep.timeshare = plan_timeshare(q, target);
      run = run_timeshare(cfg, q, *rep.timeshare);
      break;
    }
  }

  std::vector<double> x;
  for (double db : cfg.snr_db) x.push_back(std::log2(db_to_linear(db)));

  rep.rows = std::move(run.rows);
  rep.slopes.push_back(summarize(run.user1, x));
  rep.slopes.push_back(summarize(run.user2, x));
  for (const auto& s : run.extra) rep.slopes.push_back(summarize(s, x));
  rep.power_ladder = std::move(run.ladder);
  rep.exponents = std::move(run.exponents);
  fit_exponents(rep.power_ladder, x);
  fit_exponents(rep.exponents, x);
  rep.regularized = run.regularized;

  if (rep.plan_dof) {
    rep.predicted_point = *rep.plan_dof;
  } else if (rep.timeshare) {
    rep.predicted_point = rep.timeshare->target;
  } else if (cfg.scheme == Scheme::x2 || rep.route == to_string(PlanRoute::perfect_csit)) {
    rep.predicted_point = plan_x2(q, cfg.scheme == Scheme::x2 ? cfg.owner : CommonOwner::user1).dof;
  }

  const double d1 = rep.fitted_d1();
  const double d2 = rep.fitted_d2();
  add_check(rep, "dof_d1", d1, *run.user1.predicted, tolerance);
  add_check(rep, "dof_d2", d2, *run.user2.predicted, tolerance);
  if (rep.plan) {
    const SlopeSummary& m1 = rep.slope("mimo_user1");
    const SlopeSummary& m2 = rep.slope("mimo_user2");
    add_check(rep, "mimo_slope_user1", m1.fit.slope, *m1.predicted, kX1DofTolerance);
    add_check(rep, "mimo_slope_user2", m2.fit.slope, *m2.predicted, kX1DofTolerance);
    if (snr_span(cfg.snr_db) >= 20.0) {
      for (const auto& r : rep.power_ladder) {
        add_check(rep, "ladder_user" + std::to_string(r.user) + "_" + r.term, r.fitted, to_double(r.predicted),
                  kExponentTolerance);
      }
    }
  }
  const double out = outward_distance(reg, d1, d2);
  rep.checks.push_back({"inside_region", out, 0.0, kRegionTolerance, contains_expanded(reg, d1, d2, kRegionTolerance)});
  return rep;
}

std::vector<ExponentRow> verify_power_ladder(const ExperimentConfig& cfg) {
  if (cfg.scheme != Scheme::x1) throw DomainError("verify_power_ladder: needs an x1 experiment");
  if (cfg.snr_db.size() < 2 || snr_span(cfg.snr_db) < 20.0)
    throw DomainError("verify_power_ladder: SNR points must span at least 20 dB");
  const QualityPair q = normalize_quality(cfg.q.alpha, cfg.q.beta).q;
  PlanOptions o;
  o.degrade_to_beta_dd = cfg.degrade_to_beta_dd;
  if (!cfg.plan && route_for(q, o) != PlanRoute::multiphase)
    throw DomainError("verify_power_ladder: quality pair does not route to the multi-phase scheme");
  return run_experiment(cfg).power_ladder;
}

RegionVerdict region_vs_simulation(const QualityPair& q_raw, std::span<const Scheme> schemes,
                                   const ExperimentConfig& base) {
  RegionVerdict v;
  v.q = normalize_quality(q_raw.alpha, q_raw.beta).q;
  const DofRegion reg = region(v.q);

  auto record = [&](const std::string& name, const SimulationReport& rep, double tol) {
    SchemeVerdict s;
    s.scheme = name;
    s.d1 = rep.fitted_d1();
    s.d2 = rep.fitted_d2();
    s.predicted = rep.predicted_point.value_or(DofPoint{});
    s.tolerance = tol;
    s.inside = contains_expanded(reg, s.d1, s.d2, kRegionTolerance);
    s.near = std::abs(s.d1 - to_double(s.predicted.d1)) <= tol && std::abs(s.d2 - to_double(s.predicted.d2)) <= tol;
    v.schemes.push_back(s);
  };

  for (Scheme scheme : schemes) {
    ExperimentConfig cfg = base;
    cfg.q = v.q;
    cfg.plan.reset();
    cfg.target.reset();
    cfg.scheme = scheme;
    if (scheme == Scheme::x2) {
      for (CommonOwner owner : {CommonOwner::user1, CommonOwner::user2}) {
        cfg.owner = owner;
        record("x2_" + to_string(owner), run_experiment(cfg), kX2DofTolerance);
      }
    } else if (scheme == Scheme::x1) {
      const SimulationReport rep = run_experiment(cfg);
      const double tol = rep.route == to_string(PlanRoute::perfect_csit) ? kX2DofTolerance : kX1DofTolerance;
      record(rep.route == to_string(PlanRoute::multiphase) ? "x1" : rep.route, rep, tol);
    } else {
      record("timeshare", run_experiment(cfg), kX1DofTolerance);
    }
  }
  v.pass = !v.schemes.empty() &&
           std::all_of(v.schemes.begin(), v.schemes.end(), [](const SchemeVerdict& s) { return s.inside && s.near; });
  return v;
}

}  // namespace dcsit
