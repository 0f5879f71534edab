#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcsit/dof_region.hpp"
#include "dcsit/phase_plan.hpp"
#include "dcsit/rx_eval.hpp"

namespace dcsit {

enum class Scheme { x1, x2, timeshare };

std::string to_string(Scheme scheme);

struct ExperimentConfig {
  QualityPair q;
  Scheme scheme = Scheme::x1;
  int S = 4;                      // x1 only
  std::optional<Integer> T1;      // x1 only
  std::optional<PhasePlan> plan;  // x1: use this plan instead of planning from q
  CommonOwner owner = CommonOwner::user1;  // x2 only
  std::optional<DofPoint> target;          // timeshare; defaults to the symmetric corner
  std::vector<double> snr_db = {30.0, 50.0, 70.0};
  std::size_t trials = 10'000;
  std::uint64_t seed = 1;
  int quant_margin_bits = 4;
  bool degrade_to_beta_dd = false;
  unsigned workers = 1;  // execution detail; never affects the report
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% from regression residuals; 0 for two points
};

/// Ordinary least squares of y on x. Throws DomainError for fewer than two
/// points or repeated abscissae.
SlopeFit fit_slope(std::span<const std::pair<double, double>> points);

struct SlopeSummary {
  std::string name;
  SlopeFit fit;
  double mc_half_width = 0.0;  // 95% Monte Carlo uncertainty propagated through the fit
  std::optional<double> predicted;
};

// Fitted exponent of a mean power against P.
struct ExponentRow {
  std::string term;
  int user = 1;
  Rational predicted;
  std::vector<double> mean_power;  // one per SNR
  double fitted = 0.0;
  bool pass = false;
};

struct SnrRow {
  double snr_db = 0.0;
  double log2_snr = 0.0;
  std::vector<std::pair<std::string, double>> metrics;

  double metric(const std::string& name) const;
};

struct Check {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct SimulationReport {
  ExperimentConfig config;
  std::string route;
  std::optional<PhasePlan> plan;
  std::optional<TimesharePlan> timeshare;
  std::optional<DofPoint> plan_dof;
  DofPoint asymptotic_dof;
  std::optional<DofPoint> predicted_point;  // what the fitted (d1, d2) is checked against
  std::vector<SnrRow> rows;
  std::vector<SlopeSummary> slopes;
  std::vector<ExponentRow> power_ladder;
  std::vector<ExponentRow> exponents;
  std::vector<Check> checks;
  std::size_t regularized = 0;

  const SlopeSummary& slope(const std::string& name) const;
  double fitted_d1() const { return slope("d1").fit.slope; }
  double fitted_d2() const { return slope("d2").fit.slope; }
  bool all_pass() const;
};

struct TrialKey {
  std::uint64_t seed = 0;
  std::uint64_t snr_index = 0;
  std::uint64_t trial = 0;
};

// Runs every slot of one multi-phase trial, including quantization and
// payload packing; the record feeds backward_decode_chain.
TrialRecord simulate_x1_trial(const PhasePlan& plan, double snr, const TrialKey& key, int bits_per_value);

SimulationReport run_experiment(const ExperimentConfig& cfg);

// Requires an x1 config with a multi-phase route and SNR points spanning at
// least 20 dB; throws DomainError otherwise.
std::vector<ExponentRow> verify_power_ladder(const ExperimentConfig& cfg);

struct SchemeVerdict {
  std::string scheme;
  double d1 = 0.0;
  double d2 = 0.0;
  DofPoint predicted;
  double tolerance = 0.0;
  bool inside = false;  // inside region(q) grown by 0.1
  bool near = false;    // within tolerance of predicted
};

struct RegionVerdict {
  QualityPair q;
  std::vector<SchemeVerdict> schemes;
  bool pass = false;
};

// Runs the requested schemes (x2 for both owners) with the SNR grid, trials
// and seed of `base` and checks each fitted point against the region. x1 on a
// degenerate route is replaced by the timeshare run at the symmetric corner.
RegionVerdict region_vs_simulation(const QualityPair& q, std::span<const Scheme> schemes,
                                   const ExperimentConfig& base);

// Largest d with (d, d) in region(q).
Rational symmetric_corner(const QualityPair& q);

constexpr double kRegionTolerance = 0.1;
constexpr double kX1DofTolerance = 0.1;
constexpr double kX2DofTolerance = 0.05;
constexpr double kExponentTolerance = 0.05;

}  // namespace dcsit
