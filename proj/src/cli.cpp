#include "dcsit/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "dcsit/dof_region.hpp"
#include "dcsit/errors.hpp"
#include "dcsit/phase_plan.hpp"
#include "dcsit/rational.hpp"
#include "dcsit/serialize.hpp"
#include "dcsit/sim_harness.hpp"

namespace dcsit {
namespace {

struct UsageError : Error {
  using Error::Error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw UsageError("empty entry in list \"" + text + "\"");
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  for (const auto& s : split_list(text)) out.push_back(parse_rational(s));
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw UsageError("not a number: \"" + s + "\"");
    out.push_back(v);
  }
  return out;
}

std::uint64_t parse_seed(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw UsageError("seed must be a non-negative integer, got \"" + s + "\"");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw UsageError("seed out of range: \"" + s + "\"");
  }
}

QualityPair read_quality(const std::string& a, const std::string& b, std::ostream& err) {
  const NormalizedQuality n = normalize_quality(parse_rational(a), parse_rational(b));
  if (n.clamped) {
    err << "warning: beta < alpha; using beta = alpha = " << to_string(n.q.alpha)
        << " (a delayed estimate is never worse than the current one)\n";
  }
  return n.q;
}

PlanOptions plan_options(const std::string& effective_beta) {
  PlanOptions o;
  if (effective_beta == "beta-dd") {
    o.degrade_to_beta_dd = true;
  } else if (effective_beta != "given") {
    throw UsageError("--effective-beta must be 'given' or 'beta-dd'");
  }
  return o;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw UsageError("failed writing " + path);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string decimal_pair(const DofPoint& p) { return "(" + to_decimal(p.d1, 6) + ", " + to_decimal(p.d2, 6) + ")"; }

void print_verdict(const SimulationReport& rep, std::ostream& os) {
  os << "route " << rep.route << ": d≈(" << fixed(rep.fitted_d1(), 2) << "," << fixed(rep.fitted_d2(), 2) << ")";
  if (rep.predicted_point) os << " vs " << decimal_pair(*rep.predicted_point);
  os << " " << (rep.all_pass() ? "PASS" : "FAIL") << "\n";
  for (const auto& c : rep.checks) {
    os << "  " << c.name << ": measured " << fixed(c.measured, 4) << ", expected " << fixed(c.expected, 4)
       << " ± " << fixed(c.tolerance, 2) << " " << (c.pass ? "PASS" : "FAIL") << "\n";
  }
  if (rep.regularized) os << "  note: " << rep.regularized << " noise covariances needed diagonal loading\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DoF regions and Monte Carlo checks for the two-user MISO broadcast channel with imperfect "
               "current and delayed CSIT",
               "dcsit-bc"};
  app.require_subcommand(1);

  std::string alpha, beta, format = "json", output, effective_beta = "given";

  auto* region_cmd = app.add_subcommand("region", "Print the achievable DoF region");
  region_cmd->add_option("--alpha", alpha, "Current CSIT quality (p/q or decimal)")->required();
  region_cmd->add_option("--beta", beta, "Delayed CSIT quality (p/q or decimal)")->required();
  region_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  region_cmd->add_option("--output", output, "Write to this file instead of stdout");

  int S = 4;
  std::string t1_text;
  auto* plan_cmd = app.add_subcommand("plan", "Plan the multi-phase scheme");
  plan_cmd->add_option("--alpha", alpha)->required();
  plan_cmd->add_option("--beta", beta)->required();
  plan_cmd->add_option("--S", S, "Number of phases (>= 2)");
  plan_cmd->add_option("--T1", t1_text, "First-phase duration; minimal integral value if omitted");
  plan_cmd->add_option("--effective-beta", effective_beta, "given or beta-dd")
      ->check(CLI::IsMember({"given", "beta-dd"}));
  plan_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  plan_cmd->add_option("--output", output);

  std::string scheme = "x1", snr_text, seed_text, owner = "1", target_text, plan_file;
  std::size_t trials = 10'000;
  int margin = 4;
  unsigned workers = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo experiment and check it");
  sim_cmd->add_option("--alpha", alpha);
  sim_cmd->add_option("--beta", beta);
  sim_cmd->add_option("--scheme", scheme, "x1, x2 or timeshare")->check(CLI::IsMember({"x1", "x2", "timeshare"}));
  auto* sim_S = sim_cmd->add_option("--S", S);
  auto* sim_T1 = sim_cmd->add_option("--T1", t1_text);
  auto* sim_owner = sim_cmd->add_option("--common-owner", owner, "x2: user owning the common symbol (1 or 2)")
                        ->check(CLI::IsMember({"1", "2"}));
  auto* sim_target = sim_cmd->add_option("--target", target_text, "timeshare: d1,d2");
  sim_cmd->add_option("--snr", snr_text, "Comma-separated SNR points in dB (default 30,50,70)");
  sim_cmd->add_option("--trials", trials)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", seed_text, "64-bit seed; falls back to DCSIT_BC_SEED, then 1");
  sim_cmd->add_option("--quant-margin", margin, "Extra quantizer bits per value")->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");
  auto* sim_plan = sim_cmd->add_option("--plan-file", plan_file, "Plan JSON from the plan subcommand");
  sim_cmd->add_option("--effective-beta", effective_beta)->check(CLI::IsMember({"given", "beta-dd"}));
  sim_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sim_cmd->add_option("--output", output, "Report file; verdict lines go to stdout when set");

  std::string beta_grid, alpha_grid;
  int steps = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Symmetric DoF curve or region family as CSV");
  sweep_cmd->add_option("--alpha", alpha);
  sweep_cmd->add_option("--beta", beta);
  sweep_cmd->add_option("--beta-grid", beta_grid, "Comma-separated beta values");
  sweep_cmd->add_option("--alpha-grid", alpha_grid, "Comma-separated alpha values");
  sweep_cmd->add_option("--steps", steps, "Uniform beta grid on [alpha, 1] with this many intervals")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--output", output);

  std::vector<std::string> argv_store{"dcsit-bc"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (region_cmd->parsed()) {
      const DofRegion r = region(read_quality(alpha, beta, err));
      emit(format == "csv" ? region_csv(r) : region_to_json(r).dump(2) + "\n", output, out);
      return kExitOk;
    }

    if (plan_cmd->parsed()) {
      const QualityPair q = read_quality(alpha, beta, err);
      const PlanOptions opts = plan_options(effective_beta);
      std::optional<Integer> T1;
      if (!t1_text.empty()) {
        const Rational t = parse_rational(t1_text);
        if (!is_integer(t) || t < 1) throw UsageError("--T1 must be a positive integer");
        T1 = numerator_of(t);
      }
      const Json doc = plan_document(q, opts, S, T1);
      if (doc["route"] != to_string(PlanRoute::multiphase)) {
        err << "note: route is " << doc["route"].get<std::string>()
            << "; no multi-phase plan exists for this pair, emitting the timeshare fallback\n";
      }
      if (format == "csv") {
        if (doc["plan"].is_null()) throw UsageError("csv output needs a multi-phase plan");
        emit(plan_csv(plan_from_json(doc)), output, out);
      } else {
        emit(doc.dump(2) + "\n", output, out);
      }
      return kExitOk;
    }

    if (sim_cmd->parsed()) {
      ExperimentConfig cfg;
      cfg.scheme = scheme == "x1" ? Scheme::x1 : scheme == "x2" ? Scheme::x2 : Scheme::timeshare;
      if (cfg.scheme == Scheme::x2 && (sim_S->count() || sim_T1->count()))
        throw UsageError("--S and --T1 apply to x1 only");
      if (cfg.scheme != Scheme::x2 && sim_owner->count()) throw UsageError("--common-owner applies to x2 only");
      if (cfg.scheme != Scheme::timeshare && sim_target->count()) throw UsageError("--target applies to timeshare only");
      if (sim_plan->count() && cfg.scheme != Scheme::x1) throw UsageError("--plan-file applies to x1 only");
      if (sim_plan->count() && (sim_S->count() || sim_T1->count()))
        throw UsageError("--plan-file fixes S and T1; drop --S/--T1");

      const PlanOptions opts = plan_options(effective_beta);
      cfg.degrade_to_beta_dd = opts.degrade_to_beta_dd;
      if (sim_plan->count()) {
        std::ifstream f(plan_file, std::ios::binary);
        if (!f) throw UsageError("cannot read " + plan_file);
        Json doc;
        try {
          doc = Json::parse(f);
        } catch (const nlohmann::json::exception& e) {
          throw UsageError(plan_file + ": " + e.what());
        }
        const PhasePlan plan = plan_from_json(doc);
        if (!alpha.empty() || !beta.empty()) {
          if (alpha.empty() || beta.empty()) throw UsageError("give both --alpha and --beta or neither");
          if (read_quality(alpha, beta, err) != plan.requested)
            throw UsageError("--alpha/--beta disagree with the plan file");
        }
        cfg.q = plan.requested;
        cfg.S = plan.S;
        cfg.T1 = plan.phases.front().duration;
        cfg.plan = plan;
      } else {
        if (alpha.empty() || beta.empty()) throw UsageError("--alpha and --beta are required");
        cfg.q = read_quality(alpha, beta, err);
        cfg.S = S;
        if (!t1_text.empty()) {
          const Rational t = parse_rational(t1_text);
          if (!is_integer(t) || t < 1) throw UsageError("--T1 must be a positive integer");
          cfg.T1 = numerator_of(t);
        }
      }
      if (!snr_text.empty()) cfg.snr_db = parse_double_list(snr_text);
      cfg.trials = trials;
      cfg.quant_margin_bits = margin;
      cfg.workers = workers;
      cfg.owner = owner == "2" ? CommonOwner::user2 : CommonOwner::user1;
      if (!target_text.empty()) {
        const auto t = parse_rational_list(target_text);
        if (t.size() != 2) throw UsageError("--target takes d1,d2");
        cfg.target = DofPoint{t[0], t[1]};
      }
      if (!seed_text.empty()) {
        cfg.seed = parse_seed(seed_text);
      } else if (const char* env = std::getenv("DCSIT_BC_SEED"); env && *env) {
        cfg.seed = parse_seed(env);
      }

      const SimulationReport rep = run_experiment(cfg);
      emit(format == "csv" ? report_csv(rep) : report_to_json(rep).dump(2) + "\n", output, out);
      print_verdict(rep, output.empty() ? err : out);
      return rep.all_pass() ? kExitOk : kExitCheckFailed;
    }

    if (sweep_cmd->parsed()) {
      std::string csv;
      if (!alpha_grid.empty()) {
        if (beta.empty() || !alpha.empty() || !beta_grid.empty() || steps)
          throw UsageError("region family sweep takes --alpha-grid with --beta only");
        const Rational b = parse_rational(beta);
        csv = "alpha,beta,beta_dd,optimal,corner,d1,d2\r\n";
        for (const auto& a : parse_rational_list(alpha_grid)) {
          const DofRegion r = region(read_quality(to_string(a), to_string(b), err));
          for (std::size_t i = 0; i < r.corners.size(); ++i) {
            csv += to_decimal(r.q.alpha) + "," + to_decimal(r.q.beta) + "," + to_decimal(r.beta_dd) + "," +
                   (r.optimal ? "true" : "false") + "," + std::to_string(i) + "," + to_decimal(r.corners[i].d1) +
                   "," + to_decimal(r.corners[i].d2) + "\r\n";
          }
        }
      } else {
        if (alpha.empty() || !beta.empty()) throw UsageError("symmetric sweep takes --alpha with --beta-grid or --steps");
        if (beta_grid.empty() == (steps == 0)) throw UsageError("give exactly one of --beta-grid and --steps");
        const Rational a = parse_rational(alpha);
        std::vector<Rational> grid;
        if (!beta_grid.empty()) {
          grid = parse_rational_list(beta_grid);
        } else {
          for (int k = 0; k <= steps; ++k) grid.push_back(a + (1 - a) * Rational(k, steps));
        }
        csv = "alpha,beta,beta_dd,symmetric_dof,symmetric_dof_exact\r\n";
        for (const auto& s : symmetric_dof_sweep(a, grid)) {
          const Rational bdd = beta_dd({a, s.beta});
          csv += to_decimal(a) + "," + to_decimal(s.beta) + "," + to_decimal(bdd) + "," + to_decimal(s.dof) + "," +
                 csv_field(to_string(s.dof)) + "\r\n";
        }
      }
      emit(csv, output, out);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace dcsit
