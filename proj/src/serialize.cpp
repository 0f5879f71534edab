#include "dcsit/serialize.hpp"

#include <cstdio>
#include <limits>
#include <sstream>

#include "dcsit/errors.hpp"

namespace dcsit {
namespace {

Json integer_to_json(const Integer& n) {
  if (n >= std::numeric_limits<std::int64_t>::min() && n <= std::numeric_limits<std::int64_t>::max())
    return n.convert_to<std::int64_t>();
  return n.str();
}

Integer integer_from_json(const Json& j) {
  if (j.is_number_integer()) return j.is_number_unsigned() ? Integer(j.get<std::uint64_t>()) : Integer(j.get<std::int64_t>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const std::size_t start = !s.empty() && s[0] == '-' ? 1 : 0;
    if (s.size() == start || s.find_first_not_of("0123456789", start) != std::string::npos)
      throw IntegrityError("not an integer: \"" + s + "\"");
    return Integer(s);
  }
  throw IntegrityError("expected an integer, got " + j.dump());
}

Json quality_to_json(const QualityPair& q) {
  return Json{{"alpha", rational_to_json(q.alpha)}, {"beta", rational_to_json(q.beta)}};
}

QualityPair quality_from_json(const Json& j) {
  return {rational_from_json(j.at("alpha")), rational_from_json(j.at("beta"))};
}

Json stream_to_json(const std::optional<StreamSpec>& s) {
  if (!s) return nullptr;
  return Json{{"rate", rational_to_json(s->rate)}, {"power_exp", rational_to_json(s->power_exp)}};
}

std::optional<StreamSpec> stream_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return StreamSpec{rational_from_json(j.at("rate")), rational_from_json(j.at("power_exp"))};
}

const char* const kStreams[5] = {"c", "a", "a_prime", "b", "b_prime"};

std::optional<StreamSpec> PhaseSpec::*const kStreamMembers[5] = {&PhaseSpec::c, &PhaseSpec::a, &PhaseSpec::a_prime,
                                                                  &PhaseSpec::b, &PhaseSpec::b_prime};

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\r\n";
}

Json slope_to_json(const SlopeSummary& s) {
  Json j{{"name", s.name},
         {"slope", s.fit.slope},
         {"intercept", s.fit.intercept},
         {"half_width", s.fit.half_width},
         {"mc_half_width", s.mc_half_width}};
  j["predicted"] = s.predicted ? Json(*s.predicted) : Json(nullptr);
  return j;
}

Json exponent_to_json(const ExponentRow& r) {
  return Json{{"term", r.term},
              {"user", r.user},
              {"predicted", rational_to_json(r.predicted)},
              {"mean_power", r.mean_power},
              {"fitted", r.fitted},
              {"pass", r.pass}};
}

}  // namespace

Json rational_to_json(const Rational& r) { return Json::array({integer_to_json(numerator_of(r)), integer_to_json(denominator_of(r))}); }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const DomainError& e) {
      throw IntegrityError(e.what());
    }
  }
  if (!j.is_array() || j.size() != 2) throw IntegrityError("expected [numerator, denominator], got " + j.dump());
  const Integer num = integer_from_json(j[0]);
  const Integer den = integer_from_json(j[1]);
  if (den == 0) throw IntegrityError("zero denominator in " + j.dump());
  return Rational(num, den);
}

Json point_to_json(const DofPoint& p) { return Json::array({rational_to_json(p.d1), rational_to_json(p.d2)}); }

Json region_to_json(const DofRegion& r) {
  Json corners = Json::array();
  for (const auto& c : r.corners) corners.push_back(point_to_json(c));
  Json ineq = Json::array();
  for (const auto& f : r.inequalities) {
    ineq.push_back(Json{{"c1", rational_to_json(f.c1)},
                        {"c2", rational_to_json(f.c2)},
                        {"rhs", rational_to_json(f.rhs)},
                        {"text", f.describe()}});
  }
  return Json{{"schema", kRegionSchema},
              {"alpha", rational_to_json(r.q.alpha)},
              {"beta", rational_to_json(r.q.beta)},
              {"beta_dd", rational_to_json(r.beta_dd)},
              {"optimal", r.optimal},
              {"corners", corners},
              {"inequalities", ineq}};
}

Json plan_to_json(const PhasePlan& plan) {
  Json phases = Json::array();
  Json durations = Json::array();
  for (const auto& ph : plan.phases) {
    Json streams = Json::object();
    for (std::size_t k = 0; k < 5; ++k) streams[kStreams[k]] = stream_to_json(ph.*kStreamMembers[k]);
    phases.push_back(Json{{"duration", integer_to_json(ph.duration)},
                          {"streams", streams},
                          {"quant_prelog", rational_to_json(ph.quant_prelog)}});
    durations.push_back(integer_to_json(ph.duration));
  }
  return Json{{"requested", quality_to_json(plan.requested)},
              {"q", quality_to_json(plan.q)},
              {"S", plan.S},
              {"xi", rational_to_json(plan.xi)},
              {"zeta", rational_to_json(plan.zeta)},
              {"durations", durations},
              {"phases", phases}};
}

PhasePlan plan_from_json(const Json& doc) {
  try {
    const Json& j = doc.contains("plan") ? doc.at("plan") : doc;
    if (j.is_null()) throw IntegrityError("document holds no multi-phase plan");
    PhasePlan plan;
    plan.requested = quality_from_json(j.at("requested"));
    plan.q = quality_from_json(j.at("q"));
    plan.S = j.at("S").get<int>();
    plan.xi = rational_from_json(j.at("xi"));
    plan.zeta = rational_from_json(j.at("zeta"));
    for (const auto& p : j.at("phases")) {
      PhaseSpec ph;
      ph.duration = integer_from_json(p.at("duration"));
      const Json& streams = p.at("streams");
      for (std::size_t k = 0; k < 5; ++k) ph.*kStreamMembers[k] = stream_from_json(streams.at(kStreams[k]));
      ph.quant_prelog = rational_from_json(p.at("quant_prelog"));
      plan.phases.push_back(std::move(ph));
    }

    const QualityPair& q = plan.q;
    if (plan.S < 2 || plan.phases.size() != static_cast<std::size_t>(plan.S))
      throw IntegrityError("phase count does not match S");
    if (!(q.alpha >= 0 && q.alpha < q.beta && q.beta < 1))
      throw IntegrityError("planning pair must satisfy 0 <= alpha < beta < 1");
    if (plan.xi != 2 * (q.beta - q.alpha) / (1 - q.beta) || plan.zeta != 2 * (q.beta - q.alpha) / (1 - q.alpha))
      throw IntegrityError("xi/zeta disagree with the planning pair");
    for (std::size_t s = 0; s < plan.phases.size(); ++s) {
      const PhaseSpec& ph = plan.phases[s];
      if (ph.duration <= 0) throw IntegrityError("phase " + std::to_string(s + 1) + " has non-positive duration");
      if (!ph.c || !ph.a || !ph.b) throw IntegrityError("phase " + std::to_string(s + 1) + " lacks a required stream");
      const bool last = s + 1 == plan.phases.size();
      if (last != !ph.a_prime || last != !ph.b_prime)
        throw IntegrityError("primed streams must appear in every phase but the last");
      if (s + 1 < plan.phases.size()) {
        const PhaseSpec& next = plan.phases[s + 1];
        if (Rational(next.duration) * next.c->rate != Rational(ph.duration) * ph.quant_prelog)
          throw IntegrityError("feed-forward budget of phase " + std::to_string(s + 1) + " is not conserved");
      }
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed plan: ") + e.what());
  }
}

Json timeshare_to_json(const TimesharePlan& ts) {
  Json comps = Json::array();
  for (const auto& c : ts.components) {
    comps.push_back(Json{{"scheme", to_string(c.scheme)},
                         {"corner", point_to_json(c.corner)},
                         {"weight", rational_to_json(c.weight)}});
  }
  return Json{{"target", point_to_json(ts.target)}, {"components", comps}};
}

Json plan_document(const QualityPair& requested, const PlanOptions& options, int S, std::optional<Integer> T1) {
  const QualityPair q = normalize_quality(requested.alpha, requested.beta).q;
  const PlanRoute route = route_for(q, options);
  const DofPoint asym = asymptotic_dof(q);
  Json doc{{"schema", kPlanSchema},
           {"requested", quality_to_json(q)},
           {"planning", quality_to_json(planning_quality(q, options))},
           {"degrade_to_beta_dd", options.degrade_to_beta_dd},
           {"route", to_string(route)}};
  if (route == PlanRoute::multiphase) {
    const PhasePlan plan = plan_x1(q, S, T1, options);
    const DofPoint d = plan_dof(plan);
    doc["plan"] = plan_to_json(plan);
    doc["timeshare"] = nullptr;
    doc["dof"] = point_to_json(d);
    doc["dof_closed_form"] = rational_to_json(plan_dof_closed_form(plan));
    doc["asymptotic_dof"] = point_to_json(asym);
    doc["gap"] = rational_to_json(asym.d1 - d.d1);
  } else {
    const Rational d = symmetric_corner(q);
    doc["plan"] = nullptr;
    doc["timeshare"] = timeshare_to_json(plan_timeshare(q, {d, d}));
    doc["dof"] = point_to_json({d, d});
    doc["dof_closed_form"] = nullptr;
    doc["asymptotic_dof"] = point_to_json(asym);
    doc["gap"] = rational_to_json(asym.d1 - d);
  }
  return doc;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j{{"alpha", rational_to_json(cfg.q.alpha)},
         {"beta", rational_to_json(cfg.q.beta)},
         {"scheme", to_string(cfg.scheme)}};
  if (cfg.scheme == Scheme::x1 || cfg.scheme == Scheme::timeshare) {
    j["S"] = cfg.S;
    j["T1"] = cfg.T1 ? integer_to_json(*cfg.T1) : Json(nullptr);
    j["plan_supplied"] = cfg.plan.has_value();
  }
  if (cfg.scheme == Scheme::x2) j["common_owner"] = to_string(cfg.owner);
  if (cfg.scheme == Scheme::timeshare) j["target"] = cfg.target ? point_to_json(*cfg.target) : Json(nullptr);
  j["snr_db"] = cfg.snr_db;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["quant_margin_bits"] = cfg.quant_margin_bits;
  j["degrade_to_beta_dd"] = cfg.degrade_to_beta_dd;
  return j;
}

Json report_to_json(const SimulationReport& rep) {
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    Json m = Json::object();
    for (const auto& [k, v] : r.metrics) m[k] = v;
    rows.push_back(Json{{"snr_db", r.snr_db}, {"log2_snr", r.log2_snr}, {"metrics", m}});
  }
  Json slopes = Json::array();
  for (const auto& s : rep.slopes) slopes.push_back(slope_to_json(s));
  Json ladder = Json::array();
  for (const auto& r : rep.power_ladder) ladder.push_back(exponent_to_json(r));
  Json exps = Json::array();
  for (const auto& r : rep.exponents) exps.push_back(exponent_to_json(r));
  Json checks = Json::array();
  for (const auto& c : rep.checks) {
    checks.push_back(Json{{"name", c.name},
                          {"measured", c.measured},
                          {"expected", c.expected},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass}});
  }
  const Rational corner = symmetric_corner(rep.config.q);
  Json predicted{{"plan_dof", rep.plan_dof ? point_to_json(*rep.plan_dof) : Json(nullptr)},
                 {"asymptotic_dof", point_to_json(rep.asymptotic_dof)},
                 {"region_symmetric_corner", point_to_json({corner, corner})},
                 {"point", rep.predicted_point ? point_to_json(*rep.predicted_point) : Json(nullptr)}};
  return Json{{"schema", kReportSchema},
              {"config", config_to_json(rep.config)},
              {"route", rep.route},
              {"plan", rep.plan ? plan_to_json(*rep.plan) : Json(nullptr)},
              {"timeshare", rep.timeshare ? timeshare_to_json(*rep.timeshare) : Json(nullptr)},
              {"predicted", predicted},
              {"rows", rows},
              {"slopes", slopes},
              {"power_ladder", ladder},
              {"exponents", exps},
              {"regularized_noise_covariances", rep.regularized},
              {"checks", checks},
              {"pass", rep.all_pass()}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string region_csv(const DofRegion& r) {
  std::string out = csv_line({"index", "d1", "d2", "d1_exact", "d2_exact"});
  for (std::size_t i = 0; i < r.corners.size(); ++i) {
    const auto& c = r.corners[i];
    out += csv_line({std::to_string(i), to_decimal(c.d1), to_decimal(c.d2), to_string(c.d1), to_string(c.d2)});
  }
  return out;
}

std::string report_csv(const SimulationReport& rep) {
  if (rep.rows.empty()) return csv_line({"snr_db", "log2_snr"});
  std::vector<std::string> header{"snr_db", "log2_snr"};
  for (const auto& [k, v] : rep.rows.front().metrics) header.push_back(k);
  std::string out = csv_line(header);
  for (const auto& r : rep.rows) {
    std::vector<std::string> f{number(r.snr_db), number(r.log2_snr)};
    for (const auto& [k, v] : r.metrics) f.push_back(number(v));
    out += csv_line(f);
  }
  return out;
}

std::string plan_csv(const PhasePlan& plan) {
  std::vector<std::string> header{"phase", "duration"};
  for (const char* s : kStreams) {
    header.push_back(std::string("rate_") + s);
    header.push_back(std::string("power_exp_") + s);
  }
  header.push_back("quant_prelog");
  std::string out = csv_line(header);
  for (std::size_t i = 0; i < plan.phases.size(); ++i) {
    const PhaseSpec& ph = plan.phases[i];
    std::vector<std::string> f{std::to_string(i + 1), ph.duration.str()};
    for (std::size_t k = 0; k < 5; ++k) {
      const auto& s = ph.*kStreamMembers[k];
      f.push_back(s ? to_decimal(s->rate) : "");
      f.push_back(s ? to_decimal(s->power_exp) : "");
    }
    f.push_back(to_decimal(ph.quant_prelog));
    out += csv_line(f);
  }
  return out;
}

}  // namespace dcsit
