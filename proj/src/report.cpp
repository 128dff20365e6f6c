#include "matphi/report.hpp"

#include <cmath>

#include "matphi/parallel.hpp"

namespace matphi {

void CheckReport::record(const TrialOutcome& outcome) {
  ++trials;
  if (!(outcome.gap <= max_gap)) max_gap = outcome.gap;
  if (!outcome.holds()) {
    pass = false;
    ++violation_count;
    if (violations.size() < kMaxWitnesses) violations.push_back({outcome.witness, outcome.gap});
  }
}

void CheckReport::absorb(const CheckReport& other) {
  trials += other.trials;
  if (!(other.max_gap <= max_gap)) max_gap = other.max_gap;
  violation_count += other.violation_count;
  for (const auto& v : other.violations)
    if (violations.size() < kMaxWitnesses) violations.push_back(v);
  pass = pass && other.pass;
}

namespace {

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json to_json(const CheckReport& r) {
  Json j;
  j["check"] = r.check;
  j["phi"] = r.phi;
  j["d"] = r.d;
  if (r.n >= 0) j["n"] = r.n;
  j["trials"] = r.trials;
  Json v = Json::array();
  for (const auto& x : r.violations) v.push_back({{"witness", x.witness}, {"gap", number_or_null(x.gap)}});
  j["violations"] = v;
  j["violation_count"] = r.violation_count;
  j["max_gap"] = number_or_null(r.trials > 0 ? r.max_gap : 0.0);
  j["seed"] = r.seed;
  j["pass"] = r.pass;
  if (r.samples) j["samples"] = *r.samples;
  if (r.stderr_value) j["stderr"] = number_or_null(*r.stderr_value);
  if (!r.details.empty()) j["details"] = r.details;
  return j;
}

CheckReport check_report_from_json(const Json& j) {
  CheckReport r;
  r.check = j.at("check").get<std::string>();
  r.phi = j.at("phi").get<std::string>();
  r.d = j.at("d").get<int>();
  r.n = j.value("n", -1);
  r.trials = j.at("trials").get<std::int64_t>();
  for (const auto& v : j.at("violations"))
    r.violations.push_back({v.at("witness"), v.at("gap").is_null() ? kInf : v.at("gap").get<double>()});
  r.violation_count = j.value("violation_count", static_cast<std::int64_t>(r.violations.size()));
  r.max_gap = j.at("max_gap").is_null() ? kInf : j.at("max_gap").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.pass = j.at("pass").get<bool>();
  if (j.contains("samples")) r.samples = j.at("samples").get<std::int64_t>();
  if (j.contains("stderr") && !j.at("stderr").is_null()) r.stderr_value = j.at("stderr").get<double>();
  if (j.contains("details")) r.details = j.at("details");
  return r;
}

Json matrix_to_json(const HermitianMatrix& m) {
  const int d = m.dim();
  std::vector<double> re(static_cast<std::size_t>(d) * d);
  std::vector<double> im(re.size());
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      re[static_cast<std::size_t>(i) * d + k] = m(i, k).real();
      im[static_cast<std::size_t>(i) * d + k] = m(i, k).imag();
    }
  return Json{{"d", d}, {"re", re}, {"im", im}};
}

HermitianMatrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("d") || !j.contains("re"))
    throw ConfigError("matrix object needs \"d\" and \"re\"");
  const int d = j.at("d").get<int>();
  if (d < 1) throw ConfigError("matrix dimension must be positive");
  const auto re = j.at("re").get<std::vector<double>>();
  std::vector<double> im(re.size(), 0.0);
  if (j.contains("im")) im = j.at("im").get<std::vector<double>>();
  const std::size_t want = static_cast<std::size_t>(d) * d;
  if (re.size() != want || im.size() != want) throw ConfigError("matrix needs d*d entries in re and im");
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      m(i, k) = Complex(re[static_cast<std::size_t>(i) * d + k], im[static_cast<std::size_t>(i) * d + k]);
  return HermitianMatrix(m);
}

CheckReport run_trials(const std::string& name, const std::string& phi, int d, std::int64_t trials,
                       std::uint64_t seed, int jobs,
                       const std::function<TrialOutcome(Rng&, std::int64_t)>& trial) {
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(std::max<std::int64_t>(trials, 0)));
  parallel_for(trials, jobs, [&](std::int64_t t) {
    Rng rng = make_rng(seed, name, static_cast<std::uint64_t>(t));
    outcomes[static_cast<std::size_t>(t)] = trial(rng, t);
  });
  CheckReport r;
  r.check = name;
  r.phi = phi;
  r.d = d;
  r.seed = seed;
  for (const auto& o : outcomes) r.record(o);
  return r;
}

}  // namespace matphi
