#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "matphi/linalg.hpp"
#include "matphi/random.hpp"

namespace matphi {

using Json = nlohmann::ordered_json;

inline constexpr std::size_t kMaxWitnesses = 5;

struct Violation {
  Json witness;
  double gap = 0.0;
};

// Outcome of one checked instance: the claim holds iff gap <= tol.
struct TrialOutcome {
  double gap = 0.0;
  double tol = 0.0;
  Json witness;  // filled only when the claim fails
  bool holds() const { return gap <= tol; }
};

struct CheckReport {
  std::string check;
  std::string phi;
  int d = 0;
  int n = -1;
  std::int64_t trials = 0;
  std::vector<Violation> violations;  // first kMaxWitnesses by trial order
  std::int64_t violation_count = 0;
  double max_gap = -kInf;
  std::uint64_t seed = 0;
  bool pass = true;
  std::optional<std::int64_t> samples;
  std::optional<double> stderr_value;
  Json details = Json::object();

  void record(const TrialOutcome& outcome);
  void absorb(const CheckReport& other);
};

Json to_json(const CheckReport& r);
CheckReport check_report_from_json(const Json& j);

Json matrix_to_json(const HermitianMatrix& m);
HermitianMatrix matrix_from_json(const Json& j);

// Runs `trials` independent trials, trial t drawing from make_rng(seed, name, t). The merged report
// does not depend on `jobs`.
CheckReport run_trials(const std::string& name, const std::string& phi, int d, std::int64_t trials,
                       std::uint64_t seed, int jobs,
                       const std::function<TrialOutcome(Rng&, std::int64_t)>& trial);

// Relative slack: rel·(1 + |a| + |b|).
inline double rel_tol(double rel, double a, double b = 0.0) {
  return rel * (1.0 + std::abs(a) + std::abs(b));
}

}  // namespace matphi
