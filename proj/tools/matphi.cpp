#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "matphi/suites.hpp"

namespace {

using namespace matphi;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string command;
  std::string target;
  std::optional<std::uint64_t> seed;
  std::int64_t trials = 100;
  std::int64_t samples = 100000;
  std::optional<double> tol;
  std::optional<int> d;
  std::optional<int> n;
  std::vector<std::string> phis;
  std::string in;
  std::string out;
  int jobs = 1;
  std::string format = "json";
  int size = 2;
  int outputs = 2;
  std::optional<int> restarts;
  std::optional<int> steps;
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("MATPHI_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("MATPHI_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

Json read_json(const std::string& path) {
  if (path.empty()) throw ConfigError("this command needs --in FILE");
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(o.out);
  if (!os) throw ConfigError("cannot write " + o.out);
  os << text;
}

void emit_json(const Options& o, const Json& j) { emit(o, j.dump(2) + "\n"); }

std::string csv_of(const std::vector<CheckReport>& reports) {
  SuiteReport s;
  for (const auto& r : reports) s.reports.push_back({r, 0.0});
  return suite_to_csv(s);
}

// Checks-only output honouring --format; returns the exit code.
int emit_checks(const Options& o, Json head, const std::vector<CheckReport>& reports) {
  bool pass = true;
  Json arr = Json::array();
  for (const auto& r : reports) {
    pass = pass && r.pass;
    arr.push_back(to_json(r));
    if (!r.pass) std::cerr << "FAIL " << r.check << (r.phi.empty() ? "" : " " + r.phi) << "\n";
  }
  if (o.format == "csv") {
    emit(o, csv_of(reports));
  } else {
    head["checks"] = arr;
    head["pass"] = pass;
    emit_json(o, head);
  }
  return pass ? kExitPass : kExitFail;
}

std::vector<PhiFunction> phis_of(const Options& o) {
  std::vector<PhiFunction> out;
  for (const auto& s : o.phis.empty() ? default_phis() : o.phis) out.push_back(PhiFunction::parse(s));
  return out;
}

RunConfig config_of(const Options& o) {
  RunConfig c;
  c.seed = resolve_seed(o);
  c.trials = o.trials;
  c.samples = o.samples;
  c.tol = o.tol;
  c.d = o.d;
  c.n = o.n;
  c.phis = o.phis;
  c.jobs = o.jobs;
  return c;
}

int run_suite_command(const Options& o) {
  const SuiteReport r = run_suite(config_of(o), o.command);
  for (const auto& t : r.reports)
    if (!t.report.pass) {
      std::cerr << "FAIL " << t.report.check << (t.report.phi.empty() ? "" : " " + t.report.phi) << " d=" << t.report.d;
      if (t.report.n >= 0) std::cerr << " n=" << t.report.n;
      if (t.report.details.contains("error")) std::cerr << ": " << t.report.details["error"].get<std::string>();
      std::cerr << "\n";
    }
  if (o.format == "csv")
    emit(o, suite_to_csv(r));
  else
    emit_json(o, suite_to_json(r));
  return r.pass ? kExitPass : kExitFail;
}

// A law file gives H_Φ per Φ; a product-model file additionally runs subadditivity.
int entropy_command(const Options& o) {
  const Json in = read_json(o.in);
  const double rel = o.tol.value_or(kEntropyRelTol);
  Json values = Json::array();
  std::vector<CheckReport> checks;
  for (const PhiFunction& phi : phis_of(o)) {
    if (!phi.in_entropy_class()) throw ConfigError(phi.descriptor() + " is outside the entropy class");
    if (in.contains("laws")) {
      const ProductModel m = product_model_from_json(in);
      values.push_back({{"phi", phi.descriptor()}, {"entropy", phi_entropy(phi, m.distribution())}});
      checks.push_back(check_subadditivity(phi, m, rel));
    } else {
      values.push_back({{"phi", phi.descriptor()}, {"entropy", phi_entropy(phi, law_from_json(in))}});
    }
  }
  return emit_checks(o, Json{{"entropies", values}}, checks);
}

int fourier_command(const Options& o) {
  // Search output files carry the function under "witness".
  const Json in = read_json(o.in);
  const MatrixBooleanFunction f = function_from_json(in.contains("witness") ? in.at("witness") : in);
  f.validate(false);
  const FourierTable t = fourier_transform(f);
  Json coeffs = Json::array();
  for (std::size_t s = 0; s < t.coeffs.size(); ++s) {
    Json set = Json::array();
    for (int i = 0; i < f.n; ++i)
      if ((s >> i) & 1U) set.push_back(i + 1);
    coeffs.push_back({{"S", set}, {"coefficient", matrix_to_json(t.coeffs[s])}});
  }
  std::vector<CheckReport> checks{parseval_check(f)};
  bool psd = true;
  for (const auto& v : f.table) psd = psd && v.min_eigenvalue() >= -tol_spec(f.d);
  if (psd) {
    const double rel = o.tol.value_or(kConvexityRelTol);
    for (double p : {1.0, 1.5, 2.0}) {
      CheckReport r = check_bonami_beckner(f, p, rel);
      r.check += "[p=" + std::to_string(p).substr(0, 3) + "]";
      checks.push_back(r);
    }
    checks.push_back(check_log_sobolev(f, rel));
  }
  return emit_checks(o, Json{{"n", f.n}, {"d", f.d}, {"coefficients", coeffs}, {"dirichlet_energy", dirichlet_energy(f)}},
                     checks);
}

// χ of an ensemble; with a kernel embedded under "kernel", also the evolved χ and data processing.
int holevo_command(const Options& o) {
  const Json in = read_json(o.in);
  const CQEnsemble e = ensemble_from_json(in);
  e.validate();
  Json head{{"chi", holevo_chi(e)}};
  std::vector<CheckReport> checks;
  if (in.contains("kernel")) {
    const MarkovKernel k = kernel_from_json(in.at("kernel"));
    head["chi_after"] = holevo_chi(evolve_ensemble(e, k));
    for (const PhiFunction& phi : phis_of(o)) {
      if (!phi.in_entropy_class()) throw ConfigError(phi.descriptor() + " is outside the entropy class");
      checks.push_back(check_data_processing(e, k, phi, o.tol.value_or(kEntropyRelTol)));
    }
  }
  return emit_checks(o, head, checks);
}

int eta_command(const Options& o) {
  const Json in = read_json(o.in);
  const MarkovKernel k = kernel_from_json(in);
  std::vector<double> mu;
  if (in.contains("mu"))
    mu = in.at("mu").get<std::vector<double>>();
  else
    mu.assign(k.inputs(), 1.0 / static_cast<double>(k.inputs()));
  EtaOptions opt;
  opt.d = o.d.value_or(2);
  opt.seed = resolve_seed(o);
  opt.jobs = o.jobs;
  if (o.restarts) opt.restarts = *o.restarts;
  if (o.steps) opt.steps = *o.steps;
  const EtaResult r = eta_phi(mu, k, opt);
  Json witness = Json::array();
  for (const auto& w : r.witness) witness.push_back(matrix_to_json(w));
  emit_json(o, Json{{"eta_hat", r.eta_hat},
                    {"witness", witness},
                    {"method", r.method},
                    {"seed", opt.seed},
                    {"evaluations", r.evaluations},
                    {"lower_bound", r.lower_bound}});
  std::cerr << "eta_hat = " << r.eta_hat << " (lower bound, " << r.evaluations << " evaluations)\n";
  return kExitPass;
}

int lsi_search_command(const Options& o) {
  LsiSearchOptions opt;
  opt.d = o.d.value_or(2);
  opt.n = o.n.value_or(1);
  opt.seed = resolve_seed(o);
  opt.jobs = o.jobs;
  if (o.restarts) opt.restarts = *o.restarts;
  if (o.steps) opt.steps = *o.steps;
  if (opt.d < 1 || opt.n < 1 || opt.n > kMaxCubeDim || opt.restarts < 1 || opt.steps < 1)
    throw ConfigError("search needs d >= 1, 1 <= n <= 12, restarts >= 1, steps >= 1");
  const LsiSearchResult r = search_lsi_counterexample(opt);
  Json j{{"found", r.found},     {"verified", r.verified},         {"objective", r.objective},
         {"ent", r.ent},         {"energy", r.energy},             {"best_restart", r.best_restart},
         {"d", opt.d},           {"n", opt.n},                     {"restarts", opt.restarts},
         {"steps", opt.steps},   {"seed", opt.seed}};
  j["witness"] = r.found ? function_to_json(r.f) : Json(nullptr);
  emit_json(o, j);
  if (r.found)
    std::cerr << "found: Ent(f^2) - 2E(f) = " << r.objective << " at d=" << opt.d << ", n=" << opt.n << "\n";
  else
    std::cerr << "not found: best objective " << r.objective << " at d=" << opt.d << ", n=" << opt.n << "\n";
  return kExitPass;
}

int generate_command(const Options& o) {
  GenerateParams gp;
  gp.d = o.d.value_or(2);
  gp.n = o.n.value_or(2);
  gp.size = o.size;
  gp.outputs = o.outputs;
  emit_json(o, generate_instance(o.target, gp, resolve_seed(o)));
  return kExitPass;
}

int dispatch(const Options& o) {
  if (o.format != "json" && o.format != "csv") throw ConfigError("--format must be json or csv");
  const auto& suites = suite_names();
  const bool is_suite = std::find(suites.begin(), suites.end(), o.command) != suites.end();
  // "fourier" and "holevo" name both a suite and an instance command; --in selects the latter.
  if (o.command == "fourier" && !o.in.empty()) return fourier_command(o);
  if (o.command == "holevo" && !o.in.empty()) return holevo_command(o);
  if (!o.target.empty() && o.command != "search" && o.command != "generate")
    throw ConfigError("unexpected argument \"" + o.target + "\"");
  if (is_suite) return run_suite_command(o);
  if (o.command == "entropy") return entropy_command(o);
  if (o.command == "eta") return eta_command(o);
  if (o.command == "search") {
    if (o.target == "lsi-counterexample") return lsi_search_command(o);
    if (o.target == "eta") return eta_command(o);
    throw ConfigError("search needs lsi-counterexample or eta");
  }
  if (o.command == "generate") {
    if (o.target.empty()) throw ConfigError("generate needs a kind");
    return generate_command(o);
  }
  throw ConfigError("unknown command \"" + o.command + "\"");
}

std::string commands_help() {
  std::ostringstream os;
  os << "Commands:\n  suites:";
  for (const auto& s : suite_names()) os << ' ' << s;
  os << "\n  entropy --in LAW|MODEL      H_phi of a law; subadditivity on a product model\n"
        "  fourier --in FUNCTION       Fourier coefficients, Dirichlet energy, hypercontractivity checks\n"
        "  holevo --in ENSEMBLE        Holevo quantity; data processing when the file has a \"kernel\"\n"
        "  eta --in KERNEL             eta_hat lower bound (optional \"mu\" in the file, default uniform)\n"
        "  search lsi-counterexample|eta\n"
        "  generate KIND               ";
  for (const auto& k : instance_kinds()) os << k << ' ';
  os << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for matrix phi-entropy functionals"};
  app.footer(commands_help());
  Options o;
  app.add_option("command", o.command, "suite name or command")->required();
  app.add_option("target", o.target, "search kind or instance kind");
  app.add_option("--seed", o.seed, "master seed (falls back to MATPHI_SEED, then 0)");
  app.add_option("--trials", o.trials, "instances per check")->check(CLI::PositiveNumber);
  app.add_option("--samples", o.samples, "Monte Carlo samples for Gaussian checks")->check(CLI::PositiveNumber);
  app.add_option("--tol", o.tol, "relative tolerance override")->check(CLI::PositiveNumber);
  app.add_option("--d", o.d, "matrix dimension");
  app.add_option("--n", o.n, "number of inputs / cube dimension");
  app.add_option("--phi", o.phis, "power:P | x2 | xlogx | affine:a,b | x3 (repeatable)");
  app.add_option("--in", o.in, "input JSON file");
  app.add_option("--out", o.out, "output file (default stdout)");
  app.add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", o.format, "json or csv");
  app.add_option("--size", o.size, "support or alphabet size for generate");
  app.add_option("--outputs", o.outputs, "kernel output alphabet for generate");
  app.add_option("--restarts", o.restarts, "search restarts");
  app.add_option("--steps", o.steps, "search steps per restart");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  try {
    return dispatch(o);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const Json::exception& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kExitConfig;
  }
}
