#include "matphi/phi.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace matphi {

namespace {

double parse_number(std::string_view s, std::string_view whole) {
  std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size())
    throw ConfigError("cannot parse number in phi descriptor '" + std::string(whole) + "'");
  return v;
}

}  // namespace

PhiFunction PhiFunction::affine(double alpha, double beta) { return {Kind::affine, 1.0, alpha, beta}; }

PhiFunction PhiFunction::power(double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw InvalidExponent("power exponent must lie in [1, 2]");
  return {Kind::power, p, 0.0, 0.0};
}

PhiFunction PhiFunction::xlogx() { return {Kind::xlogx, 1.0, 0.0, 0.0}; }

PhiFunction PhiFunction::cubic() { return {Kind::cubic, 3.0, 0.0, 0.0}; }

PhiFunction PhiFunction::parse(std::string_view s) {
  if (s == "xlogx") return xlogx();
  if (s == "x2") return power(2.0);
  if (s == "x3" || s == "cubic") return cubic();
  if (s.starts_with("power:")) {
    try {
      return power(parse_number(s.substr(6), s));
    } catch (const InvalidExponent& e) {
      throw ConfigError(e.what());
    }
  }
  if (s.starts_with("affine:")) {
    const auto rest = s.substr(7);
    const auto comma = rest.find(',');
    if (comma == std::string_view::npos) throw ConfigError("affine needs 'affine:a,b'");
    return affine(parse_number(rest.substr(0, comma), s), parse_number(rest.substr(comma + 1), s));
  }
  throw ConfigError("unknown phi descriptor '" + std::string(s) + "'");
}

std::string PhiFunction::descriptor() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::affine:
      os << "affine:" << alpha_ << ',' << beta_;
      break;
    case Kind::power:
      os << "power:" << p_;
      break;
    case Kind::xlogx:
      os << "xlogx";
      break;
    case Kind::cubic:
      os << "x3";
      break;
  }
  return os.str();
}

double PhiFunction::derivative(int k, double x) const {
  switch (kind_) {
    case Kind::affine:
      return k == 0 ? alpha_ * x + beta_ : (k == 1 ? alpha_ : 0.0);
    case Kind::power: {
      double c = 1.0;
      for (int j = 0; j < k; ++j) c *= (p_ - j);
      if (c == 0.0) return 0.0;
      if (x == 0.0) {
        if (p_ - k > 0) return 0.0;
        if (p_ - k == 0) return c;
        return c > 0 ? kInf : -kInf;
      }
      return c * std::pow(x, p_ - k);
    }
    case Kind::xlogx: {
      if (k == 0) return x > 0 ? x * std::log(x) : 0.0;
      if (k == 1) return std::log(x) + 1.0;
      double c = 1.0;
      for (int j = 2; j <= k - 2; ++j) c *= j;
      return ((k % 2 == 0) ? c : -c) / std::pow(x, k - 1);
    }
    case Kind::cubic:
      switch (k) {
        case 0:
          return x * x * x;
        case 1:
          return 3 * x * x;
        case 2:
          return 6 * x;
        case 3:
          return 6.0;
        default:
          return 0.0;
      }
  }
  return 0.0;
}

bool PhiFunction::is_affine() const {
  return kind_ == Kind::affine || (kind_ == Kind::power && p_ == 1.0);
}

SpectralInterval PhiFunction::domain() const {
  return kind_ == Kind::affine ? SpectralInterval::real_line() : SpectralInterval::nonnegative();
}

ScalarFunction PhiFunction::phi() const {
  ScalarFunction f;
  f.max_order = 5;
  f.domain = domain();
  f.eval = [self = *this](int k, double x) { return self.derivative(k, x); };
  return f;
}

ScalarFunction PhiFunction::psi() const {
  ScalarFunction f;
  f.max_order = 4;
  f.domain = domain();
  // Ψ' = Φ'' blows up at zero for xlogx and non-integer powers.
  if (kind_ == Kind::xlogx || (kind_ == Kind::power && p_ != 1.0 && p_ != 2.0))
    f.domain = SpectralInterval::positive();
  f.eval = [self = *this](int k, double x) { return self.derivative(k + 1, x); };
  return f;
}

}  // namespace matphi
