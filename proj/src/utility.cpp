#include "fairmarket/utility.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "fairmarket/errors.hpp"

namespace fm {

Utility Utility::power(double p) {
  if (!std::isfinite(p) || !(p < 1.0) || p == 0.0) {
    throw ModelError("power utility needs an exponent p < 1 with p != 0");
  }
  return Utility(Kind::power, p);
}

Utility Utility::parse(std::string_view spec) {
  if (spec == "log") return log();
  constexpr std::string_view prefix = "power:";
  if (spec.substr(0, prefix.size()) == prefix) {
    const std::string tail(spec.substr(prefix.size()));
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tail.size()) throw ModelError("cannot parse power exponent in '" + std::string(spec) + "'");
    return power(p);
  }
  throw ModelError("unknown utility '" + std::string(spec) + "' (expected log or power:P)");
}

std::string Utility::name() const {
  if (kind_ == Kind::log) return "log";
  std::ostringstream os;
  os.precision(17);
  os << "power:" << p_;
  return os.str();
}

double Utility::power_of(double y, double a) const {
  if (std::fabs(a) > 8.0) {
    const double e = a * std::log(y);
    if (e > 709.0) return std::numeric_limits<double>::infinity();
    return std::exp(e);
  }
  return std::pow(y, a);
}

double Utility::value(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  if (kind_ == Kind::log) return std::log(x);
  return std::pow(x, p_) / p_;
}

double Utility::marginal(double x) const {
  if (kind_ == Kind::log) return 1.0 / x;
  return std::pow(x, p_ - 1.0);
}

double Utility::inverse_marginal(double y) const {
  if (kind_ == Kind::log) return 1.0 / y;
  return power_of(y, 1.0 / (p_ - 1.0));
}

double Utility::conjugate(double y) const {
  if (!(y > 0.0)) return std::numeric_limits<double>::infinity();
  if (kind_ == Kind::log) return -std::log(y) - 1.0;
  return -((p_ - 1.0) / p_) * power_of(y, p_ / (p_ - 1.0));
}

double Utility::conjugate_slope(double y) const { return -inverse_marginal(y); }

double Utility::conjugate_curvature(double y) const {
  if (kind_ == Kind::log) return 1.0 / (y * y);
  const double a = 1.0 / (p_ - 1.0);
  return -a * power_of(y, a - 1.0);
}

}  // namespace fm
