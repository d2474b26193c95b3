#pragma once

// Utilities on (0, inf) satisfying the Inada conditions, with their inverse
// marginal I = (U')^-1 and convex conjugate V(y) = sup_x [U(x) - x y].
//
//   log       U = ln x        I(y) = 1/y             V(y) = -ln y - 1
//   power(p)  U = x^p / p     I(y) = y^(1/(p-1))     V(y) = -((p-1)/p) y^(p/(p-1))
//
// with p in (-inf, 1) \ {0}. Exponential utility -e^-x lives on all of R
// (its conjugate would be -y + y ln y) and is not supported.

#include <string>
#include <string_view>

namespace fm {

class Utility {
 public:
  enum class Kind { log, power };

  static Utility log() noexcept { return Utility(Kind::log, 0.0); }
  /// Throws ModelError unless p < 1 and p != 0.
  static Utility power(double p);
  /// "log" or "power:P".
  static Utility parse(std::string_view spec);

  Kind kind() const noexcept { return kind_; }
  double exponent() const noexcept { return p_; }
  std::string name() const;

  double value(double x) const;             // U
  double marginal(double x) const;          // U'
  double inverse_marginal(double y) const;  // I
  double conjugate(double y) const;         // V
  double conjugate_slope(double y) const;   // V' = -I
  double conjugate_curvature(double y) const;  // V''

 private:
  Utility(Kind k, double p) noexcept : kind_(k), p_(p) {}
  // y^a, evaluated through exp(a ln y) when the exponent is large.
  double power_of(double y, double a) const;

  Kind kind_;
  double p_;
};

}  // namespace fm
