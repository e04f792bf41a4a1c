#pragma once

#include <span>
#include <vector>

namespace backbone {

/// One tabulation point of a mechanism known only numerically.
struct CurveNode {
  double lambda;
  double value;
  double slope;
  double curvature;
};

/// A convex mechanism on [0, lambda*] given by a table of values and first two
/// derivatives, interpolated piecewise by quintic Hermite polynomials. Used for
/// the exit mechanism psi_D, which has no closed form.
class MechanismCurve {
 public:
  /// Nodes must be strictly increasing in lambda, start at lambda = 0 and end at
  /// lambda*; both endpoint values are forced to zero.
  explicit MechanismCurve(std::vector<CurveNode> nodes);

  double lambda_star() const noexcept { return nodes_.back().lambda; }

  double operator()(double lambda) const;
  double derivative(double lambda) const;
  double second_derivative(double lambda) const;

  std::span<const CurveNode> nodes() const noexcept { return nodes_; }

  /// True when every node curvature is >= -tol (relative to the largest).
  bool is_convex(double tol = 1e-8) const;

  /// The same curve multiplied by (1 + relative); endpoints stay at zero.
  MechanismCurve scaled(double relative) const;

 private:
  struct Eval {
    double value;
    double slope;
    double curvature;
  };
  Eval evaluate(double lambda) const;

  std::vector<CurveNode> nodes_;
};

}  // namespace backbone
