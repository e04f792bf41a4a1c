#include "backbone/mechanism_curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace backbone {

MechanismCurve::MechanismCurve(std::vector<CurveNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 3) throw std::invalid_argument("MechanismCurve: need at least 3 nodes");
  if (nodes_.front().lambda != 0.0) {
    throw std::invalid_argument("MechanismCurve: first node must sit at lambda = 0");
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i].lambda > nodes_[i - 1].lambda)) {
      throw std::invalid_argument("MechanismCurve: nodes must be strictly increasing");
    }
  }
  for (const auto& n : nodes_) {
    if (!std::isfinite(n.value) || !std::isfinite(n.slope) || !std::isfinite(n.curvature)) {
      throw std::invalid_argument("MechanismCurve: non-finite node");
    }
  }
  nodes_.front().value = 0.0;
  nodes_.back().value = 0.0;
}

MechanismCurve::Eval MechanismCurve::evaluate(double lambda) const {
  const CurveNode& first = nodes_[1];
  if (lambda <= 0.0) return {0.0, first.value / first.lambda, first.curvature};
  if (lambda < first.lambda) {
    // below the smallest tabulated point the curve is extended through the origin
    const double s = first.value / first.lambda;
    return {s * lambda, s, first.curvature};
  }
  if (lambda >= lambda_star()) {
    const CurveNode& last = nodes_.back();
    return {0.0, last.slope, last.curvature};
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), lambda,
                                   [](double l, const CurveNode& n) { return l < n.lambda; });
  const CurveNode& a = *(it - 1);
  const CurveNode& b = *it;
  const double h = b.lambda - a.lambda;
  const double t = (lambda - a.lambda) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;

  // quintic Hermite basis
  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double h3 = 0.5 * t3 - t4 + 0.5 * t5;
  const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h5 = 10 * t3 - 15 * t4 + 6 * t5;

  const double d0 = -30 * t2 + 60 * t3 - 30 * t4;
  const double d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  const double d2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
  const double d3 = 1.5 * t2 - 4 * t3 + 2.5 * t4;
  const double d4 = -12 * t2 + 28 * t3 - 15 * t4;
  const double d5 = -d0;

  const double s0 = -60 * t + 180 * t2 - 120 * t3;
  const double s1 = -36 * t + 96 * t2 - 60 * t3;
  const double s2 = 1 - 9 * t + 18 * t2 - 10 * t3;
  const double s3 = 3 * t - 12 * t2 + 10 * t3;
  const double s4 = -24 * t + 84 * t2 - 60 * t3;
  const double s5 = -s0;

  const double hh = h * h;
  const double value = a.value * h0 + h * a.slope * h1 + hh * a.curvature * h2 +
                       hh * b.curvature * h3 + h * b.slope * h4 + b.value * h5;
  const double slope = (a.value * d0 + b.value * d5) / h + a.slope * d1 + b.slope * d4 +
                       h * (a.curvature * d2 + b.curvature * d3);
  const double curv = (a.value * s0 + b.value * s5) / hh + (a.slope * s1 + b.slope * s4) / h +
                      a.curvature * s2 + b.curvature * s3;
  return {value, slope, curv};
}

double MechanismCurve::operator()(double lambda) const { return evaluate(lambda).value; }
double MechanismCurve::derivative(double lambda) const { return evaluate(lambda).slope; }
double MechanismCurve::second_derivative(double lambda) const {
  return evaluate(lambda).curvature;
}

bool MechanismCurve::is_convex(double tol) const {
  double scale = 0.0;
  for (const auto& n : nodes_) scale = std::max(scale, std::abs(n.curvature));
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [&](const CurveNode& n) { return n.curvature >= -tol * scale; });
}

MechanismCurve MechanismCurve::scaled(double relative) const {
  std::vector<CurveNode> out = nodes_;
  for (auto& n : out) {
    n.value *= 1.0 + relative;
    n.slope *= 1.0 + relative;
    n.curvature *= 1.0 + relative;
  }
  return MechanismCurve(std::move(out));
}

}  // namespace backbone
