#include "backbone/waves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "backbone/errors.hpp"
#include "backbone/ode.hpp"

namespace backbone {

namespace {

// Integrates v'' = 2(psi(v) + c v') in two charts: the value v itself while
// v < lambda*/2 and the defect d = lambda* - v above, where psi is evaluated
// through the shifted mechanism so that nothing cancels near the saddle.
class SplitFlow {
 public:
  struct State {
    bool defect;
    double y0;  // v or d
    double y1;  // v' or d'
  };

  SplitFlow(const BranchingMechanism& mech, const LambdaStar& lstar, double c)
      : mech_(mech), shifted_(mech, lstar), ls_(lstar.value), c_(c),
        value_solver_(options(1e-300)), defect_solver_(options(1e-24 * lstar.value)) {}

  double value(const State& s) const { return s.defect ? ls_ - s.y0 : s.y0; }
  double slope(const State& s) const { return s.defect ? -s.y1 : s.y1; }
  double defect(const State& s) const { return s.defect ? s.y0 : ls_ - s.y0; }

  State from_defect(double d, double dprime) const { return {true, d, dprime}; }
  State from_value(double v, double vprime) const { return {false, v, vprime}; }

  void advance(State& s, double x0, double x1) {
    ode::State<2> y{s.y0, s.y1};
    if (s.defect) {
      auto rhs = [this](double, const ode::State<2>& u) {
        return ode::State<2>{u[1], -2.0 * shifted_(-u[0]) + 2.0 * c_ * u[1]};
      };
      defect_solver_.integrate(rhs, x0, y, x1);
    } else {
      auto rhs = [this](double, const ode::State<2>& u) {
        return ode::State<2>{u[1], 2.0 * (mech_(u[0]) + c_ * u[1])};
      };
      value_solver_.integrate(rhs, x0, y, x1);
    }
    s.y0 = y[0];
    s.y1 = y[1];
    if (!std::isfinite(s.y0) || !std::isfinite(s.y1)) {
      throw NumericError("wave integration produced a non-finite state");
    }
    const bool want_defect = value(s) > 0.5 * ls_;
    if (want_defect != s.defect) s = {want_defect, ls_ - s.y0, -s.y1};
  }

 private:
  static ode::Options<2> options(double atol) {
    ode::Options<2> o;
    o.rtol = 1e-12;
    o.atol = {atol, atol};
    o.initial_step = 1e-3;
    return o;
  }

  const BranchingMechanism& mech_;
  ShiftedMechanism shifted_;
  double ls_;
  double c_;
  ode::DormandPrince45<2> value_solver_;
  ode::DormandPrince45<2> defect_solver_;
};

// Newton iteration for value(x) = target starting from a grid state at x0.
double locate_level(SplitFlow& flow, const SplitFlow::State& at, double x0, double target,
                    double lo, double hi) {
  double x = x0;
  SplitFlow::State s = at;
  for (int it = 0; it < 50; ++it) {
    const double f = flow.value(s) - target;
    if (std::abs(f) <= 1e-15 * std::max(1.0, std::abs(target))) return x;
    double next = x - f / flow.slope(s);
    if (!(next > lo && next < hi)) next = 0.5 * (x + (f * flow.slope(s) > 0 ? lo : hi));
    s = at;
    flow.advance(s, x0, next);
    x = next;
  }
  return x;
}

double critical_speed(const BranchingMechanism& mech) { return std::sqrt(2.0 * mech.alpha()); }

double grid_point(long j, double h) { return static_cast<double>(j) * h; }

void check_options(const WaveOptions& o) {
  if (!(o.tol > 0.0) || !(o.grid_step > 0.0) || !(o.domain_length > 0.0) ||
      !(o.seed_defect > 0.0 && o.seed_defect < 1e-2)) {
    throw std::invalid_argument("wave options out of range");
  }
}

}  // namespace

const char* to_string(WaveKind k) {
  switch (k) {
    case WaveKind::Phi:
      return "phi";
    case WaveKind::Psi:
      return "psi";
    case WaveKind::Theta:
      return "theta";
  }
  return "?";
}

double WaveProfile::value_at(double x) const {
  if (x <= grid.front()) return values.front();
  if (x >= grid.back()) return values.back();
  const double h = step();
  const auto i = std::min(static_cast<std::size_t>((x - grid.front()) / h), size() - 2);
  const double t = (x - grid[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * values[i] + (t3 - 2 * t2 + t) * h * slopes[i] +
         (-2 * t3 + 3 * t2) * values[i + 1] + (t3 - t2) * h * slopes[i + 1];
}

double WaveProfile::slope_at(double x) const {
  if (x <= grid.front()) return slopes.front();
  if (x >= grid.back()) return slopes.back();
  const double h = step();
  const auto i = std::min(static_cast<std::size_t>((x - grid.front()) / h), size() - 2);
  const double t = (x - grid[i]) / h;
  const double t2 = t * t;
  return (6 * t2 - 6 * t) / h * values[i] + (3 * t2 - 4 * t + 1) * slopes[i] +
         (-6 * t2 + 6 * t) / h * values[i + 1] + (3 * t2 - 2 * t) * slopes[i + 1];
}

double WaveProfile::inverse(double v) const {
  const bool increasing = values.back() > values.front();
  // last grid index on the near side of v
  std::size_t lo = 0, hi = size() - 1;
  auto before = [&](double u) { return increasing ? u < v : u > v; };
  if (!before(values[lo])) return grid[lo];
  if (before(values[hi])) return grid[hi];
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (before(values[mid]) ? lo : hi) = mid;
  }
  double a = grid[lo], b = grid[hi];
  for (int it = 0; it < 100 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    (before(value_at(m)) ? a : b) = m;
  }
  return 0.5 * (a + b);
}

double phi_decay_rate(double rho, double q) { return std::sqrt(rho * rho + 2.0 * q) - rho; }

double psi_decay_rate(double rho, double alpha) {
  return rho - std::sqrt(std::max(0.0, rho * rho - 2.0 * alpha));
}

PhiResult solve_phi(const BranchingMechanism& mech, const LambdaStar& lstar, double rho,
                    const WaveOptions& opts) {
  check_options(opts);
  const double crit = critical_speed(mech);
  if (rho >= crit) return NoWave{rho, crit, "rho >= sqrt(2 alpha)"};

  const double ls = lstar.value;
  const double h = opts.grid_step;
  const double nu = rho - std::sqrt(rho * rho + 2.0 * lstar.psi_prime_at);  // < 0
  const double d0 = opts.seed_defect * ls;
  const double max_length = 10.0 * opts.domain_length;

  SplitFlow flow(mech, lstar, rho);
  const SplitFlow::State seed = flow.from_defect(d0, nu * d0);

  // pass 1: march back from the seed to the first zero of Phi
  SplitFlow::State s = seed;
  SplitFlow::State last = s;
  long j = 0;
  for (;;) {
    last = s;
    flow.advance(s, grid_point(-j, h), grid_point(-j - 1, h));
    ++j;
    if (flow.value(s) <= 0.0) break;
    if (flow.slope(s) < 0.0) throw NumericError("solve_phi: profile lost monotonicity");
    if (j * h > max_length) throw NumericError("solve_phi: no zero of Phi within the domain");
  }
  const double x_c =
      locate_level(flow, last, grid_point(-(j - 1), h), 0.0, grid_point(-j, h),
                   grid_point(-(j - 1), h));

  // pass 2: re-integrate onto the grid x_c + k h
  const long n_back = static_cast<long>(std::floor(-x_c / h));
  std::vector<double> vals(n_back + 1), slopes(n_back + 1);
  SplitFlow flow2(mech, lstar, rho);
  s = seed;
  double x = 0.0;
  for (long k = n_back; k >= 0; --k) {
    const double target = x_c + grid_point(k, h);
    flow2.advance(s, x, target);
    x = target;
    vals[k] = flow2.value(s);
    slopes[k] = flow2.slope(s);
  }
  vals[0] = 0.0;

  // beyond the seed the linearisation is exact to O(d0²)
  for (long k = n_back + 1;; ++k) {
    const double X = grid_point(k, h);
    const double d = d0 * std::exp(nu * (x_c + X));
    vals.push_back(ls - d);
    slopes.push_back(-nu * d);
    if (X >= opts.domain_length && d <= opts.tol * ls) break;
    if (X > max_length) throw NumericError("solve_phi: domain extension limit reached");
  }

  WaveProfile p;
  p.kind = WaveKind::Phi;
  p.rho = rho;
  p.lambda_star = ls;
  p.grid.resize(vals.size());
  for (std::size_t k = 0; k < vals.size(); ++k) p.grid[k] = grid_point(static_cast<long>(k), h);
  p.values = std::move(vals);
  p.slopes = std::move(slopes);
  p.boundary_low = 0.0;
  p.boundary_high = ls;
  p.slope_at_anchor = p.slopes.front();
  p.residual_sup = ode_residual(p, mech, rho);
  return p;
}

namespace {

enum class Shot { Overshoot, Undershoot, Unresolved };

struct ShotTrace {
  Shot outcome;
  std::vector<double> values;
  std::vector<double> slopes;
};

ShotTrace shoot(const BranchingMechanism& mech, const LambdaStar& lstar, double rho, double slope0,
                double h, double x_max) {
  SplitFlow flow(mech, lstar, rho);
  SplitFlow::State s = flow.from_value(0.0, slope0);
  ShotTrace t{Shot::Unresolved, {0.0}, {slope0}};
  for (long j = 0; grid_point(j, h) < x_max; ++j) {
    flow.advance(s, grid_point(j, h), grid_point(j + 1, h));
    const double v = flow.value(s);
    const double dv = flow.slope(s);
    t.values.push_back(v);
    t.slopes.push_back(dv);
    if (flow.defect(s) < 0.0) {
      t.outcome = Shot::Overshoot;
      break;
    }
    if (dv < 0.0) {
      t.outcome = Shot::Undershoot;
      break;
    }
  }
  return t;
}

}  // namespace

PhiResult solve_phi_shooting(const BranchingMechanism& mech, const LambdaStar& lstar, double rho,
                             const WaveOptions& opts, const ShootingOptions& shoot_opts) {
  check_options(opts);
  const double crit = critical_speed(mech);
  if (!shoot_opts.skip_precheck && rho >= crit) {
    return NoWave{rho, crit, "rho >= sqrt(2 alpha)"};
  }
  const double h = 0.5 * opts.grid_step;
  const double x_max = 10.0 * opts.domain_length;
  auto run = [&](double s) { return shoot(mech, lstar, rho, s, h, x_max); };

  double s = lstar.value;
  ShotTrace first = run(s);
  double lo = 0.0, hi = 0.0;
  if (first.outcome == Shot::Overshoot) {
    hi = s;
    int k = 0;
    for (; k < shoot_opts.max_expansions; ++k) {
      s *= 0.5;
      const Shot o = run(s).outcome;
      if (o == Shot::Undershoot) break;
      if (o == Shot::Unresolved) throw NumericError("solve_phi_shooting: unresolved trajectory");
      hi = s;
    }
    if (k == shoot_opts.max_expansions) {
      return NoWave{rho, crit, "every initial slope overshoots lambda*"};
    }
    lo = s;
  } else if (first.outcome == Shot::Undershoot) {
    lo = s;
    int k = 0;
    for (; k < shoot_opts.max_expansions; ++k) {
      s *= 2.0;
      const Shot o = run(s).outcome;
      if (o == Shot::Overshoot) break;
      if (o == Shot::Unresolved) throw NumericError("solve_phi_shooting: unresolved trajectory");
      lo = s;
    }
    if (k == shoot_opts.max_expansions) {
      throw NumericError("solve_phi_shooting: no overshooting slope found");
    }
    hi = s;
  } else {
    throw NumericError("solve_phi_shooting: unresolved trajectory");
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const Shot o = run(mid).outcome;
    if (o == Shot::Overshoot) {
      hi = mid;
    } else if (o == Shot::Undershoot) {
      lo = mid;
    } else {
      lo = hi = mid;
      break;
    }
  }
  if (!(hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * hi)) {
    throw NumericError("solve_phi_shooting: bracket collapsed without classification");
  }

  const ShotTrace a = run(lo);
  const ShotTrace b = run(hi);
  std::size_t n = std::min(a.values.size(), b.values.size());
  std::size_t keep = 0;
  while (keep < n && std::abs(a.values[keep] - b.values[keep]) <= shoot_opts.agree_tol * lstar.value &&
         a.slopes[keep] >= 0.0) {
    ++keep;
  }
  if (keep < 5) throw NumericError("solve_phi_shooting: bracket trajectories disagree at once");

  WaveProfile p;
  p.kind = WaveKind::Phi;
  p.rho = rho;
  p.lambda_star = lstar.value;
  for (std::size_t k = 0; k < keep; ++k) {
    p.grid.push_back(grid_point(static_cast<long>(k), h));
    p.values.push_back(0.5 * (a.values[k] + b.values[k]));
    p.slopes.push_back(0.5 * (a.slopes[k] + b.slopes[k]));
  }
  p.boundary_low = 0.0;
  p.boundary_high = lstar.value;
  p.slope_at_anchor = 0.5 * (lo + hi);
  p.residual_sup = ode_residual(p, mech, rho);
  return p;
}

WaveProfile solve_psi_wave(const BranchingMechanism& mech, const LambdaStar& lstar, double rho,
                           const WaveOptions& opts) {
  check_options(opts);
  const double crit = critical_speed(mech);
  if (!(rho >= crit - 1e-12)) {
    throw std::invalid_argument("solve_psi_wave: rho must be >= sqrt(2 alpha)");
  }
  const double ls = lstar.value;
  const double h = opts.grid_step;
  const double mu = -rho + std::sqrt(rho * rho + 2.0 * lstar.psi_prime_at);  // > 0
  const double d0 = opts.seed_defect * ls;
  const double max_length = 10.0 * opts.domain_length;
  const double floor_level = std::min(opts.tol, 1e-15) * ls;

  SplitFlow flow(mech, lstar, -rho);
  const SplitFlow::State seed = flow.from_defect(d0, mu * d0);

  // pass 1: locate the half level
  SplitFlow::State s = seed;
  SplitFlow::State last = s;
  long j = 0;
  for (;;) {
    last = s;
    flow.advance(s, grid_point(j, h), grid_point(j + 1, h));
    ++j;
    if (flow.value(s) <= 0.5 * ls) break;
    if (j * h > max_length) throw NumericError("solve_psi_wave: half level not reached");
  }
  const double x_half = locate_level(flow, last, grid_point(j - 1, h), 0.5 * ls,
                                     grid_point(j - 1, h), grid_point(j, h));

  // pass 2: grid x_half + k h, k >= k0 on the integrated side
  const long k0 = static_cast<long>(std::ceil(-x_half / h));
  std::vector<double> right_v, right_s;
  SplitFlow flow2(mech, lstar, -rho);
  s = seed;
  double x = 0.0;
  for (long k = k0;; ++k) {
    const double target = x_half + grid_point(k, h);
    flow2.advance(s, x, target);
    x = target;
    const double v = flow2.value(s);
    if (v < 0.0 || flow2.defect(s) < 0.0) {
      throw NumericError("solve_psi_wave: trajectory left [0, lambda*]");
    }
    right_v.push_back(v);
    right_s.push_back(flow2.slope(s));
    const double X = grid_point(k, h);
    if ((X >= opts.domain_length && v <= opts.tol * ls) || v <= floor_level) break;
    if (X > max_length) throw NumericError("solve_psi_wave: domain extension limit reached");
  }

  // left of the seed: the unstable-manifold linearisation
  std::vector<double> left_v, left_s;  // k = k0-1, k0-2, ...
  long k_left = k0 - 1;
  for (;; --k_left) {
    const double X = grid_point(k_left, h);
    const double d = d0 * std::exp(mu * (x_half + X));
    left_v.push_back(ls - d);
    left_s.push_back(-mu * d);
    if (X <= -opts.domain_length && d <= opts.tol * ls) break;
    if (X < -max_length) throw NumericError("solve_psi_wave: domain extension limit reached");
  }

  WaveProfile p;
  p.kind = WaveKind::Psi;
  p.rho = rho;
  p.lambda_star = ls;
  const long k_first = k0 - static_cast<long>(left_v.size());
  for (std::size_t i = left_v.size(); i-- > 0;) {
    p.values.push_back(left_v[i]);
    p.slopes.push_back(left_s[i]);
  }
  p.values.insert(p.values.end(), right_v.begin(), right_v.end());
  p.slopes.insert(p.slopes.end(), right_s.begin(), right_s.end());
  p.grid.resize(p.values.size());
  std::size_t anchor = 0;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const long k = k_first + static_cast<long>(i);
    p.grid[i] = grid_point(k, h);
    if (k == 0) anchor = i;
  }
  p.values[anchor] = 0.5 * ls;
  p.boundary_low = ls;
  p.boundary_high = 0.0;
  p.slope_at_anchor = p.slopes[anchor];
  p.residual_sup = ode_residual(p, mech, rho);
  return p;
}

WaveProfile theta_from_psi(const WaveProfile& psi) {
  if (psi.kind != WaveKind::Psi) throw std::invalid_argument("theta_from_psi: expects a Psi profile");
  WaveProfile t;
  t.kind = WaveKind::Theta;
  t.rho = psi.rho;
  t.lambda_star = psi.lambda_star;
  const std::size_t n = psi.size();
  t.grid.resize(n);
  t.values.resize(n);
  t.slopes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = n - 1 - i;
    t.grid[i] = -psi.grid[r];
    t.values[i] = 1.0 - psi.values[r] / psi.lambda_star;
    t.slopes[i] = psi.slopes[r] / psi.lambda_star;
  }
  t.boundary_low = 1.0;
  t.boundary_high = 0.0;
  t.slope_at_anchor = psi.slope_at_anchor / psi.lambda_star;
  t.residual_sup = psi.residual_sup / psi.lambda_star;
  return t;
}

MechanismCurve derive_psi_d(const WaveProfile& psi, const BranchingMechanism& mech) {
  if (psi.kind != WaveKind::Psi) throw std::invalid_argument("derive_psi_d: expects a Psi profile");
  const double ls = psi.lambda_star;
  const double rho = psi.rho;
  for (std::size_t i = 1; i < psi.size(); ++i) {
    if (psi.values[i] > psi.values[i - 1]) {
      throw std::invalid_argument("derive_psi_d: profile is not monotone");
    }
  }
  // The identities lose accuracy like eps/d² at defect d from the saddle; the
  // last stretch is covered by the analytic endpoint data instead.
  const double saddle_gap = 1e-4 * ls;
  const double mu = -rho + std::sqrt(rho * rho + 2.0 * mech.derivative(ls));

  std::vector<CurveNode> nodes;
  nodes.push_back({0.0, 0.0, 0.0, 0.0});
  for (std::size_t i = psi.size(); i-- > 0;) {
    const double v = psi.values[i];
    const double d1 = psi.slopes[i];
    if (!(v > 0.0) || ls - v < saddle_gap || !(d1 < 0.0)) continue;
    if (v <= nodes.back().lambda) continue;
    const double d2 = 2.0 * (mech(v) - rho * d1);
    const double d3 = 2.0 * (mech.derivative(v) * d1 - rho * d2);
    nodes.push_back({v, d1, d2 / d1, (d3 * d1 - d2 * d2) / (d1 * d1 * d1)});
  }
  if (nodes.size() < 3) throw std::invalid_argument("derive_psi_d: too few usable grid points");
  nodes.front().slope = nodes[1].value / nodes[1].lambda;
  nodes.front().curvature = nodes[1].curvature;
  nodes.push_back({ls, 0.0, mu, 2.0 * mech.second_derivative(ls) / (3.0 * mu + 2.0 * rho)});
  return MechanismCurve(std::move(nodes));
}

DecayFit fit_decay_rate(const WaveProfile& p) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t n = 0;
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p.kind == WaveKind::Phi ? p.lambda_star - p.values[i] : p.values[i];
    if (!(d >= 1e-6 && d <= 1e-3)) continue;
    const double x = p.grid[i];
    const double y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    ++n;
  }
  if (n < 3) throw DomainTooShortError("fit_decay_rate: defect never spans [1e-6, 1e-3]");
  const double N = static_cast<double>(n);
  const double cxx = sxx - sx * sx / N;
  const double cxy = sxy - sx * sy / N;
  const double cyy = syy - sy * sy / N;
  const double slope = cxy / cxx;
  const double intercept = (sy - slope * sx) / N;
  const double r2 = cxy * cxy / (cxx * cyy);
  if (!(r2 >= 0.999)) throw NumericError("fit_decay_rate: log-linear fit rejected (r² < 0.999)");
  return {-slope, std::exp(intercept), x_lo, x_hi, r2};
}

double ode_residual(const WaveProfile& p, const BranchingMechanism& mech, double rho) {
  const std::size_t n = p.size();
  if (n < 5) throw std::invalid_argument("ode_residual: need at least 5 grid points");
  const double h = p.step();
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(p.grid[i] - p.grid[i - 1] - h) > 1e-9 * h) {
      throw std::invalid_argument("ode_residual: grid must be uniform");
    }
  }
  const double ls = p.lambda_star;
  double sup = 0.0;
  const auto& v = p.values;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double d1 = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h);
    const double d2 =
        (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2]) / (12.0 * h * h);
    double r = 0.0;
    switch (p.kind) {
      case WaveKind::Phi:
        r = 0.5 * d2 - rho * d1 - mech(v[i]);
        break;
      case WaveKind::Psi:
        r = 0.5 * d2 + rho * d1 - mech(v[i]);
        break;
      case WaveKind::Theta:
        r = 0.5 * d2 - rho * d1 + mech(ls * (1.0 - v[i])) / ls;
        break;
    }
    sup = std::max(sup, std::abs(r));
  }
  return sup;
}

}  // namespace backbone
