#pragma once

// The backbone of the decomposition: a branching diffusion with branch rate
// q = psi'(lambda*) and offspring law p_n(dy), jointly in the number of
// children n and the immigrated mass mark y.

#include <vector>

#include "backbone/mechanism.hpp"
#include "backbone/rng.hpp"

namespace backbone {

enum class TailPolicy {
  Certified,  // tail mass must reach delta_tail <= 1e-6; moments are tail corrected
  Truncate,   // accept any delta_tail < 1; moments use the truncated support only
};

/// One sampling component of p_n(dy).
struct OffspringComponent {
  enum class Kind { Quadratic, Atom, Gamma } kind;
  double mass;      // beta lambda*^2, atom weight w, or c Γ(k+1) b^{-(k+1)}
  double weight;    // unnormalized mass of {n >= 2} carried by the component
  double location;  // atom: x
  double shape;     // gamma: r = k + 1
  double prob;      // gamma: lambda* / (b + lambda*); atom: unused
  double rate;      // gamma: b + lambda*
  double mean_mu;   // atom: lambda* x
};

struct OffspringLaw {
  double q = 0.0;
  double lstar = 0.0;
  std::vector<double> pmf;  // pmf[n] for n = 0..n_max; pmf[0] = pmf[1] = 0
  double tail_mass = 0.0;   // Σ_{n > n_max} p_n
  double tail_mean = 0.0;   // Σ_{n > n_max} n p_n
  bool tail_corrected = true;
  std::vector<OffspringComponent> components;
  std::vector<double> component_weights;  // normalized, same order as components
  double normalizer = 0.0;                // Σ component weights, equal to lambda* q

  int n_max() const { return static_cast<int>(pmf.size()) - 1; }
  /// Σ n p_n, including tail_mean when the law is tail corrected.
  double mean() const;
  /// Σ_{n <= n_max} p_n r^n.
  double generating_function(double r) const;
};

struct BranchEvent {
  long n;
  double y;
};

double branch_rate(const BranchingMechanism& mech, const LambdaStar& lstar);

/// psi(lambda* (1-r)) / lambda*.
double generator_f(const BranchingMechanism& mech, const LambdaStar& lstar, double r);

OffspringLaw offspring_pmf(const BranchingMechanism& mech, const LambdaStar& lstar, int n_max,
                           double delta_tail = 1e-13, TailPolicy policy = TailPolicy::Certified);

BranchEvent sample_branch_event(const OffspringLaw& law, Rng& rng);

/// q(m - 1) - alpha.
double mean_identity_residual(const OffspringLaw& law, double alpha);

struct OffspringLogMoment {
  std::vector<double> partial_sums;  // index n: Σ_{j <= n} j (log j)^{2+eps} p_j
  double tail;                       // contribution beyond n_max, summed from the components
  double value;
};

OffspringLogMoment offspring_log_moment(const OffspringLaw& law, double eps);

// Conditioned samplers, exposed for testing.
long sample_poisson_at_least2(double mu, Rng& rng);
long sample_negbin_at_least2(double r, double p, Rng& rng);

}  // namespace backbone
