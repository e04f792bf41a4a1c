#pragma once

// Event-driven simulation of the backbone: branching Brownian motion with drift
// -rho, branch rate q and offspring law p_n, killed on hitting a barrier.
// Particle paths are never discretised; between events only the endpoint is
// drawn and absorption is decided by the Brownian-bridge crossing probability.

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "backbone/backbone_law.hpp"

namespace backbone {

enum class InitialCondition {
  SingleAncestor,  // one particle at x0
  PoissonField,    // Poisson(lambda*) particles at x0
};

struct SimConfig {
  OffspringLaw law;
  double rho = 0.0;
  double barrier = -std::numeric_limits<double>::infinity();
  InitialCondition initial = InitialCondition::SingleAncestor;
  double x0 = 1.0;
  double t_max = 1.0;  // may be +inf when only absorption matters
  std::vector<double> checkpoints;
  long particle_event_cap = 10'000'000;
  bool stop_on_survival = false;  // end the replica once any particle reaches t_max
  bool branching = true;          // false: particles move and are absorbed but never branch
};

struct SimOutcome {
  bool extinct = false;                         // no particle reached t_max
  std::vector<std::optional<double>> rightmost;  // per checkpoint; empty when nobody alive
  std::vector<long> population;                 // per checkpoint
  long initial_count = 0;
  long absorbed_count = 0;
  long events = 0;
  bool capped = false;
};

/// Validates config (throws std::invalid_argument).
void validate(const SimConfig& config);

SimOutcome run_replica(const SimConfig& config, std::uint64_t seed);

/// Replica i uses stream_seed(master_seed, i); results are in index order.
std::vector<SimOutcome> run_replicas(const SimConfig& config, std::size_t n_replicas,
                                     std::uint64_t master_seed, unsigned threads = 0);

struct SpeedEstimate {
  double mean;         // mean of R_t / t over surviving, uncapped replicas
  double std_error;
  double survival_fraction;
  std::size_t survivors;
  std::size_t capped;
  std::size_t replicas;
};

/// Throws NoSurvivorsError when no uncapped replica survives to t.
SpeedEstimate estimate_speed(SimConfig config, double t, std::size_t n_replicas,
                             std::uint64_t master_seed, unsigned threads = 0);

struct ExtinctionEstimate {
  double p_hat;
  double std_error;
  double ci_low;   // Wilson 95%
  double ci_high;
  std::size_t extinct;
  std::size_t capped;
  std::size_t replicas;
  bool unreliable;            // more than 1% of replicas hit the event cap
  double horizon_disagreement;  // fraction reclassified when t_max is doubled (NaN if not run)
};

ExtinctionEstimate estimate_extinction(SimConfig config, std::size_t n_replicas,
                                       std::uint64_t master_seed, unsigned threads = 0,
                                       bool validate_horizon = false);

struct ExitCount {
  long count;
  bool censored;  // event cap reached before total absorption
};

/// Runs every replica to total absorption (t_max is forced to +inf).
std::vector<ExitCount> sample_exit_mass(SimConfig config, std::size_t n_replicas,
                                        std::uint64_t master_seed, unsigned threads = 0);

}  // namespace backbone
