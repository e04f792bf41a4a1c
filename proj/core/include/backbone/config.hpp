#pragma once

// Mechanism files are JSON objects:
//
//   { "alpha": 1.0, "beta": 0.5,
//     "atoms": [[x, w], ...],          // Pi += w δ_x
//     "gamma": [[c, k, b], ...] }      // Pi += c x^k e^{-b x} dx
//
// Only "alpha" is required. Unknown keys are rejected.

#include <cstdint>
#include <string>
#include <string_view>

#include "backbone/io.hpp"
#include "backbone/mechanism.hpp"

namespace backbone {

/// Throws ConfigError on malformed input or parameters the mechanism rejects.
BranchingMechanism parse_mechanism(const std::string& json_text);
BranchingMechanism load_mechanism(const std::string& path);

io::Json mechanism_to_json(const BranchingMechanism& mech);

/// psi(l) = -alpha l + beta l^2.
BranchingMechanism quadratic_mechanism(double alpha = 1.0, double beta = 1.0);

/// Per-experiment seed derived from the master seed and an experiment name, so
/// that adding or reordering experiments leaves the others unchanged.
std::uint64_t experiment_seed(std::uint64_t master, std::string_view name, std::uint64_t index = 0);

struct ExperimentConfig {
  std::string mechanism_path;  // empty: quadratic mechanism alpha = beta = 1
  std::string kind;
  double rho = 0.0;
  double t = 10.0;
  double z = 1.0;
  double x = 1.0;
  std::uint64_t replicas = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;  // empty or "-": stdout
  io::Format format = io::Format::Csv;

  /// Throws ConfigError when the mechanism file is missing or replicas == 0.
  void validate() const;
  BranchingMechanism mechanism() const;
};

}  // namespace backbone
