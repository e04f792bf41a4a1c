#include "backbone/config.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "backbone/errors.hpp"
#include "backbone/rng.hpp"

namespace backbone {

namespace {

double number(const io::Json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(what + " must be finite");
  return v;
}

}  // namespace

BranchingMechanism parse_mechanism(const std::string& json_text) {
  io::Json j;
  try {
    j = io::Json::parse(json_text);
  } catch (const io::Json::parse_error& e) {
    throw ConfigError(std::string("mechanism file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("mechanism must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "alpha" && k != "beta" && k != "atoms" && k != "gamma") {
      throw ConfigError("unknown mechanism key '" + k + "'");
    }
  }
  if (!j.contains("alpha")) throw ConfigError("mechanism needs 'alpha'");
  const double alpha = number(j["alpha"], "alpha");
  const double beta = j.contains("beta") ? number(j["beta"], "beta") : 0.0;

  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    if (!j["atoms"].is_array()) throw ConfigError("'atoms' must be an array of [x, w]");
    for (const auto& a : j["atoms"]) {
      if (!a.is_array() || a.size() != 2) throw ConfigError("each atom must be [x, w]");
      atoms.push_back({number(a[0], "atom location"), number(a[1], "atom weight")});
    }
  }
  std::vector<GammaComponent> gammas;
  if (j.contains("gamma")) {
    if (!j["gamma"].is_array()) throw ConfigError("'gamma' must be an array of [c, k, b]");
    for (const auto& g : j["gamma"]) {
      if (!g.is_array() || g.size() != 3) throw ConfigError("each gamma component must be [c, k, b]");
      const double k = number(g[1], "gamma shape");
      if (k != std::floor(k) || k < 0 || k > 1000) {
        throw ConfigError("gamma shape must be a non-negative integer");
      }
      gammas.push_back({number(g[0], "gamma coefficient"), static_cast<int>(k),
                        number(g[2], "gamma rate")});
    }
  }
  try {
    return BranchingMechanism(alpha, beta, JumpMeasure(std::move(atoms), std::move(gammas)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid mechanism: ") + e.what());
  }
}

BranchingMechanism load_mechanism(const std::string& path) {
  return parse_mechanism(io::read_text(path));
}

io::Json mechanism_to_json(const BranchingMechanism& mech) {
  io::Json j = io::Json::object();
  j["alpha"] = mech.alpha();
  j["beta"] = mech.beta();
  io::Json atoms = io::Json::array();
  for (const auto& a : mech.pi().atoms()) atoms.push_back({a.location, a.weight});
  io::Json gammas = io::Json::array();
  for (const auto& g : mech.pi().gamma_components()) gammas.push_back({g.coefficient, g.shape, g.rate});
  j["atoms"] = atoms;
  j["gamma"] = gammas;
  return j;
}

BranchingMechanism quadratic_mechanism(double alpha, double beta) {
  return BranchingMechanism(alpha, beta);
}

std::uint64_t experiment_seed(std::uint64_t master, std::string_view name, std::uint64_t index) {
  // FNV-1a over the name, then mixed with the master seed and index
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return stream_seed(master ^ splitmix64(h), index);
}

void ExperimentConfig::validate() const {
  if (!mechanism_path.empty() && !std::filesystem::exists(mechanism_path)) {
    throw ConfigError("mechanism file '" + mechanism_path + "' does not exist");
  }
  if (replicas == 0) throw ConfigError("replica count must be at least 1");
  if (!std::isfinite(rho) || !std::isfinite(t) || !std::isfinite(z) || !std::isfinite(x)) {
    throw ConfigError("numeric parameters must be finite");
  }
}

BranchingMechanism ExperimentConfig::mechanism() const {
  return mechanism_path.empty() ? quadratic_mechanism() : load_mechanism(mechanism_path);
}

}  // namespace backbone
