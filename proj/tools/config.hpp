#pragma once

// Experiment configuration read from a YAML file. Every key is optional; see
// README.md for the defaults. Unknown keys are rejected.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgm/kernel_algebra.hpp"
#include "cgm/spectral_domain.hpp"

namespace cgmlab {

/// Invalid configuration (exit code 2). The message carries file:line:column when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KernelSpec {
  std::string type = "constant";  ///< zero | constant | exp_sum | polynomial
  double c = 1.0;
  std::vector<cgm::ExpTerm> terms;
  std::vector<double> coeffs;

  cgm::MemoryKernel build() const;
};

/// Boundary datum at one endpoint.
struct ProfileSpec {
  std::string type = "zero";  ///< zero | constant | sine | polynomial
  double value = 0.0;
  double amplitude = 1.0;
  double omega = 1.0;
  double phase = 0.0;
  std::vector<double> coeffs;

  double operator()(double t) const;
};

struct InitialDataSpec {
  std::string type = "power";  ///< power: xi_n = scale / n^power; list: explicit values, zero beyond
  double scale = 1.0;
  double power = 1.0;
  std::vector<double> values;

  double operator()(int n) const;
};

struct BiorthSpec {
  int family = 4000;    ///< size of the closed-form family used for the growth fit
  int gram_size = 20;   ///< size of the family solved through the Gram matrix
  std::array<int, 2> fit{10, 30};
  std::string horizon = "infinite";  ///< infinite | finite (uses T)
  double shift = 0.0;
};

struct ControlSpec {
  int refine = 4;  ///< control grid has steps * refine intervals
  std::array<bool, 2> endpoints{true, true};
};

struct ExperimentConfig {
  KernelSpec kernel;
  double T = 1.0;
  int steps = 1000;
  int modes = 12;
  std::optional<int> scope;  ///< empty: automatic threshold
  InitialDataSpec initial_data;
  std::array<ProfileSpec, 2> forcing;
  long precision = 256;
  long max_bits = 1024;
  BiorthSpec biorth;
  ControlSpec control;

  cgm::BoundaryControl boundary(const cgm::GridPtr& grid) const;
  std::string to_yaml() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");

/// Range and consistency checks; throws ConfigError.
void validate(const ExperimentConfig& cfg);

}  // namespace cgmlab
