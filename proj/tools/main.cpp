// cgmlab: experiment runner. Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "cgm/errors.hpp"
#include "commands.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Flags {
  std::string config;
  std::string out = "cgmlab_out";
  std::optional<long> precision;
  std::optional<int> modes;
  bool refine = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "YAML experiment file")->required();
  sub->add_option("--out", f.out, "output directory")->capture_default_str();
  sub->add_option("--precision", f.precision, "mantissa bits, overrides the config");
  sub->add_option("--modes", f.modes, "number of modes, overrides the config");
  sub->add_flag("--refine", f.refine, "simulate: grid-halving convergence table");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controllability experiments for heat conduction with memory"};
  app.require_subcommand(1);
  Flags flags;
  const char* names[] = {"resolvent", "simulate", "moment", "biorth", "control"};
  const char* help[] = {"resolvent R and L of the memory kernel", "modal trajectories and deficiency",
                        "moment targets d_n and their asymptotics", "minimal biorthogonal families",
                        "minimal-norm control sweep, memory against memoryless"};
  for (int i = 0; i < 5; ++i) add_flags(app.add_subcommand(names[i], help[i]), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    auto cfg = cgmlab::load_config(flags.config);
    if (flags.precision) {
      cfg.precision = *flags.precision;
      cfg.max_bits = std::max(cfg.max_bits, cfg.precision);
    }
    if (flags.modes) cfg.modes = *flags.modes;
    cgmlab::validate(cfg);

    cgmlab::ArtifactSet files;
    if (cmd == "resolvent") files = cgmlab::cmd_resolvent(cfg);
    if (cmd == "simulate") files = cgmlab::cmd_simulate(cfg, {flags.refine});
    if (cmd == "moment") files = cgmlab::cmd_moment(cfg);
    if (cmd == "biorth") files = cgmlab::cmd_biorth(cfg);
    if (cmd == "control") files = cgmlab::cmd_control(cfg);
    files.commit(flags.out);
    for (const auto& [name, content] : files.files()) std::cout << flags.out << "/" << name << "\n";
    return 0;
  } catch (const cgmlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const cgm::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const cgm::HypothesisViolation& e) {
    std::cerr << "hypothesis violated: " << e.what() << "\n";
    return kNumericalError;
  } catch (const cgm::PrecisionExhausted& e) {
    std::cerr << "precision exhausted: " << e.what() << " (log10 condition ~ " << e.log10_condition() << ")\n";
    return kNumericalError;
  } catch (const cgm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
