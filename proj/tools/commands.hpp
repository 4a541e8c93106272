#pragma once

#include "artifacts.hpp"
#include "config.hpp"

namespace cgmlab {

struct RunOptions {
  bool refine = false;  ///< simulate: add the grid-halving convergence table
};

// Every command returns its files; nothing touches the disk until the caller
// commits the set. All sets include config.resolved.yaml and summary.json.

/// resolvent.csv (t, M, R, L and closed forms when known).
ArtifactSet cmd_resolvent(const ExperimentConfig& cfg);

/// trajectories.csv, deficiency.csv and, with refine, convergence.csv.
ArtifactSet cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// moment.csv with the d_n table and moment.json with the full problem.
ArtifactSet cmd_moment(const ExperimentConfig& cfg);

/// growth.csv from the closed-form Cauchy diagonal and biorth.csv from the Gram solve.
ArtifactSet cmd_biorth(const ExperimentConfig& cfg);

/// control.csv sweeping N_active for the memoryless and the configured kernel, plus verdict.json.
ArtifactSet cmd_control(const ExperimentConfig& cfg);

}  // namespace cgmlab
