#pragma once

#include "qwork/scenarios.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qwork::detail {

// Runs body, converting an exception into out.error so partial tables survive.
RunOutput guarded(const std::string& scenario, const std::function<void(RunOutput&)>& body);

void log(const RunContext& ctx, const std::string& msg);

// Populations in the levels continued from `anchor` to X, indexed by label.
Eigen::VectorXd label_populations(const SystemModel& model, const AdiabaticLevels& anchor, double X,
                                  const Eigen::VectorXcd& state);

// Conservation checks for one quantum run, named with an optional prefix.
void add_conservation_checks(RunOutput& out, const QuantumRun& run, const std::string& prefix = "");

struct Conservation {
  double norm = 0.0;
  double energy = 0.0;
  double probability = 0.0;
  double occupation = 0.0;
  double first_law = 0.0;
};

Conservation conservation_of(const QuantumRun& run);

// Worst-case conservation checks over many runs.
void add_worst_conservation_checks(RunOutput& out, const std::vector<Conservation>& runs);

RunConfig apply_context(const RunConfig& config, const RunContext& ctx);

struct ProtocolMeans {
  double quantum = 0.0;
  double classical = 0.0;
  double recorded = 0.0;
};

// Quantum run plus both classical references, reporting mean system work.
ProtocolMeans protocol_means(const RunConfig& config, Conservation* conservation = nullptr);

std::string point_label(std::size_t i);

// Linear interpolation of the first upward crossing of `level` in y(x); NaN if none.
double first_crossing(const std::vector<double>& x, const std::vector<double>& y, double level);

}  // namespace qwork::detail
