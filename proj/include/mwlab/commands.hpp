#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mwlab/config.hpp"
#include "mwlab/decomposition.hpp"
#include "mwlab/resolvent.hpp"
#include "mwlab/verify.hpp"

namespace mwlab {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInputError = 2 };

/// Exact objects every subcommand derives from a config.
struct Pipeline {
  ChainXd chain;
  ObservableXd g;
  Matrix<double> h;  // Poisson solution
  KernelXd kernel;   // epsilon-route limit
  DiffusionXd D;
  PartialSumTable<double> T;
  GrowthReport growth;
  double C_hat = 0;
};

Pipeline build_pipeline(const RunConfig& cfg, Index table_n_max);

int cmd_check(const RunConfig& cfg, std::ostream& out);
int cmd_decompose(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out);
/// Runs the verification suite; `reports` receives every report when given.
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::vector<VerificationReport>* reports = nullptr);
int cmd_oracle(const RunConfig& cfg, std::ostream& out);
int cmd_report(const RunConfig& cfg, std::ostream& out);

/// Dispatches by name and maps library errors to kExitInputError with a
/// diagnostic on `err`.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace mwlab
