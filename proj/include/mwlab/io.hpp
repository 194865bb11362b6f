#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mwlab/chain.hpp"
#include "mwlab/decomposition.hpp"
#include "mwlab/oracle.hpp"
#include "mwlab/resolvent.hpp"
#include "mwlab/simulate.hpp"
#include "mwlab/verify.hpp"

namespace mwlab::io {

/// Whitespace-separated rows; blank lines and lines starting with '#' are
/// skipped. Throws ParseError on ragged rows or non-numeric tokens.
MatrixXd read_matrix(std::istream& in);
MatrixXd read_matrix_file(const std::filesystem::path& path);

/// Rows of space-separated values with round-trip precision.
void write_matrix(std::ostream& out, const MatrixXd& m);
void write_matrix_file(const std::filesystem::path& path, const MatrixXd& m);

/// Two columns: n and ||T_n||_2, for n = 1..n_max.
void write_norm_table(std::ostream& out, const PartialSumTable<double>& table);

/// One row per support edge: x y Q(x,y) H_1 ... H_d.
void write_kernel(std::ostream& out, const ChainXd& chain, const KernelXd& kernel);

/// One row per step: k state S_1..S_d M_1..M_d R_1..R_d.
void write_trace(std::ostream& out, const PathTrace& trace);

/// One row per atom: probability S_1..S_d M_1..M_d R_1..R_d.
void write_distribution(std::ostream& out, const ExactDistribution<double>& dist);

/// `key = value` lines in insertion order.
class KeyValueWriter {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, const VectorXd& value);
  void write(std::ostream& out) const;
  void write_file(const std::filesystem::path& path) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Parses `key = value` lines written by KeyValueWriter.
std::map<std::string, std::string> read_key_values(std::istream& in);

std::string format_double(double value);

/// Tab-separated rows: test parameter statistic value, with a header line.
void write_report_table(std::ostream& out, const std::vector<VerificationReport>& reports);

/// Per-report key-value block: pass flag, seed, sample sizes and notes.
void write_report_summary(std::ostream& out, const std::vector<VerificationReport>& reports);

}  // namespace mwlab::io
