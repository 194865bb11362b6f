#include "mwlab/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mwlab::io {

namespace {

double parse_double(const std::string& token) {
  // strtod accepts forms like "1e-3" and "inf" that from_chars may reject on
  // older standard libraries.
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw Error(ErrorKind::ParseError, "not a number: '" + token + "'");
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  return out;
}

void write_row(std::ostream& out, const auto& row) {
  for (Index j = 0; j < row.size(); ++j) out << ' ' << format_double(row(j));
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

MatrixXd read_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) row.push_back(parse_double(token));
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorKind::ParseError, "ragged matrix row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::ParseError, "matrix text is empty");
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

MatrixXd read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open matrix file " + path.string());
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_double(m(i, j));
    out << '\n';
  }
}

void write_matrix_file(const std::filesystem::path& path, const MatrixXd& m) {
  auto out = open_out(path);
  write_matrix(out, m);
}

void write_norm_table(std::ostream& out, const PartialSumTable<double>& table) {
  out << "# n norm\n";
  for (Index n = 1; n <= table.n_max; ++n) out << n << ' ' << format_double(table.norm(n)) << '\n';
}

void write_kernel(std::ostream& out, const ChainXd& chain, const KernelXd& kernel) {
  out << "# x y Q H\n";
  for (Index x = 0; x < kernel.n_states; ++x)
    for (Index y = 0; y < kernel.n_states; ++y) {
      if (!kernel.defined(x, y)) continue;
      out << x << ' ' << y << ' ' << format_double(chain.transition()(x, y));
      write_row(out, kernel(x, y));
      out << '\n';
    }
}

void write_trace(std::ostream& out, const PathTrace& trace) {
  out << "# k state S M R\n";
  for (Index k = 0; k <= trace.n; ++k) {
    out << k << ' ' << trace.states[static_cast<std::size_t>(k)];
    write_row(out, trace.S.row(k));
    write_row(out, trace.M.row(k));
    write_row(out, trace.R.row(k));
    out << '\n';
  }
}

void write_distribution(std::ostream& out, const ExactDistribution<double>& dist) {
  out << "# probability S M R\n";
  for (const auto& atom : dist.atoms) {
    out << format_double(atom.probability);
    write_row(out, atom.S);
    write_row(out, atom.M);
    write_row(out, atom.R);
    out << '\n';
  }
}

void KeyValueWriter::add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }

void KeyValueWriter::add(const std::string& key, double value) { add(key, format_double(value)); }

void KeyValueWriter::add(const std::string& key, const VectorXd& value) {
  std::string text;
  for (Index i = 0; i < value.size(); ++i) text += (i ? " " : "") + format_double(value(i));
  add(key, text);
}

void KeyValueWriter::write(std::ostream& out) const {
  for (const auto& [key, value] : entries_) out << key << " = " << value << '\n';
}

void KeyValueWriter::write_file(const std::filesystem::path& path) const {
  auto out = open_out(path);
  write(out);
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos || line.starts_with('#')) continue;
    values[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return values;
}

void write_report_table(std::ostream& out, const std::vector<VerificationReport>& reports) {
  out << "test\tparameter\tstatistic\tvalue\n";
  for (const auto& report : reports)
    for (const auto& row : report.rows)
      out << report.test << '\t' << row.parameter << '\t' << row.statistic << '\t' << format_double(row.value)
          << '\n';
}

void write_report_summary(std::ostream& out, const std::vector<VerificationReport>& reports) {
  for (const auto& report : reports) {
    KeyValueWriter kv;
    kv.add(report.test + ".result", report.passed ? "PASS" : "FAIL");
    if (report.seed) kv.add(report.test + ".seed", std::to_string(*report.seed));
    if (report.n_paths > 0) kv.add(report.test + ".n_paths", std::to_string(report.n_paths));
    if (!report.starts.empty()) {
      std::string starts;
      for (Index s : report.starts) starts += (starts.empty() ? "" : " ") + std::to_string(s);
      kv.add(report.test + ".starts", starts);
    }
    for (const auto& [key, value] : report.notes) kv.add(report.test + "." + key, value);
    kv.write(out);
  }
}

}  // namespace mwlab::io
