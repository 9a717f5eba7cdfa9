#include "exex/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace exex {

std::string fmt_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_double(const std::string& cell, const std::string& path, std::size_t line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                             ": not a number: '" + cell + "'");
  }
}

}  // namespace

void write_candidates_csv(const std::string& path, const Eigen::MatrixXd& points) {
  auto out = open_out(path);
  out << "id";
  for (Eigen::Index k = 0; k < points.cols(); ++k) out << ",x" << (k + 1);
  out << "\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out << (i + 1);
    for (Eigen::Index k = 0; k < points.cols(); ++k) out << ',' << fmt_g12(points(i, k));
    out << "\n";
  }
  finish(out, path);
}

Eigen::MatrixXd read_candidates_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "id")
    throw std::runtime_error(path + ": expected header starting with 'id'");
  const std::size_t p = header.size() - 1;
  if (p == 0) throw std::runtime_error(path + ": no coordinate columns");
  for (std::size_t k = 0; k < p; ++k)
    if (header[k + 1] != "x" + std::to_string(k + 1))
      throw std::runtime_error(path + ": unexpected column '" + header[k + 1] + "'");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != p + 1)
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": expected " + std::to_string(p + 1) + " cells, got " +
                               std::to_string(cells.size()));
    double id = parse_double(cells[0], path, line_no);
    if (id != static_cast<double>(rows.size() + 1))
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": ids must run 1..n in order");
    std::vector<double> row(p);
    for (std::size_t k = 0; k < p; ++k) row[k] = parse_double(cells[k + 1], path, line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < p; ++k)
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return points;
}

void write_ledger_csv(const std::string& path, const EnergyLedger& ledger) {
  auto out = open_out(path);
  out << "ordinal,phase,fingerprint_id,energy,best_so_far\n";
  for (const LedgerRow& row : ledger.rows()) {
    out << row.ordinal << ',' << phase_name(row.phase) << ',' << row.fingerprint_id << ','
        << fmt_g12(row.energy) << ',' << fmt_g12(row.best_so_far) << "\n";
  }
  finish(out, path);
}

void write_expansion_trace_csv(const std::string& path,
                               const std::vector<ExpansionTraceRow>& rows,
                               bool adaptive_columns) {
  auto out = open_out(path);
  out << "attempt,accepted,t_before,d_min,set_size,phase";
  if (adaptive_columns) out << ",min_est_idx,oracle_calls";
  out << "\n";
  for (const ExpansionTraceRow& row : rows) {
    out << row.attempt << ',' << (row.accepted ? 1 : 0) << ',' << fmt_g12(row.t_before) << ','
        << fmt_g12(row.d_min) << ',' << row.set_size << ',' << phase_name(row.phase);
    if (adaptive_columns) {
      out << ',';
      if (row.min_est_idx >= 0) out << row.min_est_idx;
      out << ',';
      if (row.oracle_calls >= 0) out << row.oracle_calls;
    }
    out << "\n";
  }
  finish(out, path);
}

void write_bo_trace_csv(const std::string& path, const std::vector<BoTraceRow>& rows) {
  auto out = open_out(path);
  out << "iter,chosen_id,max_ei,rel_ei,oracle_energy,best_so_far\n";
  for (const BoTraceRow& row : rows) {
    out << row.iter << ',' << row.chosen_id << ',' << fmt_g12(row.max_ei) << ','
        << fmt_g12(row.rel_ei) << ',' << fmt_g12(row.oracle_energy) << ','
        << fmt_g12(row.best_so_far) << "\n";
  }
  finish(out, path);
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
  auto out = open_out(path);
  out << "problem,p,N1,replication,stage,min_value,oracle_calls\n";
  for (const BenchRow& row : rows) {
    out << row.problem << ',' << row.p << ',' << row.n1 << ',' << row.replication << ','
        << row.stage << ',' << fmt_g12(row.min_value) << ',' << row.oracle_calls << "\n";
  }
  finish(out, path);
}

void write_pca_csv(const std::string& path, const Eigen::MatrixXd& components,
                   const Eigen::VectorXd& energy_estimates) {
  if (components.rows() != energy_estimates.size())
    throw std::invalid_argument("write_pca_csv: row count mismatch");
  auto out = open_out(path);
  out << "id,pc1,pc2,pc3,energy_estimate\n";
  for (Eigen::Index i = 0; i < components.rows(); ++i) {
    out << (i + 1);
    for (Eigen::Index k = 0; k < 3; ++k) {
      double v = k < components.cols() ? components(i, k) : 0.0;
      out << ',' << fmt_g12(v);
    }
    out << ',' << fmt_g12(energy_estimates(i)) << "\n";
  }
  finish(out, path);
}

void write_fingerprints_csv(const std::string& path, const Eigen::MatrixXd& fingerprints) {
  if (fingerprints.cols() % 2 != 0)
    throw std::invalid_argument("write_fingerprints_csv: fingerprint length must be even");
  const Eigen::Index m = fingerprints.cols() / 2;
  auto out = open_out(path);
  out << "id";
  for (Eigen::Index k = 0; k < m; ++k) out << ",S" << (k + 1);
  for (Eigen::Index k = 0; k < m; ++k) out << ",V" << (k + 1);
  out << "\n";
  for (Eigen::Index i = 0; i < fingerprints.rows(); ++i) {
    out << (i + 1);
    for (Eigen::Index k = 0; k < fingerprints.cols(); ++k)
      out << ',' << fmt_g12(fingerprints(i, k));
    out << "\n";
  }
  finish(out, path);
}

void write_text_file(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  finish(out, path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace exex
