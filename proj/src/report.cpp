#include "lodreg/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lodreg/errors.hpp"
#include "lodreg/version.hpp"

namespace lodreg {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string comment_header(const KeyValues& config) {
  std::ostringstream os;
  os << "# " << kToolName << " " << kVersion << "\n";
  for (const auto& [k, v] : config) os << "# " << k << " = " << v << "\n";
  return os.str();
}

std::string meta_body(const KeyValues& config) {
  std::ostringstream os;
  os << "tool = " << kToolName << " " << kVersion << "\n";
  for (const auto& [k, v] : config) os << k << " = " << v << "\n";
  return os.str();
}

std::string plot_table_csv(const PlotTable& table) {
  std::ostringstream os;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    os << (c ? "," : "") << table.header[c];
  os << "\n";
  const std::size_t rows = table.columns.empty() ? 0 : table.columns[0].size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      os << (c ? "," : "") << fmt(table.columns[c][r]);
    os << "\n";
  }
  return os.str();
}

namespace {
const char* kCoefNames[4] = {"beta0", "beta1", "beta2", "gamma"};
}

std::string mc_report_csv(const MonteCarloReport& report) {
  std::ostringstream os;
  os << "method,quantity,beta0,beta1,beta2,gamma\n";
  auto row = [&](const std::string& method, const std::string& qty,
                 const Eigen::VectorXd& vals) {
    os << method << "," << qty;
    for (Eigen::Index j = 0; j < vals.size(); ++j) os << "," << fmt(vals[j]);
    os << "\n";
  };
  for (Method m : kAllMethods) {
    const MethodSummary& s = report.summary(m);
    row(method_name(m), "bias", s.bias);
    row(method_name(m), "var", s.emp_var);
    os << method_name(m) << ",n_used," << s.n_used << ",,,\n";
  }
  if (report.coverage_reps > 0) {
    row("two_stage", "boot_var", report.boot_var_mean);
    row("two_stage", "cr90", report.coverage90);
    row("two_stage", "cr95", report.coverage95);
  }
  return os.str();
}

std::string mc_report_table(const MonteCarloReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-14s %-10s %9s %9s %9s %9s\n", "method",
                "quantity", kCoefNames[0], kCoefNames[1], kCoefNames[2],
                kCoefNames[3]);
  os << line;
  auto row = [&](const std::string& method, const std::string& qty,
                 const Eigen::VectorXd& vals, double scale = 1.0) {
    std::snprintf(line, sizeof(line), "%-14s %-10s %9.3f %9.3f %9.3f %9.3f\n",
                  method.c_str(), qty.c_str(), vals[0] * scale,
                  vals[1] * scale, vals[2] * scale, vals[3] * scale);
    os << line;
  };
  for (Method m : kAllMethods) {
    const MethodSummary& s = report.summary(m);
    if (s.n_used == 0) continue;
    row(method_name(m), "bias", s.bias);
    const bool full_rows = m == Method::kFullData ||
                           m == Method::kTwoStage ||
                           m == Method::kCompleteCase;
    if (full_rows && s.n_used >= 2) row(method_name(m), "var", s.emp_var);
    if (m == Method::kTwoStage && report.coverage_reps > 0) {
      row("", "boot var", report.boot_var_mean);
      row("", "90% CR(%)", report.coverage90, 100.0);
      row("", "95% CR(%)", report.coverage95, 100.0);
    }
  }
  return os.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw DataError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw DataError("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

}  // namespace lodreg
