#include "bwshare/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bwshare {

std::string format_number(double v) {
  char buffer[40];
  snprintf(buffer, sizeof buffer, "%.12g", v);
  return buffer;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, target);
}

std::string hyperperiod_csv(const SystemConfig& cfg, const RunTrace& trace) {
  std::ostringstream out;
  out << "hyperperiod,total_qoe";
  for (int r = 0; r < cfg.num_regions; ++r)
    for (int j = 0; j < cfg.num_operators; ++j)
      for (int i = 0; i < cfg.num_operators; ++i)
        out << ",shared_r" << r << "_o" << j << "_to_o" << i;
  out << ",grad_norm,max_queue\n";
  for (const HyperRow& row : trace.hyper) {
    out << row.t << ',' << format_number(row.total_qoe);
    for (double v : row.sharing) out << ',' << format_number(v);
    out << ',' << format_number(row.grad_norm) << ',' << format_number(row.max_queue)
        << '\n';
  }
  return out.str();
}

std::string clients_csv(const RunTrace& trace) {
  std::ostringstream out;
  out << "operator,region,client,arrivals,satisfied_fraction,final_queue\n";
  for (const ClientStats& s : trace.clients) {
    const double fraction =
        s.arrivals > 0 ? static_cast<double>(s.satisfied) / s.arrivals : 0.0;
    out << s.op << ',' << s.region << ',' << s.n << ',' << s.arrivals << ','
        << format_number(fraction) << ',' << format_number(s.final_queue) << '\n';
  }
  return out.str();
}

std::string periods_csv(const RunTrace& trace) {
  std::ostringstream out;
  out << "period,total_qoe,max_queue,dual_sum\n";
  for (const PeriodRow& row : trace.periods)
    out << row.period << ',' << format_number(row.qoe) << ','
        << format_number(row.max_queue) << ',' << format_number(row.dual_sum) << '\n';
  return out.str();
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "rate_low,rate_high,policy,qoe,qoe_no_sharing,improvement_pct,improvement_valid\n";
  for (const CompareRow& row : rows)
    out << format_number(row.rate_low) << ',' << format_number(row.rate_high) << ','
        << row.policy << ',' << format_number(row.qoe) << ','
        << format_number(row.qoe_no_sharing) << ',' << format_number(row.improvement_pct)
        << ',' << (row.relative_valid ? 1 : 0) << '\n';
  return out.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "eta,hyperperiod,total_qoe,gap_to_opt\n";
  for (const SweepRow& row : rows)
    out << row.eta_label << ',' << row.hyperperiod << ',' << format_number(row.total_qoe)
        << ',' << format_number(row.gap_to_opt) << '\n';
  return out.str();
}

}  // namespace bwshare
