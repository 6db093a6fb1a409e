#pragma once

#include "scfo/problem.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace scfo {

std::vector<std::string> trace_header(int n_u, int n_g);
void write_trace_csv(std::ostream& os, const CampaignTrace& trace);
void write_trace_csv(const std::string& path, const CampaignTrace& trace);
std::string trace_to_csv(const CampaignTrace& trace);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(std::istream& is);
CsvTable read_csv(const std::string& path);

// Loss and worst true constraint value recovered from a trace file.
struct TraceSummary {
  int iterations = 0;
  double loss = 0.0;
  double max_g = 0.0;
  int violations = 0;
  double final_phi_gap = 0.0;
};

TraceSummary summarize_trace(const CsvTable& table, double violation_tol = 1e-9);

}  // namespace scfo
