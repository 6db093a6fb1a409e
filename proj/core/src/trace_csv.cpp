#include "scfo/trace_csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scfo {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void put_vec(std::ostream& os, const Vector& v, int n) {
  for (int i = 0; i < n; ++i) {
    os << ',';
    if (i < v.size()) os << num(v(i));
  }
}

}  // namespace

std::vector<std::string> trace_header(int n_u, int n_g) {
  std::vector<std::string> h{"k"};
  for (int i = 1; i <= n_u; ++i) h.push_back("u" + std::to_string(i));
  h.emplace_back("phi_true");
  for (int j = 1; j <= n_g; ++j) h.push_back("g" + std::to_string(j) + "_true");
  h.emplace_back("phi_meas");
  for (int j = 1; j <= n_g; ++j) h.push_back("g" + std::to_string(j) + "_meas");
  for (const char* c : {"K", "P", "eps_min", "variant"}) h.emplace_back(c);
  for (int j = 1; j <= n_g; ++j) h.push_back("d" + std::to_string(j));
  for (const char* c : {"binding", "event", "phi_star"}) h.emplace_back(c);
  for (int j = 1; j <= n_g; ++j) h.push_back("gbar" + std::to_string(j));
  for (int i = 1; i <= n_u; ++i) h.push_back("phi_lo" + std::to_string(i));
  for (int i = 1; i <= n_u; ++i) h.push_back("phi_hi" + std::to_string(i));
  for (int j = 1; j <= n_g; ++j) {
    for (int i = 1; i <= n_u; ++i) h.push_back("g" + std::to_string(j) + "_lo" + std::to_string(i));
    for (int i = 1; i <= n_u; ++i) h.push_back("g" + std::to_string(j) + "_hi" + std::to_string(i));
  }
  return h;
}

void write_trace_csv(std::ostream& os, const CampaignTrace& trace) {
  if (trace.records.empty()) throw std::invalid_argument("write_trace_csv: empty trace");
  const int n_u = static_cast<int>(trace.records.front().u.size());
  const int n_g = static_cast<int>(trace.records.front().g_meas.size());
  const auto header = trace_header(n_u, n_g);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : trace.records) {
    os << r.k;
    put_vec(os, r.u, n_u);
    os << ',' << num(r.phi_true);
    put_vec(os, r.g_true, n_g);
    os << ',' << num(r.phi_meas);
    put_vec(os, r.g_meas, n_g);
    os << ',' << num(r.K) << ',' << num(r.P) << ',' << num(r.eps_min) << ',' << r.variant;
    put_vec(os, r.slack_d, n_g);
    os << ',' << r.binding << ',' << r.event << ',' << num(r.phi_star);
    put_vec(os, r.g_upper, n_g);
    put_vec(os, r.cost_box.lo, n_u);
    put_vec(os, r.cost_box.hi, n_u);
    for (int j = 0; j < n_g; ++j) {
      const bool have = static_cast<int>(r.constraint_boxes.size()) > j;
      put_vec(os, have ? r.constraint_boxes[j].lo : Vector(), n_u);
      put_vec(os, have ? r.constraint_boxes[j].hi : Vector(), n_u);
    }
    os << '\n';
  }
}

void write_trace_csv(const std::string& path, const CampaignTrace& trace) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_trace_csv(f, trace);
  if (!f) throw std::runtime_error("failed writing " + path);
}

std::string trace_to_csv(const CampaignTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_csv: missing header");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_csv(f);
}

TraceSummary summarize_trace(const CsvTable& table, double violation_tol) {
  const int c_phi = table.column("phi_true");
  const int c_star = table.column("phi_star");
  if (c_phi < 0 || c_star < 0) throw std::runtime_error("trace lacks phi_true or phi_star");
  std::vector<int> g_cols;
  for (int j = 1;; ++j) {
    const int c = table.column("g" + std::to_string(j) + "_true");
    if (c < 0) break;
    g_cols.push_back(c);
  }
  TraceSummary s;
  s.max_g = -kInf;
  for (const auto& row : table.rows) {
    if (row.size() <= static_cast<std::size_t>(std::max(c_phi, c_star)) || row[c_phi].empty() ||
        row[c_star].empty()) {
      throw std::runtime_error("trace row lacks true cost values");
    }
    const double gap = std::stod(row[c_phi]) - std::stod(row[c_star]);
    s.loss += gap;
    s.final_phi_gap = gap;
    bool violated = false;
    for (int c : g_cols) {
      const double g = std::stod(row[c]);
      s.max_g = std::max(s.max_g, g);
      violated = violated || g > violation_tol;
    }
    s.violations += violated ? 1 : 0;
    ++s.iterations;
  }
  return s;
}

}  // namespace scfo
