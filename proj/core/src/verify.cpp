#include "scfo/verify.hpp"

#include "scfo/benchmark.hpp"
#include "scfo/trace_csv.hpp"

#include <algorithm>
#include <sstream>

namespace scfo {

int count_violations(const CampaignTrace& trace, double tol) {
  int n = 0;
  for (const auto& r : trace.records) {
    if (r.g_true.size() > 0 && r.g_true.maxCoeff() > tol) ++n;
  }
  return n;
}

int count_cost_increases(const CampaignTrace& trace, double tol) {
  int n = 0;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    const auto& a = trace.records[i];
    const auto& b = trace.records[i + 1];
    if (a.K > 0.0 && b.phi_true > a.phi_true + tol) ++n;
  }
  return n;
}

namespace {

const AlgorithmKind kKinds[] = {AlgorithmKind::IdealTarget, AlgorithmKind::GradientDescent,
                                AlgorithmKind::ModifierAdaptation, AlgorithmKind::TwoStep,
                                AlgorithmKind::RandomStep};

CheckResult check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const VerifyOptions& opts) {
  std::vector<CheckResult> out;
  for (const std::string prob : {"A", "B"}) {
    const RtoProblem& p = benchmark_problem(prob);
    for (AlgorithmKind kind : kKinds) {
      CampaignConfig cfg;
      cfg.algorithm.kind = kind;
      cfg.k_f = prob == "A" ? (opts.quick ? 100 : 1000) : 100;
      cfg.seed = opts.seed;
      const CampaignTrace t = run_campaign(p, cfg);
      const std::string tag = prob + "-" + to_string(kind);
      const int v = count_violations(t);
      out.push_back(check("feasibility " + tag, v == 0, std::to_string(v) + " violating iterates"));
      const int c = count_cost_increases(t);
      out.push_back(check("monotone cost " + tag, c == 0, std::to_string(c) + " cost increases"));
    }
  }

  {
    CampaignConfig cfg;
    cfg.algorithm.kind = AlgorithmKind::GradientDescent;
    cfg.impl = Implementation::III;
    cfg.sigma = 0.3;
    cfg.sigma_g = 0.01;
    cfg.k_f = 60;
    cfg.seed = opts.seed;
    const RtoProblem& p = benchmark_problem("B");
    const std::string a = trace_to_csv(run_campaign(p, cfg));
    const std::string b = trace_to_csv(run_campaign(p, cfg));
    out.push_back(check("determinism B-GD-III", a == b, a == b ? "identical traces" : "traces differ"));
  }

  for (const auto& cell : preset_grid("table7")) {
    if (cell.slack_l == 0.0) continue;
    const RtoProblem p = cell_problem(cell);
    CampaignConfig cfg = cell_config(cell, p);
    if (opts.quick) cfg.k_f = std::min(cfg.k_f, 200);
    cfg.seed = opts.seed;
    const CampaignTrace t = run_campaign(p, cfg);
    const auto vi = violation_integrals(t);
    bool ok = true;
    std::ostringstream detail;
    for (std::size_t j = 0; j < vi.size(); ++j) {
      ok = ok && vi[j] <= cfg.slack->d_total(static_cast<Eigen::Index>(j));
      detail << (j ? " " : "") << "g" << j + 1 << ":" << vi[j] << "/" << cfg.slack->d_total(static_cast<Eigen::Index>(j));
    }
    out.push_back(check("soft budget " + cell.label, ok, detail.str()));
  }
  return out;
}

}  // namespace scfo
