#include "scfo/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace scfo {

const char* to_string(Implementation impl) {
  switch (impl) {
    case Implementation::I:
      return "I";
    case Implementation::II:
      return "II";
    case Implementation::III:
      return "III";
    case Implementation::IV:
      return "IV";
  }
  return "?";
}

Implementation parse_implementation(const std::string& s) {
  if (s == "I" || s == "1") return Implementation::I;
  if (s == "II" || s == "2") return Implementation::II;
  if (s == "III" || s == "3") return Implementation::III;
  if (s == "IV" || s == "4") return Implementation::IV;
  throw std::invalid_argument("unknown implementation: " + s);
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

}  // namespace

NoiseStreams::NoiseStreams(std::uint64_t seed)
    : gradient_(stream(seed, 1)), constraint_(stream(seed, 2)), algorithm_(stream(seed, 3)) {}

Vector inject_gradient_noise(const Vector& true_grad, const Vector& kappa_row, double sigma,
                             std::mt19937_64& rng) {
  require_same_size(true_grad, kappa_row, "inject_gradient_noise");
  if (sigma < 0.0) throw std::invalid_argument("inject_gradient_noise: negative sigma");
  if (sigma == 0.0) return true_grad;
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vector g = true_grad;
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) += sigma * kappa_row(i) * U(rng);
  return g;
}

Vector inject_constraint_noise(const Vector& true_g, double sigma_g, const Vector& eps_bar,
                               std::mt19937_64& rng, double truncate) {
  require_same_size(true_g, eps_bar, "inject_constraint_noise");
  if (sigma_g < 0.0) throw std::invalid_argument("inject_constraint_noise: negative sigma");
  if (sigma_g == 0.0) return true_g;
  std::normal_distribution<double> N(0.0, 1.0);
  Vector g = true_g;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    double z = N(rng);
    if (truncate > 0.0) z = std::clamp(z, -truncate, truncate);
    g(j) += sigma_g * eps_bar(j) * z;
  }
  return g;
}

namespace {

Matrix symmetric_kappa(const LipschitzTable& lip) {
  return lip.kappa_lo.cwiseAbs().cwiseMax(lip.kappa_hi.cwiseAbs());
}

struct Estimator {
  const RtoProblem& problem;
  const CampaignConfig& cfg;
  Matrix kappa;

  // Fills the gradient estimates and boxes of `st` at st.u with noise scale sigma.
  void estimate(IterateState& st, double sigma, std::mt19937_64& rng) const {
    const Implementation impl = cfg.impl;
    const double s = impl == Implementation::I ? 0.0 : sigma;
    const Vector cost_true = problem.cost_gradient(st.u, st.k);
    const Vector cost_est = inject_gradient_noise(cost_true, problem.cost_kappa, s, rng);
    st.cost_box = impl == Implementation::III ? build_gradient_box(cost_est, problem.cost_kappa, s)
                                              : GradientBox::exact(cost_est);
    st.constraint_boxes.assign(static_cast<std::size_t>(problem.n_g), GradientBox{});
    st.constraint_sigma.assign(static_cast<std::size_t>(problem.n_g), Vector::Zero(problem.n_u));
    for (int j = 0; j < problem.n_g; ++j) {
      const Vector gt = problem.constraint_gradient(j, st.u);
      if (problem.is_known(j)) {
        st.constraint_boxes[j] = GradientBox::exact(gt);
        continue;
      }
      const Vector row = kappa.row(j).transpose();
      const Vector ge = inject_gradient_noise(gt, row, s, rng);
      st.constraint_boxes[j] = impl == Implementation::III ? build_gradient_box(ge, row, s)
                                                           : GradientBox::exact(ge);
      if (impl == Implementation::IV) st.constraint_sigma[j] = Vector::Ones(problem.n_u);
    }
    st.cost_sigma = impl == Implementation::IV ? Vector(Vector::Ones(problem.n_u))
                                               : Vector(Vector::Zero(problem.n_u));
  }
};

void fill_truth(TraceRecord& rec, const HistoryEntry& e, const RtoProblem& problem, int k) {
  rec.k = k;
  rec.u = e.u;
  rec.phi_meas = e.phi_meas;
  rec.g_meas = e.g_meas;
  rec.g_upper = e.g_upper;
  if (e.truth) {
    rec.phi_true = e.truth->phi;
    rec.g_true = e.truth->g;
  }
  if (const PlantOptimum* opt = problem.optimum_at(k)) rec.phi_star = opt->phi;
}

}  // namespace

CampaignTrace run_campaign(const RtoProblem& problem, const CampaignConfig& cfg) {
  problem.validate();
  if (cfg.k_f < 0) throw std::invalid_argument("run_campaign: negative k_f");
  if (cfg.sigma < 0.0 || cfg.sigma_g < 0.0) throw std::invalid_argument("run_campaign: negative noise");

  SupervisorConfig sup = cfg.supervisor;
  if (sup.params.eps.size() == 0) {
    sup.params = ProjectionParams::from_ranges(problem.constraint_ranges, problem.cost_range);
  }
  sup.m_mode = cfg.impl == Implementation::IV;
  sup.validate();

  const NoiseModel noise = cfg.sigma_g > 0.0
                               ? NoiseModel::gaussian(problem.constraint_ranges, cfg.sigma_g)
                               : NoiseModel::noise_free(problem.n_g);
  const double truncate = cfg.truncate_constraint_noise ? 3.0 : 0.0;
  NoiseStreams rng(cfg.seed);
  const Estimator est{problem, cfg, symmetric_kappa(problem.lipschitz)};

  IterateState st;
  st.u = problem.u0;
  st.slack = cfg.slack ? *cfg.slack : SlackState::hard(problem.n_g);
  st.slack.validate();
  if (st.slack.size() != problem.n_g) throw DimensionError("run_campaign: slack size");
  st.prior_slack = Vector::Zero(problem.n_g);
  st.qbound = QBoundState::fixed(cfg.q_bound ? *cfg.q_bound : problem.q_bound);
  st.qbound.adaptive = cfg.adaptive_q;

  CampaignTrace trace;
  trace.problem = problem.name;
  trace.records.reserve(static_cast<std::size_t>(cfg.k_f) + 1);
  std::vector<double> cost_history;
  bool converged = false;

  for (int k = 0; k <= cfg.k_f; ++k) {
    st.k = k;
    const double phi = problem.cost(st.u, k);
    const Vector G = problem.constraint_values(st.u);
    Vector g_meas = inject_constraint_noise(G, cfg.sigma_g, problem.constraint_ranges,
                                            rng.constraint(), truncate);
    for (int j = 0; j < problem.n_g; ++j) {
      if (problem.is_known(j)) g_meas(j) = G(j);
    }

    HistoryEntry entry;
    entry.k = k;
    entry.u = st.u;
    entry.g_meas = g_meas;
    entry.phi_meas = phi;
    if (!st.history.empty() && st.history.back().u == st.u) {
      entry.repeat_count = st.history.back().repeat_count + 1;
    }
    if (!cfg.real_plant_mode) entry.truth = Truth{phi, G};
    st.history.push_back(std::move(entry));

    st.g_upper.resize(problem.n_g);
    for (int j = 0; j < problem.n_g; ++j) {
      st.g_upper(j) = problem.is_known(j)
                          ? G(j)
                          : constraint_upper_bound(j, st, noise, problem.lipschitz, cfg.bound_options);
    }
    st.history.back().g_upper = st.g_upper;
    st.slack = slack_step(st.slack, st.g_upper);
    cost_history.push_back(phi);
    st.qbound = adapt_qbound(st.qbound, cost_history, 0.0);
    est.estimate(st, cfg.sigma, rng.gradient());

    TraceRecord rec;
    fill_truth(rec, st.history.back(), problem, k);
    rec.slack_d = st.slack.d;
    rec.cost_box = st.cost_box;
    rec.constraint_boxes = st.constraint_boxes;
    rec.eps_min = sup.params.eps_ceiling.size() > 0 ? sup.params.eps_ceiling.minCoeff() : 0.0;

    if (k == cfg.k_f) {
      rec.K = 0.0;
      rec.P = 1.0;
      rec.variant = "none";
      rec.binding = "final";
      trace.records.push_back(std::move(rec));
      break;
    }
    if (converged) {
      rec.K = 0.0;
      rec.variant = "converged";
      rec.binding = "null";
      st.history.back().constraint_boxes = st.constraint_boxes;
      trace.records.push_back(std::move(rec));
      continue;
    }

    const Vector target = next_target(cfg.algorithm, st, problem, rng.algorithm());

    std::optional<IterateState> fallback;
    std::string event;
    if (st.slack.any_soft() && needs_fallback(st.g_upper, st.slack)) {
      const int idx = fallback_reference(st, st.slack);
      const HistoryEntry& h = st.history[static_cast<std::size_t>(idx)];
      fallback = st;
      fallback->u = h.u;
      fallback->g_upper = h.g_upper;
      est.estimate(*fallback, cfg.sigma, rng.gradient());
      event = "fallback";
    }
    IterateState& ref = fallback ? *fallback : st;

    IterationOutcome out = run_iteration(ref, target, sup, problem);
    double sigma_eff = cfg.sigma;
    int attempts = 0;
    while (out.status == IterationStatus::PerturbationRequested) {
      if (attempts >= cfg.max_perturbations || sigma_eff == 0.0 || cfg.impl == Implementation::I) break;
      ++attempts;
      sigma_eff *= 0.5;
      est.estimate(ref, sigma_eff, rng.gradient());
      out = run_iteration(ref, target, sup, problem);
    }
    if (attempts > 0) event += event.empty() ? "perturbed" : ";perturbed";
    for (const auto& e : out.diag.events) event += (event.empty() ? "" : ";") + e;
    if (out.status == IterationStatus::Converged) converged = true;
    if (out.status != IterationStatus::Stepped) out.u_next = st.u;

    st.history.back().constraint_boxes =
        out.diag.full_constraint_boxes.empty() || fallback ? st.constraint_boxes : out.diag.full_constraint_boxes;

    rec.K = out.diag.K;
    rec.P = out.diag.P;
    rec.eps_min = out.diag.eps.size() > 0 ? out.diag.eps.minCoeff() : rec.eps_min;
    rec.variant = out.diag.variant;
    rec.binding = out.diag.binding;
    rec.event = event;
    if (!out.diag.constraint_boxes.empty()) {
      rec.cost_box = out.diag.cost_box;
      rec.constraint_boxes = out.diag.constraint_boxes;
    }
    trace.records.push_back(std::move(rec));

    st.prior_slack = st.slack.d;
    st.u = problem.box.clip(out.u_next);
  }
  return trace;
}

}  // namespace scfo
