#include "smartexam/estimators.hpp"

#include <cmath>

namespace smartexam {

double ipw_weight(const Trajectory& t, const Dtr& d) {
  if (t.a1 != d.d1) return 0.0;
  if (t.r == 1) return 1.0 / t.p1;
  if (t.a2 != d.d2) return 0.0;
  if (!t.p2) throw ConfigError("ipw: non-responder row is missing p2");
  return 1.0 / (t.p1 * *t.p2);
}

double ipw_mean(const Dataset& data, const Dtr& d) {
  double num = 0.0, den = 0.0;
  for (const auto& t : data.rows) {
    double w = ipw_weight(t, d);
    num += w * t.y;
    den += w;
  }
  if (den <= 0.0)
    throw NoSupportError("ipw: no trajectory consistent with regime " + to_string(d));
  return num / den;
}

double ipw_variance(const Dataset& data, const Dtr& d, double mean) {
  double ss = 0.0;
  for (const auto& t : data.rows) {
    double term = ipw_weight(t, d) * (t.y - mean);
    ss += term * term;
  }
  double n = static_cast<double>(data.rows.size());
  return ss / (n * n);
}

DtrEstimate estimate_dtr(const Dataset& data, const Dtr& d) {
  DtrEstimate est;
  est.dtr = d;
  double num = 0.0;
  for (const auto& t : data.rows) {
    double w = ipw_weight(t, d);
    num += w * t.y;
    est.weight_sum += w;
    est.n_consistent += consistent_with(t, d);
  }
  if (est.weight_sum <= 0.0)
    throw NoSupportError("ipw: no trajectory consistent with regime " + to_string(d));
  est.mean = num / est.weight_sum;
  est.variance = ipw_variance(data, d, est.mean);
  return est;
}

std::array<DtrEstimate, 4> estimate_all(const Dataset& data) {
  std::array<DtrEstimate, 4> out;
  auto dtrs = all_dtrs();
  for (std::size_t j = 0; j < dtrs.size(); ++j) out[j] = estimate_dtr(data, dtrs[j]);
  return out;
}

Dtr select_optimal(const std::array<DtrEstimate, 4>& estimates) {
  // Scan in ascending (d1, d2) order with a strict comparison, so exact ties
  // keep the lexicographically smallest regime.
  const DtrEstimate* best = nullptr;
  for (const auto& d : all_dtrs()) {
    const DtrEstimate* e = nullptr;
    for (const auto& cand : estimates)
      if (cand.dtr == d) e = &cand;
    if (!e) throw ConfigError("select_optimal: estimates must cover all four regimes");
    if (!best || e->mean > best->mean) best = e;
  }
  return best->dtr;
}

namespace {

void check_moments(const TheoreticalMoments& m) {
  if (!(m.p1 > 0.0) || !(m.pi_resp >= 0.0 && m.pi_resp <= 1.0))
    throw ConfigError("moments: probabilities out of range");
  if (m.group_probs.size() != m.p2_by_group.size() ||
      m.group_probs.size() != m.mu_by_group.size() ||
      m.group_probs.size() != m.sigma2_by_group.size())
    throw ConfigError("moments: per-group vectors differ in length");
  if (m.pi_resp < 1.0) {
    for (double p : m.p2_by_group)
      if (!(p > 0.0)) throw NoSupportError("moments: zero stage-2 probability violates positivity");
  }
}

}  // namespace

double asymptotic_variance(const TheoreticalMoments& m, double mu_dtr) {
  check_moments(m);
  double resp_dev = mu_dtr - m.mu_resp;
  double out = m.pi_resp / m.p1 * (m.sigma2_resp + resp_dev * resp_dev);
  for (std::size_t g = 0; g < m.group_probs.size(); ++g) {
    double dev = mu_dtr - m.mu_by_group[g];
    out += (1.0 - m.pi_resp) * m.group_probs[g] / (m.p1 * m.p2_by_group[g]) *
           (m.sigma2_by_group[g] + dev * dev);
  }
  return out;
}

double dtr_covariance(const TheoreticalMoments& m, const Dtr& a, const Dtr& b, double mu_a,
                      double mu_b) {
  if (a.d1 != b.d1)
    throw ConfigError("dtr_covariance: regimes must share the same stage-1 treatment");
  if (!(m.p1 > 0.0)) throw ConfigError("moments: p1 must be positive");
  return m.pi_resp / m.p1 *
         (m.sigma2_resp + (m.mu_resp - mu_a) * (m.mu_resp - mu_b));
}

}  // namespace smartexam
