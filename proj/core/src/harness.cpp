#include "smartexam/harness.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "smartexam/dataset_io.hpp"
#include "smartexam/rng.hpp"

namespace smartexam {

UtilityValue participant_utility(const Trajectory& t) {
  if (t.r == 1)
    throw ConfigError("participant_utility: welfare metrics are defined over non-responders");
  if (!t.p2 || !t.lambda)
    throw ConfigError("participant_utility: non-responder row is missing p2 or lambda");
  double p_plus = t.a2 == 1 ? *t.p2 : 1.0 - *t.p2;
  int lam = *t.lambda;
  UtilityValue out;
  out.u = p_plus * lam + (1.0 - p_plus) * (1 - lam);
  out.k = (t.a2 == 1 ? lam : 1 - lam);
  return out;
}

namespace {

struct RepRecord {
  bool ok = false;
  std::array<double, 4> means{};
  std::array<double, 4> counts{};
  int selected = -1;  // index into all_dtrs()
  double value_of_selected = 0.0;
  double mean_u = 0.0;
  double mean_y_nonresp = 0.0;
};

ScalarStat summarize(const std::vector<double>& xs) {
  ScalarStat s;
  if (xs.empty()) return s;
  double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  s.value = mean;
  s.mc_se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  return s;
}

int dtr_index(const Dtr& d) {
  auto dtrs = all_dtrs();
  for (std::size_t j = 0; j < dtrs.size(); ++j)
    if (dtrs[j] == d) return static_cast<int>(j);
  return -1;
}

RepRecord run_one_replicate(const ScenarioConfig& config,
                            const std::array<double, 4>& true_values, std::uint64_t rep) {
  RepRecord rec;
  std::mt19937_64 rng = replicate_stream(config.seed, rep);

  Dataset data;
  switch (config.design.kind) {
    case DesignKind::Smart:
      data = gen_trial(config.model, config.design, config.n, nullptr, rng);
      break;
    case DesignKind::SmartExam: {
      Dataset pilot = gen_pilot(config.model, config.n_pilot, rng);
      QStageTwoFit fit = fit_q2(pilot, config.model.q2_features);
      data = gen_trial(config.model, config.design, config.n, &fit, rng);
      break;
    }
    case DesignKind::SmartArExam:
      data = run_ar_exam(config.model, config.design, config.n, rng);
      break;
  }

  auto estimates = estimate_all(data);
  Dtr selected = select_optimal(estimates);
  rec.selected = dtr_index(selected);
  rec.value_of_selected = true_values[static_cast<std::size_t>(rec.selected)];
  for (std::size_t j = 0; j < estimates.size(); ++j) {
    rec.means[j] = estimates[j].mean;
    rec.counts[j] = estimates[j].n_consistent;
  }

  double u_sum = 0.0, y_sum = 0.0;
  int n_nr = 0;
  for (const auto& t : data.rows) {
    if (t.r == 1) continue;
    u_sum += participant_utility(t).u;
    y_sum += t.y;
    ++n_nr;
  }
  if (n_nr == 0) throw RuntimeError("replicate produced no non-responders");
  rec.mean_u = u_sum / n_nr;
  rec.mean_y_nonresp = y_sum / n_nr;
  rec.ok = true;
  return rec;
}

}  // namespace

MetricSet run_replicates(const ScenarioConfig& config) {
  if (config.reps < 1) throw ConfigError("run_replicates: reps must be >= 1");
  if (config.n < 1) throw ConfigError("run_replicates: n must be >= 1");
  config.design.validate();
  if (config.design.kind == DesignKind::SmartExam && config.n_pilot < 1)
    throw ConfigError("run_replicates: smart-exam requires a pilot (n_pilot >= 1)");

  std::array<double, 4> true_values{};
  auto dtrs = all_dtrs();
  for (std::size_t j = 0; j < dtrs.size(); ++j)
    true_values[j] = true_dtr_value(config.model, dtrs[j]);
  Dtr d_star = true_optimal_dtr(config.model);
  int star_index = dtr_index(d_star);

  std::vector<RepRecord> records(static_cast<std::size_t>(config.reps));
  unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(config.reps));

  auto worker = [&](unsigned offset) {
    for (std::size_t r = offset; r < records.size(); r += n_threads) {
      try {
        records[r] = run_one_replicate(config, true_values, r);
      } catch (const Error&) {
        records[r].ok = false;
      }
    }
  };
  if (n_threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }

  int excluded = 0;
  for (const auto& r : records) excluded += r.ok ? 0 : 1;
  if (excluded > 0.01 * config.reps)
    throw RuntimeError("run_replicates: " + std::to_string(excluded) + " of " +
                       std::to_string(config.reps) + " replicates failed (limit 1%)");

  // Aggregation in fixed replicate order keeps results independent of the
  // thread schedule.
  std::vector<double> sel_value, correct, mean_u, mean_y;
  std::array<std::vector<double>, 4> sel_ind, counts, means;
  for (const auto& r : records) {
    if (!r.ok) continue;
    sel_value.push_back(r.value_of_selected);
    correct.push_back(r.selected == star_index ? 1.0 : 0.0);
    mean_u.push_back(r.mean_u);
    mean_y.push_back(r.mean_y_nonresp);
    for (std::size_t j = 0; j < 4; ++j) {
      sel_ind[j].push_back(r.selected == static_cast<int>(j) ? 1.0 : 0.0);
      counts[j].push_back(r.counts[j]);
      means[j].push_back(r.means[j]);
    }
  }

  MetricSet out;
  out.reps = config.reps;
  out.excluded = excluded;
  out.true_values = true_values;
  out.true_optimal = d_star;
  out.mean_value_of_selected = summarize(sel_value);
  out.prob_correct_selection = summarize(correct);
  out.mean_utility = summarize(mean_u);
  out.mean_outcome_nonresp = summarize(mean_y);
  for (std::size_t j = 0; j < 4; ++j) {
    out.selection_prob_per_dtr[j] = summarize(sel_ind[j]);
    out.mean_count_per_dtr[j] = summarize(counts[j]);
    out.mean_estimate_per_dtr[j] = summarize(means[j]);
    out.estimate_bias_per_dtr[j] = out.mean_estimate_per_dtr[j].value - true_values[j];
    double n_ok = static_cast<double>(means[j].size());
    out.estimate_se_per_dtr[j] =
        n_ok > 1 ? out.mean_estimate_per_dtr[j].mc_se * std::sqrt(n_ok) : 0.0;
  }
  return out;
}

std::vector<GridCell> scenario_grid(const ScenarioConfig& base, const GridAxes& axes,
                                    const ModelFactory& factory) {
  auto or_default = [](auto values, auto fallback) {
    if (values.empty()) values.push_back(fallback);
    return values;
  };
  auto ns = or_default(axes.n, base.n);
  auto pilots = or_default(axes.n_pilot, base.n_pilot);
  auto caps = or_default(axes.capacity_plus, base.design.capacity_fraction.plus);
  auto epsilons = or_default(axes.epsilon, base.design.epsilon);
  auto etas = or_default(axes.eta, base.design.eta);
  auto associations = or_default(axes.association, base.association);
  auto kinds = or_default(axes.kind, base.design.kind);

  std::vector<GridCell> cells;
  for (DesignKind kind : kinds)
    for (const std::string& assoc : associations)
      for (int n : ns)
        for (int n_pilot : pilots)
          for (double cap : caps)
            for (double eps : epsilons)
              for (double eta : etas) {
                GridCell cell;
                cell.config = base;
                cell.config.design.kind = kind;
                cell.config.association = assoc;
                if (factory) cell.config.model = factory(assoc);
                cell.config.n = n;
                cell.config.n_pilot = n_pilot;
                cell.config.design.capacity_fraction = ByArm<double>{1.0 - cap, cap};
                cell.config.design.epsilon = eps;
                cell.config.design.eta = eta;
                cell.config.label = to_string(kind) + " assoc=" + assoc +
                                    " N=" + std::to_string(n) +
                                    " Np=" + std::to_string(n_pilot) + " C=" + format_double(cap) +
                                    " eps=" + format_double(eps) + " eta=" + format_double(eta);
                try {
                  cell.metrics = run_replicates(cell.config);
                } catch (const Error& e) {
                  throw RuntimeError("scenario '" + cell.config.label + "': " + e.what());
                }
                cells.push_back(std::move(cell));
              }
  return cells;
}

namespace {

void append_row(std::string& csv, const GridCell& cell, const std::string& metric,
                const std::string& dtr, double value, double mc_se, bool with_se = true) {
  const auto& c = cell.config;
  csv += c.label + "," + to_string(c.design.kind) + "," + std::to_string(c.n) + "," +
         std::to_string(c.n_pilot) + "," + format_double(c.design.capacity_fraction.plus) + "," +
         format_double(c.design.epsilon) + "," + format_double(c.design.eta) + "," +
         c.association + "," + metric + "," + dtr + "," + format_double(value) + "," +
         (with_se ? format_double(mc_se) : "") + "\n";
}

}  // namespace

std::string metrics_to_csv(const std::vector<GridCell>& cells) {
  std::string csv =
      "label,kind,n,n_pilot,capacity_plus,epsilon,eta,association,metric,dtr,value,mc_se\n";
  auto dtrs = all_dtrs();
  for (const auto& cell : cells) {
    const MetricSet& m = cell.metrics;
    append_row(csv, cell, "mean_value_of_selected", "", m.mean_value_of_selected.value,
               m.mean_value_of_selected.mc_se);
    append_row(csv, cell, "prob_correct_selection", "", m.prob_correct_selection.value,
               m.prob_correct_selection.mc_se);
    append_row(csv, cell, "mean_utility", "", m.mean_utility.value, m.mean_utility.mc_se);
    append_row(csv, cell, "mean_outcome_nonresp", "", m.mean_outcome_nonresp.value,
               m.mean_outcome_nonresp.mc_se);
    append_row(csv, cell, "excluded_replicates", "", m.excluded, 0.0, false);
    for (std::size_t j = 0; j < 4; ++j) {
      std::string d = to_string(dtrs[j]);
      append_row(csv, cell, "true_value", d, m.true_values[j], 0.0, false);
      append_row(csv, cell, "selection_prob", d, m.selection_prob_per_dtr[j].value,
                 m.selection_prob_per_dtr[j].mc_se);
      append_row(csv, cell, "mean_estimate", d, m.mean_estimate_per_dtr[j].value,
                 m.mean_estimate_per_dtr[j].mc_se);
      append_row(csv, cell, "estimate_bias", d, m.estimate_bias_per_dtr[j], 0.0, false);
      append_row(csv, cell, "empirical_se", d, m.estimate_se_per_dtr[j], 0.0, false);
      append_row(csv, cell, "mean_count", d, m.mean_count_per_dtr[j].value,
                 m.mean_count_per_dtr[j].mc_se);
    }
  }
  return csv;
}

std::string metrics_to_json(const std::vector<GridCell>& cells) {
  nlohmann::json root = nlohmann::json::array();
  auto dtrs = all_dtrs();
  for (const auto& cell : cells) {
    const MetricSet& m = cell.metrics;
    nlohmann::json j;
    j["label"] = cell.config.label;
    j["kind"] = to_string(cell.config.design.kind);
    j["n"] = cell.config.n;
    j["n_pilot"] = cell.config.n_pilot;
    j["capacity_plus"] = cell.config.design.capacity_fraction.plus;
    j["epsilon"] = cell.config.design.epsilon;
    j["eta"] = cell.config.design.eta;
    j["association"] = cell.config.association;
    j["reps"] = m.reps;
    j["excluded"] = m.excluded;
    j["true_optimal"] = to_string(m.true_optimal);
    auto stat = [](const ScalarStat& s) {
      return nlohmann::json{{"value", s.value}, {"mc_se", s.mc_se}};
    };
    j["mean_value_of_selected"] = stat(m.mean_value_of_selected);
    j["prob_correct_selection"] = stat(m.prob_correct_selection);
    j["mean_utility"] = stat(m.mean_utility);
    j["mean_outcome_nonresp"] = stat(m.mean_outcome_nonresp);
    for (std::size_t k = 0; k < 4; ++k) {
      std::string d = to_string(dtrs[k]);
      j["per_dtr"][d] = {{"true_value", m.true_values[k]},
                         {"selection_prob", stat(m.selection_prob_per_dtr[k])},
                         {"mean_estimate", stat(m.mean_estimate_per_dtr[k])},
                         {"estimate_bias", m.estimate_bias_per_dtr[k]},
                         {"empirical_se", m.estimate_se_per_dtr[k]},
                         {"mean_count", stat(m.mean_count_per_dtr[k])}};
    }
    root.push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

}  // namespace smartexam
