#include "smartexam/effects.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace smartexam {

namespace {

int find_column(const std::vector<std::string>& names, const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

/// Shared OLS core for both stages: y ~ [main | interaction * treatment].
struct OlsResult {
  Eigen::VectorXd main_coef;
  Eigen::VectorXd inter_coef;
};

OlsResult solve_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                    const FeatureSpec& features) {
  const auto p0 = static_cast<Eigen::Index>(features.main_columns.size());
  const auto p1 = static_cast<Eigen::Index>(features.interaction_columns.size());
  if (design.rows() < p0 + p1)
    throw FitError("fit: " + std::to_string(design.rows()) + " rows cannot identify " +
                   std::to_string(p0 + p1) + " coefficients");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    // Columns permuted past the numerical rank are the dependent ones.
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < design.cols(); ++k) {
      Eigen::Index j = perm[k];
      const std::string& name = j < p0 ? features.main_columns[j]
                                       : features.interaction_columns[j - p0] + "*a";
      if (!cols.empty()) cols += ", ";
      cols += name;
    }
    throw FitError("fit: design matrix is rank deficient (collinear columns: " + cols + ")");
  }
  Eigen::VectorXd coef = qr.solve(y);
  return {coef.head(p0), coef.tail(p1)};
}

}  // namespace

double feature_value(const Dataset& data, const Trajectory& row, const std::string& name) {
  if (name == "intercept" || name == "1") return 1.0;
  if (name == "a1") return static_cast<double>(row.a1);
  if (int j = find_column(data.o2_names, name); j >= 0) {
    if (static_cast<std::size_t>(j) >= row.o2.size())
      throw SchemaError("feature '" + name + "' missing on this row");
    return row.o2[j];
  }
  if (int j = find_column(data.o1_names, name); j >= 0) {
    if (static_cast<std::size_t>(j) >= row.o1.size())
      throw SchemaError("feature '" + name + "' missing on this row");
    return row.o1[j];
  }
  throw SchemaError("unknown feature column '" + name + "'");
}

Eigen::VectorXd feature_vector(const Dataset& data, const Trajectory& row,
                               const std::vector<std::string>& columns) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j)
    v[static_cast<Eigen::Index>(j)] = feature_value(data, row, columns[j]);
  return v;
}

QStageTwoFit fit_q2(const Dataset& data, const FeatureSpec& features) {
  if (features.main_columns.empty() || features.interaction_columns.empty())
    throw ConfigError("fit_q2: feature lists must be non-empty");
  std::vector<const Trajectory*> rows;
  for (const auto& t : data.rows)
    if (t.r == 0) rows.push_back(&t);
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p0 = static_cast<Eigen::Index>(features.main_columns.size());
  const auto p1 = static_cast<Eigen::Index>(features.interaction_columns.size());
  Eigen::MatrixXd design(n, p0 + p1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Trajectory& t = *rows[i];
    design.row(i).head(p0) = feature_vector(data, t, features.main_columns).transpose();
    design.row(i).tail(p1) =
        (feature_vector(data, t, features.interaction_columns) * static_cast<double>(t.a2))
            .transpose();
    y[i] = t.y;
  }
  OlsResult sol = solve_ols(design, y, features);
  return QStageTwoFit{std::move(sol.main_coef), std::move(sol.inter_coef), features,
                      static_cast<std::size_t>(n)};
}

double predict_effect(const QStageTwoFit& fit, const Eigen::VectorXd& h21, int a2e) {
  if (h21.size() != fit.alpha2.size())
    throw SchemaError("predict_effect: feature vector length mismatch");
  if (!valid_arm(a2e)) throw ConfigError("predict_effect: a2e must be -1 or +1");
  return 2.0 * a2e * fit.alpha2.dot(h21);
}

double predict_effect(const QStageTwoFit& fit, const Dataset& data, const Trajectory& row,
                      int a2e) {
  return predict_effect(fit, feature_vector(data, row, fit.features.interaction_columns), a2e);
}

std::vector<double> normalize(const std::vector<double>& raw) {
  if (raw.empty()) throw ConfigError("normalize: empty input");
  const auto n = static_cast<double>(raw.size());
  if (raw.size() == 1) return {0.0};
  double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : raw) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (n - 1.0));
  std::vector<double> out(raw.size());
  if (sd == 0.0) return std::vector<double>(raw.size(), 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - mean) / sd;
  return out;
}

EffectEstimates bin(const std::vector<double>& normalized, int bins) {
  if (bins < 1) throw ConfigError("bin: bins must be >= 1");
  if (normalized.empty()) throw ConfigError("bin: empty input");
  const int n = static_cast<int>(normalized.size());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return normalized[a] < normalized[b]; });

  // Nominal cut positions for groups whose sizes differ by at most one,
  // larger groups first; each cut then slides past any tie run it would split.
  const int b = std::min(bins, n);
  std::vector<int> cuts(b);
  int base = n / b, rem = n % b, pos = 0;
  for (int k = 0; k < b; ++k) {
    pos += base + (k < rem ? 1 : 0);
    cuts[k] = pos;
  }
  for (int k = 0; k + 1 < b; ++k) {
    int& c = cuts[k];
    while (c < n && c > 0 && normalized[order[c - 1]] == normalized[order[c]]) ++c;
    if (k + 1 < b) cuts[k + 1] = std::max(cuts[k + 1], c);
  }

  EffectEstimates est;
  est.bins = bins;
  est.normalized = normalized;
  est.binned.resize(n);
  int start = 0;
  double prev_last = 0.0;
  for (int k = 0; k < b; ++k) {
    int end = cuts[k];
    if (end > start) {
      double sum = 0.0;
      for (int i = start; i < end; ++i) sum += normalized[order[i]];
      double mean = sum / (end - start);
      for (int i = start; i < end; ++i) est.binned[order[i]] = mean;
      if (!est.bin_means.empty())
        est.bin_edges.push_back(0.5 * (prev_last + normalized[order[start]]));
      est.bin_means.push_back(mean);
      prev_last = normalized[order[end - 1]];
    }
    start = end;
  }
  return est;
}

EffectEstimates make_effect_estimates(const std::vector<double>& raw, int bins) {
  EffectEstimates est = bin(normalize(raw), bins);
  est.raw = raw;
  return est;
}

std::vector<double> pseudo_outcome(const QStageTwoFit& fit, const Dataset& data) {
  std::vector<double> out;
  out.reserve(data.rows.size());
  for (const auto& t : data.rows) {
    if (t.r == 1) {
      out.push_back(t.y);
    } else {
      double main = fit.gamma2.dot(feature_vector(data, t, fit.features.main_columns));
      double inter = fit.alpha2.dot(feature_vector(data, t, fit.features.interaction_columns));
      out.push_back(main + std::abs(inter));
    }
  }
  return out;
}

QStageOneFit fit_q1(const Dataset& data, const std::vector<double>& pseudo,
                    const FeatureSpec& features) {
  if (features.main_columns.empty() || features.interaction_columns.empty())
    throw ConfigError("fit_q1: feature lists must be non-empty");
  if (pseudo.size() != data.rows.size())
    throw ConfigError("fit_q1: pseudo-outcome length mismatch");
  const auto n = static_cast<Eigen::Index>(data.rows.size());
  const auto p0 = static_cast<Eigen::Index>(features.main_columns.size());
  const auto p1 = static_cast<Eigen::Index>(features.interaction_columns.size());
  Eigen::MatrixXd design(n, p0 + p1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Trajectory& t = data.rows[static_cast<std::size_t>(i)];
    design.row(i).head(p0) = feature_vector(data, t, features.main_columns).transpose();
    design.row(i).tail(p1) =
        (feature_vector(data, t, features.interaction_columns) * static_cast<double>(t.a1))
            .transpose();
    y[i] = pseudo[static_cast<std::size_t>(i)];
  }
  OlsResult sol = solve_ols(design, y, features);
  return QStageOneFit{std::move(sol.main_coef), std::move(sol.inter_coef), features,
                      static_cast<std::size_t>(n)};
}

double predict_stage1_effect(const QStageOneFit& fit, const Eigen::VectorXd& h11, int a1e) {
  if (h11.size() != fit.alpha1.size())
    throw SchemaError("predict_stage1_effect: feature vector length mismatch");
  if (!valid_arm(a1e)) throw ConfigError("predict_stage1_effect: a1e must be -1 or +1");
  return 2.0 * a1e * fit.alpha1.dot(h11);
}

double predict_stage1_effect(const QStageOneFit& fit, const Dataset& data, const Trajectory& row,
                             int a1e) {
  return predict_stage1_effect(fit, feature_vector(data, row, fit.features.interaction_columns),
                               a1e);
}

std::string effect_model_to_json(const QStageTwoFit& stage2, const QStageOneFit* stage1,
                                 const EffectEstimates* binning) {
  nlohmann::json j;
  j["schema_version"] = 1;
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["stage2"] = {{"main_columns", stage2.features.main_columns},
                 {"interaction_columns", stage2.features.interaction_columns},
                 {"gamma2", vec(stage2.gamma2)},
                 {"alpha2", vec(stage2.alpha2)},
                 {"n_fit", stage2.n_fit}};
  if (stage1) {
    j["stage1"] = {{"main_columns", stage1->features.main_columns},
                   {"interaction_columns", stage1->features.interaction_columns},
                   {"gamma1", vec(stage1->gamma1)},
                   {"alpha1", vec(stage1->alpha1)},
                   {"n_fit", stage1->n_fit}};
  }
  if (binning) {
    j["binning"] = {{"bins", binning->bins},
                    {"edges", binning->bin_edges},
                    {"means", binning->bin_means}};
  }
  return j.dump(2) + "\n";
}

QStageTwoFit effect_model_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("effect model: invalid JSON: ") + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
    throw SchemaError("effect model: unsupported schema_version");
  if (!j.contains("stage2")) throw SchemaError("effect model: missing stage2 block");
  const auto& s2 = j["stage2"];
  for (const auto& key : {"main_columns", "interaction_columns", "gamma2", "alpha2"})
    if (!s2.contains(key)) throw SchemaError(std::string("effect model: stage2 missing ") + key);
  QStageTwoFit fit;
  fit.features.main_columns = s2["main_columns"].get<std::vector<std::string>>();
  fit.features.interaction_columns = s2["interaction_columns"].get<std::vector<std::string>>();
  auto g = s2["gamma2"].get<std::vector<double>>();
  auto a = s2["alpha2"].get<std::vector<double>>();
  if (g.size() != fit.features.main_columns.size() ||
      a.size() != fit.features.interaction_columns.size())
    throw SchemaError("effect model: coefficient lengths do not match feature columns");
  fit.gamma2 = Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
  fit.alpha2 = Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  fit.n_fit = s2.value("n_fit", 0u);
  return fit;
}

}  // namespace smartexam
