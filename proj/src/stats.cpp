#include "scopeprobe/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "scopeprobe/errors.hpp"

namespace scopeprobe::stats {

namespace {

constexpr double kSeparationRidge = 1e-6;
constexpr double kBootstrapRidge = 1e-10;
constexpr double kSeparationThreshold = 15.0;  // |log-odds| beyond any sane fit

Eigen::MatrixXd to_matrix(const Design& design) {
  const std::size_t n = design.columns.empty() ? 0 : design.columns[0].size();
  Eigen::MatrixXd X(n, design.columns.size());
  for (std::size_t c = 0; c < design.columns.size(); ++c) {
    for (std::size_t r = 0; r < n; ++r) X(r, c) = design.columns[c][r];
  }
  return X;
}

std::vector<std::string> sorted_levels(const std::vector<DataRow>& rows,
                                       const std::string& factor) {
  std::set<std::string> levels;
  for (const auto& row : rows) {
    const auto it = row.factors.find(factor);
    if (it == row.factors.end()) {
      throw StatsError("row missing factor \"" + factor + "\"");
    }
    levels.insert(it->second);
  }
  return {levels.begin(), levels.end()};
}

// Sum-coded columns for one factor: level j of k maps to column c as
// +1 (j==c), -1 (j==k-1), else 0.
std::vector<std::vector<double>> factor_columns(
    const std::vector<DataRow>& rows, const std::string& factor,
    const std::vector<std::string>& levels) {
  const std::size_t k = levels.size();
  std::vector<std::vector<double>> cols(k - 1,
                                        std::vector<double>(rows.size(), 0.0));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string& level = rows[r].factors.at(factor);
    const auto it = std::find(levels.begin(), levels.end(), level);
    const std::size_t j = static_cast<std::size_t>(it - levels.begin());
    for (std::size_t c = 0; c + 1 < k; ++c) {
      cols[c][r] = j == c ? 1.0 : (j == k - 1 ? -1.0 : 0.0);
    }
  }
  return cols;
}

std::string formula_text(const ModelSpec& spec) {
  std::string f = "response ~ 1";
  for (const auto& m : spec.main_effects) f += " + " + m;
  for (const auto& [a, b] : spec.interactions) f += " + " + a + ":" + b;
  return f;
}

void check_spec(const std::vector<DataRow>& rows, const ModelSpec& spec) {
  if (rows.empty()) throw StatsError("no data rows");
  for (const auto& factor : spec.main_effects) {
    if (sorted_levels(rows, factor).size() < 2) {
      throw StatsError("factor \"" + factor + "\" has fewer than 2 levels");
    }
  }
  // every cell of the main-effect cross needs at least one record
  if (spec.main_effects.size() >= 2) {
    std::map<std::vector<std::string>, int> cells;
    for (const auto& row : rows) {
      std::vector<std::string> key;
      for (const auto& f : spec.main_effects) key.push_back(row.factors.at(f));
      cells[key]++;
    }
    std::vector<std::vector<std::string>> level_sets;
    for (const auto& f : spec.main_effects) {
      level_sets.push_back(sorted_levels(rows, f));
    }
    std::vector<std::size_t> idx(level_sets.size(), 0);
    while (true) {
      std::vector<std::string> key;
      for (std::size_t d = 0; d < idx.size(); ++d) {
        key.push_back(level_sets[d][idx[d]]);
      }
      if (!cells.count(key)) {
        std::string cell;
        for (std::size_t d = 0; d < key.size(); ++d) {
          if (d) cell += " x ";
          cell += spec.main_effects[d] + "=" + key[d];
        }
        throw StatsError("empty cell: " + cell);
      }
      std::size_t d = 0;
      for (; d < idx.size(); ++d) {
        if (++idx[d] < level_sets[d].size()) break;
        idx[d] = 0;
      }
      if (d == idx.size()) break;
    }
  }
}

struct LinearFit {
  Eigen::VectorXd beta;
  double rss = 0.0;
};

// Least squares via column-pivoted QR; optionally reports aliased columns.
LinearFit solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const std::vector<std::string>* names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    if (names) {
      const auto& perm = qr.colsPermutation().indices();
      std::vector<std::string> aliased;
      for (Eigen::Index i = qr.rank(); i < X.cols(); ++i) {
        aliased.push_back((*names)[static_cast<std::size_t>(perm[i])]);
      }
      std::sort(aliased.begin(), aliased.end());
      std::string msg = "rank-deficient design; aliased columns:";
      for (const auto& a : aliased) msg += " " + a;
      throw StatsError(msg);
    }
    throw StatsError("rank-deficient design");
  }
  LinearFit fit;
  fit.beta = qr.solve(y);
  fit.rss = (y - X * fit.beta).squaredNorm();
  return fit;
}

// Ridge-stabilized solve for bootstrap replicates, where resampling can
// drop a factor level and degrade the design.
Eigen::VectorXd solve_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            double ridge) {
  Eigen::MatrixXd xtx = X.transpose() * X;
  xtx.diagonal().array() += ridge;
  return xtx.ldlt().solve(X.transpose() * y);
}

// IRLS for logistic regression. Returns coefficients; sets `converged`.
Eigen::VectorXd irls_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              double ridge, bool* converged, int max_iter = 50) {
  const Eigen::Index p = X.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  *converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd mu(eta.size());
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double m = 1.0 / (1.0 + std::exp(-eta[i]));
      mu[i] = m;
      w[i] = std::max(m * (1.0 - m), 1e-10);
    }
    // working response z = eta + (y - mu) / w
    Eigen::VectorXd z = eta;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += (y[i] - mu[i]) / w[i];

    Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
    xtwx.diagonal().array() += ridge;
    const Eigen::VectorXd rhs = X.transpose() * (w.asDiagonal() * z);
    const Eigen::VectorXd next = xtwx.ldlt().solve(rhs);
    const double delta = (next - beta).lpNorm<Eigen::Infinity>();
    beta = next;
    if (delta < 1e-10) {
      *converged = true;
      break;
    }
  }
  return beta;
}

// Two-sided percentile bootstrap p-value for H0: parameter = 0.
double bootstrap_p(const std::vector<double>& draws) {
  const double n = static_cast<double>(draws.size());
  double le = 0.0, ge = 0.0;
  for (const double d : draws) {
    if (d <= 0.0) le += 1.0;
    if (d >= 0.0) ge += 1.0;
  }
  const double p = 2.0 * std::min((le + 1.0) / (n + 1.0), (ge + 1.0) / (n + 1.0));
  return std::min(1.0, p);
}

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (xs.size() - 1));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Shared driver: full fit + item-clustered bootstrap.
RegressionResult fit_model(const std::vector<DataRow>& rows,
                           const ModelSpec& spec, int n_boot,
                           std::uint64_t seed, bool logistic) {
  check_spec(rows, spec);
  const Design design = build_design(rows, spec);
  const Eigen::MatrixXd X = to_matrix(design);
  Eigen::VectorXd y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = rows[i].response;
    if (logistic && rows[i].response != 0.0 && rows[i].response != 1.0) {
      throw StatsError("logistic response must be 0 or 1");
    }
  }

  RegressionResult result;
  result.formula = formula_text(spec);
  result.names = design.names;
  result.factor_levels = design.factor_levels;
  result.n_boot = n_boot;
  result.seed = seed;
  result.degenerate = (y.maxCoeff() == y.minCoeff());

  Eigen::VectorXd beta;
  if (logistic) {
    bool converged = false;
    beta = irls_logistic(X, y, 0.0, &converged);
    const bool separated =
        !converged || beta.lpNorm<Eigen::Infinity>() > kSeparationThreshold;
    if (separated) {
      result.separation = true;
      beta = irls_logistic(X, y, kSeparationRidge, &converged, 200);
    }
  } else {
    beta = solve_least_squares(X, y, &design.names).beta;
  }

  // cluster bootstrap over items
  std::vector<std::string> items;
  {
    std::set<std::string> uniq;
    for (const auto& row : rows) uniq.insert(row.cluster_id);
    items.assign(uniq.begin(), uniq.end());
  }
  std::unordered_map<std::string, std::vector<Eigen::Index>> item_rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    item_rows[rows[i].cluster_id].push_back(static_cast<Eigen::Index>(i));
  }

  const Eigen::Index p = X.cols();
  result.boot_draws.assign(static_cast<std::size_t>(p), {});
  for (auto& d : result.boot_draws) d.reserve(static_cast<std::size_t>(n_boot));

  for (int rep = 0; rep < n_boot; ++rep) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(rep)));
    std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);
    std::vector<Eigen::Index> sel;
    sel.reserve(rows.size());
    for (std::size_t k = 0; k < items.size(); ++k) {
      for (const Eigen::Index r : item_rows[items[pick(rng)]]) sel.push_back(r);
    }
    Eigen::MatrixXd Xb(static_cast<Eigen::Index>(sel.size()), p);
    Eigen::VectorXd yb(static_cast<Eigen::Index>(sel.size()));
    for (std::size_t i = 0; i < sel.size(); ++i) {
      Xb.row(static_cast<Eigen::Index>(i)) = X.row(sel[i]);
      yb[static_cast<Eigen::Index>(i)] = y[sel[i]];
    }
    Eigen::VectorXd bb;
    if (logistic) {
      bool conv = false;
      bb = irls_logistic(Xb, yb, 0.0, &conv);
      if (!conv || bb.lpNorm<Eigen::Infinity>() > kSeparationThreshold) {
        bb = irls_logistic(Xb, yb, kSeparationRidge, &conv, 200);
      }
    } else {
      bb = solve_ridge(Xb, yb, kBootstrapRidge);
    }
    for (Eigen::Index c = 0; c < p; ++c) {
      result.boot_draws[static_cast<std::size_t>(c)].push_back(bb[c]);
    }
  }

  result.coefficients.resize(static_cast<std::size_t>(p));
  for (Eigen::Index c = 0; c < p; ++c) {
    auto& coef = result.coefficients[static_cast<std::size_t>(c)];
    coef.estimate = beta[c];
    const auto& draws = result.boot_draws[static_cast<std::size_t>(c)];
    coef.std_error = sample_sd(draws);
    coef.p_value = draws.empty() ? 1.0 : bootstrap_p(draws);
  }
  return result;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

Design build_design(const std::vector<DataRow>& rows, const ModelSpec& spec) {
  if (rows.empty()) throw StatsError("no data rows");
  Design design;
  design.columns.push_back(std::vector<double>(rows.size(), 1.0));
  design.names.push_back("(Intercept)");

  std::map<std::string, std::vector<std::vector<double>>> factor_cols;
  const auto ensure_factor = [&](const std::string& factor) {
    if (design.factor_levels.count(factor)) return;
    const auto levels = sorted_levels(rows, factor);
    if (levels.size() < 2) {
      throw StatsError("factor \"" + factor + "\" has fewer than 2 levels");
    }
    design.factor_levels[factor] = levels;
    factor_cols[factor] = factor_columns(rows, factor, levels);
  };

  for (const auto& factor : spec.main_effects) {
    ensure_factor(factor);
    const auto& levels = design.factor_levels[factor];
    const auto& cols = factor_cols[factor];
    for (std::size_t c = 0; c < cols.size(); ++c) {
      design.columns.push_back(cols[c]);
      design.names.push_back(factor + "[" + levels[c] + "]");
    }
  }
  for (const auto& [fa, fb] : spec.interactions) {
    ensure_factor(fa);
    ensure_factor(fb);
    const auto& cols_a = factor_cols[fa];
    const auto& cols_b = factor_cols[fb];
    const auto& levels_a = design.factor_levels[fa];
    const auto& levels_b = design.factor_levels[fb];
    for (std::size_t ca = 0; ca < cols_a.size(); ++ca) {
      for (std::size_t cb = 0; cb < cols_b.size(); ++cb) {
        std::vector<double> prod(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
          prod[r] = cols_a[ca][r] * cols_b[cb][r];
        }
        design.columns.push_back(std::move(prod));
        design.names.push_back(fa + "[" + levels_a[ca] + "]:" + fb + "[" +
                               levels_b[cb] + "]");
      }
    }
  }
  return design;
}

RegressionResult fit_preference_model(const std::vector<DataRow>& rows,
                                      const ModelSpec& spec, int n_boot,
                                      std::uint64_t seed) {
  return fit_model(rows, spec, n_boot, seed, /*logistic=*/true);
}

RegressionResult fit_surprisal_model(const std::vector<DataRow>& rows,
                                     const ModelSpec& spec, int n_boot,
                                     std::uint64_t seed) {
  return fit_model(rows, spec, n_boot, seed, /*logistic=*/false);
}

std::vector<Contrast> pairwise_contrasts(const RegressionResult& model,
                                         const std::string& factor) {
  const auto it = model.factor_levels.find(factor);
  if (it == model.factor_levels.end()) {
    throw StatsError("unknown factor: " + factor);
  }
  const auto& levels = it->second;
  const std::size_t k = levels.size();

  // per-level coefficient index; the dropped last level is -sum(others)
  const auto coef_index = [&](std::size_t level) -> std::ptrdiff_t {
    if (level + 1 == k) return -1;
    const std::string name = factor + "[" + levels[level] + "]";
    const auto pos = std::find(model.names.begin(), model.names.end(), name);
    if (pos == model.names.end()) throw StatsError("missing column " + name);
    return pos - model.names.begin();
  };
  const auto level_estimate = [&](std::size_t level,
                                  const std::vector<double>* draws_at,
                                  std::size_t rep) -> double {
    const std::ptrdiff_t idx = coef_index(level);
    const auto value = [&](std::ptrdiff_t c) {
      return draws_at ? model.boot_draws[static_cast<std::size_t>(c)][rep]
                      : model.coefficients[static_cast<std::size_t>(c)].estimate;
    };
    if (idx >= 0) return value(idx);
    double sum = 0.0;
    for (std::size_t l = 0; l + 1 < k; ++l) sum += value(coef_index(l));
    return -sum;
  };

  std::vector<Contrast> contrasts;
  const std::size_t n_draws =
      model.boot_draws.empty() ? 0 : model.boot_draws[0].size();
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      Contrast c;
      c.level_a = levels[a];
      c.level_b = levels[b];
      c.estimate = level_estimate(a, nullptr, 0) - level_estimate(b, nullptr, 0);
      std::vector<double> diff_draws;
      diff_draws.reserve(n_draws);
      for (std::size_t r = 0; r < n_draws; ++r) {
        diff_draws.push_back(level_estimate(a, &model.boot_draws[0], r) -
                             level_estimate(b, &model.boot_draws[0], r));
      }
      c.p_raw = diff_draws.empty() ? 1.0 : bootstrap_p(diff_draws);
      contrasts.push_back(std::move(c));
    }
  }

  // Holm step-down adjustment
  std::vector<std::size_t> order(contrasts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return contrasts[x].p_raw < contrasts[y].p_raw;
  });
  const std::size_t m = contrasts.size();
  double running = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const double adj =
        std::min(1.0, static_cast<double>(m - rank) * contrasts[order[rank]].p_raw);
    running = std::max(running, adj);
    contrasts[order[rank]].p_adjusted = running;
  }
  return contrasts;
}

// ---------------------------------------------------------------------------
// ANOVA

namespace {

std::vector<DataRow> table_to_rows(const FactorTable& table) {
  std::vector<DataRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& obs = table.rows[i];
    if (obs.levels.size() != table.factor_names.size()) {
      throw StatsError("observation has wrong number of factor levels");
    }
    DataRow row;
    row.response = obs.value;
    row.cluster_id = std::to_string(i);
    for (std::size_t f = 0; f < table.factor_names.size(); ++f) {
      row.factors[table.factor_names[f]] = obs.levels[f];
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double model_rss(const std::vector<DataRow>& rows, const ModelSpec& spec) {
  const Design design = build_design(rows, spec);
  const Eigen::MatrixXd X = to_matrix(design);
  Eigen::VectorXd y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = rows[i].response;
  }
  return solve_least_squares(X, y, &design.names).rss;
}

struct CellStats {
  std::map<std::string, std::vector<double>> by_level;  // marginal per level
};

CellStats marginal_stats(const FactorTable& table, std::size_t factor_idx) {
  CellStats stats;
  for (const auto& obs : table.rows) {
    stats.by_level[obs.levels[factor_idx]].push_back(obs.value);
  }
  return stats;
}

std::vector<Contrast> tukey_contrasts(const FactorTable& table,
                                      std::size_t factor_idx, double mse,
                                      double df_resid) {
  const CellStats stats = marginal_stats(table, factor_idx);
  const int k = static_cast<int>(stats.by_level.size());
  std::vector<std::pair<std::string, std::pair<double, double>>> means;
  for (const auto& [level, values] : stats.by_level) {
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    means.push_back({level, {mean, static_cast<double>(values.size())}});
  }
  std::vector<Contrast> out;
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      Contrast c;
      c.level_a = means[a].first;
      c.level_b = means[b].first;
      const double diff = means[a].second.first - means[b].second.first;
      const double na = means[a].second.second;
      const double nb = means[b].second.second;
      c.estimate = diff;
      if (mse <= 0.0) {
        c.p_raw = diff == 0.0 ? 1.0 : 0.0;
        c.p_adjusted = c.p_raw;
      } else {
        // Tukey-Kramer studentized range statistic
        const double se_q = std::sqrt(0.5 * mse * (1.0 / na + 1.0 / nb));
        const double q = std::abs(diff) / se_q;
        const double t = q / std::sqrt(2.0);
        c.p_raw = 2.0 * (1.0 - student_t_cdf(t, df_resid));
        c.p_adjusted = tukey_p_value(q, k, df_resid);
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace

std::vector<AnovaResult> anova(const FactorTable& table,
                               const std::vector<std::string>& factors,
                               const std::vector<std::string>& posthoc_factors) {
  if (factors.empty() || factors.size() > 2) {
    throw StatsError("anova supports 1 or 2 factors");
  }
  for (const auto& f : factors) {
    if (std::find(table.factor_names.begin(), table.factor_names.end(), f) ==
        table.factor_names.end()) {
      throw StatsError("unknown factor: " + f);
    }
  }
  if (table.rows.empty()) throw StatsError("no observations");

  const auto factor_idx = [&](const std::string& f) {
    return static_cast<std::size_t>(
        std::find(table.factor_names.begin(), table.factor_names.end(), f) -
        table.factor_names.begin());
  };

  // every cell of the requested cross needs >= 2 observations
  {
    std::map<std::vector<std::string>, int> cells;
    for (const auto& obs : table.rows) {
      std::vector<std::string> key;
      for (const auto& f : factors) key.push_back(obs.levels[factor_idx(f)]);
      cells[key]++;
    }
    for (const auto& [key, count] : cells) {
      if (count < 2) {
        std::string cell;
        for (std::size_t d = 0; d < key.size(); ++d) {
          if (d) cell += " x ";
          cell += factors[d] + "=" + key[d];
        }
        throw StatsError("cell with fewer than 2 observations: " + cell);
      }
    }
  }

  const std::vector<DataRow> rows = table_to_rows(table);
  const double n = static_cast<double>(rows.size());
  double grand = 0.0;
  for (const auto& r : rows) grand += r.response;
  grand /= n;
  double tss = 0.0;
  for (const auto& r : rows) tss += (r.response - grand) * (r.response - grand);

  std::vector<AnovaResult> results;

  const auto make_effect = [&](const std::vector<std::string>& effect_factors,
                               double ss, double df1, double mse, double df_e) {
    AnovaResult res;
    res.factors = effect_factors;
    res.ss = std::max(0.0, ss);
    res.df = {df1, df_e};
    if (res.ss <= 1e-12 * std::max(1.0, tss)) {
      // no effect variance at all
      res.F = 0.0;
      res.p_value = 1.0;
    } else if (mse <= 0.0) {
      throw StatsError("zero residual variance with a nonzero effect");
    } else {
      res.F = (res.ss / df1) / mse;
      res.p_value = 1.0 - f_cdf(res.F, df1, df_e);
    }
    return res;
  };

  if (factors.size() == 1) {
    const std::size_t fi = factor_idx(factors[0]);
    const CellStats stats = marginal_stats(table, fi);
    const double k = static_cast<double>(stats.by_level.size());
    if (k < 2) throw StatsError("factor \"" + factors[0] + "\" has fewer than 2 levels");
    double ssb = 0.0, ssw = 0.0;
    for (const auto& [level, values] : stats.by_level) {
      const double mean =
          std::accumulate(values.begin(), values.end(), 0.0) / values.size();
      ssb += values.size() * (mean - grand) * (mean - grand);
      for (const double v : values) ssw += (v - mean) * (v - mean);
    }
    const double df1 = k - 1.0;
    const double df_e = n - k;
    const double mse = df_e > 0 ? ssw / df_e : 0.0;
    AnovaResult res = make_effect({factors[0]}, ssb, df1, mse, df_e);
    for (const auto& pf : posthoc_factors) {
      if (pf == factors[0]) {
        res.posthoc.push_back({pf, tukey_contrasts(table, fi, mse, df_e)});
      }
    }
    results.push_back(std::move(res));
    return results;
  }

  // two factors: Type II sums of squares via nested model RSS differences
  const std::string& fa = factors[0];
  const std::string& fb = factors[1];
  const double ka = static_cast<double>(sorted_levels(rows, fa).size());
  const double kb = static_cast<double>(sorted_levels(rows, fb).size());

  const double rss_a = model_rss(rows, ModelSpec{{fa}, {}});
  const double rss_b = model_rss(rows, ModelSpec{{fb}, {}});
  const double rss_ab = model_rss(rows, ModelSpec{{fa, fb}, {}});
  const double rss_full = model_rss(rows, ModelSpec{{fa, fb}, {{fa, fb}}});

  const double df_a = ka - 1.0;
  const double df_b = kb - 1.0;
  const double df_int = df_a * df_b;
  const double df_e = n - ka * kb;
  if (df_e <= 0) throw StatsError("no residual degrees of freedom");
  const double mse = rss_full / df_e;

  AnovaResult res_a = make_effect({fa}, rss_b - rss_ab, df_a, mse, df_e);
  AnovaResult res_b = make_effect({fb}, rss_a - rss_ab, df_b, mse, df_e);
  AnovaResult res_int =
      make_effect({fa, fb}, rss_ab - rss_full, df_int, mse, df_e);

  for (const auto& pf : posthoc_factors) {
    if (pf == fa) {
      res_a.posthoc.push_back({pf, tukey_contrasts(table, factor_idx(fa), mse, df_e)});
    } else if (pf == fb) {
      res_b.posthoc.push_back({pf, tukey_contrasts(table, factor_idx(fb), mse, df_e)});
    }
  }
  results.push_back(std::move(res_a));
  results.push_back(std::move(res_b));
  results.push_back(std::move(res_int));
  return results;
}

double permutation_interaction_p(const FactorTable& table, int n_shuffles,
                                 std::uint64_t seed) {
  if (table.factor_names.size() != 2) {
    throw StatsError("permutation_interaction_p needs exactly 2 factors");
  }
  if (n_shuffles <= 0) throw StatsError("n_shuffles must be positive");
  const std::vector<DataRow> rows = table_to_rows(table);
  const std::string& fa = table.factor_names[0];
  const std::string& fb = table.factor_names[1];

  const Design d_red = build_design(rows, ModelSpec{{fa, fb}, {}});
  const Design d_full = build_design(rows, ModelSpec{{fa, fb}, {{fa, fb}}});
  const Eigen::MatrixXd X_red = to_matrix(d_red);
  const Eigen::MatrixXd X_full = to_matrix(d_full);
  Eigen::VectorXd y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = rows[i].response;
  }

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr_red(X_red);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr_full(X_full);
  const Eigen::MatrixXd Q_red =
      qr_red.householderQ() * Eigen::MatrixXd::Identity(X_red.rows(), X_red.cols());
  const Eigen::MatrixXd Q_full =
      qr_full.householderQ() * Eigen::MatrixXd::Identity(X_full.rows(), X_full.cols());

  const double df_int = static_cast<double>(X_full.cols() - X_red.cols());
  const double df_e = static_cast<double>(X_full.rows() - X_full.cols());
  if (df_e <= 0) throw StatsError("no residual degrees of freedom");

  const auto interaction_f = [&](const Eigen::VectorXd& resp) {
    const double total = resp.squaredNorm();
    const double rss_red = total - (Q_red.transpose() * resp).squaredNorm();
    const double rss_full = total - (Q_full.transpose() * resp).squaredNorm();
    const double ms_int = (rss_red - rss_full) / df_int;
    const double ms_e = rss_full / df_e;
    return ms_e > 0.0 ? ms_int / ms_e : 0.0;
  };

  const double f_obs = interaction_f(y);

  // Freedman-Lane: permute reduced-model residuals, keep fitted part
  const Eigen::VectorXd fitted = Q_red * (Q_red.transpose() * y);
  const Eigen::VectorXd resid = y - fitted;

  int exceed = 0;
  std::vector<Eigen::Index> perm(rows.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (int s = 0; s < n_shuffles; ++s) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(perm[i - 1], perm[pick(rng)]);
    }
    Eigen::VectorXd y_star(y.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      y_star[static_cast<Eigen::Index>(i)] = fitted[static_cast<Eigen::Index>(i)] +
                                             resid[perm[i]];
    }
    if (interaction_f(y_star) >= f_obs) ++exceed;
  }
  return (1.0 + exceed) / (1.0 + n_shuffles);
}

}  // namespace scopeprobe::stats
