#include "realsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "realsim/errors.hpp"

namespace realsim {

namespace {

bool in_unit_interval(double r) { return r >= 0.0 && r <= 1.0; }

void check_trials(const std::optional<std::vector<int>>& trials, double rate, const std::string& what) {
  if (!trials) return;
  if (trials->empty()) throw ValidationError(what + ": empty trial list");
  double sum = 0.0;
  for (int t : *trials) {
    if (t != 0 && t != 1) throw ValidationError(what + ": trials must be 0 or 1");
    sum += t;
  }
  if (std::abs(sum / static_cast<double>(trials->size()) - rate) > 1e-9) {
    throw ValidationError(what + ": rate does not equal the mean of its trials");
  }
}

}  // namespace

void PolicyEval::validate() const {
  if (!in_unit_interval(real_rate) || !in_unit_interval(sim_rate)) {
    throw ValidationError("policy '" + policy_id + "': rates must lie in [0, 1]");
  }
  check_trials(real_trials, real_rate, "policy '" + policy_id + "' real_trials");
  check_trials(sim_trials, sim_rate, "policy '" + policy_id + "' sim_trials");
}

void PairedEvalTable::validate() const {
  if (evals.size() < 2) throw ValidationError("task '" + task + "': at least two policies are required");
  std::set<std::string> ids;
  for (const auto& e : evals) {
    if (!ids.insert(e.policy_id).second)
      throw ValidationError("task '" + task + "': duplicate policy '" + e.policy_id + "'");
    e.validate();
  }
}

double rank_violation(const PolicyEval& i, const PolicyEval& j) {
  const bool sim_less = i.sim_rate < j.sim_rate;
  const bool real_less = i.real_rate < j.real_rate;
  return sim_less != real_less ? std::abs(i.real_rate - j.real_rate) : 0.0;
}

double max_rank_violation(const PairedEvalTable& table, std::size_t i) {
  double worst = 0.0;
  for (const auto& other : table.evals) worst = std::max(worst, rank_violation(table.evals[i], other));
  return worst;
}

double mmrv(const PairedEvalTable& table) {
  if (table.evals.size() < 2) throw ValidationError("mmrv: at least two policies are required");
  double sum = 0.0;
  for (std::size_t i = 0; i < table.evals.size(); ++i) sum += max_rank_violation(table, i);
  return sum / static_cast<double>(table.evals.size());
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson: at least two samples are required");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx, dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> fractional_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  return pearson(rx, ry);
}

DeltaSuccess delta_success(const ShiftEval& s) {
  if (s.variant_rates.empty()) throw ValidationError("delta_success: no variants");
  DeltaSuccess d;
  for (double v : s.variant_rates) {
    d.signed_mean += v - s.base_rate;
    d.abs_per_variant += std::abs(v - s.base_rate);
  }
  const double k = static_cast<double>(s.variant_rates.size());
  d.signed_mean /= k;
  d.abs_per_variant /= k;
  return d;
}

// Series for P(s, x), used when x < s + 1.
static double gamma_p_series(double s, double x) {
  double term = 1.0 / s, sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (s + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Lentz continued fraction for Q(s, x), used when x >= s + 1.
static double gamma_q_continued_fraction(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

double gamma_q(double s, double x) {
  if (!(s > 0.0) || x < 0.0) throw ValidationError("gamma_q: requires s > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_continued_fraction(s, x);
}

double chi2_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * x);
}

KruskalWallis kruskal_wallis(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("kruskal_wallis: both groups must be non-empty");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = fractional_ranks(pooled);
  const double n = static_cast<double>(pooled.size());

  // Tie correction 1 - sum(t^3 - t) / (n^3 - n).
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double correction = 1.0 - ties / (n * n * n - n);
  if (correction <= 0.0) return KruskalWallis{0.0, 1.0};

  const double mean_rank = 0.5 * (n + 1.0);
  double between = 0.0;
  std::size_t offset = 0;
  for (std::size_t size : {a.size(), b.size()}) {
    double sum = 0.0;
    for (std::size_t k = 0; k < size; ++k) sum += ranks[offset + k];
    const double m = sum / static_cast<double>(size);
    between += static_cast<double>(size) * (m - mean_rank) * (m - mean_rank);
    offset += size;
  }
  const double h = 12.0 / (n * (n + 1.0)) * between / correction;
  return KruskalWallis{h, chi2_sf(h, 1.0)};
}

KruskalWallis kruskal_wallis(std::span<const int> a, std::span<const int> b) {
  const std::vector<double> da(a.begin(), a.end());
  const std::vector<double> db(b.begin(), b.end());
  return kruskal_wallis(std::span<const double>(da), std::span<const double>(db));
}

std::vector<double> aggregate_grouped(const std::vector<std::vector<double>>& groups) {
  std::vector<double> out;
  out.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw ValidationError("aggregate_grouped: group " + std::to_string(g) + " is empty");
    out.push_back(std::accumulate(groups[g].begin(), groups[g].end(), 0.0) / static_cast<double>(groups[g].size()));
  }
  return out;
}

double action_mse(const std::vector<std::vector<double>>& pred, const std::vector<std::vector<double>>& gt) {
  if (pred.size() != gt.size()) throw ValidationError("action_mse: different number of timesteps");
  if (pred.empty()) throw ValidationError("action_mse: no timesteps");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].size() != gt[t].size())
      throw ValidationError("action_mse: action dimension mismatch at step " + std::to_string(t));
    for (std::size_t k = 0; k < pred[t].size(); ++k) {
      const double e = pred[t][k] - gt[t][k];
      sum += e * e;
    }
    count += pred[t].size();
  }
  if (count == 0) throw ValidationError("action_mse: empty actions");
  return sum / static_cast<double>(count);
}

}  // namespace realsim
