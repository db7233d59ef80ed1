#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace realsim {

/// Real and simulated success of one policy on one task.
struct PolicyEval {
  std::string policy_id;
  double real_rate = 0.0;
  double sim_rate = 0.0;
  std::optional<std::vector<int>> real_trials;  // 0/1 outcomes
  std::optional<std::vector<int>> sim_trials;

  void validate() const;
};

struct PairedEvalTable {
  std::string task;
  std::vector<PolicyEval> evals;

  /// N >= 2, unique policy ids, every row valid.
  void validate() const;
};

struct ShiftEval {
  double base_rate = 0.0;
  std::vector<double> variant_rates;
};

/// |R_i - R_j| if the simulated order of (i, j) disagrees with the real order
/// under strict '<' comparisons, else 0.
double rank_violation(const PolicyEval& i, const PolicyEval& j);

/// Mean over policies of the worst rank violation each one takes part in.
double mmrv(const PairedEvalTable& table);

/// Largest rank violation involving row i.
double max_rank_violation(const PairedEvalTable& table, std::size_t i);

/// Sample Pearson correlation; nullopt when either input has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Average ranks (1-based, ties share the mean rank).
std::vector<double> fractional_ranks(std::span<const double> x);

/// Pearson correlation of the fractional ranks.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct DeltaSuccess {
  double signed_mean = 0.0;      // (1/K) sum_k (variant_k - base)
  double abs_per_variant = 0.0;  // (1/K) sum_k |variant_k - base|
};

DeltaSuccess delta_success(const ShiftEval& s);

struct KruskalWallis {
  double h = 0.0;
  double p = 1.0;
};

/// Two-group Kruskal-Wallis H with tie correction, p from chi-square(1).
/// All-identical pooled data gives (0, 1).
KruskalWallis kruskal_wallis(std::span<const double> a, std::span<const double> b);
KruskalWallis kruskal_wallis(std::span<const int> a, std::span<const int> b);

/// Regularized upper incomplete gamma Q(s, x), relative error <= 1e-10.
double gamma_q(double s, double x);

/// Survival function of the chi-square distribution.
double chi2_sf(double x, double dof);

/// Unweighted mean of every group.
std::vector<double> aggregate_grouped(const std::vector<std::vector<double>>& groups);

/// Mean squared error over all timesteps and action dimensions.
double action_mse(const std::vector<std::vector<double>>& pred, const std::vector<std::vector<double>>& gt);

}  // namespace realsim
