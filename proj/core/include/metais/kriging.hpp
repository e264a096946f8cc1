#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "metais/surrogate.hpp"

namespace metais {

inline constexpr double kDefaultMinSeparation = 1e-8;

/// Input points (m x n, one per row) with their observed performance values.
///
/// Requires m >= 2, finite values and no two points closer than the minimum
/// separation (Euclidean). Violations throw InputError.
class DesignOfExperiments {
 public:
  DesignOfExperiments(Eigen::MatrixXd points, Eigen::VectorXd values,
                      double min_separation = kDefaultMinSeparation);

  const Eigen::MatrixXd& points() const noexcept { return points_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return points_.rows(); }
  int dimension() const noexcept { return static_cast<int>(points_.cols()); }
  double min_separation() const noexcept { return min_separation_; }

  /// Index of a design point within min_separation of x, if any (nearest).
  std::optional<Eigen::Index> find_near(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Indices of candidate rows that keep the separation rule against the
  /// design and against earlier accepted candidates.
  std::vector<Eigen::Index> separated_candidates(const Eigen::MatrixXd& candidates) const;

 private:
  Eigen::MatrixXd points_;
  Eigen::VectorXd values_;
  double min_separation_;
};

/// Writes "x1,...,xn,g" followed by one row per design point.
void write_doe_csv(std::ostream& out, const DesignOfExperiments& doe);
void write_doe_csv(const std::string& path, const DesignOfExperiments& doe);

/// Reads the CSV layout written by write_doe_csv. The header row is required.
DesignOfExperiments read_doe_csv(std::istream& in, double min_separation = kDefaultMinSeparation);
DesignOfExperiments read_doe_csv(const std::string& path,
                                 double min_separation = kDefaultMinSeparation);

/// Regression functions f_1..f_p of the kriging trend.
class RegressionBasis {
 public:
  using Function = std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&)>;

  /// p = 1, f(x) = 1 (ordinary kriging).
  static RegressionBasis constant();
  /// p = n + 1, f(x) = (1, x_1, ..., x_n).
  static RegressionBasis linear(int dimension);
  static RegressionBasis custom(std::string name, int size, Function f);
  /// "constant" or "linear".
  static RegressionBasis by_name(const std::string& name, int dimension);

  const std::string& name() const noexcept { return name_; }
  int size() const noexcept { return size_; }

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// m x p matrix F with F(i, j) = f_j(x_i).
  Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& points) const;

 private:
  RegressionBasis(std::string name, int size, Function f);

  std::string name_;
  int size_;
  Function f_;
};

/// Anisotropic squared exponential: exp(-sum_k (dx_k / l_k)^2).
/// Throws ConfigError if any length is not strictly positive.
double correlation(const Eigen::Ref<const Eigen::VectorXd>& dx,
                   const Eigen::Ref<const Eigen::VectorXd>& lengths);

/// Diagonal regularization tau added to R: start, start*factor, ... up to max.
struct NuggetSchedule {
  double start = 1e-10;
  double factor = 10.0;
  double max = 1e-6;
};

/// Box for the correlation lengths, per coordinate.
struct LengthBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// [1e-2 L, 10 L] with L the per-coordinate range of the design.
  static LengthBounds from_design(const DesignOfExperiments& doe);
};

struct FitOptions {
  std::optional<LengthBounds> bounds;
  NuggetSchedule nugget;
  /// Quasi-Newton iterations per start.
  int max_iterations = 200;
  /// Extra start, typically the previous model's lengths.
  std::optional<Eigen::VectorXd> warm_start;
};

/// Generalized least-squares solution for fixed lengths.
struct LikelihoodFit {
  Eigen::VectorXd beta;
  double process_variance = 0.0;
  /// (m/2) log sigma^2 + (1/2) log det R; -inf when the residual vanishes.
  double neg_log_likelihood = 0.0;
  double nugget = 0.0;
};

/// beta = (F'R^-1F)^-1 F'R^-1 y, sigma^2 = (1/m)(y - F beta)' R^-1 (y - F beta).
/// Throws IdentifiabilityError when p > m - 1 and ConditioningError when R
/// stays indefinite up to the largest nugget.
LikelihoodFit fit_given_lengths(const DesignOfExperiments& doe, const RegressionBasis& basis,
                                const Eigen::VectorXd& lengths, const NuggetSchedule& nugget = {});

/// Value and gradient of the profiled negative log-likelihood with respect
/// to log-lengths. Exposed for tests and benchmarks.
struct LikelihoodGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};
LikelihoodGradient profiled_likelihood_gradient(const DesignOfExperiments& doe,
                                                const RegressionBasis& basis,
                                                const Eigen::VectorXd& lengths,
                                                const NuggetSchedule& nugget = {});

/// Fitted Gaussian-process surrogate. Immutable; copies share state and
/// predict() is safe to call concurrently.
class KrigingModel final : public Surrogate {
 public:
  /// Maximum-likelihood lengths over the box (multi-start projected BFGS in
  /// log-space), then the closed-form beta and sigma^2.
  static KrigingModel fit(DesignOfExperiments doe, RegressionBasis basis,
                          const FitOptions& options = {});

  /// No length optimization.
  static KrigingModel fit_with_lengths(DesignOfExperiments doe, RegressionBasis basis,
                                       const Eigen::VectorXd& lengths,
                                       const NuggetSchedule& nugget = {});

  int dimension() const override;
  /// Queries within the design's min separation of a design point return
  /// that observation with zero std.
  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  double process_std() const override;

  /// The same moments without the design-point shortcut.
  Prediction predict_raw(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  const DesignOfExperiments& doe() const;
  const RegressionBasis& basis() const;
  const Eigen::VectorXd& lengths() const;
  const Eigen::VectorXd& beta() const;
  double process_variance() const;
  double nugget() const;
  double neg_log_likelihood() const;
  /// Likelihood evaluations spent by fit(); 1 for fit_with_lengths().
  int likelihood_evaluations() const;
  const FitOptions& fit_options() const;

 private:
  struct State;
  explicit KrigingModel(std::shared_ptr<const State> state);
  static std::shared_ptr<State> build(DesignOfExperiments doe, RegressionBasis basis,
                                      const Eigen::VectorXd& lengths,
                                      const NuggetSchedule& nugget);

  std::shared_ptr<const State> state_;
};

struct Enrichment {
  KrigingModel model;
  std::vector<Eigen::Index> accepted;  ///< rows of the new points kept
  std::vector<Eigen::Index> dropped;   ///< rows rejected by the separation rule
  bool noop = false;                   ///< nothing accepted, model returned as is
};

/// Full refit (lengths included) on the union design. Candidates too close
/// to the design or to each other are dropped and reported. The previous
/// lengths join the optimizer's starts.
Enrichment add_points(const KrigingModel& model, const Eigen::MatrixXd& points,
                      const Eigen::VectorXd& values);

}  // namespace metais
