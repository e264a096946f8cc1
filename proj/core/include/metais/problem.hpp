#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace metais {

/// Performance function g over standard normal space. Failure is g(u) <= 0.
///
/// Every call to evaluate() counts toward the model budget; the counter is
/// atomic so evaluate() may be called from several threads. Copies share
/// the counter, so a problem handed to several estimators reports one total.
class LimitState {
 public:
  using Function = std::function<double(const Eigen::VectorXd&)>;

  LimitState(std::string name, int dimension, Function g);

  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return dimension_; }

  /// Throws InputError on dimension mismatch or a non-finite coordinate.
  double evaluate(const Eigen::VectorXd& u) const;

  std::uint64_t eval_count() const noexcept { return counter_->load(); }
  void reset_count() noexcept { counter_->store(0); }

 private:
  std::string name_;
  int dimension_;
  Function g_;
  std::shared_ptr<std::atomic<std::uint64_t>> counter_;
};

/// Joint standard normal density phi_n.
class StandardGaussianSpace {
 public:
  explicit StandardGaussianSpace(int dimension);

  int dimension() const noexcept { return dimension_; }
  double log_density(const Eigen::VectorXd& u) const;
  double density(const Eigen::VectorXd& u) const;

 private:
  int dimension_;
};

/// log phi_n(u) without the dimension check, for inner loops.
double standard_normal_log_density(const Eigen::Ref<const Eigen::VectorXd>& u);

// Benchmark catalog ---------------------------------------------------------

/// g(x1, x2) = b - x2 - kappa (x1 - e)^2.
LimitState make_parabola(double b = 5.0, double kappa = 0.5, double e = 0.1);

/// g(u) = beta - u1.
LimitState make_linear(double beta = 3.0, int dimension = 2);

/// g(u) = beta - sum(u)/sqrt(n) - kappa (u1 - u2)^2 in n = 20 by default.
/// With the defaults p_f is about 1.4e-4.
LimitState make_quad20(double beta = 3.8, double kappa = 0.05, int dimension = 20);

using ProblemParams = std::map<std::string, double>;

/// Names understood by make_benchmark().
std::vector<std::string> benchmark_names();

/// Catalog lookup by name. Unknown parameters or names throw ConfigError.
LimitState make_benchmark(const std::string& name, const ProblemParams& params = {});

/// Every catalog problem with default parameters.
std::vector<LimitState> benchmark_catalog();

}  // namespace metais
