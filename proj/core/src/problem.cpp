#include "metais/problem.hpp"

#include <cmath>
#include <utility>

#include "metais/errors.hpp"
#include "metais/normal.hpp"

namespace metais {

LimitState::LimitState(std::string name, int dimension, Function g)
    : name_(std::move(name)),
      dimension_(dimension),
      g_(std::move(g)),
      counter_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  if (dimension_ < 1) throw ConfigError("problem", "dimension must be positive");
  if (!g_) throw ConfigError("problem", "empty performance function");
}

double LimitState::evaluate(const Eigen::VectorXd& u) const {
  if (u.size() != dimension_) {
    throw InputError("problem", name_ + ": expected dimension " + std::to_string(dimension_) +
                                    ", got " + std::to_string(u.size()));
  }
  if (!u.allFinite()) throw InputError("problem", name_ + ": non-finite coordinate");
  counter_->fetch_add(1, std::memory_order_relaxed);
  return g_(u);
}

StandardGaussianSpace::StandardGaussianSpace(int dimension) : dimension_(dimension) {
  if (dimension_ < 1) throw ConfigError("problem", "dimension must be positive");
}

double StandardGaussianSpace::log_density(const Eigen::VectorXd& u) const {
  if (u.size() != dimension_) throw InputError("problem", "log_density: dimension mismatch");
  return standard_normal_log_density(u);
}

double StandardGaussianSpace::density(const Eigen::VectorXd& u) const {
  return std::exp(log_density(u));
}

double standard_normal_log_density(const Eigen::Ref<const Eigen::VectorXd>& u) {
  return -0.5 * static_cast<double>(u.size()) * kLogTwoPi - 0.5 * u.squaredNorm();
}

LimitState make_parabola(double b, double kappa, double e) {
  return LimitState("parabola2d", 2, [b, kappa, e](const Eigen::VectorXd& x) {
    const double d = x[0] - e;
    return b - x[1] - kappa * d * d;
  });
}

LimitState make_linear(double beta, int dimension) {
  return LimitState("linear", dimension, [beta](const Eigen::VectorXd& u) { return beta - u[0]; });
}

LimitState make_quad20(double beta, double kappa, int dimension) {
  if (dimension < 2) throw ConfigError("problem", "quad20 needs dimension >= 2");
  const double scale = 1.0 / std::sqrt(static_cast<double>(dimension));
  return LimitState("quad20", dimension, [beta, kappa, scale](const Eigen::VectorXd& u) {
    const double d = u[0] - u[1];
    return beta - scale * u.sum() - kappa * d * d;
  });
}

namespace {

double take(ProblemParams& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double value = it->second;
  params.erase(it);
  return value;
}

int take_dimension(ProblemParams& params, int fallback) {
  const double value = take(params, "dimension", fallback);
  if (value < 1 || value != std::floor(value)) {
    throw ConfigError("problem", "dimension must be a positive integer");
  }
  return static_cast<int>(value);
}

}  // namespace

std::vector<std::string> benchmark_names() { return {"parabola2d", "linear", "quad20"}; }

LimitState make_benchmark(const std::string& name, const ProblemParams& params) {
  ProblemParams rest = params;
  LimitState ls = [&]() {
    if (name == "parabola2d") {
      const double b = take(rest, "b", 5.0);
      const double kappa = take(rest, "kappa", 0.5);
      const double e = take(rest, "e", 0.1);
      return make_parabola(b, kappa, e);
    }
    if (name == "linear") {
      const double beta = take(rest, "beta", 3.0);
      return make_linear(beta, take_dimension(rest, 2));
    }
    if (name == "quad20") {
      const double beta = take(rest, "beta", 3.8);
      const double kappa = take(rest, "kappa", 0.05);
      return make_quad20(beta, kappa, take_dimension(rest, 20));
    }
    throw ConfigError("problem", "unknown problem '" + name + "'");
  }();
  if (!rest.empty()) {
    throw ConfigError("problem", "unknown parameter '" + rest.begin()->first + "' for " + name);
  }
  return ls;
}

std::vector<LimitState> benchmark_catalog() {
  std::vector<LimitState> out;
  for (const auto& name : benchmark_names()) out.push_back(make_benchmark(name));
  return out;
}

}  // namespace metais
