#include <cmath>
#include <limits>
#include <random>

#include "metais/errors.hpp"
#include "metais/mcmc.hpp"
#include "metais/seed.hpp"

namespace metais {
namespace {

void validate(const UnnormalizedTarget& target, const ChainConfig& config) {
  if (target.dimension < 1 || !target.log_density) {
    throw InputError("mcmc", "target needs a positive dimension and a log-density");
  }
  if (config.n_samples < 1) throw InputError("mcmc", "n_samples must be positive");
  if (config.burn_in < 0) throw InputError("mcmc", "burn_in must be non-negative");
  if (config.thinning < 1) throw InputError("mcmc", "thinning must be positive");
  if (config.max_step_out < 1) throw InputError("mcmc", "max_step_out must be positive");
  if (config.max_shrink < 1) throw InputError("mcmc", "max_shrink must be positive");
  if (config.initial_point.size() != target.dimension) {
    throw InputError("mcmc", "initial point has the wrong dimension");
  }
  if (!config.initial_point.allFinite()) throw InputError("mcmc", "initial point is not finite");
  const auto w = config.step_width;
  if (w.size() != 1 && w.size() != target.dimension) {
    throw InputError("mcmc", "step_width must have 1 or n entries");
  }
  if (!(w.array() > 0.0).all() || !w.allFinite()) {
    throw InputError("mcmc", "step widths must be positive");
  }
}

}  // namespace

ChainResult slice_sample(const UnnormalizedTarget& target, const ChainConfig& config) {
  validate(target, config);
  const int n = target.dimension;
  const Eigen::VectorXd width = config.step_width.size() == 1
                                    ? Eigen::VectorXd::Constant(n, config.step_width[0])
                                    : config.step_width;

  Rng rng(config.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::exponential_distribution<double> exponential(1.0);

  ChainResult out;
  auto& diag = out.diagnostics;
  auto log_p = [&](const Eigen::VectorXd& x) {
    ++diag.density_evaluations;
    const double v = target.log_density(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };

  Eigen::VectorXd x = config.initial_point;
  double current = log_p(x);
  if (!std::isfinite(current)) {
    throw InputError("mcmc", "initial point has zero density");
  }

  out.draws.resize(config.n_samples, n);
  out.log_densities.resize(config.n_samples);
  const long total_sweeps =
      static_cast<long>(config.burn_in) + static_cast<long>(config.n_samples) * config.thinning;

  Eigen::VectorXd probe = x;
  for (long sweep = 0; sweep < total_sweeps; ++sweep) {
    for (int k = 0; k < n; ++k) {
      ++diag.coordinate_updates;
      const double level = current - exponential(rng);
      const double x0 = x[k];

      // Stepping out with at most max_step_out expansions in total.
      double left = x0 - width[k] * uniform(rng);
      double right = left + width[k];
      long j = static_cast<long>(std::floor(config.max_step_out * uniform(rng)));
      long r = config.max_step_out - 1 - j;
      probe = x;
      bool limited = false;
      while (true) {
        probe[k] = left;
        if (!(log_p(probe) > level)) break;
        if (j <= 0) {
          limited = true;
          break;
        }
        left -= width[k];
        --j;
      }
      while (true) {
        probe[k] = right;
        if (!(log_p(probe) > level)) break;
        if (r <= 0) {
          limited = true;
          break;
        }
        right += width[k];
        --r;
      }
      if (limited) ++diag.step_out_limit_hits;

      // Shrinkage.
      int contractions = 0;
      while (true) {
        probe[k] = left + (right - left) * uniform(rng);
        const double value = log_p(probe);
        if (value > level) {
          x[k] = probe[k];
          current = value;
          break;
        }
        if (probe[k] < x0) {
          left = probe[k];
        } else {
          right = probe[k];
        }
        if (++contractions >= config.max_shrink) {
          throw SamplerStall("mcmc", "shrinkage did not find a point inside the slice after " +
                                         std::to_string(config.max_shrink) + " contractions");
        }
      }
    }
    const long kept_sweep = sweep - config.burn_in;
    if (kept_sweep >= 0 && (kept_sweep + 1) % config.thinning == 0) {
      out.draws.row(diag.kept) = x.transpose();
      out.log_densities[diag.kept] = current;
      ++diag.kept;
    }
  }
  return out;
}

}  // namespace metais
