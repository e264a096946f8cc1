#include <json.hpp>

#include "metais/pipeline.hpp"

namespace metais {
namespace {

using json = nlohmann::json;

json optional_number(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

json chain_json(const ChainDiagnostics& d) {
  return {{"kept", d.kept},
          {"density_evaluations", d.density_evaluations},
          {"coordinate_updates", d.coordinate_updates},
          {"step_out_limit_hits", d.step_out_limit_hits}};
}

json estimate_json(const EstimateResult& e) {
  json out = {{"estimate", e.estimate},
              {"variance", e.variance},
              {"std_error", e.std_error()},
              {"cov", optional_number(e.cov)},
              {"n_samples", e.n_samples},
              {"n_model_evals", e.n_model_evals},
              {"seed", e.seed},
              {"mcmc_approximate", e.mcmc_approximate}};
  if (e.chain) out["chain"] = chain_json(*e.chain);
  return out;
}

}  // namespace

std::string result_to_json(const RunConfig& config, const LimitState& ls, const RunResult& r) {
  json lengths = json::array();
  for (Eigen::Index k = 0; k < r.model.lengths().size(); ++k) lengths.push_back(r.model.lengths()[k]);

  json out = {
      {"schema", kResultSchema},
      {"problem", {{"name", ls.name()}, {"dimension", ls.dimension()}}},
      {"config", json::parse(to_json(config))},
      {"seeds",
       {{"master", config.seed},
        {"initial_doe", r.seeds.initial_doe},
        {"refinement", r.seeds.refinement},
        {"pf_eps", r.seeds.pf_eps},
        {"alpha_corr", r.seeds.alpha_corr}}},
      {"pf", r.meta.pf},
      {"cov_combined", optional_number(r.meta.cov_combined)},
      {"std_error", r.meta.std_error()},
      {"pf_eps", estimate_json(r.meta.pf_eps)},
      {"alpha_corr", estimate_json(r.meta.alpha_corr)},
      {"n_eps", r.meta.n_eps},
      {"n_corr", r.meta.n_corr},
      {"budget",
       {{"initial_doe", r.initial_evals},
        {"refinement", r.refinement_evals},
        {"correction", r.correction_evals},
        {"total_model_evals", r.total_model_evals},
        {"surrogate_evals", r.meta.n_eps}}},
      {"refinement",
       {{"iterations", r.trace.iterations.size()},
        {"final_doe_size", r.model.doe().size()},
        {"margin_converged", r.trace.margin_converged},
        {"initial_margin_mass", r.trace.initial.margin_mass},
        {"final_margin_mass",
         r.trace.iterations.empty() ? r.trace.initial.margin_mass : r.trace.iterations.back().margin_mass},
        {"lengths", lengths},
        {"process_variance", r.model.process_variance()},
        {"nugget", r.model.nugget()},
        {"trace_csv", "trace.csv"},
        {"doe_csv", "doe.csv"},
        {"last_chain", chain_json(r.trace.last_chain)}}},
      {"wall_time_ms",
       {{"total", r.total_ms}, {"refinement", r.refinement_ms}, {"estimation", r.estimation_ms}}},
  };
  return out.dump(2);
}

}  // namespace metais
