#include "modelps/trainer/validator.h"

#include "modelps/error.h"
#include "modelps/util.h"

namespace modelps::trainer {

graph::ModelGraph resolve_graph(const TrainingContext& ctx, const TrainConfig& c) {
  if (c.graph) return *c.graph;
  if (!ctx.repository || !ctx.repository->contains(c.base_model_id)) {
    throw Error(ErrorCode::kInvalidConfig, "invalid config /base_model_id: unknown model",
                {{"path", "/base_model_id"}, {"reason", "unknown model '" + c.base_model_id + "'"}});
  }
  auto g = ctx.repository->get(c.base_model_id).graph;
  if (c.tl_method == TlMethod::kKnowledgeDistill) {
    return distill_student(g);
  }
  return g;
}

ValidationReport validate(const TrainingContext& ctx, const TrainConfig& c, double budget_s,
                          const FallbackEvaluator& fallback) {
  if (!(budget_s > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "invalid config /budget: must be positive",
                {{"path", "/budget"}, {"reason", "must be positive"}});
  }
  Stopwatch total;
  validate(c);
  auto g = resolve_graph(ctx, c);
  if (!graph::is_executable(g)) {
    if (!fallback) {
      throw Error(ErrorCode::kInvalidConfig, "graph is not executable and no simulated evaluator is set",
                  {{"path", "/graph"}, {"reason", "not executable"}});
    }
    auto r = fallback(c, g);
    r.evaluator = EvaluatorKind::kSimulated;
    r.config = c;
    return r;
  }
  TrainingRun run(ctx, c);
  // Setup time counts against the budget; keep a small reserve for the
  // final evaluation.
  const double remaining = budget_s * 0.97 - total.elapsed_s();
  if (remaining > 0.0) {
    RunControl control;
    run.run(control, remaining);
  }
  return run.report();
}

}  // namespace modelps::trainer
