#pragma once

#include <functional>

#include "modelps/graph/graph.h"
#include "modelps/trainer/train_config.h"
#include "modelps/trainer/training_run.h"

namespace modelps::trainer {

// Evaluates configs whose graph the native trainer cannot execute.
using FallbackEvaluator =
    std::function<ValidationReport(const TrainConfig&, const graph::ModelGraph&)>;

// Graph the config would train (explicit graph, KD student, or base graph).
graph::ModelGraph resolve_graph(const TrainingContext& ctx, const TrainConfig& config);

// Time-boxed training. Always returns a report; with a budget smaller than
// one epoch the report carries the untrained model's accuracy.
ValidationReport validate(const TrainingContext& ctx, const TrainConfig& config,
                          double budget_s, const FallbackEvaluator& fallback = {});

}  // namespace modelps::trainer
