#pragma once

#include <string>
#include <vector>

#include "modelps/features/feature_store.h"
#include "modelps/genie/history.h"
#include "modelps/genie/surface.h"
#include "modelps/repository/repository.h"

namespace modelps::service {

// Bundled datasets, demo models and a few simulated history records.
// Idempotent: models are only trained if no record of that name exists and
// history is only seeded when empty. Returns the demo model ids.
std::vector<std::string> seed_store(repo::Repository& repository,
                                    features::FeatureStore& features,
                                    genie::HistoryLog& history,
                                    const genie::SurfaceConfig& surface);

}  // namespace modelps::service
