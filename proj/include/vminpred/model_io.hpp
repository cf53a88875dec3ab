#pragma once

#include <string>

#include "vminpred/estimators.hpp"

namespace vminpred::est {

/// Saves a fitted model as JSON. Doubles are emitted in shortest
/// round-trip form, so save -> load -> save is byte-identical.
void save_model(const FittedModel& m, const std::string& path);

/// Loads a model written by save_model. Throws ParseError / SchemaMismatch
/// on malformed files.
FittedModel load_model(const std::string& path);

}  // namespace vminpred::est
