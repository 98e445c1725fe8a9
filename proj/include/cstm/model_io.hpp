#pragma once

#include "cstm/core.hpp"
#include "cstm/table_io.hpp"

#include <json.hpp>

#include <optional>

namespace cstm {

struct LabeledModel {
  StateSpace space;
  TransitionModel model;
};

// Columns: cycle, from, <state>... with one block of rows per cycle. A
// constant model is written once with cycle "all". Entries keep full double
// precision so that re-imported models validate at the default tolerance.
Table transition_model_table(const StateSpace& space, const TransitionModel& tm);

// Inverse of transition_model_table. `horizon` is required for "all" blocks.
// States whose rows are unit self-loops in every block are taken as absorbing.
LabeledModel read_transition_model_table(const Table& table, std::optional<int> horizon = {});

// {"states", "absorbing", "kind", "horizon", "matrices": [{"cycle", "rows"}]}
nlohmann::ordered_json transition_model_json(const StateSpace& space, const TransitionModel& tm);
LabeledModel read_transition_model_json(const nlohmann::ordered_json& doc);

}  // namespace cstm
