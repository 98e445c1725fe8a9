#pragma once

#include "cstm/analysis.hpp"
#include "cstm/epi.hpp"
#include "cstm/psa.hpp"
#include "cstm/table_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cstm {

// Machine tables: numbers with 10 significant digits, missing values "NA".
Table trace_table(const StrategyResult& result);
Table epi_table(const std::vector<std::pair<std::string, std::vector<EpiSeries>>>& per_strategy);
Table totals_table(const AnalysisReport& report);
Table cea_table(const CeaTable& cea);
Table psa_samples_table(const PsaSampleSet& samples);
Table psa_outcomes_table(const PsaOutcomes& outcomes);
Table ceac_table(const AcceptabilityCurves& curves, const std::vector<std::string>& strategies);
Table elc_table(const ExpectedLoss& loss, const std::vector<std::string>& strategies);

// Reads "strategy,cost,effect" rows.
std::vector<StrategyOutcome> read_totals(const Table& table);

// {"columns": [...], "rows": [[...]]}; numeric cells become numbers and "NA"
// becomes null.
nlohmann::ordered_json table_to_json(const Table& table);
Table table_from_json(const nlohmann::ordered_json& doc);

enum class TableFormat { csv, json };

// Writes `<dir>/<stem>.csv` or `.json` and returns the file name.
std::string write_table(const std::filesystem::path& dir, const std::string& stem, const Table& table,
                        TableFormat format);

// Human formatting: whole dollars with thousands separators, fixed decimals.
std::string format_dollars(double v);
std::string format_fixed(double v, int decimals);

std::string render_cea(const CeaTable& cea);
std::string render_totals(const AnalysisReport& report);
std::string render_trace(const StrategyResult& result, int max_cycles);

}  // namespace cstm
