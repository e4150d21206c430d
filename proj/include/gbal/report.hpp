#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbal/session.hpp"

namespace gbal {

struct MethodHistory {
  std::string method;
  std::vector<HistoryEntry> history;
};

struct SummaryRow {
  std::string method;
  double time_seconds = 0.0;  // selection + fit, oracle time excluded
  std::optional<double> accuracy;  // final entry
};

SummaryRow summarize(const MethodHistory& run);

// Accuracy-vs-labels curve: method,iteration,labels_used,accuracy,fit_seconds,selection_seconds
void write_curve_csv(const std::filesystem::path& path, const std::vector<MethodHistory>& runs);
nlohmann::json curve_json(const std::vector<MethodHistory>& runs);

// Time/accuracy table: method,time,accuracy
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

// Accepts either {"method": ..., "history": [...]} or a bare history array.
MethodHistory load_history_json(const std::filesystem::path& path, const std::string& fallback_method);

}  // namespace gbal
