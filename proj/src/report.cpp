#include "gbal/report.hpp"

#include <fstream>

#include "gbal/error.hpp"

namespace gbal {
namespace {

// Shortest round-trip representation, same as the JSON writer emits.
std::string number(double v) { return nlohmann::json(v).dump(); }

}  // namespace

SummaryRow summarize(const MethodHistory& run) {
  SummaryRow row{run.method, 0.0, std::nullopt};
  for (const auto& h : run.history) row.time_seconds += h.fit_seconds + h.selection_seconds;
  if (!run.history.empty()) row.accuracy = run.history.back().accuracy;
  return row;
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<MethodHistory>& runs) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "method,iteration,labels_used,accuracy,fit_seconds,selection_seconds\n";
  for (const auto& run : runs)
    for (const auto& h : run.history)
      out << run.method << ',' << h.iteration << ',' << h.labels_used << ','
          << (h.accuracy ? number(*h.accuracy) : "") << ',' << number(h.fit_seconds) << ','
          << number(h.selection_seconds) << '\n';
}

nlohmann::json curve_json(const std::vector<MethodHistory>& runs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& run : runs) j.push_back({{"method", run.method}, {"history", run.history}});
  return j;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "method,time,accuracy\n";
  for (const auto& r : rows)
    out << r.method << ',' << number(r.time_seconds) << ',' << (r.accuracy ? number(*r.accuracy) : "") << '\n';
}

MethodHistory load_history_json(const std::filesystem::path& path, const std::string& fallback_method) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("malformed history " + path.string() + ": " + e.what());
  }
  MethodHistory out;
  out.method = fallback_method;
  if (j.is_array()) {
    j.get_to(out.history);
  } else {
    out.method = j.value("method", fallback_method);
    j.at("history").get_to(out.history);
  }
  return out;
}

}  // namespace gbal
