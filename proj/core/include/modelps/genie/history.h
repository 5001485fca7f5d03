#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <vector>

#include "modelps/genie/query.h"

namespace modelps::genie {

// Append-only history of validation results, optionally backed by a JSON-lines
// file (one record per line).
class HistoryLog {
 public:
  HistoryLog() = default;
  explicit HistoryLog(std::filesystem::path path);

  void append(const HistoryRecord& record);
  std::vector<HistoryRecord> snapshot() const;
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::mutex mu_;
  std::vector<HistoryRecord> records_;
};

}  // namespace modelps::genie
