#include "modelps/genie/history.h"

#include <fstream>

#include "modelps/error.h"

namespace modelps::genie {

HistoryLog::HistoryLog(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(*path_);
  if (!in) return;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      records_.push_back(history_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kStoreCorrupt, "bad history line " + std::to_string(n) + ": " + e.what(),
                  {{"path", path_->string()}, {"line", n}});
    }
  }
}

void HistoryLog::append(const HistoryRecord& record) {
  std::lock_guard lock(mu_);
  if (path_) {
    if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
    std::ofstream out(*path_, std::ios::app);
    out << to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kInternal, "cannot append to " + path_->string());
  }
  records_.push_back(record);
}

std::vector<HistoryRecord> HistoryLog::snapshot() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t HistoryLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

}  // namespace modelps::genie
