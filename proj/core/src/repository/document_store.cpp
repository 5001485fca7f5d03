#include <algorithm>

#include "modelps/error.h"
#include "modelps/repository/stores.h"
#include "modelps/util.h"

namespace modelps::repo {
namespace fs = std::filesystem;

FileDocumentStore::FileDocumentStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
}

fs::path FileDocumentStore::path_for(const std::string& collection,
                                     const std::string& id) const {
  if (id.empty() || id.find('/') != std::string::npos || id.find("..") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "invalid document id '" + id + "'");
  }
  return root_ / collection / (id + ".json");
}

void FileDocumentStore::put(const std::string& collection, const std::string& id,
                            const nlohmann::json& doc) {
  write_file_atomic(path_for(collection, id), doc.dump(2));
}

std::optional<nlohmann::json> FileDocumentStore::get(const std::string& collection,
                                                     const std::string& id) const {
  const fs::path p = path_for(collection, id);
  std::error_code ec;
  if (!fs::exists(p, ec)) return std::nullopt;
  try {
    return nlohmann::json::parse(read_file_text(p));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kStoreCorrupt, "corrupt document " + p.string(),
                {{"path", p.string()}, {"reason", e.what()}});
  }
}

std::vector<std::string> FileDocumentStore::list(const std::string& collection) const {
  std::vector<std::string> ids;
  const fs::path dir = root_ / collection;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool FileDocumentStore::remove(const std::string& collection, const std::string& id) {
  std::error_code ec;
  return fs::remove(path_for(collection, id), ec);
}

void MemoryDocumentStore::put(const std::string& collection, const std::string& id,
                              const nlohmann::json& doc) {
  std::lock_guard lock(mu_);
  docs_[collection][id] = doc;
}

std::optional<nlohmann::json> MemoryDocumentStore::get(const std::string& collection,
                                                       const std::string& id) const {
  std::lock_guard lock(mu_);
  auto c = docs_.find(collection);
  if (c == docs_.end()) return std::nullopt;
  auto d = c->second.find(id);
  if (d == c->second.end()) return std::nullopt;
  return std::optional<nlohmann::json>(std::in_place, d->second);
}

std::vector<std::string> MemoryDocumentStore::list(const std::string& collection) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  auto c = docs_.find(collection);
  if (c != docs_.end()) {
    for (const auto& [id, _] : c->second) ids.push_back(id);
  }
  return ids;
}

bool MemoryDocumentStore::remove(const std::string& collection, const std::string& id) {
  std::lock_guard lock(mu_);
  auto c = docs_.find(collection);
  return c != docs_.end() && c->second.erase(id) > 0;
}

}  // namespace modelps::repo
