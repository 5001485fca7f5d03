#include "modelps/error.h"
#include "modelps/repository/stores.h"
#include "modelps/util.h"

namespace modelps::repo {
namespace fs = std::filesystem;

FileBlobStore::FileBlobStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
}

std::string FileBlobStore::put(std::span<const std::uint8_t> bytes) {
  std::string ref = sha256_hex(bytes);
  const fs::path p = root_ / ref;
  std::error_code ec;
  if (!fs::exists(p, ec)) write_file_atomic(p, bytes);
  return ref;
}

std::optional<std::vector<std::uint8_t>> FileBlobStore::get(const std::string& ref) const {
  if (ref.find('/') != std::string::npos) return std::nullopt;
  const fs::path p = root_ / ref;
  std::error_code ec;
  if (!fs::exists(p, ec)) return std::nullopt;
  return read_file_bytes(p);
}

bool FileBlobStore::contains(const std::string& ref) const {
  std::error_code ec;
  return ref.find('/') == std::string::npos && fs::exists(root_ / ref, ec);
}

std::string MemoryBlobStore::put(std::span<const std::uint8_t> bytes) {
  std::string ref = sha256_hex(bytes);
  std::lock_guard lock(mu_);
  blobs_.try_emplace(ref, bytes.begin(), bytes.end());
  return ref;
}

std::optional<std::vector<std::uint8_t>> MemoryBlobStore::get(const std::string& ref) const {
  std::lock_guard lock(mu_);
  auto it = blobs_.find(ref);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

bool MemoryBlobStore::contains(const std::string& ref) const {
  std::lock_guard lock(mu_);
  return blobs_.count(ref) > 0;
}

}  // namespace modelps::repo
