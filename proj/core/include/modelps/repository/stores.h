#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace modelps::repo {

// One JSON document per (collection, id).
class DocumentStore {
 public:
  virtual ~DocumentStore() = default;

  virtual void put(const std::string& collection, const std::string& id,
                   const nlohmann::json& doc) = 0;
  virtual std::optional<nlohmann::json> get(const std::string& collection,
                                            const std::string& id) const = 0;
  // Sorted ids.
  virtual std::vector<std::string> list(const std::string& collection) const = 0;
  virtual bool remove(const std::string& collection, const std::string& id) = 0;
};

// <root>/<collection>/<id>.json, written atomically.
class FileDocumentStore final : public DocumentStore {
 public:
  explicit FileDocumentStore(std::filesystem::path root);

  void put(const std::string& collection, const std::string& id,
           const nlohmann::json& doc) override;
  // Throws StoreCorrupt(path) on unparsable documents.
  std::optional<nlohmann::json> get(const std::string& collection,
                                    const std::string& id) const override;
  std::vector<std::string> list(const std::string& collection) const override;
  bool remove(const std::string& collection, const std::string& id) override;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path path_for(const std::string& collection,
                                 const std::string& id) const;

  std::filesystem::path root_;
};

class MemoryDocumentStore final : public DocumentStore {
 public:
  void put(const std::string& collection, const std::string& id,
           const nlohmann::json& doc) override;
  std::optional<nlohmann::json> get(const std::string& collection,
                                    const std::string& id) const override;
  std::vector<std::string> list(const std::string& collection) const override;
  bool remove(const std::string& collection, const std::string& id) override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::map<std::string, nlohmann::json>> docs_;
};

// Append-only, content-addressed by sha256 hex digest.
class BlobStore {
 public:
  virtual ~BlobStore() = default;

  virtual std::string put(std::span<const std::uint8_t> bytes) = 0;
  virtual std::optional<std::vector<std::uint8_t>> get(const std::string& ref) const = 0;
  virtual bool contains(const std::string& ref) const = 0;
};

// <root>/<sha256>.
class FileBlobStore final : public BlobStore {
 public:
  explicit FileBlobStore(std::filesystem::path root);

  std::string put(std::span<const std::uint8_t> bytes) override;
  std::optional<std::vector<std::uint8_t>> get(const std::string& ref) const override;
  bool contains(const std::string& ref) const override;

 private:
  std::filesystem::path root_;
};

class MemoryBlobStore final : public BlobStore {
 public:
  std::string put(std::span<const std::uint8_t> bytes) override;
  std::optional<std::vector<std::uint8_t>> get(const std::string& ref) const override;
  bool contains(const std::string& ref) const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::vector<std::uint8_t>> blobs_;
};

}  // namespace modelps::repo
