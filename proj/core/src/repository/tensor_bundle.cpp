#include "modelps/repository/tensor_bundle.h"

#include <bit>
#include <cstring>

#include <nlohmann/json.hpp>

#include "modelps/error.h"

namespace modelps::repo {
namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor blobs assume a little-endian host");

constexpr const char* kFormat = "modelps.tensors/1";

[[noreturn]] void corrupt(const std::string& why) {
  throw Error(ErrorCode::kStoreCorrupt, "malformed tensor blob: " + why,
              {{"reason", why}});
}

}  // namespace

const Tensor* TensorBundle::find(const std::string& node_id,
                                 const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.node_id == node_id && t.name == name) return &t;
  }
  return nullptr;
}

std::vector<std::uint8_t> encode_tensors(const TensorBundle& bundle) {
  const std::size_t elem = bundle.dtype == DType::kFloat32 ? 4 : 8;
  nlohmann::ordered_json header = {
      {"format", kFormat},
      {"dtype", bundle.dtype == DType::kFloat32 ? "float32" : "float64"},
      {"tensors", nlohmann::ordered_json::array()}};
  std::size_t offset = 0;
  for (const auto& t : bundle.tensors) {
    header["tensors"].push_back({{"node_id", t.node_id},
                                 {"name", t.name},
                                 {"shape", t.shape},
                                 {"offset", offset},
                                 {"count", t.values.size()}});
    offset += t.values.size();
  }
  const std::string h = header.dump();
  std::vector<std::uint8_t> out(8 + h.size() + offset * elem);
  const std::uint64_t hlen = h.size();
  std::memcpy(out.data(), &hlen, 8);
  std::memcpy(out.data() + 8, h.data(), h.size());
  std::uint8_t* data = out.data() + 8 + h.size();
  for (const auto& t : bundle.tensors) {
    for (double v : t.values) {
      if (elem == 4) {
        float f = static_cast<float>(v);
        std::memcpy(data, &f, 4);
      } else {
        std::memcpy(data, &v, 8);
      }
      data += elem;
    }
  }
  return out;
}

TensorBundle decode_tensors(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) corrupt("truncated header length");
  std::uint64_t hlen = 0;
  std::memcpy(&hlen, bytes.data(), 8);
  if (hlen > bytes.size() - 8) corrupt("header length exceeds blob");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + hlen);
  } catch (const nlohmann::json::exception& e) {
    corrupt(e.what());
  }
  if (header.value("format", "") != kFormat) corrupt("unknown format");
  TensorBundle bundle;
  const std::string dtype = header.value("dtype", "");
  if (dtype == "float32") {
    bundle.dtype = DType::kFloat32;
  } else if (dtype == "float64") {
    bundle.dtype = DType::kFloat64;
  } else {
    corrupt("unknown dtype '" + dtype + "'");
  }
  const std::size_t elem = bundle.dtype == DType::kFloat32 ? 4 : 8;
  const std::uint8_t* data = bytes.data() + 8 + hlen;
  const std::size_t data_elems = (bytes.size() - 8 - hlen) / elem;
  try {
    for (const auto& tj : header.at("tensors")) {
      Tensor t;
      t.node_id = tj.at("node_id").get<std::string>();
      t.name = tj.at("name").get<std::string>();
      t.shape = tj.at("shape").get<std::vector<std::int64_t>>();
      const auto offset = tj.at("offset").get<std::size_t>();
      const auto count = tj.at("count").get<std::size_t>();
      if (offset + count > data_elems) corrupt("tensor extends past data section");
      t.values.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* p = data + (offset + i) * elem;
        if (elem == 4) {
          float f;
          std::memcpy(&f, p, 4);
          t.values[i] = f;
        } else {
          std::memcpy(&t.values[i], p, 8);
        }
      }
      bundle.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    corrupt(e.what());
  }
  return bundle;
}

}  // namespace modelps::repo
