#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace modelps::repo {

enum class DType { kFloat32, kFloat64 };

struct Tensor {
  std::string node_id;
  std::string name;  // "weight" | "bias" | free-form for auxiliary state
  std::vector<std::int64_t> shape;
  std::vector<double> values;

  bool operator==(const Tensor&) const = default;
};

// Weight blob layout:
//   bytes [0, 8)    : little-endian uint64 header length H
//   bytes [8, 8+H)  : UTF-8 JSON header
//                     {"format":"modelps.tensors/1","dtype":"float32",
//                      "tensors":[{"node_id","name","shape","offset","count"}]}
//   bytes [8+H, ..) : little-endian tensor data; offsets are element offsets
//                     from the start of the data section.
// Published weights use float32; checkpoints use float64 so that resuming
// is bit-exact.
struct TensorBundle {
  DType dtype = DType::kFloat32;
  std::vector<Tensor> tensors;

  const Tensor* find(const std::string& node_id, const std::string& name) const;

  bool operator==(const TensorBundle&) const = default;
};

std::vector<std::uint8_t> encode_tensors(const TensorBundle& bundle);
// Throws StoreCorrupt on malformed input.
TensorBundle decode_tensors(std::span<const std::uint8_t> bytes);

}  // namespace modelps::repo
