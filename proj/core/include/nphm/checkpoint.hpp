#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nphm/common.hpp"

namespace nphm {

/// Named-tensor container behind all model checkpoints.
///
/// Binary layout (little-endian):
///   magic "NPHM" | format version u32 | tensor count u32 |
///   per tensor: name length u32 | UTF-8 name | rank u32 | dims u32[rank] |
///               f32 payload (column-major for rank 2)
/// Round-trips are bit-exact.
class TensorStore {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  void put(const std::string& name, const MatX& m);
  void put(const std::string& name, const VecX& v);
  void put_scalar(const std::string& name, double v);

  bool contains(const std::string& name) const;
  MatX matrix(const std::string& name) const;
  VecX vector(const std::string& name) const;
  double scalar(const std::string& name) const;

  std::vector<std::string> names() const;

  void save(const std::string& path) const;
  static TensorStore load(const std::string& path);

  std::vector<std::uint8_t> serialize() const;
  static TensorStore deserialize(const std::vector<std::uint8_t>& bytes);

 private:
  struct Record {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;
  };
  std::map<std::string, Record> records_;
};

}  // namespace nphm
