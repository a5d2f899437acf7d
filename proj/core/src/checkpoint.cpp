#include "nphm/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace nphm {

namespace {
constexpr char kMagic[4] = {'N', 'P', 'H', 'M'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw IoError("checkpoint: truncated stream");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}
}  // namespace

void TensorStore::put(const std::string& name, const MatX& m) {
  Record r;
  r.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  r.data.resize(static_cast<std::size_t>(m.size()));
  for (Index j = 0, k = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) r.data[k++] = static_cast<float>(m(i, j));
  records_[name] = std::move(r);
}

void TensorStore::put(const std::string& name, const VecX& v) {
  Record r;
  r.dims = {static_cast<std::uint32_t>(v.size())};
  r.data.resize(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) r.data[i] = static_cast<float>(v(i));
  records_[name] = std::move(r);
}

void TensorStore::put_scalar(const std::string& name, double v) {
  Record r;
  r.dims = {1};
  r.data = {static_cast<float>(v)};
  records_[name] = std::move(r);
}

bool TensorStore::contains(const std::string& name) const { return records_.count(name) > 0; }

MatX TensorStore::matrix(const std::string& name) const {
  auto it = records_.find(name);
  if (it == records_.end()) throw IoError("checkpoint: missing tensor " + name);
  const Record& r = it->second;
  if (r.dims.size() != 2) throw IoError("checkpoint: tensor " + name + " is not rank 2");
  MatX m(r.dims[0], r.dims[1]);
  for (Index j = 0, k = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<double>(r.data[k++]);
  return m;
}

VecX TensorStore::vector(const std::string& name) const {
  auto it = records_.find(name);
  if (it == records_.end()) throw IoError("checkpoint: missing tensor " + name);
  const Record& r = it->second;
  if (r.dims.size() != 1) throw IoError("checkpoint: tensor " + name + " is not rank 1");
  VecX v(r.dims[0]);
  for (Index i = 0; i < v.size(); ++i) v(i) = static_cast<double>(r.data[i]);
  return v;
}

double TensorStore::scalar(const std::string& name) const {
  VecX v = vector(name);
  if (v.size() != 1) throw IoError("checkpoint: tensor " + name + " is not a scalar");
  return v(0);
}

std::vector<std::string> TensorStore::names() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& [k, v] : records_) out.push_back(k);
  return out;
}

std::vector<std::uint8_t> TensorStore::serialize() const {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(records_.size()));
  for (const auto& [name, r] : records_) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<std::uint32_t>(r.dims.size()));
    for (auto d : r.dims) put_u32(out, d);
    const std::size_t bytes = r.data.size() * sizeof(float);
    const std::size_t base = out.size();
    out.resize(base + bytes);
    std::memcpy(out.data() + base, r.data.data(), bytes);
  }
  return out;
}

TensorStore TensorStore::deserialize(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw IoError("checkpoint: bad magic");
  pos = 4;
  const std::uint32_t version = get_u32(bytes, pos);
  if (version != kFormatVersion) throw IoError("checkpoint: unsupported format version");
  const std::uint32_t count = get_u32(bytes, pos);
  TensorStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(bytes, pos);
    if (pos + name_len > bytes.size()) throw IoError("checkpoint: truncated name");
    std::string name(reinterpret_cast<const char*>(bytes.data() + pos), name_len);
    pos += name_len;
    const std::uint32_t rank = get_u32(bytes, pos);
    Record r;
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      r.dims.push_back(get_u32(bytes, pos));
      total *= r.dims.back();
    }
    if (pos + total * sizeof(float) > bytes.size()) throw IoError("checkpoint: truncated payload");
    r.data.resize(total);
    std::memcpy(r.data.data(), bytes.data() + pos, total * sizeof(float));
    pos += total * sizeof(float);
    store.records_[name] = std::move(r);
  }
  return store;
}

void TensorStore::save(const std::string& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("checkpoint: write failed for " + path);
}

TensorStore TensorStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("checkpoint: cannot open " + path);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw IoError("checkpoint: read failed for " + path);
  return deserialize(bytes);
}

}  // namespace nphm
