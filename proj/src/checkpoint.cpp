#include "mcsforge/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mcsforge {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'S', 'F'};

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_i64(std::ostream& os, int64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void write_str(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t read_u32(std::istream& is) {
  uint32_t v;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
int64_t read_i64(std::istream& is) {
  int64_t v;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
std::string read_str(std::istream& is) {
  uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

}  // namespace

void Checkpoint::add(const std::string& name, std::vector<int64_t> shape,
                     std::vector<double> data) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  if (n != static_cast<int64_t>(data.size()))
    throw std::invalid_argument("tensor shape does not match data size: " + name);
  tensors.push_back({name, std::move(shape), std::move(data)});
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

const NamedTensor& Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw IoError("checkpoint is missing tensor: " + name);
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kMagic, 4);
  write_u32(os, kFormatVersion);
  write_u32(os, static_cast<uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    write_str(os, k);
    write_str(os, v);
  }
  write_u32(os, static_cast<uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    write_str(os, t.name);
    write_u32(os, static_cast<uint32_t>(t.shape.size()));
    for (int64_t d : t.shape) write_i64(os, d);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
  if (!os) throw IoError("write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a checkpoint file: " + path);
  const uint32_t version = read_u32(is);
  if (version != kFormatVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint cp;
  const uint32_t nmeta = read_u32(is);
  for (uint32_t k = 0; k < nmeta; ++k) {
    std::string key = read_str(is);
    cp.meta[key] = read_str(is);
  }
  const uint32_t nt = read_u32(is);
  for (uint32_t k = 0; k < nt; ++k) {
    NamedTensor t;
    t.name = read_str(is);
    const uint32_t nd = read_u32(is);
    int64_t count = 1;
    for (uint32_t d = 0; d < nd; ++d) {
      t.shape.push_back(read_i64(is));
      count *= t.shape.back();
    }
    t.data.resize(static_cast<size_t>(count));
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    cp.tensors.push_back(std::move(t));
  }
  if (!is) throw IoError("truncated checkpoint: " + path);
  return cp;
}

}  // namespace mcsforge
