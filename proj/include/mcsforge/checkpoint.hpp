#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcsforge {

// Errors while reading/writing artifacts; mapped to exit code 4 by the CLI.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  std::vector<int64_t> shape;
  std::vector<double> data;  // row-major float64
};

// Self-describing tensor container used for all checkpoints.
// Round-trips bit-exactly (raw little-endian float64 payload).
struct Checkpoint {
  static constexpr uint32_t kFormatVersion = 1;

  std::map<std::string, std::string> meta;
  std::vector<NamedTensor> tensors;

  void add(const std::string& name, std::vector<int64_t> shape, std::vector<double> data);
  const NamedTensor& find(const std::string& name) const;
  bool has(const std::string& name) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace mcsforge
