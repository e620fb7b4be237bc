#pragma once

#include "metacon/param_set.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace metacon {

// Versioned binary container: magic + version header, a typed metadata
// section, then named ParamSets with little-endian 64-bit float payloads.
// Round-trips bit-exactly, including optimizer moments and rng states, so
// interrupted runs resume deterministically.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  std::string algo;
  std::map<std::string, int64_t> ints;
  std::map<std::string, double> reals;
  std::map<std::string, std::string> strs;
  std::map<std::string, std::vector<uint8_t>> blobs;
  std::map<std::string, ParamSet> sets;
};

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace metacon
