#pragma once

#include "eleuler/spectral_field.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace eleuler {

inline constexpr char kCheckpointMagic[4] = {'E', 'L', 'E', 'U'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Named n-component fields at one time. Layout on disk (little-endian):
///   "ELEU" | u16 version | u16 n | u32 N | f64 s | f64 time | u32 count
///   then per field: u32 name bytes | name | n arrays of N^n (f64 re, f64 im)
/// in flat mode order.
struct Checkpoint {
  int dim = 2;
  int grid_n = 0;
  double s = 3.0;
  double time = 0.0;
  std::vector<std::pair<std::string, SpectralField>> fields;

  /// Throws IoError if the field is absent.
  const SpectralField& field(const std::string& name) const;
  bool has(const std::string& name) const;
};

std::vector<char> encode_checkpoint(const Checkpoint& c);
/// Throws IoError on bad magic, unknown version, truncation or trailing bytes.
Checkpoint decode_checkpoint(const std::vector<char>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// True when the file starts with the checkpoint magic.
bool looks_like_checkpoint(const std::filesystem::path& path);

}  // namespace eleuler
