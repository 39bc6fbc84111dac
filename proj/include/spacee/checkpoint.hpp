#pragma once
// Binary checkpoint format (little-endian):
//
//   "SPKE" | u32 version | u32 precision (4 = f32, 8 = f64) | u64 n_e | u64 n_r | u64 p | u64 q
//   entity tensor | relation tensor | reverse relation tensor      (row-major, in `precision`)
//   u8 adam flag [| u64 step | f64 beta1 | f64 beta2 | f64 eps | first moments | second moments]
//   metadata ("key=value" lines: model kind, vocabulary hashes, step, config)
//   u64 metadata length | u64 FNV-1a checksum of every preceding byte

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "spacee/trainer.hpp"

namespace spacee {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);  // throws IoError

// Writes to a temporary sibling and renames, so a failed write never leaves
// a partial checkpoint at `path`.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spacee
