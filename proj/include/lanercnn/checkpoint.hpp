#pragma once

#include <string>
#include <vector>

#include "lanercnn/params.hpp"

namespace lanercnn {

// Binary parameter container. Layout (all integers little-endian u64 unless
// noted, doubles little-endian IEEE-754):
//
//   magic          8 bytes, "LRCNNCK1"
//   config_len     u64, then config_len bytes of canonical config JSON
//   num_params     u64
//   repeated per parameter, in store registration order:
//     name_len     u64, then name bytes
//     dtype        u8, 0 = float64 (the only dtype written today)
//     ndim         u64, then ndim u64 extents
//     payload      product(extents) raw doubles
//   checksum       u64, FNV-1a 64 over every preceding byte
//
// Truncation or corruption anywhere surfaces as ChecksumError; loading into a
// store with different names/shapes surfaces as ConfigMismatchError.

struct CheckpointEntry {
    std::string name;
    ad::Shape shape;
    std::vector<double> data;
};

struct Checkpoint {
    std::string config_json;
    std::vector<CheckpointEntry> entries;
};

void save_checkpoint(const std::string& path, const std::string& config_json,
                     const ParamStore& params);

Checkpoint read_checkpoint(const std::string& path);

// Copies entries into an existing store; every name must resolve and every
// shape must match.
void load_into_store(const Checkpoint& ckpt, ParamStore& params);

}  // namespace lanercnn
