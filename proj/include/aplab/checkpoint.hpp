#pragma once

#include <string>
#include <utility>

#include "aplab/network.hpp"

namespace aplab {

// Binary checkpoint, little-endian:
//   "APLB" | u32 version=1 | u32 n_layers
//   per layer: u32 in_dim | u32 out_dim | u8 activation code | f32 leaky slope
//              f32 weights[in*out] row-major | f32 bias[out]
//              mask bitset, LSB-first, ceil(in*out/8) bytes, row-major bit order
void save_checkpoint(const MlpModel& model, const PruneMask& mask, const std::string& path);

std::pair<MlpModel, PruneMask> load_checkpoint(const std::string& path);

/// Exact on-disk size of a checkpoint for this model.
std::size_t checkpoint_byte_size(const MlpModel& model);

}  // namespace aplab
