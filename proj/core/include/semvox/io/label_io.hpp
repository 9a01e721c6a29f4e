#pragma once

#include <filesystem>

#include "semvox/metrics.hpp"
#include "semvox/semantic_types.hpp"

namespace semvox::io {

/// Single-channel 8-bit label image; 255 is unlabeled. Throws
/// CorruptMaskError for unreadable or multi-channel images.
semantics::LabelMask read_mask(const std::filesystem::path& path);
/// Writes a lossless PNG.
void write_mask(const std::filesystem::path& path, const semantics::LabelMask& mask);

/// Little-endian float32 array of shape (H, W, C) in C order.
ConfidenceImage read_npy_confidence(const std::filesystem::path& path);
void write_npy_confidence(const std::filesystem::path& path, const ConfidenceImage& image);

}  // namespace semvox::io
