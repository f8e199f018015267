#pragma once

// Binary tensors exchanged with the segmentation network.
//   PreImage: "WFLD", u32 version = 1, u32 n_tone, u32 n, then n_tone*n*n complex values as
//             little-endian float64 (re, im) pairs in (tone, row, col) order.
//   LabelGrid: "WLBL", u32 n, then n*n label bytes in row-major order.

#include <filesystem>
#include <string>

#include "wifield/invert.hpp"
#include "wifield/scene.hpp"

namespace wifield {

inline constexpr std::uint32_t kPreImageVersion = 1;

std::string encode_preimage(const PreImage& img);
PreImage decode_preimage(const std::string& bytes);
void write_preimage(const PreImage& img, const std::filesystem::path& path);
PreImage read_preimage(const std::filesystem::path& path);

std::string encode_labels(const LabelGrid& labels);
LabelGrid decode_labels(const std::string& bytes);
void write_labels(const LabelGrid& labels, const std::filesystem::path& path);
LabelGrid read_labels(const std::filesystem::path& path);

}  // namespace wifield
