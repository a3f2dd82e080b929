#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cadgraph/rendering.hpp"

namespace cadgraph {

// 8-bit RGB PNG. Deterministic: a fixed zlib level and no ancillary chunks,
// so identical images encode to identical bytes.
std::vector<std::uint8_t> encode_png(const Image& image);
void write_png(const std::string& file, const Image& image);

}  // namespace cadgraph
