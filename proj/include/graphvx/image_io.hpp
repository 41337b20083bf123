#pragma once

#include "graphvx/execute.hpp"

#include <string>

namespace gvx {

/// Image file I/O: PGM (P5, maxval 255) for single-channel U8, PPM (P6) for
/// RGB, and a raw container for everything else (see docs/formats.md):
///   magic "GVXR" | u32le width | u32le height | u8 format tag | payload
/// Payload is the row-major packed buffer, little-endian.
Buffer read_image_file(const std::string& path);
void write_image_file(const std::string& path, const Buffer& image);

/// Picks .pgm/.ppm/.raw by format.
std::string default_extension(ImageFormat f);

} // namespace gvx
