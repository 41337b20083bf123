#pragma once

#include <cstdint>
#include <string>

namespace gvx {

/// Pixel layouts for image objects. U8..F32 are single channel, RGB is three
/// interleaved bytes per pixel, UYVY is 4:2:2 packed (two pixels per four
/// bytes, full-resolution luma). UNRESOLVED is the placeholder carried by
/// virtual images until verification resolves them.
enum class ImageFormat : std::uint8_t {
    U8,
    U16,
    S16,
    S32,
    F32,
    RGB,
    UYVY,
    UNRESOLVED,
};

/// Element types for scalars, arrays, matrices and for expression values at
/// kernel boundaries. I64/F64 are the internal evaluation domain and never
/// appear as a storage format.
enum class ScalarType : std::uint8_t {
    U8,
    U16,
    S16,
    S32,
    F32,
    I64,
    F64,
};

enum class Channel : std::uint8_t { C0 = 0, R, G, B, Y, U, V };

const char* to_string(ImageFormat f);
const char* to_string(ScalarType t);
const char* to_string(Channel c);

bool parse_image_format(const std::string& s, ImageFormat& out);
bool parse_scalar_type(const std::string& s, ScalarType& out);
bool parse_channel(const std::string& s, Channel& out);

inline bool is_float(ScalarType t) { return t == ScalarType::F32 || t == ScalarType::F64; }
inline bool is_storage(ScalarType t) { return t != ScalarType::I64 && t != ScalarType::F64; }

/// Number of interleaved channels a pixel fetch can address.
int channel_count(ImageFormat f);

/// Bytes per pixel in the row-major payload (UYVY averages to 2).
int bytes_per_pixel(ImageFormat f);

/// Element type of a single channel read from an image of format `f`.
ScalarType scalar_of(ImageFormat f);

/// Storage format holding exactly one channel of ScalarType `t`.
ImageFormat format_of(ScalarType t);

/// Inclusive integer range of a storage type; false for float types.
bool integer_range(ScalarType t, std::int64_t& lo, std::int64_t& hi);

} // namespace gvx
