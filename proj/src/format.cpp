#include "graphvx/format.hpp"

#include "graphvx/error.hpp"

namespace gvx {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::BadKernel: return "BadKernel";
    case ErrorCode::AccessDenied: return "AccessDenied";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::UnknownKernel: return "UnknownKernel";
    case ErrorCode::CrossGraphVirtual: return "CrossGraphVirtual";
    case ErrorCode::MultipleWriters: return "MultipleWriters";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::UnstampedGraph: return "UnstampedGraph";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DivByZero: return "DivByZero";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::MissingCast: return "MissingCast";
    case ErrorCode::OffsetOutOfWindow: return "OffsetOutOfWindow";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::NonStreamable: return "NonStreamable";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaError: return "SchemaError";
    }
    return "Unknown";
}

const char* to_string(ImageFormat f) {
    switch (f) {
    case ImageFormat::U8: return "U8";
    case ImageFormat::U16: return "U16";
    case ImageFormat::S16: return "S16";
    case ImageFormat::S32: return "S32";
    case ImageFormat::F32: return "F32";
    case ImageFormat::RGB: return "RGB";
    case ImageFormat::UYVY: return "UYVY";
    case ImageFormat::UNRESOLVED: return "UNRESOLVED";
    }
    return "?";
}

const char* to_string(ScalarType t) {
    switch (t) {
    case ScalarType::U8: return "U8";
    case ScalarType::U16: return "U16";
    case ScalarType::S16: return "S16";
    case ScalarType::S32: return "S32";
    case ScalarType::F32: return "F32";
    case ScalarType::I64: return "I64";
    case ScalarType::F64: return "F64";
    }
    return "?";
}

const char* to_string(Channel c) {
    switch (c) {
    case Channel::C0: return "0";
    case Channel::R: return "R";
    case Channel::G: return "G";
    case Channel::B: return "B";
    case Channel::Y: return "Y";
    case Channel::U: return "U";
    case Channel::V: return "V";
    }
    return "?";
}

bool parse_image_format(const std::string& s, ImageFormat& out) {
    for (ImageFormat f : {ImageFormat::U8, ImageFormat::U16, ImageFormat::S16, ImageFormat::S32,
                          ImageFormat::F32, ImageFormat::RGB, ImageFormat::UYVY,
                          ImageFormat::UNRESOLVED}) {
        if (s == to_string(f)) {
            out = f;
            return true;
        }
    }
    return false;
}

bool parse_scalar_type(const std::string& s, ScalarType& out) {
    for (ScalarType t : {ScalarType::U8, ScalarType::U16, ScalarType::S16, ScalarType::S32,
                         ScalarType::F32, ScalarType::I64, ScalarType::F64}) {
        if (s == to_string(t)) {
            out = t;
            return true;
        }
    }
    return false;
}

bool parse_channel(const std::string& s, Channel& out) {
    for (Channel c : {Channel::C0, Channel::R, Channel::G, Channel::B, Channel::Y, Channel::U,
                      Channel::V}) {
        if (s == to_string(c)) {
            out = c;
            return true;
        }
    }
    return false;
}

int channel_count(ImageFormat f) {
    switch (f) {
    case ImageFormat::RGB: return 3;
    case ImageFormat::UYVY: return 3; // Y, U, V addressable
    default: return 1;
    }
}

int bytes_per_pixel(ImageFormat f) {
    switch (f) {
    case ImageFormat::U8: return 1;
    case ImageFormat::U16:
    case ImageFormat::S16: return 2;
    case ImageFormat::S32:
    case ImageFormat::F32: return 4;
    case ImageFormat::RGB: return 3;
    case ImageFormat::UYVY: return 2;
    case ImageFormat::UNRESOLVED: return 0;
    }
    return 0;
}

ScalarType scalar_of(ImageFormat f) {
    switch (f) {
    case ImageFormat::U8:
    case ImageFormat::RGB:
    case ImageFormat::UYVY: return ScalarType::U8;
    case ImageFormat::U16: return ScalarType::U16;
    case ImageFormat::S16: return ScalarType::S16;
    case ImageFormat::S32: return ScalarType::S32;
    case ImageFormat::F32: return ScalarType::F32;
    case ImageFormat::UNRESOLVED: break;
    }
    throw Error(ErrorCode::BadFormat, "no scalar type for UNRESOLVED");
}

ImageFormat format_of(ScalarType t) {
    switch (t) {
    case ScalarType::U8: return ImageFormat::U8;
    case ScalarType::U16: return ImageFormat::U16;
    case ScalarType::S16: return ImageFormat::S16;
    case ScalarType::S32: return ImageFormat::S32;
    case ScalarType::F32: return ImageFormat::F32;
    default: break;
    }
    throw Error(ErrorCode::BadFormat, "internal type has no storage format");
}

bool integer_range(ScalarType t, std::int64_t& lo, std::int64_t& hi) {
    switch (t) {
    case ScalarType::U8: lo = 0; hi = 255; return true;
    case ScalarType::U16: lo = 0; hi = 65535; return true;
    case ScalarType::S16: lo = -32768; hi = 32767; return true;
    case ScalarType::S32: lo = INT32_MIN; hi = INT32_MAX; return true;
    default: return false;
    }
}

} // namespace gvx
