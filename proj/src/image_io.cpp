#include "graphvx/image_io.hpp"

#include <cstring>
#include <fstream>

namespace gvx {

namespace {

constexpr char kRawMagic[4] = {'G', 'V', 'X', 'R'};

std::uint8_t format_tag(ImageFormat f) { return static_cast<std::uint8_t>(f); }

int skip_pnm_whitespace(std::istream& in) {
    int c = in.get();
    while (c == '#' || std::isspace(c)) {
        if (c == '#')
            while (c != '\n' && c != EOF) c = in.get();
        c = in.get();
    }
    return c;
}

int read_pnm_int(std::istream& in) {
    int c = skip_pnm_whitespace(in);
    int v = 0;
    while (std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = in.get();
    }
    return v;
}

} // namespace

std::string default_extension(ImageFormat f) {
    switch (f) {
    case ImageFormat::U8: return ".pgm";
    case ImageFormat::RGB: return ".ppm";
    default: return ".raw";
    }
}

Buffer read_image_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) {
        bool rgb = magic[1] == '6';
        int w = read_pnm_int(in);
        int h = read_pnm_int(in);
        int maxval = read_pnm_int(in);
        if (w < 1 || h < 1 || maxval != 255)
            throw Error(ErrorCode::IoError, "unsupported PNM header in '" + path + "'");
        ResolvedDesc d;
        d.kind = ObjKind::Image;
        d.width = w;
        d.height = h;
        d.format = rgb ? ImageFormat::RGB : ImageFormat::U8;
        Buffer b = Buffer::image(d);
        in.read(reinterpret_cast<char*>(b.bytes.data()),
                static_cast<std::streamsize>(b.bytes.size()));
        if (!in) throw Error(ErrorCode::IoError, "truncated PNM payload in '" + path + "'");
        return b;
    }

    char rest[2];
    in.read(rest, 2);
    if (!in || std::memcmp(magic, kRawMagic, 2) != 0 || std::memcmp(rest, kRawMagic + 2, 2) != 0)
        throw Error(ErrorCode::IoError, "unrecognized image container in '" + path + "'");
    std::uint32_t w = 0, h = 0;
    std::uint8_t tag = 0;
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    in.read(reinterpret_cast<char*>(&tag), 1);
    if (!in || w < 1 || h < 1 || tag > static_cast<std::uint8_t>(ImageFormat::UYVY))
        throw Error(ErrorCode::IoError, "bad raw header in '" + path + "'");
    ResolvedDesc d;
    d.kind = ObjKind::Image;
    d.width = static_cast<int>(w);
    d.height = static_cast<int>(h);
    d.format = static_cast<ImageFormat>(tag);
    Buffer b = Buffer::image(d);
    in.read(reinterpret_cast<char*>(b.bytes.data()),
            static_cast<std::streamsize>(b.bytes.size()));
    if (!in) throw Error(ErrorCode::IoError, "truncated raw payload in '" + path + "'");
    return b;
}

void write_image_file(const std::string& path, const Buffer& image) {
    if (image.desc.kind != ObjKind::Image)
        throw Error(ErrorCode::IoError, "buffer is not an image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");

    const ImageFormat f = image.desc.format;
    if (f == ImageFormat::U8 || f == ImageFormat::RGB) {
        out << (f == ImageFormat::RGB ? "P6" : "P5") << "\n"
            << image.desc.width << " " << image.desc.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(image.bytes.data()),
                  static_cast<std::streamsize>(image.bytes.size()));
        return;
    }

    out.write(kRawMagic, 4);
    std::uint32_t w = static_cast<std::uint32_t>(image.desc.width);
    std::uint32_t h = static_cast<std::uint32_t>(image.desc.height);
    std::uint8_t tag = format_tag(f);
    out.write(reinterpret_cast<const char*>(&w), 4);
    out.write(reinterpret_cast<const char*>(&h), 4);
    out.write(reinterpret_cast<const char*>(&tag), 1);
    out.write(reinterpret_cast<const char*>(image.bytes.data()),
              static_cast<std::streamsize>(image.bytes.size()));
}

} // namespace gvx
