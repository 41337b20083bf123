#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gvx_ref {

using gvx::Channel;
using gvx::ObjKind;
using gvx::ResolvedDesc;

Buffer make_image(int w, int h, ImageFormat f) {
    ResolvedDesc d;
    d.kind = ObjKind::Image;
    d.width = w;
    d.height = h;
    d.format = f;
    return Buffer::image(d);
}

std::int64_t geti(const Buffer& b, int x, int y) { return b.load(x, y, Channel::C0).as_int(); }
double getf(const Buffer& b, int x, int y) { return b.load(x, y, Channel::C0).as_real(); }

void seti(Buffer& b, int x, int y, std::int64_t v) {
    b.store(x, y, Channel::C0, gvx::Value::of_int(v));
}
void setf(Buffer& b, int x, int y, double v) {
    b.store(x, y, Channel::C0, gvx::Value::of_real(v));
}

std::int64_t saturate(std::int64_t v, ImageFormat f) {
    switch (f) {
    case ImageFormat::U8: return std::clamp<std::int64_t>(v, 0, 255);
    case ImageFormat::U16: return std::clamp<std::int64_t>(v, 0, 65535);
    case ImageFormat::S16: return std::clamp<std::int64_t>(v, -32768, 32767);
    case ImageFormat::S32: return std::clamp<std::int64_t>(v, INT32_MIN, INT32_MAX);
    default: return v;
    }
}

namespace {

std::int64_t round_away(double v) {
    return static_cast<std::int64_t>(v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

std::int64_t sat_round(double v, ImageFormat f) {
    if (std::isnan(v)) return 0;
    std::int64_t lo, hi;
    switch (f) {
    case ImageFormat::U8: lo = 0; hi = 255; break;
    case ImageFormat::U16: lo = 0; hi = 65535; break;
    case ImageFormat::S16: lo = -32768; hi = 32767; break;
    default: lo = INT32_MIN; hi = INT32_MAX; break;
    }
    if (v >= static_cast<double>(hi)) return hi;
    if (v <= static_cast<double>(lo)) return lo;
    return round_away(v);
}

bool is_real_format(ImageFormat f) { return f == ImageFormat::F32; }

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

template <typename Fn>
Buffer pointwise(const Buffer& a, ImageFormat out, Fn&& fn) {
    Buffer r = make_image(a.desc.width, a.desc.height, out);
    for (int y = 0; y < a.desc.height; ++y)
        for (int x = 0; x < a.desc.width; ++x) fn(r, x, y);
    return r;
}

} // namespace

Buffer channel_extract_uyvy_y(const Buffer& in) {
    Buffer out = make_image(in.desc.width, in.desc.height, ImageFormat::U8);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            std::size_t row = static_cast<std::size_t>(y) * in.desc.width * 2;
            out.bytes[static_cast<std::size_t>(y) * in.desc.width + x] =
                in.bytes[row + 2 * static_cast<std::size_t>(x) + 1];
        }
    return out;
}

Buffer channel_extract_rgb(const Buffer& in, int channel) {
    Buffer out = make_image(in.desc.width, in.desc.height, ImageFormat::U8);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x)
            out.bytes[static_cast<std::size_t>(y) * in.desc.width + x] =
                in.bytes[(static_cast<std::size_t>(y) * in.desc.width + x) * 3 +
                         static_cast<std::size_t>(channel)];
    return out;
}

Buffer channel_combine_rgb(const Buffer& r, const Buffer& g, const Buffer& b) {
    Buffer out = make_image(r.desc.width, r.desc.height, ImageFormat::RGB);
    for (int y = 0; y < r.desc.height; ++y)
        for (int x = 0; x < r.desc.width; ++x) {
            std::size_t at = (static_cast<std::size_t>(y) * r.desc.width + x) * 3;
            out.bytes[at] = static_cast<std::uint8_t>(geti(r, x, y));
            out.bytes[at + 1] = static_cast<std::uint8_t>(geti(g, x, y));
            out.bytes[at + 2] = static_cast<std::uint8_t>(geti(b, x, y));
        }
    return out;
}

Buffer add(const Buffer& a, const Buffer& b, ImageFormat out) {
    return pointwise(a, out, [&](Buffer& r, int x, int y) {
        if (is_real_format(out))
            setf(r, x, y, static_cast<float>(getf(a, x, y) + getf(b, x, y)));
        else if (is_real_format(a.desc.format) || is_real_format(b.desc.format))
            seti(r, x, y, sat_round(getf(a, x, y) + getf(b, x, y), out));
        else
            seti(r, x, y, saturate(geti(a, x, y) + geti(b, x, y), out));
    });
}

Buffer subtract(const Buffer& a, const Buffer& b, ImageFormat out) {
    return pointwise(a, out, [&](Buffer& r, int x, int y) {
        if (is_real_format(out))
            setf(r, x, y, static_cast<float>(getf(a, x, y) - getf(b, x, y)));
        else if (is_real_format(a.desc.format) || is_real_format(b.desc.format))
            seti(r, x, y, sat_round(getf(a, x, y) - getf(b, x, y), out));
        else
            seti(r, x, y, saturate(geti(a, x, y) - geti(b, x, y), out));
    });
}

Buffer multiply(const Buffer& a, const Buffer& b, double scale, ImageFormat out) {
    return pointwise(a, out, [&](Buffer& r, int x, int y) {
        if (is_real_format(out)) {
            double v = getf(a, x, y) * getf(b, x, y);
            if (scale != 1.0) v *= scale;
            setf(r, x, y, static_cast<float>(v));
        } else if (scale == 1.0 && !is_real_format(a.desc.format) &&
                   !is_real_format(b.desc.format)) {
            seti(r, x, y, saturate(geti(a, x, y) * geti(b, x, y), out));
        } else {
            double v = static_cast<double>(geti(a, x, y)) * static_cast<double>(geti(b, x, y)) *
                       scale;
            seti(r, x, y, sat_round(v, out));
        }
    });
}

Buffer absdiff(const Buffer& a, const Buffer& b) {
    return pointwise(a, a.desc.format, [&](Buffer& r, int x, int y) {
        seti(r, x, y, saturate(std::llabs(geti(a, x, y) - geti(b, x, y)), a.desc.format));
    });
}

namespace {
template <typename Fn>
Buffer bitwise(const Buffer& a, const Buffer& b, Fn&& fn) {
    return pointwise(a, a.desc.format, [&](Buffer& r, int x, int y) {
        std::int64_t v = fn(geti(a, x, y), geti(b, x, y));
        switch (a.desc.format) {
        case ImageFormat::U8: v &= 0xff; break;
        case ImageFormat::U16: v &= 0xffff; break;
        case ImageFormat::S16:
            v &= 0xffff;
            if (v >= 0x8000) v -= 0x10000;
            break;
        case ImageFormat::S32:
            v &= 0xffffffffLL;
            if (v >= 0x80000000LL) v -= 0x100000000LL;
            break;
        default: break;
        }
        seti(r, x, y, v);
    });
}
} // namespace

Buffer bit_and(const Buffer& a, const Buffer& b) {
    return bitwise(a, b, [](std::int64_t x, std::int64_t y) { return x & y; });
}
Buffer bit_or(const Buffer& a, const Buffer& b) {
    return bitwise(a, b, [](std::int64_t x, std::int64_t y) { return x | y; });
}
Buffer bit_xor(const Buffer& a, const Buffer& b) {
    return bitwise(a, b, [](std::int64_t x, std::int64_t y) { return x ^ y; });
}
Buffer bit_not(const Buffer& a) {
    return bitwise(a, a, [](std::int64_t x, std::int64_t) { return ~x; });
}

Buffer magnitude(const Buffer& gx, const Buffer& gy) {
    return pointwise(gx, ImageFormat::S16, [&](Buffer& r, int x, int y) {
        double vx = static_cast<double>(geti(gx, x, y));
        double vy = static_cast<double>(geti(gy, x, y));
        seti(r, x, y, sat_round(std::sqrt(vx * vx + vy * vy), ImageFormat::S16));
    });
}

Buffer phase(const Buffer& gx, const Buffer& gy) {
    return pointwise(gx, ImageFormat::U8, [&](Buffer& r, int x, int y) {
        double a = std::atan2(static_cast<double>(geti(gy, x, y)),
                              static_cast<double>(geti(gx, x, y)));
        if (a < 0) a += 2.0 * M_PI;
        std::int64_t v = static_cast<std::int64_t>(std::trunc(a * 256.0 / (2.0 * M_PI) + 0.5));
        seti(r, x, y, v & 0xff);
    });
}

Buffer threshold_binary(const Buffer& in, std::int64_t t) {
    return pointwise(in, ImageFormat::U8, [&](Buffer& r, int x, int y) {
        seti(r, x, y, geti(in, x, y) > t ? 255 : 0);
    });
}

Buffer threshold_range(const Buffer& in, std::int64_t lo, std::int64_t hi) {
    return pointwise(in, ImageFormat::U8, [&](Buffer& r, int x, int y) {
        std::int64_t v = geti(in, x, y);
        seti(r, x, y, (v < lo || v > hi) ? 0 : 255);
    });
}

Buffer convert_depth(const Buffer& in, ImageFormat to, int shift, bool wrap) {
    int from_bits = gvx::bytes_per_pixel(in.desc.format) * 8;
    int to_bits = gvx::bytes_per_pixel(to) * 8;
    return pointwise(in, to, [&](Buffer& r, int x, int y) {
        std::int64_t v = geti(in, x, y);
        if (shift > 0) v = to_bits >= from_bits ? (v << shift) : (v >> shift);
        if (wrap) {
            switch (to) {
            case ImageFormat::U8: v &= 0xff; break;
            case ImageFormat::U16: v &= 0xffff; break;
            case ImageFormat::S16:
                v &= 0xffff;
                if (v >= 0x8000) v -= 0x10000;
                break;
            default:
                v &= 0xffffffffLL;
                if (v >= 0x80000000LL) v -= 0x100000000LL;
                break;
            }
        } else {
            v = saturate(v, to);
        }
        seti(r, x, y, v);
    });
}

Buffer copy(const Buffer& in) { return in; }

namespace {

template <typename TapFn>
void for_window3(const Buffer& in, int x, int y, TapFn&& fn) {
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            int xx = clampi(x + dx, 0, in.desc.width - 1);
            int yy = clampi(y + dy, 0, in.desc.height - 1);
            fn(dx, dy, xx, yy);
        }
}

} // namespace

Buffer box3x3(const Buffer& in) {
    Buffer out = make_image(in.desc.width, in.desc.height, in.desc.format);
    const bool real = is_real_format(in.desc.format);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            if (real) {
                double sum = 0;
                for_window3(in, x, y, [&](int, int, int xx, int yy) { sum += getf(in, xx, yy); });
                setf(out, x, y, static_cast<float>(sum * (1.0 / 9.0)));
            } else {
                std::int64_t sum = 0;
                for_window3(in, x, y, [&](int, int, int xx, int yy) { sum += geti(in, xx, yy); });
                seti(out, x, y,
                     sat_round(static_cast<double>(sum) * (1.0 / 9.0), in.desc.format));
            }
        }
    return out;
}

Buffer gaussian3x3(const Buffer& in) {
    static const std::int64_t m[9] = {1, 2, 1, 2, 4, 2, 1, 2, 1};
    static const double mf[9] = {0.057118, 0.124758, 0.057118, 0.124758, 0.272496,
                                 0.124758, 0.057118, 0.124758, 0.057118};
    Buffer out = make_image(in.desc.width, in.desc.height, in.desc.format);
    const bool real = is_real_format(in.desc.format);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            if (real) {
                double sum = 0;
                for_window3(in, x, y, [&](int dx, int dy, int xx, int yy) {
                    sum += mf[(dy + 1) * 3 + dx + 1] * getf(in, xx, yy);
                });
                setf(out, x, y, static_cast<float>(sum));
            } else {
                std::int64_t sum = 0;
                for_window3(in, x, y, [&](int dx, int dy, int xx, int yy) {
                    sum += m[(dy + 1) * 3 + dx + 1] * geti(in, xx, yy);
                });
                seti(out, x, y,
                     sat_round(static_cast<double>(sum) * (1.0 / 16.0), in.desc.format));
            }
        }
    return out;
}

void sobel3x3(const Buffer& in, Buffer& gx, Buffer& gy) {
    static const std::int64_t mx[9] = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
    static const std::int64_t my[9] = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
    gx = make_image(in.desc.width, in.desc.height, ImageFormat::S16);
    gy = make_image(in.desc.width, in.desc.height, ImageFormat::S16);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            std::int64_t sx = 0, sy = 0;
            for_window3(in, x, y, [&](int dx, int dy, int xx, int yy) {
                std::int64_t v = geti(in, xx, yy);
                sx += mx[(dy + 1) * 3 + dx + 1] * v;
                sy += my[(dy + 1) * 3 + dx + 1] * v;
            });
            seti(gx, x, y, saturate(sx, ImageFormat::S16));
            seti(gy, x, y, saturate(sy, ImageFormat::S16));
        }
}

namespace {
template <bool kMax>
Buffer morph3x3(const Buffer& in) {
    Buffer out = make_image(in.desc.width, in.desc.height, in.desc.format);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            std::int64_t best = kMax ? INT64_MIN : INT64_MAX;
            for_window3(in, x, y, [&](int, int, int xx, int yy) {
                std::int64_t v = geti(in, xx, yy);
                best = kMax ? std::max(best, v) : std::min(best, v);
            });
            seti(out, x, y, best);
        }
    return out;
}
} // namespace

Buffer dilate3x3(const Buffer& in) { return morph3x3<true>(in); }
Buffer erode3x3(const Buffer& in) { return morph3x3<false>(in); }

Buffer median3x3(const Buffer& in) {
    Buffer out = make_image(in.desc.width, in.desc.height, in.desc.format);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            std::int64_t window[9];
            int i = 0;
            for_window3(in, x, y,
                        [&](int, int, int xx, int yy) { window[i++] = geti(in, xx, yy); });
            std::nth_element(window, window + 4, window + 9);
            seti(out, x, y, window[4]);
        }
    return out;
}

Buffer convolve(const Buffer& in, const std::vector<double>& mask, int mw, int mh,
                bool mask_is_real, std::int64_t scale, ImageFormat out_fmt) {
    Buffer out = make_image(in.desc.width, in.desc.height, out_fmt);
    const int hw = mw / 2, hh = mh / 2;
    const bool in_real = is_real_format(in.desc.format);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            if (mask_is_real || in_real) {
                double sum = 0;
                for (int dy = -hh; dy <= hh; ++dy)
                    for (int dx = -hw; dx <= hw; ++dx) {
                        int xx = clampi(x + dx, 0, in.desc.width - 1);
                        int yy = clampi(y + dy, 0, in.desc.height - 1);
                        double px = in_real ? getf(in, xx, yy)
                                            : static_cast<double>(geti(in, xx, yy));
                        sum += mask[static_cast<std::size_t>((dy + hh) * mw + dx + hw)] * px;
                    }
                if (scale != 1) sum *= 1.0 / static_cast<double>(scale);
                if (is_real_format(out_fmt))
                    setf(out, x, y, static_cast<float>(sum));
                else
                    seti(out, x, y, sat_round(sum, out_fmt));
            } else {
                std::int64_t sum = 0;
                for (int dy = -hh; dy <= hh; ++dy)
                    for (int dx = -hw; dx <= hw; ++dx) {
                        int xx = clampi(x + dx, 0, in.desc.width - 1);
                        int yy = clampi(y + dy, 0, in.desc.height - 1);
                        sum += static_cast<std::int64_t>(
                                   mask[static_cast<std::size_t>((dy + hh) * mw + dx + hw)]) *
                               geti(in, xx, yy);
                    }
                if (scale != 1)
                    seti(out, x, y,
                         sat_round(static_cast<double>(sum) * (1.0 / static_cast<double>(scale)),
                                   out_fmt));
                else
                    seti(out, x, y, saturate(sum, out_fmt));
            }
        }
    return out;
}

std::vector<std::int64_t> histogram(const Buffer& in, int bins, std::int64_t offset,
                                    std::int64_t range) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            std::int64_t v = geti(in, x, y);
            std::int64_t bin = (v - offset) * bins / range;
            if (bin >= 0 && bin < bins) ++counts[static_cast<std::size_t>(bin)];
        }
    return counts;
}

void min_max_loc(const Buffer& in, std::int64_t& mn, std::int64_t& mx, int& min_x, int& min_y,
                 int& max_x, int& max_y) {
    mn = INT64_MAX;
    mx = INT64_MIN;
    min_x = min_y = max_x = max_y = 0;
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            std::int64_t v = geti(in, x, y);
            if (v < mn) {
                mn = v;
                min_x = x;
                min_y = y;
            }
            if (v > mx) {
                mx = v;
                max_x = x;
                max_y = y;
            }
        }
}

void mean_stddev(const Buffer& in, double& mean, double& stddev) {
    const std::int64_t n = static_cast<std::int64_t>(in.desc.width) * in.desc.height;
    std::int64_t sum = 0, sumsq = 0;
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            std::int64_t v = geti(in, x, y);
            sum += v;
            sumsq += v * v;
        }
    double m = static_cast<double>(sum) / static_cast<double>(n);
    mean = static_cast<float>(m);
    double ex2 = static_cast<double>(sumsq) / static_cast<double>(n);
    double var = std::max(ex2 - m * m, 0.0);
    stddev = static_cast<float>(std::sqrt(var));
}

Buffer integral_image(const Buffer& in) {
    Buffer out = make_image(in.desc.width, in.desc.height, ImageFormat::S32);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x) {
            std::int64_t v = geti(in, x, y);
            if (x > 0) v += geti(out, x - 1, y);
            if (y > 0) v += geti(out, x, y - 1);
            if (x > 0 && y > 0) v -= geti(out, x - 1, y - 1);
            seti(out, x, y, saturate(v, ImageFormat::S32));
        }
    return out;
}

Buffer scale_image(const Buffer& in, int ow, int oh, bool bilinear) {
    Buffer out = make_image(ow, oh, in.desc.format);
    const int sw = in.desc.width, sh = in.desc.height;
    const bool real = is_real_format(in.desc.format);
    for (int y = 0; y < oh; ++y) {
        double yin = (y + 0.5) * static_cast<double>(sh) / oh - 0.5;
        for (int x = 0; x < ow; ++x) {
            double xin = (x + 0.5) * static_cast<double>(sw) / ow - 0.5;
            if (!bilinear) {
                int xi = clampi(static_cast<int>(std::floor(xin + 0.5)), 0, sw - 1);
                int yi = clampi(static_cast<int>(std::floor(yin + 0.5)), 0, sh - 1);
                if (real)
                    setf(out, x, y, getf(in, xi, yi));
                else
                    seti(out, x, y, geti(in, xi, yi));
            } else {
                int x0 = clampi(static_cast<int>(std::floor(xin)), 0, sw - 1);
                int y0 = clampi(static_cast<int>(std::floor(yin)), 0, sh - 1);
                int x1 = std::min(x0 + 1, sw - 1);
                int y1 = std::min(y0 + 1, sh - 1);
                double fx = std::clamp(xin - x0, 0.0, 1.0);
                double fy = std::clamp(yin - y0, 0.0, 1.0);
                double p00 = real ? getf(in, x0, y0) : static_cast<double>(geti(in, x0, y0));
                double p10 = real ? getf(in, x1, y0) : static_cast<double>(geti(in, x1, y0));
                double p01 = real ? getf(in, x0, y1) : static_cast<double>(geti(in, x0, y1));
                double p11 = real ? getf(in, x1, y1) : static_cast<double>(geti(in, x1, y1));
                double v = p00 * (1 - fx) * (1 - fy) + p10 * fx * (1 - fy) + p01 * (1 - fx) * fy +
                           p11 * fx * fy;
                if (real)
                    setf(out, x, y, static_cast<float>(v));
                else
                    seti(out, x, y, sat_round(v, in.desc.format));
            }
        }
    }
    return out;
}

Buffer equalize_hist(const Buffer& in) {
    std::vector<std::int64_t> hist = histogram(in, 256, 0, 256);
    const std::int64_t total = static_cast<std::int64_t>(in.desc.width) * in.desc.height;
    std::vector<std::int64_t> cdf(256, 0);
    std::int64_t running = 0, cdf_min = 0;
    bool found = false;
    for (int i = 0; i < 256; ++i) {
        running += hist[static_cast<std::size_t>(i)];
        cdf[static_cast<std::size_t>(i)] = running;
        if (!found && hist[static_cast<std::size_t>(i)] > 0) {
            cdf_min = running;
            found = true;
        }
    }
    std::vector<std::int64_t> lut(256, 0);
    for (int i = 0; i < 256; ++i) {
        if (!found || total == cdf_min) {
            lut[static_cast<std::size_t>(i)] = i;
        } else {
            double scaled = 255.0 *
                            static_cast<double>(cdf[static_cast<std::size_t>(i)] - cdf_min) /
                            static_cast<double>(total - cdf_min);
            lut[static_cast<std::size_t>(i)] = std::clamp<std::int64_t>(round_away(scaled), 0, 255);
        }
    }
    Buffer out = make_image(in.desc.width, in.desc.height, ImageFormat::U8);
    for (int y = 0; y < in.desc.height; ++y)
        for (int x = 0; x < in.desc.width; ++x)
            seti(out, x, y, lut[static_cast<std::size_t>(geti(in, x, y))]);
    return out;
}

std::set<gvx::ObjectId> reverse_reachable(
    const std::vector<std::pair<gvx::ObjectId, gvx::ObjectId>>& edges,
    const std::set<gvx::ObjectId>& roots) {
    std::set<gvx::ObjectId> alive = roots;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [from, to] : edges) {
            if (alive.count(to) && !alive.count(from)) {
                alive.insert(from);
                changed = true;
            }
        }
    }
    return alive;
}

} // namespace gvx_ref
