#pragma once

// Brute-force reference implementations of the registered CV functions.
// Straight loops over pixel buffers, written independently of the expression
// IR and execution engines so they can serve as oracles.

#include "graphvx/execute.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gvx_ref {

using gvx::Buffer;
using gvx::ImageFormat;

Buffer make_image(int w, int h, ImageFormat f);

std::int64_t geti(const Buffer& b, int x, int y);
double getf(const Buffer& b, int x, int y);
void seti(Buffer& b, int x, int y, std::int64_t v);
void setf(Buffer& b, int x, int y, double v);

std::int64_t saturate(std::int64_t v, ImageFormat f);

Buffer channel_extract_uyvy_y(const Buffer& in);
Buffer channel_extract_rgb(const Buffer& in, int channel);
Buffer channel_combine_rgb(const Buffer& r, const Buffer& g, const Buffer& b);
Buffer add(const Buffer& a, const Buffer& b, ImageFormat out);
Buffer subtract(const Buffer& a, const Buffer& b, ImageFormat out);
Buffer multiply(const Buffer& a, const Buffer& b, double scale, ImageFormat out);
Buffer absdiff(const Buffer& a, const Buffer& b);
Buffer bit_and(const Buffer& a, const Buffer& b);
Buffer bit_or(const Buffer& a, const Buffer& b);
Buffer bit_xor(const Buffer& a, const Buffer& b);
Buffer bit_not(const Buffer& a);
Buffer magnitude(const Buffer& gx, const Buffer& gy);
Buffer phase(const Buffer& gx, const Buffer& gy);
Buffer threshold_binary(const Buffer& in, std::int64_t t);
Buffer threshold_range(const Buffer& in, std::int64_t lo, std::int64_t hi);
Buffer convert_depth(const Buffer& in, ImageFormat to, int shift, bool wrap);
Buffer copy(const Buffer& in);

Buffer box3x3(const Buffer& in);
Buffer gaussian3x3(const Buffer& in);
void sobel3x3(const Buffer& in, Buffer& gx, Buffer& gy);
Buffer dilate3x3(const Buffer& in);
Buffer erode3x3(const Buffer& in);
Buffer median3x3(const Buffer& in);
Buffer convolve(const Buffer& in, const std::vector<double>& mask, int mw, int mh,
                bool mask_is_real, std::int64_t scale, ImageFormat out);

std::vector<std::int64_t> histogram(const Buffer& in, int bins, std::int64_t offset,
                                    std::int64_t range);
void min_max_loc(const Buffer& in, std::int64_t& mn, std::int64_t& mx, int& min_x, int& min_y,
                 int& max_x, int& max_y);
void mean_stddev(const Buffer& in, double& mean, double& stddev);
Buffer integral_image(const Buffer& in);
Buffer scale_image(const Buffer& in, int ow, int oh, bool bilinear);
Buffer equalize_hist(const Buffer& in);

/// Reverse reachability over an edge list: every vertex with a directed path
/// to some root. The dead-computation-elimination oracle.
std::set<gvx::ObjectId> reverse_reachable(
    const std::vector<std::pair<gvx::ObjectId, gvx::ObjectId>>& edges,
    const std::set<gvx::ObjectId>& roots);

} // namespace gvx_ref
