#pragma once

#include "graphvx/optimize.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace gvx {

/// Runtime payload of one data object. Images are row-major packed bytes in
/// their storage format, scalars a single value, arrays/matrices element
/// lists. Histogram results carry an explicit distribution.
struct Buffer {
    ObjectId id = kInvalidId;
    ResolvedDesc desc;

    std::vector<std::uint8_t> bytes; // images
    Value scalar;                    // scalars
    std::vector<Value> elements;     // arrays, matrices

    struct Distribution {
        int bins = 0;
        std::int64_t offset = 0;
        std::int64_t range = 0;
        std::vector<std::int64_t> counts;
    };
    Distribution dist;
    bool has_dist = false;

    static Buffer image(const ResolvedDesc& d);
    static Buffer scalar_value(ScalarType t, Value v);

    /// Channel read in the evaluation domain. No bounds checking.
    Value load(int x, int y, Channel ch) const;
    /// Channel store; value must already be narrowed to the storage type.
    void store(int x, int y, Channel ch, const Value& v);

    bool byte_equal(const Buffer& other) const;
};

struct ExecCounters {
    std::int64_t kernel_launches = 0;
    std::int64_t pixels_read = 0;
    std::int64_t pixels_written = 0;
    std::int64_t transfers_executed = 0;
};

struct ExecutionReport {
    std::map<ObjectId, Buffer> outputs; // every produced non-virtual object
    ExecCounters counters;
};

using InputMap = std::map<ObjectId, Buffer>;

/// Interprets a verified graph node by node in topo order. One launch per
/// operator node; the transfer counter models the naive one-upload plus
/// one-download schedule per node.
/// Throws MissingInput, ShapeMismatch, AccessDenied, DivByZero.
ExecutionReport run_naive(const VerifiedGraph& g, const InputMap& inputs);

/// Executes the optimized plan (filtered + fused graph) and accounts
/// transfers from the plan. Outputs equal run_naive on every observable
/// object.
ExecutionReport run_plan(const OptimizedPlan& plan, const InputMap& inputs);

/// Deterministic test-pattern fill for input objects (images of any format,
/// scalars, matrices) from a seed.
Buffer random_buffer(const ResolvedDesc& desc, std::uint64_t seed);

} // namespace gvx
