#pragma once

#include "graphvx/expr.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gvx {

enum class Direction : std::uint8_t { Input, Output };
enum class ObjKind : std::uint8_t { Image, Scalar, Array, Matrix };
enum class ParamState : std::uint8_t { Required, Optional };

const char* to_string(Direction d);
const char* to_string(ObjKind k);

struct SignatureParam {
    Direction direction = Direction::Input;
    ObjKind kind = ObjKind::Image;
    // Accepted image formats; empty means any. Scalars/arrays/matrices use
    // element_type instead (F64 slot meaning "any").
    std::vector<ImageFormat> formats;
    ScalarType element_type = ScalarType::F64;
    ParamState state = ParamState::Required;
    std::string name; // for graph files and diagnostics
};

struct KernelSignature {
    std::vector<SignatureParam> params;

    KernelSignature() = default;
    explicit KernelSignature(std::vector<SignatureParam> p);

    int input_count() const;
    int output_count() const;
};

enum class BoundaryMode : std::uint8_t { Clamp, Constant, Undefined };
enum class CombineMode : std::uint8_t { Sum, Min, Max };
enum class InterpMode : std::uint8_t { Nearest, Bilinear };

const char* to_string(BoundaryMode m);
const char* to_string(CombineMode m);
const char* to_string(InterpMode m);

/// One output of a point kernel. Multi-channel targets (RGB) carry one body
/// per channel; single-channel targets exactly one.
struct PointOutput {
    std::vector<ExprPtr> channel_bodies;
};

struct PointKernel {
    int arity = 1;
    std::vector<PointOutput> outputs;
};

struct LocalKernel {
    int window_w = 3; // odd
    int window_h = 3; // odd
    BoundaryMode boundary = BoundaryMode::Clamp;
    Value boundary_value;      // Constant mode only
    CombineMode combine = CombineMode::Sum;
    ExprPtr tap_body;          // evaluated per (dx, dy)
    ExprPtr post_body;         // optional; input 0 = combined value
    std::vector<Value> mask;   // row-major window_h x window_w; empty when a
                               // bound Matrix object supplies the mask
    bool mask_is_real = false;
    bool median3x3 = false;    // registry special case: 9-element sorting
                               // network replaces combine
    int point_arity = 0;       // extra pointwise inputs readable in post_body
};

struct ReduceKernel {
    Value init;
    bool seed_first = false;    // ignore init and seed from the first pixel
    ExprPtr combine;            // input 0 = accumulator, input 1 = pixel
    ExprPtr finalize;           // optional; input 0 = acc, input 1 = count,
                                // inputs 2+ = extra scalar inputs
    enum class Track : std::uint8_t { None, ArgMin, ArgMax } track = Track::None;
    int extra_scalar_inputs = 0;
};

struct HistogramKernel {
    int bins = 256;
    std::int64_t offset = 0;
    std::int64_t range = 256;
    ExprPtr bin_of; // input 0 = pixel; results outside [0, bins) are skipped
};

struct ScaleKernel {
    InterpMode interp = InterpMode::Nearest;
};

struct ScanKernel {}; // row-major prefix sums (integral image semantics)

/// Host-side table computation between device segments. The only built-in
/// function derives a histogram-equalization LUT from a distribution.
struct TableKernel {
    enum class Fn : std::uint8_t { EqualizeHistLut } fn = Fn::EqualizeHistLut;
};

enum class AbstractionKind : std::uint8_t {
    Point,
    Local,
    Reduce,
    Histogram,
    Scale,
    Scan,
    Table,
};

const char* to_string(AbstractionKind k);

/// A computational abstraction: the unit the optimizer and code generators
/// reason about. Immutable after construction.
struct AbstractionKernel {
    std::string name;
    AbstractionKind kind = AbstractionKind::Point;
    KernelSignature signature;
    std::variant<PointKernel, LocalKernel, ReduceKernel, HistogramKernel, ScaleKernel,
                 ScanKernel, TableKernel>
        body;

    const PointKernel& point() const { return std::get<PointKernel>(body); }
    const LocalKernel& local() const { return std::get<LocalKernel>(body); }
    const ReduceKernel& reduce() const { return std::get<ReduceKernel>(body); }
    const HistogramKernel& histogram() const { return std::get<HistogramKernel>(body); }
    const ScaleKernel& scale() const { return std::get<ScaleKernel>(body); }
    const TableKernel& table() const { return std::get<TableKernel>(body); }
};

using AbstractionPtr = std::shared_ptr<const AbstractionKernel>;

AbstractionPtr make_point_kernel(std::string name, KernelSignature sig, PointKernel pk);
AbstractionPtr make_local_kernel(std::string name, KernelSignature sig, LocalKernel lk);
AbstractionPtr make_kernel(std::string name, AbstractionKind kind, KernelSignature sig,
                           AbstractionKernel kernel_body_template);

/// Resolved per-object description used by typecheck and the executors.
struct ResolvedDesc {
    ObjKind kind = ObjKind::Image;
    int width = 0;
    int height = 0;
    ImageFormat format = ImageFormat::UNRESOLVED;
    ScalarType element_type = ScalarType::U8; // scalar/array/matrix element
    int rows = 0, cols = 0;                   // matrix
    std::int64_t capacity = 0;                // array
};

/// Infer the output scalar type(s) of `k` given concrete input descriptions.
/// Enforces the typing rules of the expression IR, including MissingCast for
/// computed bodies that do not narrow to their declared output format and
/// OffsetOutOfWindow for taps outside the window.
std::vector<ScalarType> typecheck(const AbstractionKernel& k,
                                  const std::vector<ResolvedDesc>& inputs);

} // namespace gvx
