#pragma once

#include "graphvx/value.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gvx {

/// Expression IR forming the body of point/local/global kernels.
///
/// Leaves:
///   ConstI / ConstF     literal in the internal 64-bit / double domain
///   InputPixel(k, ch)   input k at the current coordinate. In point bodies k
///                       indexes the kernel inputs (scalars broadcast). In a
///                       local post body, input 0 denotes the combined window
///                       value and k >= 1 pointwise extra inputs. In reduce
///                       combine bodies input 0 is the accumulator and input 1
///                       the current pixel; in finalize bodies input 0 is the
///                       accumulator, input 1 the pixel count and k >= 2 extra
///                       scalar inputs.
///   WindowPixel(k, dx, dy, ch)  window read, local tap bodies only
///   MaskCoef(dx, dy)    mask coefficient, local tap bodies only
///   ArrayAt(k, index)   element of array input k (lookup tables)
///
/// Interior nodes: Binary, Unary, Select, Cast. Integer arithmetic is
/// evaluated in 64 bits, reals in double; every kernel body narrows to its
/// declared storage type through an explicit Cast (typecheck enforces this).
enum class ExprOp : std::uint8_t {
    ConstI,
    ConstF,
    InputPixel,
    WindowPixel,
    MaskCoef,
    ArrayAt,
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    Lt,
    Gt,
    Eq,
    Atan2,
    Not,
    Neg,
    Abs,
    Sqrt,
    Select,
    Cast,
};

bool is_binary(ExprOp op);
bool is_unary(ExprOp op);
const char* to_string(ExprOp op);
bool parse_expr_op(const std::string& s, ExprOp& out);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprOp op = ExprOp::ConstI;
    std::int64_t ival = 0; // ConstI value; input index; shift amount unused
    double fval = 0.0;     // ConstF value
    int input = 0;         // InputPixel/WindowPixel/ArrayAt input index
    Channel channel = Channel::C0;
    int dx = 0;
    int dy = 0;
    ScalarType cast_to = ScalarType::U8;
    CastPolicy policy = CastPolicy::Saturate;
    ExprPtr a, b, c; // operands: a,b for binary; a for unary/cast; a,b,c for select
};

// Construction helpers. All return immutable shared nodes.
ExprPtr const_i(std::int64_t v);
ExprPtr const_f(double v);
ExprPtr input_pixel(int input, Channel ch = Channel::C0);
ExprPtr window_pixel(int input, int dx, int dy, Channel ch = Channel::C0);
ExprPtr mask_coef(int dx, int dy);
ExprPtr array_at(int input, ExprPtr index);
ExprPtr binary(ExprOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr unary(ExprOp op, ExprPtr e);
ExprPtr select(ExprPtr cond, ExprPtr a, ExprPtr b);
ExprPtr cast(ScalarType to, CastPolicy policy, ExprPtr e);

// Convenience arithmetic spellings used heavily by the kernel library.
inline ExprPtr add(ExprPtr a, ExprPtr b) { return binary(ExprOp::Add, std::move(a), std::move(b)); }
inline ExprPtr sub(ExprPtr a, ExprPtr b) { return binary(ExprOp::Sub, std::move(a), std::move(b)); }
inline ExprPtr mul(ExprPtr a, ExprPtr b) { return binary(ExprOp::Mul, std::move(a), std::move(b)); }
inline ExprPtr div(ExprPtr a, ExprPtr b) { return binary(ExprOp::Div, std::move(a), std::move(b)); }

/// Static description of the slots an expression environment must provide.
struct ExprInput {
    enum class Kind { Image, ScalarValue, Array, Combined, Count } kind = Kind::Image;
    ScalarType type = ScalarType::U8;
    ImageFormat format = ImageFormat::U8; // images only, for channel checks
};

/// Typing context for one kernel body.
struct TypeEnv {
    std::vector<ExprInput> inputs;
    int window_w = 0; // 0 when window reads are not allowed (point bodies)
    int window_h = 0;
    bool mask_is_real = false;
    bool allow_window = false;
};

/// Bottom-up type of `e` under `env`. Arithmetic promotes integers to the
/// internal 64-bit domain and any real operand to double; only leaves carry
/// storage types, so every computed body must end in an explicit Cast.
/// Throws Error(TypeMismatch/OffsetOutOfWindow/DivByZero).
ScalarType typecheck_expr(const Expr& e, const TypeEnv& env);

/// Runtime environment for evaluation. Fetch callbacks count pixel reads.
class EvalEnv {
public:
    virtual ~EvalEnv() = default;
    virtual Value input(int index, Channel ch) const = 0;
    virtual Value window(int index, int dx, int dy, Channel ch) const = 0;
    virtual Value mask(int dx, int dy) const = 0;
    virtual Value array_element(int index, std::int64_t at) const = 0;
};

/// Direct tree-walking evaluation, used by tests and one-off host steps.
Value eval_expr(const Expr& e, const EvalEnv& env);

/// An expression compiled to a flat postfix program with explicit jumps for
/// Select. Execution engines compile each body once per launch and run the
/// program per pixel; this is the hot path.
class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(const ExprPtr& e);

    Value run(const EvalEnv& env) const;
    bool empty() const { return code_.empty(); }

private:
    enum class VmOp : std::uint8_t {
        PushI,
        PushF,
        LoadInput,
        LoadWindow,
        LoadMask,
        ArrayAt,
        Binary,
        Unary,
        Cast,
        Jz,
        Jmp,
    };
    struct Ins {
        VmOp vm;
        ExprOp op = ExprOp::ConstI;
        std::int64_t ival = 0;
        double fval = 0.0;
        int input = 0;
        Channel channel = Channel::C0;
        int dx = 0, dy = 0;
        ScalarType cast_to = ScalarType::U8;
        CastPolicy policy = CastPolicy::Saturate;
        int jump = 0;
    };
    std::vector<Ins> code_;
    ExprPtr deep_; // fallback to tree evaluation for very deep bodies
    int max_stack_ = 0;

    int emit(const Expr& e);
};

// --- structural helpers used by fusion ---------------------------------

/// Replace leaves via caller-supplied hooks; nullptr keeps the node.
using LeafRewrite = std::function<ExprPtr(const Expr&)>;
ExprPtr rewrite_leaves(const ExprPtr& e, const LeafRewrite& fn);

/// All distinct input indices referenced by InputPixel/WindowPixel/ArrayAt.
void collect_input_refs(const Expr& e, std::vector<int>& out);

bool references_window(const Expr& e);

} // namespace gvx
