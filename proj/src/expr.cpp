#include "graphvx/expr.hpp"

#include <algorithm>
#include <cmath>

namespace gvx {

Value cast_value(ScalarType t, CastPolicy policy, const Value& v) {
    if (t == ScalarType::F64) return Value::of_real(v.as_real());
    if (t == ScalarType::F32) return Value::of_real(static_cast<float>(v.as_real()));
    if (t == ScalarType::I64) return Value::of_int(v.as_int());

    std::int64_t lo = 0, hi = 0;
    integer_range(t, lo, hi);
    std::int64_t x;
    if (v.real) {
        if (policy == CastPolicy::Saturate) {
            double r = v.f;
            if (std::isnan(r)) return Value::of_int(0);
            if (r >= static_cast<double>(hi)) return Value::of_int(hi);
            if (r <= static_cast<double>(lo)) return Value::of_int(lo);
            x = std::llround(r); // half away from zero
        } else {
            double r = std::trunc(v.f);
            if (std::isnan(r)) return Value::of_int(0);
            // modular wrap of the truncated value
            x = static_cast<std::int64_t>(std::fmod(r, 18446744073709551616.0));
        }
    } else {
        x = v.i;
    }
    if (policy == CastPolicy::Saturate) {
        x = std::clamp(x, lo, hi);
    } else {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        std::uint64_t u = static_cast<std::uint64_t>(x) & (span - 1);
        if (lo < 0 && u > static_cast<std::uint64_t>(hi))
            x = static_cast<std::int64_t>(u) - static_cast<std::int64_t>(span);
        else
            x = static_cast<std::int64_t>(u);
    }
    return Value::of_int(x);
}

bool is_binary(ExprOp op) {
    switch (op) {
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div:
    case ExprOp::Min:
    case ExprOp::Max:
    case ExprOp::And:
    case ExprOp::Or:
    case ExprOp::Xor:
    case ExprOp::Shl:
    case ExprOp::Shr:
    case ExprOp::Lt:
    case ExprOp::Gt:
    case ExprOp::Eq:
    case ExprOp::Atan2: return true;
    default: return false;
    }
}

bool is_unary(ExprOp op) {
    switch (op) {
    case ExprOp::Not:
    case ExprOp::Neg:
    case ExprOp::Abs:
    case ExprOp::Sqrt: return true;
    default: return false;
    }
}

const char* to_string(ExprOp op) {
    switch (op) {
    case ExprOp::ConstI: return "const_i";
    case ExprOp::ConstF: return "const_f";
    case ExprOp::InputPixel: return "in";
    case ExprOp::WindowPixel: return "win";
    case ExprOp::MaskCoef: return "mask";
    case ExprOp::ArrayAt: return "array_at";
    case ExprOp::Add: return "add";
    case ExprOp::Sub: return "sub";
    case ExprOp::Mul: return "mul";
    case ExprOp::Div: return "div";
    case ExprOp::Min: return "min";
    case ExprOp::Max: return "max";
    case ExprOp::And: return "and";
    case ExprOp::Or: return "or";
    case ExprOp::Xor: return "xor";
    case ExprOp::Shl: return "shl";
    case ExprOp::Shr: return "shr";
    case ExprOp::Lt: return "lt";
    case ExprOp::Gt: return "gt";
    case ExprOp::Eq: return "eq";
    case ExprOp::Atan2: return "atan2";
    case ExprOp::Not: return "not";
    case ExprOp::Neg: return "neg";
    case ExprOp::Abs: return "abs";
    case ExprOp::Sqrt: return "sqrt";
    case ExprOp::Select: return "select";
    case ExprOp::Cast: return "cast";
    }
    return "?";
}

bool parse_expr_op(const std::string& s, ExprOp& out) {
    for (int i = 0; i <= static_cast<int>(ExprOp::Cast); ++i) {
        ExprOp op = static_cast<ExprOp>(i);
        if (s == to_string(op)) {
            out = op;
            return true;
        }
    }
    return false;
}

namespace {
ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }
} // namespace

ExprPtr const_i(std::int64_t v) {
    Expr e;
    e.op = ExprOp::ConstI;
    e.ival = v;
    return make(std::move(e));
}

ExprPtr const_f(double v) {
    Expr e;
    e.op = ExprOp::ConstF;
    e.fval = v;
    return make(std::move(e));
}

ExprPtr input_pixel(int input, Channel ch) {
    Expr e;
    e.op = ExprOp::InputPixel;
    e.input = input;
    e.channel = ch;
    return make(std::move(e));
}

ExprPtr window_pixel(int input, int dx, int dy, Channel ch) {
    Expr e;
    e.op = ExprOp::WindowPixel;
    e.input = input;
    e.dx = dx;
    e.dy = dy;
    e.channel = ch;
    return make(std::move(e));
}

ExprPtr mask_coef(int dx, int dy) {
    Expr e;
    e.op = ExprOp::MaskCoef;
    e.dx = dx;
    e.dy = dy;
    return make(std::move(e));
}

ExprPtr array_at(int input, ExprPtr index) {
    Expr e;
    e.op = ExprOp::ArrayAt;
    e.input = input;
    e.a = std::move(index);
    return make(std::move(e));
}

ExprPtr binary(ExprOp op, ExprPtr lhs, ExprPtr rhs) {
    Expr e;
    e.op = op;
    e.a = std::move(lhs);
    e.b = std::move(rhs);
    return make(std::move(e));
}

ExprPtr unary(ExprOp op, ExprPtr x) {
    Expr e;
    e.op = op;
    e.a = std::move(x);
    return make(std::move(e));
}

ExprPtr select(ExprPtr cond, ExprPtr a, ExprPtr b) {
    Expr e;
    e.op = ExprOp::Select;
    e.a = std::move(cond);
    e.b = std::move(a);
    e.c = std::move(b);
    return make(std::move(e));
}

ExprPtr cast(ScalarType to, CastPolicy policy, ExprPtr x) {
    Expr e;
    e.op = ExprOp::Cast;
    e.cast_to = to;
    e.policy = policy;
    e.a = std::move(x);
    return make(std::move(e));
}

// ---------------------------------------------------------------- typing

namespace {

bool int_class(ScalarType t) { return !is_float(t); }

ScalarType promote(ScalarType a, ScalarType b) {
    return (is_float(a) || is_float(b)) ? ScalarType::F64 : ScalarType::I64;
}

const ExprInput& input_slot(const TypeEnv& env, int index) {
    if (index < 0 || index >= static_cast<int>(env.inputs.size()))
        throw Error(ErrorCode::TypeMismatch,
                    "input index " + std::to_string(index) + " out of range");
    return env.inputs[static_cast<std::size_t>(index)];
}

ScalarType image_channel_type(const ExprInput& slot, Channel ch) {
    if (slot.kind != ExprInput::Kind::Image) {
        if (ch != Channel::C0)
            throw Error(ErrorCode::TypeMismatch, "channel read from non-image input");
        return slot.type;
    }
    switch (slot.format) {
    case ImageFormat::RGB:
        if (ch != Channel::R && ch != Channel::G && ch != Channel::B)
            throw Error(ErrorCode::TypeMismatch, "RGB input needs an R/G/B channel");
        return ScalarType::U8;
    case ImageFormat::UYVY:
        if (ch != Channel::Y && ch != Channel::U && ch != Channel::V)
            throw Error(ErrorCode::TypeMismatch, "UYVY input needs a Y/U/V channel");
        return ScalarType::U8;
    default:
        if (ch != Channel::C0)
            throw Error(ErrorCode::TypeMismatch, "channel read from single-channel image");
        return scalar_of(slot.format);
    }
}

} // namespace

ScalarType typecheck_expr(const Expr& e, const TypeEnv& env) {
    switch (e.op) {
    case ExprOp::ConstI: return ScalarType::I64;
    case ExprOp::ConstF: return ScalarType::F64;
    case ExprOp::InputPixel: {
        const ExprInput& slot = input_slot(env, e.input);
        return image_channel_type(slot, e.channel);
    }
    case ExprOp::WindowPixel: {
        if (!env.allow_window)
            throw Error(ErrorCode::TypeMismatch, "window read outside a local tap body");
        if (std::abs(e.dx) > env.window_w / 2 || std::abs(e.dy) > env.window_h / 2)
            throw Error(ErrorCode::OffsetOutOfWindow,
                        "offset (" + std::to_string(e.dx) + "," + std::to_string(e.dy) +
                            ") exceeds window " + std::to_string(env.window_w) + "x" +
                            std::to_string(env.window_h));
        const ExprInput& slot = input_slot(env, e.input);
        return image_channel_type(slot, e.channel);
    }
    case ExprOp::MaskCoef:
        if (!env.allow_window)
            throw Error(ErrorCode::TypeMismatch, "mask read outside a local tap body");
        if (std::abs(e.dx) > env.window_w / 2 || std::abs(e.dy) > env.window_h / 2)
            throw Error(ErrorCode::OffsetOutOfWindow, "mask offset outside window");
        return env.mask_is_real ? ScalarType::F64 : ScalarType::I64;
    case ExprOp::ArrayAt: {
        const ExprInput& slot = input_slot(env, e.input);
        if (slot.kind != ExprInput::Kind::Array)
            throw Error(ErrorCode::TypeMismatch, "array_at on non-array input");
        ScalarType it = typecheck_expr(*e.a, env);
        if (!int_class(it)) throw Error(ErrorCode::TypeMismatch, "array index must be integral");
        return slot.type;
    }
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Min:
    case ExprOp::Max: {
        return promote(typecheck_expr(*e.a, env), typecheck_expr(*e.b, env));
    }
    case ExprOp::Div: {
        ScalarType t = promote(typecheck_expr(*e.a, env), typecheck_expr(*e.b, env));
        if (e.b->op == ExprOp::ConstI && e.b->ival == 0)
            throw Error(ErrorCode::DivByZero, "division by constant zero");
        if (e.b->op == ExprOp::ConstF && e.b->fval == 0.0)
            throw Error(ErrorCode::DivByZero, "division by constant zero");
        return t;
    }
    case ExprOp::And:
    case ExprOp::Or:
    case ExprOp::Xor:
    case ExprOp::Shl:
    case ExprOp::Shr: {
        ScalarType a = typecheck_expr(*e.a, env);
        ScalarType b = typecheck_expr(*e.b, env);
        if (!int_class(a) || !int_class(b))
            throw Error(ErrorCode::TypeMismatch,
                        std::string(to_string(e.op)) + " requires integer operands");
        return ScalarType::I64;
    }
    case ExprOp::Lt:
    case ExprOp::Gt:
    case ExprOp::Eq: {
        typecheck_expr(*e.a, env);
        typecheck_expr(*e.b, env);
        return ScalarType::I64;
    }
    case ExprOp::Atan2: {
        typecheck_expr(*e.a, env);
        typecheck_expr(*e.b, env);
        return ScalarType::F64;
    }
    case ExprOp::Not: {
        ScalarType a = typecheck_expr(*e.a, env);
        if (!int_class(a)) throw Error(ErrorCode::TypeMismatch, "not requires integer operand");
        return ScalarType::I64;
    }
    case ExprOp::Neg:
    case ExprOp::Abs: {
        ScalarType a = typecheck_expr(*e.a, env);
        return int_class(a) ? ScalarType::I64 : ScalarType::F64;
    }
    case ExprOp::Sqrt: {
        typecheck_expr(*e.a, env);
        return ScalarType::F64;
    }
    case ExprOp::Select: {
        ScalarType ct = typecheck_expr(*e.a, env);
        if (!int_class(ct)) throw Error(ErrorCode::TypeMismatch, "select condition must be integral");
        return promote(typecheck_expr(*e.b, env), typecheck_expr(*e.c, env));
    }
    case ExprOp::Cast: {
        typecheck_expr(*e.a, env);
        return e.cast_to;
    }
    }
    throw Error(ErrorCode::TypeMismatch, "unknown expression node");
}

// ------------------------------------------------------------ evaluation

namespace {

inline std::int64_t shift_amount(std::int64_t v) { return std::clamp<std::int64_t>(v, 0, 63); }

Value apply_binary(ExprOp op, const Value& a, const Value& b) {
    const bool fl = a.real || b.real;
    switch (op) {
    case ExprOp::Add:
        return fl ? Value::of_real(a.as_real() + b.as_real()) : Value::of_int(a.i + b.i);
    case ExprOp::Sub:
        return fl ? Value::of_real(a.as_real() - b.as_real()) : Value::of_int(a.i - b.i);
    case ExprOp::Mul:
        return fl ? Value::of_real(a.as_real() * b.as_real()) : Value::of_int(a.i * b.i);
    case ExprOp::Div:
        if (fl) {
            if (b.as_real() == 0.0) throw Error(ErrorCode::DivByZero, "division by zero");
            return Value::of_real(a.as_real() / b.as_real());
        }
        if (b.i == 0) throw Error(ErrorCode::DivByZero, "division by zero");
        return Value::of_int(a.i / b.i);
    case ExprOp::Min:
        return fl ? Value::of_real(std::min(a.as_real(), b.as_real()))
                  : Value::of_int(std::min(a.i, b.i));
    case ExprOp::Max:
        return fl ? Value::of_real(std::max(a.as_real(), b.as_real()))
                  : Value::of_int(std::max(a.i, b.i));
    case ExprOp::And: return Value::of_int(a.i & b.i);
    case ExprOp::Or: return Value::of_int(a.i | b.i);
    case ExprOp::Xor: return Value::of_int(a.i ^ b.i);
    case ExprOp::Shl: return Value::of_int(a.i << shift_amount(b.i));
    case ExprOp::Shr: return Value::of_int(a.i >> shift_amount(b.i));
    case ExprOp::Lt:
        return Value::of_int(fl ? (a.as_real() < b.as_real()) : (a.i < b.i));
    case ExprOp::Gt:
        return Value::of_int(fl ? (a.as_real() > b.as_real()) : (a.i > b.i));
    case ExprOp::Eq:
        return Value::of_int(fl ? (a.as_real() == b.as_real()) : (a.i == b.i));
    case ExprOp::Atan2: return Value::of_real(std::atan2(a.as_real(), b.as_real()));
    default: break;
    }
    throw Error(ErrorCode::TypeMismatch, "bad binary op");
}

Value apply_unary(ExprOp op, const Value& a) {
    switch (op) {
    case ExprOp::Not: return Value::of_int(~a.i);
    case ExprOp::Neg: return a.real ? Value::of_real(-a.f) : Value::of_int(-a.i);
    case ExprOp::Abs: return a.real ? Value::of_real(std::fabs(a.f)) : Value::of_int(std::llabs(a.i));
    case ExprOp::Sqrt: return Value::of_real(std::sqrt(a.as_real()));
    default: break;
    }
    throw Error(ErrorCode::TypeMismatch, "bad unary op");
}

} // namespace

Value eval_expr(const Expr& e, const EvalEnv& env) {
    switch (e.op) {
    case ExprOp::ConstI: return Value::of_int(e.ival);
    case ExprOp::ConstF: return Value::of_real(e.fval);
    case ExprOp::InputPixel: return env.input(e.input, e.channel);
    case ExprOp::WindowPixel: return env.window(e.input, e.dx, e.dy, e.channel);
    case ExprOp::MaskCoef: return env.mask(e.dx, e.dy);
    case ExprOp::ArrayAt: return env.array_element(e.input, eval_expr(*e.a, env).as_int());
    case ExprOp::Select:
        return eval_expr(*e.a, env).i != 0 ? eval_expr(*e.b, env) : eval_expr(*e.c, env);
    case ExprOp::Cast: return cast_value(e.cast_to, e.policy, eval_expr(*e.a, env));
    default:
        if (is_binary(e.op)) return apply_binary(e.op, eval_expr(*e.a, env), eval_expr(*e.b, env));
        return apply_unary(e.op, eval_expr(*e.a, env));
    }
}

// ---------------------------------------------------------- compilation

int CompiledExpr::emit(const Expr& e) {
    auto push = [&](VmOp vm, const Expr& n) {
        Ins ins;
        ins.vm = vm;
        ins.op = n.op;
        ins.ival = n.ival;
        ins.fval = n.fval;
        ins.input = n.input;
        ins.channel = n.channel;
        ins.dx = n.dx;
        ins.dy = n.dy;
        ins.cast_to = n.cast_to;
        ins.policy = n.policy;
        code_.push_back(ins);
        return static_cast<int>(code_.size()) - 1;
    };
    switch (e.op) {
    case ExprOp::ConstI: push(VmOp::PushI, e); return 1;
    case ExprOp::ConstF: push(VmOp::PushF, e); return 1;
    case ExprOp::InputPixel: push(VmOp::LoadInput, e); return 1;
    case ExprOp::WindowPixel: push(VmOp::LoadWindow, e); return 1;
    case ExprOp::MaskCoef: push(VmOp::LoadMask, e); return 1;
    case ExprOp::ArrayAt: {
        int d = emit(*e.a);
        push(VmOp::ArrayAt, e);
        return d;
    }
    case ExprOp::Select: {
        // cond; jz ELSE; then; jmp END; ELSE: else; END:
        int dc = emit(*e.a);
        int jz_at = push(VmOp::Jz, e);
        int dt = emit(*e.b);
        int jmp_at = push(VmOp::Jmp, e);
        code_[static_cast<std::size_t>(jz_at)].jump = static_cast<int>(code_.size());
        int de = emit(*e.c);
        code_[static_cast<std::size_t>(jmp_at)].jump = static_cast<int>(code_.size());
        return std::max({dc, dt, de});
    }
    case ExprOp::Cast: {
        int d = emit(*e.a);
        push(VmOp::Cast, e);
        return d;
    }
    default:
        if (is_binary(e.op)) {
            int da = emit(*e.a);
            int db = emit(*e.b);
            push(VmOp::Binary, e);
            return std::max(da, 1 + db);
        }
        int d = emit(*e.a);
        push(VmOp::Unary, e);
        return d;
    }
}

CompiledExpr::CompiledExpr(const ExprPtr& e) {
    max_stack_ = emit(*e);
    if (max_stack_ > 60) {
        deep_ = e; // rare: fully general tree evaluation instead
        code_.clear();
    }
}

Value CompiledExpr::run(const EvalEnv& env) const {
    if (deep_) return eval_expr(*deep_, env);
    Value stack[64];
    int sp = 0;
    const int n = static_cast<int>(code_.size());
    for (int pc = 0; pc < n; ++pc) {
        const Ins& ins = code_[static_cast<std::size_t>(pc)];
        switch (ins.vm) {
        case VmOp::PushI: stack[sp++] = Value::of_int(ins.ival); break;
        case VmOp::PushF: stack[sp++] = Value::of_real(ins.fval); break;
        case VmOp::LoadInput: stack[sp++] = env.input(ins.input, ins.channel); break;
        case VmOp::LoadWindow:
            stack[sp++] = env.window(ins.input, ins.dx, ins.dy, ins.channel);
            break;
        case VmOp::LoadMask: stack[sp++] = env.mask(ins.dx, ins.dy); break;
        case VmOp::ArrayAt:
            stack[sp - 1] = env.array_element(ins.input, stack[sp - 1].as_int());
            break;
        case VmOp::Cast:
            stack[sp - 1] = cast_value(ins.cast_to, ins.policy, stack[sp - 1]);
            break;
        case VmOp::Jz:
            if (stack[--sp].i == 0) pc = ins.jump - 1;
            break;
        case VmOp::Jmp: pc = ins.jump - 1; break;
        case VmOp::Binary:
            --sp;
            stack[sp - 1] = apply_binary(ins.op, stack[sp - 1], stack[sp]);
            break;
        case VmOp::Unary: stack[sp - 1] = apply_unary(ins.op, stack[sp - 1]); break;
        }
    }
    return stack[0];
}

// ----------------------------------------------------------- structure

ExprPtr rewrite_leaves(const ExprPtr& e, const LeafRewrite& fn) {
    if (!e) return e;
    switch (e->op) {
    case ExprOp::ConstI:
    case ExprOp::ConstF:
    case ExprOp::InputPixel:
    case ExprOp::WindowPixel:
    case ExprOp::MaskCoef: {
        ExprPtr r = fn(*e);
        return r ? r : e;
    }
    default: {
        ExprPtr r = fn(*e);
        if (r) return r; // allow rewriting interior reads (array_at)
        Expr copy = *e;
        copy.a = rewrite_leaves(e->a, fn);
        copy.b = rewrite_leaves(e->b, fn);
        copy.c = rewrite_leaves(e->c, fn);
        if (copy.a == e->a && copy.b == e->b && copy.c == e->c) return e;
        return std::make_shared<const Expr>(std::move(copy));
    }
    }
}

void collect_input_refs(const Expr& e, std::vector<int>& out) {
    switch (e.op) {
    case ExprOp::InputPixel:
    case ExprOp::WindowPixel:
    case ExprOp::ArrayAt:
        if (std::find(out.begin(), out.end(), e.input) == out.end()) out.push_back(e.input);
        break;
    default: break;
    }
    if (e.a) collect_input_refs(*e.a, out);
    if (e.b) collect_input_refs(*e.b, out);
    if (e.c) collect_input_refs(*e.c, out);
}

bool references_window(const Expr& e) {
    if (e.op == ExprOp::WindowPixel || e.op == ExprOp::MaskCoef) return true;
    if (e.a && references_window(*e.a)) return true;
    if (e.b && references_window(*e.b)) return true;
    if (e.c && references_window(*e.c)) return true;
    return false;
}

} // namespace gvx
