#include "graphvx/kernel.hpp"

#include <algorithm>

namespace gvx {

const char* to_string(Direction d) { return d == Direction::Input ? "INPUT" : "OUTPUT"; }

const char* to_string(ObjKind k) {
    switch (k) {
    case ObjKind::Image: return "image";
    case ObjKind::Scalar: return "scalar";
    case ObjKind::Array: return "array";
    case ObjKind::Matrix: return "matrix";
    }
    return "?";
}

const char* to_string(BoundaryMode m) {
    switch (m) {
    case BoundaryMode::Clamp: return "clamp";
    case BoundaryMode::Constant: return "constant";
    case BoundaryMode::Undefined: return "undefined";
    }
    return "?";
}

const char* to_string(CombineMode m) {
    switch (m) {
    case CombineMode::Sum: return "sum";
    case CombineMode::Min: return "min";
    case CombineMode::Max: return "max";
    }
    return "?";
}

const char* to_string(InterpMode m) {
    return m == InterpMode::Nearest ? "nearest" : "bilinear";
}

const char* to_string(AbstractionKind k) {
    switch (k) {
    case AbstractionKind::Point: return "point";
    case AbstractionKind::Local: return "local";
    case AbstractionKind::Reduce: return "reduce";
    case AbstractionKind::Histogram: return "histogram";
    case AbstractionKind::Scale: return "scale";
    case AbstractionKind::Scan: return "scan";
    case AbstractionKind::Table: return "table";
    }
    return "?";
}

KernelSignature::KernelSignature(std::vector<SignatureParam> p) : params(std::move(p)) {
    if (output_count() == 0)
        throw Error(ErrorCode::BadKernel, "kernel signature needs at least one OUTPUT");
}

int KernelSignature::input_count() const {
    return static_cast<int>(std::count_if(params.begin(), params.end(), [](const SignatureParam& p) {
        return p.direction == Direction::Input;
    }));
}

int KernelSignature::output_count() const {
    return static_cast<int>(params.size()) - input_count();
}

namespace {

void validate_local(const LocalKernel& lk) {
    if (lk.window_w < 1 || lk.window_h < 1 || lk.window_w % 2 == 0 || lk.window_h % 2 == 0)
        throw Error(ErrorCode::BadKernel, "local window dimensions must be odd and positive");
    if (!lk.tap_body) throw Error(ErrorCode::BadKernel, "local kernel needs a tap body");
    if (!lk.mask.empty() &&
        static_cast<int>(lk.mask.size()) != lk.window_w * lk.window_h)
        throw Error(ErrorCode::BadKernel, "mask size does not match window");
    if (lk.median3x3 && (lk.window_w != 3 || lk.window_h != 3))
        throw Error(ErrorCode::BadKernel, "median special case is 3x3 only");
}

} // namespace

AbstractionPtr make_point_kernel(std::string name, KernelSignature sig, PointKernel pk) {
    if (pk.outputs.empty()) throw Error(ErrorCode::BadKernel, "point kernel needs an output body");
    for (const PointOutput& out : pk.outputs)
        for (const ExprPtr& body : out.channel_bodies)
            if (body && references_window(*body))
                throw Error(ErrorCode::BadKernel, "point bodies cannot read windows");
    auto k = std::make_shared<AbstractionKernel>();
    k->name = std::move(name);
    k->kind = AbstractionKind::Point;
    k->signature = std::move(sig);
    k->body = std::move(pk);
    return k;
}

AbstractionPtr make_local_kernel(std::string name, KernelSignature sig, LocalKernel lk) {
    validate_local(lk);
    auto k = std::make_shared<AbstractionKernel>();
    k->name = std::move(name);
    k->kind = AbstractionKind::Local;
    k->signature = std::move(sig);
    k->body = std::move(lk);
    return k;
}

AbstractionPtr make_kernel(std::string name, AbstractionKind kind, KernelSignature sig,
                           AbstractionKernel tpl) {
    tpl.name = std::move(name);
    tpl.kind = kind;
    tpl.signature = std::move(sig);
    if (kind == AbstractionKind::Local) validate_local(std::get<LocalKernel>(tpl.body));
    return std::make_shared<const AbstractionKernel>(std::move(tpl));
}

namespace {

std::vector<ExprInput> slots_for_inputs(const std::vector<ResolvedDesc>& inputs) {
    std::vector<ExprInput> slots;
    slots.reserve(inputs.size());
    for (const ResolvedDesc& d : inputs) {
        ExprInput s;
        switch (d.kind) {
        case ObjKind::Image:
            s.kind = ExprInput::Kind::Image;
            s.format = d.format;
            s.type = d.format == ImageFormat::UNRESOLVED ? ScalarType::U8 : scalar_of(d.format);
            break;
        case ObjKind::Scalar:
            s.kind = ExprInput::Kind::ScalarValue;
            s.type = d.element_type;
            break;
        case ObjKind::Array:
            s.kind = ExprInput::Kind::Array;
            s.type = d.element_type;
            break;
        case ObjKind::Matrix:
            s.kind = ExprInput::Kind::ScalarValue; // matrices feed masks, not bodies
            s.type = d.element_type;
            break;
        }
        slots.push_back(s);
    }
    return slots;
}

ScalarType output_decl(const AbstractionKernel& k, int output_index) {
    int seen = 0;
    for (const SignatureParam& p : k.signature.params) {
        if (p.direction != Direction::Output) continue;
        if (seen == output_index) {
            if (p.kind == ObjKind::Image) {
                if (p.formats.size() == 1) return scalar_of(p.formats.front());
                throw Error(ErrorCode::MissingCast,
                            "kernel '" + k.name + "' output format is unconstrained");
            }
            return p.element_type;
        }
        ++seen;
    }
    throw Error(ErrorCode::BadKernel, "output index out of range");
}

/// A computed body must end in an explicit Cast unless it is a plain storage
/// passthrough whose type already equals the declared output.
ScalarType checked_body_type(const AbstractionKernel& k, const Expr& body, const TypeEnv& env,
                             ScalarType declared) {
    ScalarType t = typecheck_expr(body, env);
    if (t == declared) return t;
    throw Error(ErrorCode::MissingCast, "kernel '" + k.name + "' body of type " +
                                            to_string(t) + " does not narrow to declared " +
                                            to_string(declared));
}

} // namespace

std::vector<ScalarType> typecheck(const AbstractionKernel& k,
                                  const std::vector<ResolvedDesc>& inputs) {
    TypeEnv env;
    env.inputs = slots_for_inputs(inputs);

    std::vector<ScalarType> out;
    switch (k.kind) {
    case AbstractionKind::Point: {
        const PointKernel& pk = k.point();
        for (std::size_t i = 0; i < pk.outputs.size(); ++i) {
            ScalarType declared = output_decl(k, static_cast<int>(i));
            for (const ExprPtr& body : pk.outputs[i].channel_bodies)
                checked_body_type(k, *body, env, declared);
            out.push_back(declared);
        }
        return out;
    }
    case AbstractionKind::Local: {
        const LocalKernel& lk = k.local();
        TypeEnv tap_env = env;
        tap_env.allow_window = true;
        tap_env.window_w = lk.window_w;
        tap_env.window_h = lk.window_h;
        tap_env.mask_is_real = lk.mask_is_real;
        if (lk.mask.empty()) {
            // mask supplied by a bound matrix input, if any
            for (std::size_t i = 0; i < inputs.size(); ++i)
                if (inputs[i].kind == ObjKind::Matrix)
                    tap_env.mask_is_real = is_float(inputs[i].element_type);
        }
        ScalarType tap = typecheck_expr(*lk.tap_body, tap_env);
        ScalarType combined = is_float(tap) ? ScalarType::F64 : ScalarType::I64;
        ScalarType declared = output_decl(k, 0);
        if (lk.post_body) {
            // post bodies address the combined value as input 0; other kernel
            // inputs keep their indices and are read pointwise
            TypeEnv post_env = env;
            ExprInput combined_slot{ExprInput::Kind::Combined, combined, ImageFormat::UNRESOLVED};
            if (post_env.inputs.empty())
                post_env.inputs.push_back(combined_slot);
            else
                post_env.inputs[0] = combined_slot;
            checked_body_type(k, *lk.post_body, post_env, declared);
        } else if (combined != declared) {
            throw Error(ErrorCode::MissingCast,
                        "kernel '" + k.name + "' combined value needs a narrowing post body");
        }
        return {declared};
    }
    case AbstractionKind::Reduce: {
        const ReduceKernel& rk = k.reduce();
        ScalarType px = env.inputs.empty() ? ScalarType::U8 : env.inputs[0].type;
        ScalarType acc = rk.seed_first ? (is_float(px) ? ScalarType::F64 : ScalarType::I64)
                                       : (rk.init.real ? ScalarType::F64 : ScalarType::I64);
        TypeEnv cenv;
        cenv.inputs = {ExprInput{ExprInput::Kind::Combined, acc, ImageFormat::UNRESOLVED},
                       ExprInput{ExprInput::Kind::ScalarValue, px, ImageFormat::UNRESOLVED}};
        typecheck_expr(*rk.combine, cenv);
        ScalarType declared = output_decl(k, 0);
        if (rk.finalize) {
            TypeEnv fenv;
            fenv.inputs = {ExprInput{ExprInput::Kind::Combined, acc, ImageFormat::UNRESOLVED},
                           ExprInput{ExprInput::Kind::Count, ScalarType::I64,
                                     ImageFormat::UNRESOLVED}};
            for (std::size_t i = 1; i < env.inputs.size(); ++i) fenv.inputs.push_back(env.inputs[i]);
            checked_body_type(k, *rk.finalize, fenv, declared);
        }
        return {declared};
    }
    case AbstractionKind::Histogram: {
        const HistogramKernel& hk = k.histogram();
        if (hk.bins < 1) throw Error(ErrorCode::BadKernel, "histogram needs bins >= 1");
        TypeEnv benv;
        benv.inputs = {env.inputs.empty()
                           ? ExprInput{ExprInput::Kind::ScalarValue, ScalarType::U8,
                                       ImageFormat::U8}
                           : env.inputs[0]};
        ScalarType bt = typecheck_expr(*hk.bin_of, benv);
        if (is_float(bt)) throw Error(ErrorCode::TypeMismatch, "bin index must be integral");
        return {output_decl(k, 0)};
    }
    case AbstractionKind::Scale:
    case AbstractionKind::Scan:
    case AbstractionKind::Table: {
        std::vector<ScalarType> declared;
        for (int i = 0; i < k.signature.output_count(); ++i) declared.push_back(output_decl(k, i));
        return declared;
    }
    }
    throw Error(ErrorCode::BadKernel, "unknown abstraction kind");
}

} // namespace gvx
