#include "graphvx/registry.hpp"

#include "graphvx/verify.hpp"

#include <algorithm>
#include <cmath>

namespace gvx {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// --- signature builders --------------------------------------------------

SignatureParam img_in(std::string name, std::vector<ImageFormat> formats = {}) {
    SignatureParam p;
    p.direction = Direction::Input;
    p.kind = ObjKind::Image;
    p.formats = std::move(formats);
    p.name = std::move(name);
    return p;
}

SignatureParam img_out(std::string name, std::vector<ImageFormat> formats = {}) {
    SignatureParam p = img_in(std::move(name), std::move(formats));
    p.direction = Direction::Output;
    return p;
}

SignatureParam scalar_in(std::string name) {
    SignatureParam p;
    p.direction = Direction::Input;
    p.kind = ObjKind::Scalar;
    p.name = std::move(name);
    return p;
}

SignatureParam scalar_out(std::string name, ScalarType t) {
    SignatureParam p;
    p.direction = Direction::Output;
    p.kind = ObjKind::Scalar;
    p.element_type = t;
    p.name = std::move(name);
    return p;
}

SignatureParam array_out(std::string name, ScalarType t, ParamState state = ParamState::Required) {
    SignatureParam p;
    p.direction = Direction::Output;
    p.kind = ObjKind::Array;
    p.element_type = t;
    p.state = state;
    p.name = std::move(name);
    return p;
}

SignatureParam array_in(std::string name, ScalarType t) {
    SignatureParam p;
    p.direction = Direction::Input;
    p.kind = ObjKind::Array;
    p.element_type = t;
    p.name = std::move(name);
    return p;
}

SignatureParam matrix_in(std::string name) {
    SignatureParam p;
    p.direction = Direction::Input;
    p.kind = ObjKind::Matrix;
    p.name = std::move(name);
    return p;
}

const std::vector<ImageFormat> kSingleChannel = {ImageFormat::U8, ImageFormat::U16,
                                                 ImageFormat::S16, ImageFormat::S32,
                                                 ImageFormat::F32};
const std::vector<ImageFormat> kIntChannel = {ImageFormat::U8, ImageFormat::U16, ImageFormat::S16,
                                              ImageFormat::S32};

// --- attribute access -----------------------------------------------------

std::int64_t attr_int(const AttrMap& attrs, const std::string& key, std::int64_t fallback) {
    auto it = attrs.find(key);
    if (it == attrs.end()) return fallback;
    if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
    if (const auto* d = std::get_if<double>(&it->second)) return static_cast<std::int64_t>(*d);
    throw Error(ErrorCode::SchemaError, "attribute '" + key + "' must be numeric");
}

double attr_double(const AttrMap& attrs, const std::string& key, double fallback) {
    auto it = attrs.find(key);
    if (it == attrs.end()) return fallback;
    if (const auto* v = std::get_if<double>(&it->second)) return *v;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
    throw Error(ErrorCode::SchemaError, "attribute '" + key + "' must be numeric");
}

std::string attr_str(const AttrMap& attrs, const std::string& key, const std::string& fallback) {
    auto it = attrs.find(key);
    if (it == attrs.end()) return fallback;
    if (const auto* v = std::get_if<std::string>(&it->second)) return *v;
    throw Error(ErrorCode::SchemaError, "attribute '" + key + "' must be a string");
}

// --- typing helpers -------------------------------------------------------

int rank_of(ImageFormat f) {
    switch (f) {
    case ImageFormat::U8: return 0;
    case ImageFormat::U16:
    case ImageFormat::S16: return 1;
    case ImageFormat::S32: return 2;
    case ImageFormat::F32: return 3;
    default: throw Error(ErrorCode::BadFormat, "arithmetic needs single-channel input");
    }
}

ImageFormat sum_format(ImageFormat a, ImageFormat b) {
    int r = std::max(rank_of(a), rank_of(b));
    if (r == 3) return ImageFormat::F32;
    if (r == 2 || a == ImageFormat::U16 || b == ImageFormat::U16) return ImageFormat::S32;
    return ImageFormat::S16;
}

ImageFormat product_format(ImageFormat a, ImageFormat b) {
    int r = std::max(rank_of(a), rank_of(b));
    return r == 3 ? ImageFormat::F32 : ImageFormat::S32;
}

ImageFormat attr_format_or(const AttrMap& attrs, const std::string& key, ImageFormat fallback) {
    std::string s = attr_str(attrs, key, "");
    if (s.empty()) return fallback;
    ImageFormat f;
    if (!parse_image_format(s, f) || f == ImageFormat::UNRESOLVED)
        throw Error(ErrorCode::BadFormat, "bad format attribute '" + s + "'");
    return f;
}

void require_same_dims(const std::vector<ResolvedDesc>& inputs) {
    const ResolvedDesc* first = nullptr;
    for (const ResolvedDesc& d : inputs) {
        if (d.kind != ObjKind::Image) continue;
        if (!first) {
            first = &d;
            continue;
        }
        if (d.width != first->width || d.height != first->height)
            throw Error(ErrorCode::ShapeMismatch, "input image dimensions differ");
    }
}

ResolvedDesc image_desc(int w, int h, ImageFormat f) {
    ResolvedDesc d;
    d.kind = ObjKind::Image;
    d.width = w;
    d.height = h;
    d.format = f;
    return d;
}

ResolvedDesc scalar_desc(ScalarType t) {
    ResolvedDesc d;
    d.kind = ObjKind::Scalar;
    d.element_type = t;
    return d;
}

ResolvedDesc array_desc(ScalarType t, std::int64_t capacity) {
    ResolvedDesc d;
    d.kind = ObjKind::Array;
    d.element_type = t;
    d.capacity = capacity;
    return d;
}

void check_scalar_range(const Context& ctx, const OperatorNode& n, int param,
                        ImageFormat against) {
    const Binding* b = n.binding_for(param);
    if (!b) return;
    const DataObject* obj = ctx.find(b->object);
    if (!obj || !obj->scalar_value) return;
    std::int64_t lo = 0, hi = 0;
    if (!integer_range(scalar_of(against), lo, hi)) return;
    const Value& v = *obj->scalar_value;
    double x = v.as_real();
    if (x < static_cast<double>(lo) || x > static_cast<double>(hi))
        throw Error(ErrorCode::BadFormat, "scalar value " + std::to_string(x) +
                                              " outside the " + to_string(against) + " range");
}

// --- expansion helpers ----------------------------------------------------

ExprPtr in0() { return input_pixel(0); }
ExprPtr in1() { return input_pixel(1); }

KernelSignature point_sig(int arity, ImageFormat out_fmt,
                          const std::vector<ObjKind>& input_kinds = {}) {
    std::vector<SignatureParam> params;
    for (int i = 0; i < arity; ++i) {
        ObjKind k = i < static_cast<int>(input_kinds.size()) ? input_kinds[i] : ObjKind::Image;
        SignatureParam p;
        p.direction = Direction::Input;
        p.kind = k;
        p.name = "in" + std::to_string(i);
        params.push_back(p);
    }
    params.push_back(img_out("out", {out_fmt}));
    return KernelSignature(std::move(params));
}

/// Single-output point abstraction wired to (inputs..., output).
ObjectId emit_point(ExpandArgs& a, const std::string& label, ImageFormat out_fmt, ExprPtr body,
                    std::vector<ObjectId> inputs, ObjectId output,
                    const std::vector<ObjKind>& input_kinds = {}) {
    PointKernel pk;
    pk.arity = static_cast<int>(inputs.size());
    pk.outputs.push_back(PointOutput{{std::move(body)}});
    KernelSignature sig = point_sig(pk.arity, out_fmt, input_kinds);
    AbstractionPtr k = make_point_kernel(label, std::move(sig), std::move(pk));
    std::vector<ObjectId> args = inputs;
    args.push_back(output);
    OperatorNode& n = a.impl->add_abstraction_node(std::move(k), args, a.node->id, label);
    return n.id;
}

KernelSignature local_sig(ImageFormat out_fmt, bool with_matrix, int extra_points = 0) {
    std::vector<SignatureParam> params;
    params.push_back(img_in("in"));
    if (with_matrix) params.push_back(matrix_in("mask"));
    for (int i = 0; i < extra_points; ++i) params.push_back(img_in("p" + std::to_string(i)));
    params.push_back(img_out("out", {out_fmt}));
    return KernelSignature(std::move(params));
}

ObjectId emit_local(ExpandArgs& a, const std::string& label, ImageFormat out_fmt, LocalKernel lk,
                    std::vector<ObjectId> inputs, ObjectId output, bool with_matrix = false) {
    KernelSignature sig = local_sig(out_fmt, with_matrix);
    AbstractionPtr k = make_local_kernel(label, std::move(sig), std::move(lk));
    std::vector<ObjectId> args = inputs;
    args.push_back(output);
    OperatorNode& n = a.impl->add_abstraction_node(std::move(k), args, a.node->id, label);
    return n.id;
}

std::vector<Value> int_mask(std::initializer_list<std::int64_t> vals) {
    std::vector<Value> out;
    for (std::int64_t v : vals) out.push_back(Value::of_int(v));
    return out;
}

// Gaussian blur coefficients for the float path; the integer path uses the
// binomial {1,2,1;2,4,2;1,2,1}/16 mask.
const double kGaussF32[9] = {0.057118, 0.124758, 0.057118, 0.124758, 0.272496,
                             0.124758, 0.057118, 0.124758, 0.057118};

LocalKernel box_like(std::vector<Value> mask, bool mask_real, ExprPtr post) {
    LocalKernel lk;
    lk.window_w = 3;
    lk.window_h = 3;
    lk.boundary = BoundaryMode::Clamp;
    lk.combine = CombineMode::Sum;
    lk.tap_body = mul(mask_coef(0, 0), window_pixel(0, 0, 0));
    lk.mask = std::move(mask);
    lk.mask_is_real = mask_real;
    lk.post_body = std::move(post);
    return lk;
}

} // namespace

ExprPtr saturate_to(ScalarType t, ExprPtr e) { return cast(t, CastPolicy::Saturate, std::move(e)); }

// ------------------------------------------------------------------ infer

std::vector<ResolvedDesc> infer_abstraction(const AbstractionKernel& k, const InferArgs& args,
                                            std::vector<ScalarType>* types_out) {
    std::vector<ScalarType> types = typecheck(k, args.inputs);
    if (types_out) *types_out = types;

    if (k.kind == AbstractionKind::Point || k.kind == AbstractionKind::Local)
        require_same_dims(args.inputs);

    ResolvedDesc src;
    for (const ResolvedDesc& d : args.inputs)
        if (d.kind == ObjKind::Image) {
            src = d;
            break;
        }

    std::vector<ResolvedDesc> outputs;
    std::size_t oi = 0;
    int param_index = -1;
    for (const SignatureParam& p : k.signature.params) {
        ++param_index;
        if (p.direction != Direction::Output) continue;
        ResolvedDesc d;
        d.kind = p.kind;
        ScalarType t = oi < types.size() ? types[oi] : p.element_type;
        switch (k.kind) {
        case AbstractionKind::Point:
        case AbstractionKind::Local:
        case AbstractionKind::Scan:
            d.width = src.width;
            d.height = src.height;
            d.format = p.formats.size() == 1 ? p.formats.front() : format_of(t);
            break;
        case AbstractionKind::Scale: {
            const Binding* b = args.node ? args.node->binding_for(param_index) : nullptr;
            const DataObject* out_obj =
                (b && args.ctx) ? args.ctx->find(b->object) : nullptr;
            if (!out_obj || out_obj->width < 1 || out_obj->height < 1)
                throw Error(ErrorCode::BadFormat, "scale output needs explicit dimensions");
            d.width = out_obj->width;
            d.height = out_obj->height;
            d.format = src.format;
            break;
        }
        case AbstractionKind::Reduce:
            d.element_type = t;
            d.capacity = p.kind == ObjKind::Array ? 2 : 0;
            break;
        case AbstractionKind::Histogram:
            d.element_type = ScalarType::S32;
            d.capacity = k.histogram().bins;
            break;
        case AbstractionKind::Table:
            d.element_type = p.element_type;
            d.capacity = 256;
            break;
        }
        if (d.kind == ObjKind::Scalar) d.element_type = t;
        outputs.push_back(d);
        ++oi;
    }
    return outputs;
}

// --------------------------------------------------------------- registry

const KernelEntry* KernelRegistry::find(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> KernelRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, entry] : entries_) out.push_back(name);
    return out;
}

void KernelRegistry::add(KernelEntry entry) {
    std::string name = entry.name;
    entries_[std::move(name)] = std::move(entry);
}

void KernelRegistry::add_custom(AbstractionPtr kernel) {
    KernelEntry entry;
    entry.name = kernel->name;
    entry.signature = kernel->signature;
    AbstractionPtr k = kernel;
    entry.infer = [k](const InferArgs& args) { return infer_abstraction(*k, args); };
    entry.expand = [k](ExpandArgs& a) {
        // user-defined abstraction nodes pass through unchanged
        std::vector<ObjectId> args;
        std::size_t ii = 0, oi = 0;
        for (const SignatureParam& p : k->signature.params) {
            if (p.direction == Direction::Input)
                args.push_back(a.input_ids[ii++]);
            else
                args.push_back(a.output_ids[oi++]);
        }
        a.impl->add_abstraction_node(k, args, a.node->id, k->name);
    };
    add(std::move(entry));
}

namespace {

// ----------------------------------------------------- builtin expansions

void register_pointwise(KernelRegistry& reg);
void register_locals(KernelRegistry& reg);
void register_globals(KernelRegistry& reg);

KernelRegistry build_builtin() {
    KernelRegistry reg;
    register_pointwise(reg);
    register_locals(reg);
    register_globals(reg);
    return reg;
}

Channel channel_attr(const AttrMap& attrs) {
    std::string s = attr_str(attrs, "channel", "Y");
    Channel ch;
    if (!parse_channel(s, ch))
        throw Error(ErrorCode::SchemaError, "bad channel attribute '" + s + "'");
    return ch;
}

void register_pointwise(KernelRegistry& reg) {
    // ChannelExtract: Y of UYVY, or R/G/B of RGB.
    {
        KernelEntry e;
        e.name = "ChannelExtract";
        e.signature = KernelSignature({img_in("in", {ImageFormat::UYVY, ImageFormat::RGB}),
                                       img_out("out", {ImageFormat::U8})});
        e.infer = [](const InferArgs& a) {
            Channel ch = channel_attr(*a.attrs);
            const ResolvedDesc& in = a.inputs[0];
            if (in.format == ImageFormat::UYVY && ch != Channel::Y)
                throw Error(ErrorCode::BadFormat, "UYVY extraction supports channel Y only");
            if (in.format == ImageFormat::RGB &&
                (ch != Channel::R && ch != Channel::G && ch != Channel::B))
                throw Error(ErrorCode::BadFormat, "RGB extraction needs channel R, G or B");
            return std::vector<ResolvedDesc>{image_desc(in.width, in.height, ImageFormat::U8)};
        };
        e.expand = [](ExpandArgs& a) {
            Channel ch = channel_attr(a.node->attrs);
            emit_point(a, "extract_" + std::string(to_string(ch)), ImageFormat::U8,
                       input_pixel(0, ch), {a.input_ids[0]}, a.output_ids[0]);
        };
        reg.add(std::move(e));
    }

    // ChannelCombine: three U8 planes into RGB.
    {
        KernelEntry e;
        e.name = "ChannelCombine";
        e.signature = KernelSignature({img_in("r", {ImageFormat::U8}),
                                       img_in("g", {ImageFormat::U8}),
                                       img_in("b", {ImageFormat::U8}),
                                       img_out("out", {ImageFormat::RGB})});
        e.infer = [](const InferArgs& a) {
            require_same_dims(a.inputs);
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, ImageFormat::RGB)};
        };
        e.expand = [](ExpandArgs& a) {
            PointKernel pk;
            pk.arity = 3;
            pk.outputs.push_back(PointOutput{{input_pixel(0), input_pixel(1), input_pixel(2)}});
            AbstractionPtr k =
                make_point_kernel("combine_rgb", point_sig(3, ImageFormat::RGB), std::move(pk));
            a.impl->add_abstraction_node(
                k, {a.input_ids[0], a.input_ids[1], a.input_ids[2], a.output_ids[0]}, a.node->id,
                "combine_rgb");
        };
        reg.add(std::move(e));
    }

    // Binary arithmetic over matching dimensions. Default output formats:
    // sums widen one step, products go to S32 (F32 stays F32); an "out"
    // attribute overrides either.
    auto add_arith = [&reg](const std::string& name, const char* label, ExprOp op,
                            bool with_scale) {
        const bool product = op == ExprOp::Mul;
        KernelEntry e;
        e.name = name;
        e.signature = KernelSignature({img_in("in0", kSingleChannel),
                                       img_in("in1", kSingleChannel), img_out("out")});
        e.infer = [product](const InferArgs& a) {
            require_same_dims(a.inputs);
            ImageFormat out = product ? product_format(a.inputs[0].format, a.inputs[1].format)
                                      : sum_format(a.inputs[0].format, a.inputs[1].format);
            out = attr_format_or(*a.attrs, "out", out);
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, out)};
        };
        e.expand = [label, op, with_scale, product](ExpandArgs& a) {
            ImageFormat def = product ? product_format(a.inputs[0].format, a.inputs[1].format)
                                      : sum_format(a.inputs[0].format, a.inputs[1].format);
            ImageFormat out = attr_format_or(a.node->attrs, "out", def);
            ExprPtr body = binary(op, in0(), in1());
            if (with_scale) {
                double scale = attr_double(a.node->attrs, "scale", 1.0);
                if (scale != 1.0) body = mul(std::move(body), const_f(scale));
            }
            emit_point(a, label, out, saturate_to(scalar_of(out), std::move(body)),
                       {a.input_ids[0], a.input_ids[1]}, a.output_ids[0]);
        };
        reg.add(std::move(e));
    };
    add_arith("Add", "add", ExprOp::Add, false);
    add_arith("Subtract", "subtract", ExprOp::Sub, false);
    add_arith("Multiply", "multiply", ExprOp::Mul, true);

    // AbsDiff: same format in/out.
    {
        KernelEntry e;
        e.name = "AbsDiff";
        e.signature = KernelSignature({img_in("in0", kIntChannel), img_in("in1", kIntChannel),
                                       img_out("out")});
        e.infer = [](const InferArgs& a) {
            require_same_dims(a.inputs);
            if (a.inputs[0].format != a.inputs[1].format)
                throw Error(ErrorCode::BadFormat, "AbsDiff needs matching input formats");
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, a.inputs[0].format)};
        };
        e.expand = [](ExpandArgs& a) {
            ScalarType t = scalar_of(a.inputs[0].format);
            emit_point(a, "absdiff", a.inputs[0].format,
                       saturate_to(t, unary(ExprOp::Abs, sub(in0(), in1()))),
                       {a.input_ids[0], a.input_ids[1]}, a.output_ids[0]);
        };
        reg.add(std::move(e));
    }

    // Bitwise family: same integer format in and out.
    auto add_bitwise = [&reg](const std::string& name, ExprOp op) {
        KernelEntry e;
        e.name = name;
        e.signature = KernelSignature({img_in("in0", kIntChannel), img_in("in1", kIntChannel),
                                       img_out("out")});
        e.infer = [name](const InferArgs& a) {
            require_same_dims(a.inputs);
            if (a.inputs[0].format != a.inputs[1].format)
                throw Error(ErrorCode::BadFormat, name + " needs matching input formats");
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, a.inputs[0].format)};
        };
        e.expand = [op](ExpandArgs& a) {
            ScalarType t = scalar_of(a.inputs[0].format);
            const char* label = op == ExprOp::And ? "and" : op == ExprOp::Or ? "or" : "xor";
            emit_point(a, label, a.inputs[0].format,
                       cast(t, CastPolicy::Wrap, binary(op, in0(), in1())),
                       {a.input_ids[0], a.input_ids[1]}, a.output_ids[0]);
        };
        reg.add(std::move(e));
    };
    add_bitwise("And", ExprOp::And);
    add_bitwise("Or", ExprOp::Or);
    add_bitwise("Xor", ExprOp::Xor);

    // Not: bitwise complement.
    {
        KernelEntry e;
        e.name = "Not";
        e.signature = KernelSignature({img_in("in", kIntChannel), img_out("out")});
        e.infer = [](const InferArgs& a) {
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, a.inputs[0].format)};
        };
        e.expand = [](ExpandArgs& a) {
            ScalarType t = scalar_of(a.inputs[0].format);
            emit_point(a, "not", a.inputs[0].format,
                       cast(t, CastPolicy::Wrap, unary(ExprOp::Not, in0())), {a.input_ids[0]},
                       a.output_ids[0]);
        };
        reg.add(std::move(e));
    }

    // Magnitude: sqrt(gx^2+gy^2) saturated to S16.
    {
        KernelEntry e;
        e.name = "Magnitude";
        e.signature = KernelSignature({img_in("gx", {ImageFormat::S16}),
                                       img_in("gy", {ImageFormat::S16}),
                                       img_out("out", {ImageFormat::S16})});
        e.infer = [](const InferArgs& a) {
            require_same_dims(a.inputs);
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, ImageFormat::S16)};
        };
        e.expand = [](ExpandArgs& a) {
            ExprPtr body = saturate_to(
                ScalarType::S16,
                unary(ExprOp::Sqrt, add(mul(in0(), in0()), mul(in1(), in1()))));
            emit_point(a, "magnitude", ImageFormat::S16, std::move(body),
                       {a.input_ids[0], a.input_ids[1]}, a.output_ids[0]);
        };
        reg.add(std::move(e));
    }

    // Phase: orientation of (gx, gy) mapped onto [0, 256).
    {
        KernelEntry e;
        e.name = "Phase";
        e.signature = KernelSignature({img_in("gx", {ImageFormat::S16}),
                                       img_in("gy", {ImageFormat::S16}),
                                       img_out("out", {ImageFormat::U8})});
        e.infer = [](const InferArgs& a) {
            require_same_dims(a.inputs);
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, ImageFormat::U8)};
        };
        e.expand = [](ExpandArgs& a) {
            ExprPtr angle = binary(ExprOp::Atan2, in1(), in0());
            ExprPtr wrapped = select(binary(ExprOp::Lt, angle, const_f(0.0)),
                                     add(angle, const_f(kTwoPi)), angle);
            ExprPtr scaled = add(mul(std::move(wrapped), const_f(256.0 / kTwoPi)), const_f(0.5));
            emit_point(a, "phase", ImageFormat::U8,
                       cast(ScalarType::U8, CastPolicy::Wrap, std::move(scaled)),
                       {a.input_ids[0], a.input_ids[1]}, a.output_ids[0]);
        };
        reg.add(std::move(e));
    }

    // Threshold: binary (value > t) or range (lo <= value <= hi), U8 output.
    {
        KernelEntry e;
        e.name = "Threshold";
        SignatureParam hi = scalar_in("upper");
        hi.state = ParamState::Optional;
        e.signature =
            KernelSignature({img_in("in", kIntChannel), scalar_in("thresh"), std::move(hi),
                             img_out("out", {ImageFormat::U8})});
        e.infer = [](const InferArgs& a) {
            std::string mode = attr_str(*a.attrs, "mode", "binary");
            if (mode != "binary" && mode != "range")
                throw Error(ErrorCode::SchemaError, "threshold mode must be binary or range");
            check_scalar_range(*a.ctx, *a.node, 1, a.inputs[0].format);
            check_scalar_range(*a.ctx, *a.node, 2, a.inputs[0].format);
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, ImageFormat::U8)};
        };
        e.expand = [](ExpandArgs& a) {
            std::string mode = attr_str(a.node->attrs, "mode", "binary");
            if (mode == "binary" || a.input_ids[2] == kInvalidId) {
                ExprPtr body = saturate_to(
                    ScalarType::U8,
                    select(binary(ExprOp::Gt, in0(), in1()), const_i(255), const_i(0)));
                emit_point(a, "threshold", ImageFormat::U8, std::move(body),
                           {a.input_ids[0], a.input_ids[1]}, a.output_ids[0],
                           {ObjKind::Image, ObjKind::Scalar});
            } else {
                ExprPtr below = binary(ExprOp::Lt, in0(), in1());
                ExprPtr above = binary(ExprOp::Gt, in0(), input_pixel(2));
                ExprPtr body = saturate_to(
                    ScalarType::U8, select(binary(ExprOp::Or, std::move(below), std::move(above)),
                                           const_i(0), const_i(255)));
                emit_point(a, "threshold_range", ImageFormat::U8, std::move(body),
                           {a.input_ids[0], a.input_ids[1], a.input_ids[2]}, a.output_ids[0],
                           {ObjKind::Image, ObjKind::Scalar, ObjKind::Scalar});
            }
        };
        reg.add(std::move(e));
    }

    // ConvertDepth: integer depth conversion with shift.
    {
        KernelEntry e;
        e.name = "ConvertDepth";
        e.signature = KernelSignature({img_in("in", kIntChannel), img_out("out")});
        e.infer = [](const InferArgs& a) {
            ImageFormat to = attr_format_or(*a.attrs, "to", ImageFormat::U8);
            if (to == ImageFormat::F32 || to == ImageFormat::RGB || to == ImageFormat::UYVY)
                throw Error(ErrorCode::BadFormat, "depth conversion targets integer formats");
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, to)};
        };
        e.expand = [](ExpandArgs& a) {
            ImageFormat to = attr_format_or(a.node->attrs, "to", ImageFormat::U8);
            std::int64_t shift = attr_int(a.node->attrs, "shift", 0);
            CastPolicy policy = attr_str(a.node->attrs, "policy", "saturate") == "wrap"
                                    ? CastPolicy::Wrap
                                    : CastPolicy::Saturate;
            int from_bits = bytes_per_pixel(a.inputs[0].format) * 8;
            int to_bits = bytes_per_pixel(to) * 8;
            ExprPtr body = in0();
            if (shift > 0)
                body = to_bits >= from_bits ? binary(ExprOp::Shl, std::move(body), const_i(shift))
                                            : binary(ExprOp::Shr, std::move(body), const_i(shift));
            emit_point(a, "convert_depth", to, cast(scalar_of(to), policy, std::move(body)),
                       {a.input_ids[0]}, a.output_ids[0]);
        };
        reg.add(std::move(e));
    }

    // Copy: identity.
    {
        KernelEntry e;
        e.name = "Copy";
        e.signature = KernelSignature({img_in("in"), img_out("out")});
        e.infer = [](const InferArgs& a) {
            if (a.inputs[0].format == ImageFormat::UYVY)
                throw Error(ErrorCode::BadFormat, "Copy does not support packed UYVY");
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, a.inputs[0].format)};
        };
        e.expand = [](ExpandArgs& a) {
            if (a.inputs[0].format == ImageFormat::RGB) {
                PointKernel pk;
                pk.arity = 1;
                pk.outputs.push_back(PointOutput{{input_pixel(0, Channel::R),
                                                  input_pixel(0, Channel::G),
                                                  input_pixel(0, Channel::B)}});
                AbstractionPtr k =
                    make_point_kernel("copy", point_sig(1, ImageFormat::RGB), std::move(pk));
                a.impl->add_abstraction_node(k, {a.input_ids[0], a.output_ids[0]}, a.node->id,
                                             "copy");
                return;
            }
            emit_point(a, "copy", a.inputs[0].format, in0(), {a.input_ids[0]}, a.output_ids[0]);
        };
        reg.add(std::move(e));
    }
}

void register_locals(KernelRegistry& reg) {
    // Box3x3: window mean with round-half-away.
    {
        KernelEntry e;
        e.name = "Box3x3";
        e.signature = KernelSignature({img_in("in", kSingleChannel), img_out("out")});
        e.infer = [](const InferArgs& a) {
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, a.inputs[0].format)};
        };
        e.expand = [](ExpandArgs& a) {
            ScalarType t = scalar_of(a.inputs[0].format);
            LocalKernel lk = box_like(int_mask({1, 1, 1, 1, 1, 1, 1, 1, 1}), false,
                                      saturate_to(t, mul(in0(), const_f(1.0 / 9.0))));
            emit_local(a, "box3x3", a.inputs[0].format, std::move(lk), {a.input_ids[0]},
                       a.output_ids[0]);
        };
        reg.add(std::move(e));
    }

    // Gaussian3x3: binomial integer mask; float mask on the F32 path.
    {
        KernelEntry e;
        e.name = "Gaussian3x3";
        e.signature = KernelSignature({img_in("in", kSingleChannel), img_out("out")});
        e.infer = [](const InferArgs& a) {
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, a.inputs[0].format)};
        };
        e.expand = [](ExpandArgs& a) {
            ImageFormat fmt = a.inputs[0].format;
            ScalarType t = scalar_of(fmt);
            LocalKernel lk;
            if (fmt == ImageFormat::F32) {
                std::vector<Value> mask;
                for (double c : kGaussF32) mask.push_back(Value::of_real(c));
                lk = box_like(std::move(mask), true, saturate_to(t, in0()));
            } else {
                lk = box_like(int_mask({1, 2, 1, 2, 4, 2, 1, 2, 1}), false,
                              saturate_to(t, mul(in0(), const_f(1.0 / 16.0))));
            }
            emit_local(a, "gaussian3x3", fmt, std::move(lk), {a.input_ids[0]}, a.output_ids[0]);
        };
        reg.add(std::move(e));
    }

    // Sobel3x3: two parallel local operators for the x and y derivative.
    {
        KernelEntry e;
        e.name = "Sobel3x3";
        SignatureParam gx = img_out("gx", {ImageFormat::S16});
        SignatureParam gy = img_out("gy", {ImageFormat::S16});
        gx.state = ParamState::Optional;
        gy.state = ParamState::Optional;
        e.signature =
            KernelSignature({img_in("in", {ImageFormat::U8}), std::move(gx), std::move(gy)});
        e.infer = [](const InferArgs& a) {
            ResolvedDesc d = image_desc(a.inputs[0].width, a.inputs[0].height, ImageFormat::S16);
            return std::vector<ResolvedDesc>{d, d};
        };
        e.expand = [](ExpandArgs& a) {
            auto sobel_kernel = [](std::vector<Value> mask) {
                LocalKernel lk;
                lk.window_w = 3;
                lk.window_h = 3;
                lk.boundary = BoundaryMode::Clamp;
                lk.combine = CombineMode::Sum;
                lk.tap_body = mul(mask_coef(0, 0), window_pixel(0, 0, 0));
                lk.mask = std::move(mask);
                lk.post_body = saturate_to(ScalarType::S16, in0());
                return lk;
            };
            if (a.output_ids[0] != kInvalidId)
                emit_local(a, "sobel_x", ImageFormat::S16,
                           sobel_kernel(int_mask({-1, 0, 1, -2, 0, 2, -1, 0, 1})),
                           {a.input_ids[0]}, a.output_ids[0]);
            if (a.output_ids[1] != kInvalidId)
                emit_local(a, "sobel_y", ImageFormat::S16,
                           sobel_kernel(int_mask({-1, -2, -1, 0, 0, 0, 1, 2, 1})),
                           {a.input_ids[0]}, a.output_ids[1]);
        };
        reg.add(std::move(e));
    }

    // Dilate3x3 / Erode3x3: window max / min.
    auto add_morph = [&reg](const std::string& name, CombineMode combine) {
        KernelEntry e;
        e.name = name;
        e.signature = KernelSignature({img_in("in", kIntChannel), img_out("out")});
        e.infer = [](const InferArgs& a) {
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, a.inputs[0].format)};
        };
        e.expand = [combine](ExpandArgs& a) {
            ScalarType t = scalar_of(a.inputs[0].format);
            LocalKernel lk;
            lk.window_w = 3;
            lk.window_h = 3;
            lk.boundary = BoundaryMode::Clamp;
            lk.combine = combine;
            lk.tap_body = window_pixel(0, 0, 0);
            lk.post_body = saturate_to(t, in0());
            emit_local(a, combine == CombineMode::Max ? "dilate3x3" : "erode3x3",
                       a.inputs[0].format, std::move(lk), {a.input_ids[0]}, a.output_ids[0]);
        };
        reg.add(std::move(e));
    };
    add_morph("Dilate3x3", CombineMode::Max);
    add_morph("Erode3x3", CombineMode::Min);

    // Median3x3: 9-element sorting network special case.
    {
        KernelEntry e;
        e.name = "Median3x3";
        e.signature = KernelSignature({img_in("in", kIntChannel), img_out("out")});
        e.infer = [](const InferArgs& a) {
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, a.inputs[0].format)};
        };
        e.expand = [](ExpandArgs& a) {
            ScalarType t = scalar_of(a.inputs[0].format);
            LocalKernel lk;
            lk.window_w = 3;
            lk.window_h = 3;
            lk.boundary = BoundaryMode::Clamp;
            lk.combine = CombineMode::Min; // unused; median flag takes over
            lk.median3x3 = true;
            lk.tap_body = window_pixel(0, 0, 0);
            lk.post_body = saturate_to(t, in0());
            emit_local(a, "median3x3", a.inputs[0].format, std::move(lk), {a.input_ids[0]},
                       a.output_ids[0]);
        };
        reg.add(std::move(e));
    }

    // Convolve: custom matrix; applied unflipped (correlation), optional
    // integer divisor attribute.
    {
        KernelEntry e;
        e.name = "Convolve";
        e.signature =
            KernelSignature({img_in("in", kSingleChannel), matrix_in("matrix"), img_out("out")});
        e.infer = [](const InferArgs& a) {
            const ResolvedDesc& m = a.inputs[1];
            if (m.rows % 2 == 0 || m.cols % 2 == 0)
                throw Error(ErrorCode::BadFormat, "convolution matrix must have odd dimensions");
            ImageFormat def = is_float(m.element_type) || a.inputs[0].format == ImageFormat::F32
                                  ? ImageFormat::F32
                                  : (a.inputs[0].format == ImageFormat::S32 ? ImageFormat::S32
                                                                            : ImageFormat::S16);
            ImageFormat out = attr_format_or(*a.attrs, "out", def);
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, out)};
        };
        e.expand = [](ExpandArgs& a) {
            const ResolvedDesc& m = a.inputs[1];
            ImageFormat def = is_float(m.element_type) || a.inputs[0].format == ImageFormat::F32
                                  ? ImageFormat::F32
                                  : (a.inputs[0].format == ImageFormat::S32 ? ImageFormat::S32
                                                                            : ImageFormat::S16);
            ImageFormat out = attr_format_or(a.node->attrs, "out", def);
            std::int64_t scale = attr_int(a.node->attrs, "scale", 1);
            if (scale < 1) throw Error(ErrorCode::SchemaError, "convolve scale must be >= 1");
            LocalKernel lk;
            lk.window_w = m.cols;
            lk.window_h = m.rows;
            lk.boundary = BoundaryMode::Clamp;
            lk.combine = CombineMode::Sum;
            lk.tap_body = mul(mask_coef(0, 0), window_pixel(0, 0, 0));
            ExprPtr acc = in0();
            if (scale != 1) acc = mul(std::move(acc), const_f(1.0 / static_cast<double>(scale)));
            lk.post_body = saturate_to(scalar_of(out), std::move(acc));
            emit_local(a, "convolve", out, std::move(lk), {a.input_ids[0], a.input_ids[1]},
                       a.output_ids[0], /*with_matrix=*/true);
        };
        reg.add(std::move(e));
    }
}

void register_globals(KernelRegistry& reg) {
    // Histogram: U8 pixels into a count distribution.
    {
        KernelEntry e;
        e.name = "Histogram";
        e.signature =
            KernelSignature({img_in("in", {ImageFormat::U8}), array_out("dist", ScalarType::S32)});
        e.infer = [](const InferArgs& a) {
            std::int64_t bins = attr_int(*a.attrs, "bins", 256);
            if (bins < 1) throw Error(ErrorCode::SchemaError, "histogram needs bins >= 1");
            (void)a;
            return std::vector<ResolvedDesc>{array_desc(ScalarType::S32, bins)};
        };
        e.expand = [](ExpandArgs& a) {
            std::int64_t bins = attr_int(a.node->attrs, "bins", 256);
            std::int64_t offset = attr_int(a.node->attrs, "offset", 0);
            std::int64_t range = attr_int(a.node->attrs, "range", 256);
            AbstractionKernel tpl;
            HistogramKernel hk;
            hk.bins = static_cast<int>(bins);
            hk.offset = offset;
            hk.range = range;
            hk.bin_of = div(mul(sub(in0(), const_i(offset)), const_i(bins)), const_i(range));
            tpl.body = hk;
            KernelSignature sig({img_in("in", {ImageFormat::U8}),
                                 array_out("dist", ScalarType::S32)});
            AbstractionPtr k =
                make_kernel("histogram", AbstractionKind::Histogram, std::move(sig), tpl);
            a.impl->add_abstraction_node(k, {a.input_ids[0], a.output_ids[0]}, a.node->id,
                                         "histogram");
        };
        reg.add(std::move(e));
    }

    // MinMaxLoc: two reductions, optionally tracking first locations.
    {
        KernelEntry e;
        e.name = "MinMaxLoc";
        e.signature = KernelSignature(
            {img_in("in", kIntChannel), scalar_out("min", ScalarType::U8),
             scalar_out("max", ScalarType::U8), array_out("minloc", ScalarType::S32,
                                                          ParamState::Optional),
             array_out("maxloc", ScalarType::S32, ParamState::Optional)});
        e.infer = [](const InferArgs& a) {
            ScalarType t = scalar_of(a.inputs[0].format);
            return std::vector<ResolvedDesc>{scalar_desc(t), scalar_desc(t),
                                             array_desc(ScalarType::S32, 2),
                                             array_desc(ScalarType::S32, 2)};
        };
        e.expand = [](ExpandArgs& a) {
            ScalarType t = scalar_of(a.inputs[0].format);
            auto make_reduce = [&](bool is_min) {
                AbstractionKernel tpl;
                ReduceKernel rk;
                rk.seed_first = true;
                rk.combine = binary(is_min ? ExprOp::Min : ExprOp::Max, in0(), in1());
                rk.finalize = saturate_to(t, in0());
                rk.track = is_min ? ReduceKernel::Track::ArgMin : ReduceKernel::Track::ArgMax;
                tpl.body = rk;
                std::vector<SignatureParam> params{img_in("in"),
                                                   scalar_out("value", t),
                                                   array_out("loc", ScalarType::S32,
                                                             ParamState::Optional)};
                return make_kernel(is_min ? "reduce_min" : "reduce_max", AbstractionKind::Reduce,
                                   KernelSignature(std::move(params)), tpl);
            };
            a.impl->add_abstraction_node(make_reduce(true),
                                         {a.input_ids[0], a.output_ids[0], a.output_ids[2]},
                                         a.node->id, "reduce_min");
            a.impl->add_abstraction_node(make_reduce(false),
                                         {a.input_ids[0], a.output_ids[1], a.output_ids[3]},
                                         a.node->id, "reduce_max");
        };
        reg.add(std::move(e));
    }

    // MeanStdDev: sum and sum-of-squares reductions; the second finalize
    // consumes the mean.
    {
        KernelEntry e;
        e.name = "MeanStdDev";
        e.signature = KernelSignature({img_in("in", kIntChannel),
                                       scalar_out("mean", ScalarType::F32),
                                       scalar_out("stddev", ScalarType::F32)});
        e.infer = [](const InferArgs& a) {
            (void)a;
            return std::vector<ResolvedDesc>{scalar_desc(ScalarType::F32),
                                             scalar_desc(ScalarType::F32)};
        };
        e.expand = [](ExpandArgs& a) {
            AbstractionKernel sum_tpl;
            {
                ReduceKernel rk;
                rk.init = Value::of_int(0);
                rk.combine = add(in0(), in1());
                rk.finalize = saturate_to(
                    ScalarType::F32, div(mul(in0(), const_f(1.0)), input_pixel(1)));
                sum_tpl.body = rk;
            }
            AbstractionPtr mean_k = make_kernel(
                "reduce_mean", AbstractionKind::Reduce,
                KernelSignature({img_in("in"), scalar_out("mean", ScalarType::F32)}), sum_tpl);
            a.impl->add_abstraction_node(mean_k, {a.input_ids[0], a.output_ids[0]}, a.node->id,
                                         "reduce_mean");

            AbstractionKernel sq_tpl;
            {
                ReduceKernel rk;
                rk.init = Value::of_int(0);
                rk.combine = add(in0(), mul(in1(), in1()));
                // stddev = sqrt(max(E[x^2] - mean^2, 0))
                ExprPtr ex2 = div(mul(in0(), const_f(1.0)), input_pixel(1));
                ExprPtr var = binary(ExprOp::Max,
                                     sub(std::move(ex2), mul(input_pixel(2), input_pixel(2))),
                                     const_f(0.0));
                rk.finalize = saturate_to(ScalarType::F32, unary(ExprOp::Sqrt, std::move(var)));
                rk.extra_scalar_inputs = 1;
                sq_tpl.body = rk;
            }
            AbstractionPtr std_k = make_kernel(
                "reduce_stddev", AbstractionKind::Reduce,
                KernelSignature({img_in("in"), scalar_in("mean"),
                                 scalar_out("stddev", ScalarType::F32)}),
                sq_tpl);
            a.impl->add_abstraction_node(std_k,
                                         {a.input_ids[0], a.output_ids[0], a.output_ids[1]},
                                         a.node->id, "reduce_stddev");
        };
        reg.add(std::move(e));
    }

    // IntegralImage: row-major prefix sums.
    {
        KernelEntry e;
        e.name = "IntegralImage";
        e.signature = KernelSignature(
            {img_in("in", {ImageFormat::U8}), img_out("out", {ImageFormat::S32})});
        e.infer = [](const InferArgs& a) {
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, ImageFormat::S32)};
        };
        e.expand = [](ExpandArgs& a) {
            AbstractionKernel tpl;
            tpl.body = ScanKernel{};
            AbstractionPtr k = make_kernel(
                "integral", AbstractionKind::Scan,
                KernelSignature({img_in("in", {ImageFormat::U8}),
                                 img_out("out", {ImageFormat::S32})}),
                tpl);
            a.impl->add_abstraction_node(k, {a.input_ids[0], a.output_ids[0]}, a.node->id,
                                         "integral");
        };
        reg.add(std::move(e));
    }

    // ScaleImage: resampling to the output object's dimensions.
    {
        KernelEntry e;
        e.name = "ScaleImage";
        e.signature = KernelSignature({img_in("in", {ImageFormat::U8, ImageFormat::S16,
                                                     ImageFormat::F32}),
                                       img_out("out")});
        e.infer = [](const InferArgs& a) {
            const Binding* b = a.node->binding_for(1);
            const DataObject* out_obj = b ? a.ctx->find(b->object) : nullptr;
            if (!out_obj || out_obj->width < 1 || out_obj->height < 1)
                throw Error(ErrorCode::BadFormat, "scale output needs explicit dimensions");
            return std::vector<ResolvedDesc>{
                image_desc(out_obj->width, out_obj->height, a.inputs[0].format)};
        };
        e.expand = [](ExpandArgs& a) {
            std::string interp = attr_str(a.node->attrs, "interp", "nearest");
            AbstractionKernel tpl;
            ScaleKernel sk;
            sk.interp = interp == "bilinear" ? InterpMode::Bilinear : InterpMode::Nearest;
            tpl.body = sk;
            AbstractionPtr k =
                make_kernel("scale_" + interp, AbstractionKind::Scale,
                            KernelSignature({img_in("in"), img_out("out")}), tpl);
            a.impl->add_abstraction_node(k, {a.input_ids[0], a.output_ids[0]}, a.node->id,
                                         "scale_" + interp);
        };
        reg.add(std::move(e));
    }

    // EqualizeHist: histogram + host LUT table step + pointwise lookup.
    {
        KernelEntry e;
        e.name = "EqualizeHist";
        e.signature = KernelSignature(
            {img_in("in", {ImageFormat::U8}), img_out("out", {ImageFormat::U8})});
        e.infer = [](const InferArgs& a) {
            return std::vector<ResolvedDesc>{
                image_desc(a.inputs[0].width, a.inputs[0].height, ImageFormat::U8)};
        };
        e.expand = [](ExpandArgs& a) {
            Context& ctx = *a.ctx;
            DataObject& hist = ctx.create_virtual_object(*a.impl, ObjKind::Array, "eq_hist");
            hist.element_type = ScalarType::S32;
            hist.capacity = 256;
            DataObject& lut = ctx.create_virtual_object(*a.impl, ObjKind::Array, "eq_lut");
            lut.element_type = ScalarType::U8;
            lut.capacity = 256;

            AbstractionKernel htpl;
            HistogramKernel hk;
            hk.bins = 256;
            hk.offset = 0;
            hk.range = 256;
            hk.bin_of = div(mul(sub(in0(), const_i(0)), const_i(256)), const_i(256));
            htpl.body = hk;
            AbstractionPtr h = make_kernel(
                "histogram", AbstractionKind::Histogram,
                KernelSignature({img_in("in", {ImageFormat::U8}),
                                 array_out("dist", ScalarType::S32)}),
                htpl);
            a.impl->add_abstraction_node(h, {a.input_ids[0], hist.id}, a.node->id, "histogram");

            AbstractionKernel ttpl;
            ttpl.body = TableKernel{TableKernel::Fn::EqualizeHistLut};
            AbstractionPtr t = make_kernel(
                "equalize_lut", AbstractionKind::Table,
                KernelSignature({array_in("dist", ScalarType::S32),
                                 array_out("lut", ScalarType::U8)}),
                ttpl);
            a.impl->add_abstraction_node(t, {hist.id, lut.id}, a.node->id, "equalize_lut");

            emit_point(a, "lut_lookup", ImageFormat::U8, array_at(1, in0()),
                       {a.input_ids[0], lut.id}, a.output_ids[0],
                       {ObjKind::Image, ObjKind::Array});
        };
        reg.add(std::move(e));
    }
}

} // namespace

const KernelRegistry& KernelRegistry::builtin() {
    static const KernelRegistry reg = build_builtin();
    return reg;
}

// ----------------------------------------------------------------- expand

AppGraph& expand(const VerifiedGraph& vg, Context& ctx) {
    if (!vg.stamped()) throw Error(ErrorCode::UnstampedGraph, "expand needs a verified graph");
    const AppGraph& src = vg.graph();
    AppGraph& impl = ctx.create_graph(GraphPhase::Implementation);

    if (src.phase() == GraphPhase::Implementation) {
        // expanding an implementation graph is the identity
        for (ObjectId id : src.data()) impl.note_data(id);
        for (ObjectId nid : src.topo_sort()) {
            OperatorNode copy = *src.node(nid);
            copy.id = kInvalidId;
            impl.add_node_unchecked(std::move(copy));
        }
        return impl;
    }

    const KernelRegistry& reg = ctx.registry();
    for (ObjectId nid : src.topo_sort()) {
        const OperatorNode* n = src.node(nid);
        const KernelEntry* entry = reg.find(n->kernel);
        if (!entry)
            throw Error(ErrorCode::UnknownKernel, "kernel '" + n->kernel + "' is not registered",
                        n->id);

        ExpandArgs args;
        args.impl = &impl;
        args.ctx = &ctx;
        args.node = n;
        for (std::size_t i = 0; i < entry->signature.params.size(); ++i) {
            const SignatureParam& p = entry->signature.params[i];
            const Binding* b = n->binding_for(static_cast<int>(i));
            ObjectId id = b ? b->object : kInvalidId;
            if (p.direction == Direction::Input) {
                args.input_ids.push_back(id);
                args.inputs.push_back(id == kInvalidId ? ResolvedDesc{} : vg.desc(id));
            } else {
                args.output_ids.push_back(id);
            }
        }
        entry->expand(args);
    }
    return impl;
}

} // namespace gvx
