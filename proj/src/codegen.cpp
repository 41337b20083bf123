#include "graphvx/codegen.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace gvx {

using nlohmann::json;

// ------------------------------------------------------------------- DOT

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string data_label(const Context& ctx, ObjectId id) {
    const DataObject* obj = ctx.find(id);
    if (!obj) return "#" + std::to_string(id);
    std::ostringstream os;
    os << obj->name;
    switch (obj->kind) {
    case ObjKind::Image:
        if (obj->is_virtual)
            os << "\\n(virtual)";
        else
            os << "\\n" << obj->width << "x" << obj->height << " " << to_string(obj->format);
        break;
    case ObjKind::Scalar: os << "\\nscalar"; break;
    case ObjKind::Array: os << "\\narray"; break;
    case ObjKind::Matrix: os << "\\nmatrix " << obj->rows << "x" << obj->cols; break;
    }
    return os.str();
}

} // namespace

std::string emit_dot(const AppGraph& g, const std::string& stage_label,
                     const FilteredGraph* overlay) {
    const Context& ctx = g.context();
    std::ostringstream os;
    os << "digraph \"" << dot_escape(stage_label) << "\" {\n";
    os << "  rankdir=TB;\n";
    os << "  label=\"" << dot_escape(stage_label) << "\";\n";

    auto grey = [&](ObjectId id) { return overlay && !overlay->is_alive(id); };

    for (ObjectId id : g.data()) {
        os << "  n" << id << " [shape=ellipse, label=\"" << dot_escape(data_label(ctx, id))
           << "\"";
        if (const DataObject* obj = ctx.find(id); obj && obj->is_virtual)
            os << ", style=dashed";
        if (grey(id)) os << ", style=filled, fillcolor=gray, fontcolor=gray30";
        os << "];\n";
    }
    std::vector<const OperatorNode*> nodes;
    for (const OperatorNode& n : g.nodes()) nodes.push_back(&n);
    std::sort(nodes.begin(), nodes.end(),
              [](const OperatorNode* a, const OperatorNode* b) { return a->id < b->id; });
    for (const OperatorNode* n : nodes) {
        std::string label = n->label.empty() ? n->kernel : n->label;
        os << "  n" << n->id << " [shape=box, label=\"" << dot_escape(label) << "\"";
        if (grey(n->id)) os << ", style=filled, fillcolor=gray, fontcolor=gray30";
        os << "];\n";
    }
    for (const auto& [from, to] : g.edges()) {
        os << "  n" << from << " -> n" << to;
        if (grey(from) || grey(to)) os << " [color=gray]";
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

// ------------------------------------------------------- kernel source

namespace {

const char* c_type(ScalarType t) {
    switch (t) {
    case ScalarType::U8: return "unsigned char";
    case ScalarType::U16: return "unsigned short";
    case ScalarType::S16: return "short";
    case ScalarType::S32: return "int";
    case ScalarType::F32: return "float";
    case ScalarType::I64: return "long long";
    case ScalarType::F64: return "double";
    }
    return "int";
}

const char* c_type_of_format(ImageFormat f) {
    switch (f) {
    case ImageFormat::RGB:
    case ImageFormat::UYVY: return "unsigned char";
    default: return c_type(scalar_of(f));
    }
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    std::string s = os.str();
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

// Shared helper block pasted into every emitted unit; everything is static
// so units can be compiled together.
const char* kHelpers = R"(#include <math.h>

static long long gx_clampll(long long v, long long lo, long long hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}
static long long gx_roundll(double v) {
    return (long long)(v >= 0.0 ? floor(v + 0.5) : ceil(v - 0.5));
}
static long long gx_sat_i(long long v, long long lo, long long hi) {
    return gx_clampll(v, lo, hi);
}
static long long gx_sat_f(double v, long long lo, long long hi) {
    if (v != v) return 0;
    if (v >= (double)hi) return hi;
    if (v <= (double)lo) return lo;
    return gx_roundll(v);
}
static int gx_clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }
)";

struct CExpr {
    std::string text;
    bool is_real;
};

struct EmitCtx {
    const AbstractionKernel* kernel = nullptr;
    std::vector<ResolvedDesc> input_descs;
    std::vector<std::string> input_names; // C parameter names or literals
    std::vector<const DataObject*> input_objects;
    const LocalKernel* local = nullptr;
    std::string combined_name; // post body: slot 0
    bool combined_real = false;
};

std::int64_t range_lo(ScalarType t) {
    std::int64_t lo, hi;
    integer_range(t, lo, hi);
    return lo;
}
std::int64_t range_hi(ScalarType t) {
    std::int64_t lo, hi;
    integer_range(t, lo, hi);
    return hi;
}

CExpr emit_expr(const Expr& e, const EmitCtx& cx);

CExpr emit_pixel_read(const EmitCtx& cx, int input, const std::string& xe,
                      const std::string& ye, Channel ch) {
    const ResolvedDesc& d = cx.input_descs[static_cast<std::size_t>(input)];
    const std::string& name = cx.input_names[static_cast<std::size_t>(input)];
    std::string idx = "(" + ye + ")*w + (" + xe + ")";
    switch (d.format) {
    case ImageFormat::RGB: {
        int c = ch == Channel::G ? 1 : ch == Channel::B ? 2 : 0;
        return {"(long long)" + name + "[(" + idx + ")*3 + " + std::to_string(c) + "]", false};
    }
    case ImageFormat::UYVY: {
        if (ch == Channel::U)
            return {"(long long)" + name + "[(" + ye + ")*w*2 + 4*((" + xe + ")/2)]", false};
        if (ch == Channel::V)
            return {"(long long)" + name + "[(" + ye + ")*w*2 + 4*((" + xe + ")/2) + 2]", false};
        return {"(long long)" + name + "[(" + ye + ")*w*2 + 2*(" + xe + ") + 1]", false};
    }
    case ImageFormat::F32: return {"(double)" + name + "[" + idx + "]", true};
    default: return {"(long long)" + name + "[" + idx + "]", false};
    }
}

CExpr emit_input(const EmitCtx& cx, const Expr& e) {
    const ResolvedDesc& d = cx.input_descs[static_cast<std::size_t>(e.input)];
    if (d.kind == ObjKind::Scalar) {
        const std::string& lit = cx.input_names[static_cast<std::size_t>(e.input)];
        return {lit, is_float(d.element_type)};
    }
    return emit_pixel_read(cx, e.input, "x", "y", e.channel);
}

CExpr emit_window(const EmitCtx& cx, const Expr& e) {
    const LocalKernel& lk = *cx.local;
    std::string dx = std::to_string(e.dx);
    std::string dy = std::to_string(e.dy);
    std::string xe = "gx_clampi(x + tx + " + dx + ", 0, w - 1)";
    std::string ye = "gx_clampi(y + ty + " + dy + ", 0, h - 1)";
    CExpr read = emit_pixel_read(cx, e.input, xe, ye, e.channel);
    if (lk.boundary == BoundaryMode::Constant) {
        const Value& bv = lk.boundary_value;
        std::string cval = bv.real ? fmt_double(bv.f) : std::to_string(bv.i) + "LL";
        std::string guard = "(x + tx + " + dx + " < 0 || y + ty + " + dy +
                            " < 0 || x + tx + " + dx + " >= w || y + ty + " + dy + " >= h)";
        bool fl = read.is_real || bv.real;
        return {"(" + guard + " ? " + cval + " : " + read.text + ")", fl};
    }
    return read;
}

CExpr emit_binary(const Expr& e, const EmitCtx& cx) {
    CExpr a = emit_expr(*e.a, cx);
    CExpr b = emit_expr(*e.b, cx);
    bool fl = a.is_real || b.is_real;
    auto bin = [&](const char* op) {
        return CExpr{"(" + a.text + " " + op + " " + b.text + ")", fl};
    };
    switch (e.op) {
    case ExprOp::Add: return bin("+");
    case ExprOp::Sub: return bin("-");
    case ExprOp::Mul: return bin("*");
    case ExprOp::Div: return bin("/");
    case ExprOp::Min:
        return {fl ? "fmin(" + a.text + ", " + b.text + ")"
                   : "(" + a.text + " < " + b.text + " ? " + a.text + " : " + b.text + ")",
                fl};
    case ExprOp::Max:
        return {fl ? "fmax(" + a.text + ", " + b.text + ")"
                   : "(" + a.text + " > " + b.text + " ? " + a.text + " : " + b.text + ")",
                fl};
    case ExprOp::And: return {"(" + a.text + " & " + b.text + ")", false};
    case ExprOp::Or: return {"(" + a.text + " | " + b.text + ")", false};
    case ExprOp::Xor: return {"(" + a.text + " ^ " + b.text + ")", false};
    case ExprOp::Shl: return {"(" + a.text + " << " + b.text + ")", false};
    case ExprOp::Shr: return {"(" + a.text + " >> " + b.text + ")", false};
    case ExprOp::Lt: return {"(long long)(" + a.text + " < " + b.text + ")", false};
    case ExprOp::Gt: return {"(long long)(" + a.text + " > " + b.text + ")", false};
    case ExprOp::Eq: return {"(long long)(" + a.text + " == " + b.text + ")", false};
    case ExprOp::Atan2: return {"atan2((double)" + a.text + ", (double)" + b.text + ")", true};
    default: break;
    }
    throw Error(ErrorCode::UnsupportedKind, "bad binary op in source emission");
}

CExpr emit_expr(const Expr& e, const EmitCtx& cx) {
    switch (e.op) {
    case ExprOp::ConstI: return {std::to_string(e.ival) + "LL", false};
    case ExprOp::ConstF: return {fmt_double(e.fval), true};
    case ExprOp::InputPixel:
        if (!cx.combined_name.empty() && e.input == 0)
            return {cx.combined_name, cx.combined_real};
        return emit_input(cx, e);
    case ExprOp::WindowPixel: return emit_window(cx, e);
    case ExprOp::MaskCoef: {
        const LocalKernel& lk = *cx.local;
        std::string ix = "(ty + " + std::to_string(e.dy) + " + " +
                         std::to_string(lk.window_h / 2) + ")*" + std::to_string(lk.window_w) +
                         " + (tx + " + std::to_string(e.dx) + " + " +
                         std::to_string(lk.window_w / 2) + ")";
        return {"gx_mask[" + ix + "]", lk.mask_is_real};
    }
    case ExprOp::ArrayAt: {
        CExpr idx = emit_expr(*e.a, cx);
        const std::string& name = cx.input_names[static_cast<std::size_t>(e.input)];
        return {"(long long)" + name + "[" + idx.text + "]", false};
    }
    case ExprOp::Select: {
        CExpr c = emit_expr(*e.a, cx);
        CExpr a = emit_expr(*e.b, cx);
        CExpr b = emit_expr(*e.c, cx);
        bool fl = a.is_real || b.is_real;
        std::string at = fl && !a.is_real ? "(double)" + a.text : a.text;
        std::string bt = fl && !b.is_real ? "(double)" + b.text : b.text;
        return {"(" + c.text + " != 0 ? " + at + " : " + bt + ")", fl};
    }
    case ExprOp::Cast: {
        CExpr v = emit_expr(*e.a, cx);
        ScalarType t = e.cast_to;
        if (t == ScalarType::F32) return {"(double)(float)(" + v.text + ")", true};
        if (t == ScalarType::F64) return {"(double)(" + v.text + ")", true};
        std::string lo = std::to_string(range_lo(t)) + "LL";
        std::string hi = std::to_string(range_hi(t)) + "LL";
        if (e.policy == CastPolicy::Saturate) {
            if (v.is_real) return {"gx_sat_f(" + v.text + ", " + lo + ", " + hi + ")", false};
            return {"gx_sat_i(" + v.text + ", " + lo + ", " + hi + ")", false};
        }
        std::string iv = v.is_real ? "(long long)trunc(" + v.text + ")" : v.text;
        int bits = t == ScalarType::U8 ? 8 : t == ScalarType::S32 ? 32 : 16;
        std::string mask = bits == 8 ? "0xffLL" : bits == 16 ? "0xffffLL" : "0xffffffffLL";
        bool is_signed = t == ScalarType::S16 || t == ScalarType::S32;
        std::string wrapped = "((" + iv + ") & " + mask + ")";
        if (!is_signed) return {wrapped, false};
        std::string sign_bit = bits == 16 ? "0x8000LL" : "0x80000000LL";
        std::string span = bits == 16 ? "0x10000LL" : "0x100000000LL";
        return {"(" + wrapped + " >= " + sign_bit + " ? " + wrapped + " - " + span + " : " +
                    wrapped + ")",
                false};
    }
    default:
        if (is_binary(e.op)) return emit_binary(e, cx);
        break;
    }
    // unary
    CExpr a = emit_expr(*e.a, cx);
    switch (e.op) {
    case ExprOp::Not: return {"(~(" + a.text + "))", false};
    case ExprOp::Neg: return {"(-(" + a.text + "))", a.is_real};
    case ExprOp::Abs:
        return {a.is_real ? "fabs(" + a.text + ")" : "llabs(" + a.text + ")", a.is_real};
    case ExprOp::Sqrt: return {"sqrt((double)" + a.text + ")", true};
    default: throw Error(ErrorCode::UnsupportedKind, "bad unary op in source emission");
    }
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out.push_back((std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_');
    return out;
}

std::string store_channel(const std::string& out_name, ImageFormat f, int channel,
                          const std::string& value) {
    if (f == ImageFormat::RGB)
        return out_name + "[(y*w + x)*3 + " + std::to_string(channel) + "] = (unsigned char)(" +
               value + ");";
    std::string cast_ty = c_type_of_format(f);
    return out_name + "[y*w + x] = (" + cast_ty + ")(" + value + ");";
}

std::string scalar_literal(const DataObject& obj) {
    if (!obj.scalar_value) throw Error(ErrorCode::MissingInput, "scalar has no value to emit");
    const Value& v = *obj.scalar_value;
    return v.real ? fmt_double(v.f) : std::to_string(v.i) + "LL";
}

} // namespace

EmittedProgram emit_kernel_source(const VerifiedGraph& vg) {
    const AppGraph& g = vg.graph();
    const Context& ctx = vg.context();
    EmittedProgram program;
    json manifest;
    manifest["kernels"] = json::array();

    for (ObjectId nid : g.topo_sort()) {
        const OperatorNode* n = g.node(nid);
        const AbstractionKernel& k = *n->abstraction;
        std::string fname = "k_" + sanitize(n->label.empty() ? k.name : n->label) + "_" +
                            std::to_string(nid);

        json entry;
        entry["function"] = fname;
        entry["node"] = nid;
        entry["kind"] = to_string(k.kind);
        entry["label"] = n->label;

        EmitCtx cx;
        cx.kernel = &k;

        std::vector<std::string> params;
        json io = json::array();
        std::vector<ObjectId> outputs;
        int img_index = 0;
        for (std::size_t i = 0; i < k.signature.params.size(); ++i) {
            const SignatureParam& p = k.signature.params[i];
            const Binding* b = n->binding_for(static_cast<int>(i));
            ObjectId oid = b ? b->object : kInvalidId;
            if (p.direction == Direction::Input) {
                if (oid == kInvalidId) {
                    cx.input_descs.push_back(ResolvedDesc{});
                    cx.input_names.push_back("0");
                    cx.input_objects.push_back(nullptr);
                    continue;
                }
                const ResolvedDesc& d = vg.desc(oid);
                cx.input_descs.push_back(d);
                const DataObject* obj = ctx.find(oid);
                cx.input_objects.push_back(obj);
                if (d.kind == ObjKind::Image) {
                    std::string pname = "in" + std::to_string(img_index++);
                    cx.input_names.push_back(pname);
                    params.push_back("const " + std::string(c_type_of_format(d.format)) + " *" +
                                     pname);
                    json slot;
                    slot["role"] = "input";
                    slot["param"] = pname;
                    slot["object"] = oid;
                    slot["format"] = to_string(d.format);
                    slot["width"] = d.width;
                    slot["height"] = d.height;
                    io.push_back(slot);
                } else if (d.kind == ObjKind::Scalar) {
                    // specialized into the source
                    cx.input_names.push_back(scalar_literal(*obj));
                } else if (d.kind == ObjKind::Matrix) {
                    cx.input_names.push_back("gx_table" + std::to_string(i));
                } else {
                    // runtime arrays (lookup tables) become parameters
                    std::string pname = "tab" + std::to_string(i);
                    cx.input_names.push_back(pname);
                    params.push_back("const long long *" + pname);
                    json slot;
                    slot["role"] = "input";
                    slot["param"] = pname;
                    slot["object"] = oid;
                    slot["kind"] = "array";
                    io.push_back(slot);
                }
            } else if (oid != kInvalidId) {
                outputs.push_back(oid);
            }
        }

        bool host = k.kind != AbstractionKind::Point && k.kind != AbstractionKind::Local;
        entry["host_step"] = host;
        if (host) {
            entry["io"] = io;
            manifest["kernels"].push_back(entry);
            EmittedKernel ek;
            ek.function_name = fname;
            ek.node = nid;
            ek.host_step = true;
            program.kernels.push_back(std::move(ek));
            continue;
        }

        std::vector<std::string> out_names;
        for (std::size_t oi = 0; oi < outputs.size(); ++oi) {
            const ResolvedDesc& d = vg.desc(outputs[oi]);
            std::string pname = "out" + std::to_string(oi);
            out_names.push_back(pname);
            params.push_back(std::string(c_type_of_format(d.format)) + " *" + pname);
            json slot;
            slot["role"] = "output";
            slot["param"] = pname;
            slot["object"] = outputs[oi];
            slot["format"] = to_string(d.format);
            slot["width"] = d.width;
            slot["height"] = d.height;
            io.push_back(slot);
        }
        entry["io"] = io;
        manifest["kernels"].push_back(entry);

        std::ostringstream src;
        src << kHelpers << "\n";

        // specialized tables: bound matrices by parameter index
        for (std::size_t i = 0; i < k.signature.params.size(); ++i) {
            const SignatureParam& p = k.signature.params[i];
            if (p.direction != Direction::Input || p.kind != ObjKind::Matrix) continue;
            const Binding* b = n->binding_for(static_cast<int>(i));
            if (!b) continue;
            const DataObject* obj = ctx.find(b->object);
            bool real = is_float(obj->element_type);
            src << "static const " << (real ? "double" : "long long") << " gx_table" << i
                << "[] = {";
            for (std::size_t vi = 0; vi < obj->matrix_values.size(); ++vi) {
                if (vi) src << ", ";
                const Value& v = obj->matrix_values[vi];
                src << (real ? fmt_double(v.as_real()) : std::to_string(v.i) + "LL");
            }
            src << "};\n";
        }

        if (k.kind == AbstractionKind::Point) {
            const PointKernel& pk = k.point();
            src << "void " << fname << "(int w, int h";
            for (const std::string& p : params) src << ", " << p;
            src << ") {\n";
            src << "    for (int y = 0; y < h; ++y) {\n";
            src << "        for (int x = 0; x < w; ++x) {\n";
            for (std::size_t oi = 0; oi < pk.outputs.size() && oi < outputs.size(); ++oi) {
                const ResolvedDesc& d = vg.desc(outputs[oi]);
                const PointOutput& po = pk.outputs[oi];
                for (std::size_t chi = 0; chi < po.channel_bodies.size(); ++chi) {
                    CExpr v = emit_expr(*po.channel_bodies[chi], cx);
                    src << "            "
                        << store_channel(out_names[oi], d.format, static_cast<int>(chi), v.text)
                        << "\n";
                }
            }
            src << "        }\n    }\n}\n";
        } else {
            const LocalKernel& lk = k.local();
            const ResolvedDesc& d = vg.desc(outputs[0]);
            // mask table baked from the kernel or the bound matrix
            if (!lk.mask.empty()) {
                src << "static const " << (lk.mask_is_real ? "double" : "long long")
                    << " gx_mask[] = {";
                for (std::size_t vi = 0; vi < lk.mask.size(); ++vi) {
                    if (vi) src << ", ";
                    const Value& v = lk.mask[vi];
                    src << (lk.mask_is_real ? fmt_double(v.as_real())
                                            : std::to_string(v.i) + "LL");
                }
                src << "};\n";
            } else {
                for (std::size_t i = 0; i < k.signature.params.size(); ++i) {
                    if (k.signature.params[i].kind == ObjKind::Matrix &&
                        n->binding_for(static_cast<int>(i))) {
                        src << "#define gx_mask gx_table" << i << "\n";
                        break;
                    }
                }
            }

            cx.local = &lk;
            const int hw = lk.window_w / 2;
            const int hh = lk.window_h / 2;

            src << "void " << fname << "(int w, int h";
            for (const std::string& p : params) src << ", " << p;
            src << ") {\n";
            src << "    for (int y = 0; y < h; ++y) {\n";
            src << "        for (int x = 0; x < w; ++x) {\n";
            if (lk.boundary == BoundaryMode::Undefined) {
                src << "            if (x < " << hw << " || y < " << hh << " || x >= w - " << hw
                    << " || y >= h - " << hh << ") { "
                    << store_channel(out_names[0], d.format, 0, "0") << " continue; }\n";
            }
            CExpr tap = emit_expr(*lk.tap_body, cx);
            const bool tap_real = tap.is_real;
            const char* acc_ty = tap_real ? "double" : "long long";
            if (lk.median3x3) {
                src << "            " << acc_ty << " gx_taps[9]; int gx_n = 0;\n";
                src << "            for (int ty = -" << hh << "; ty <= " << hh << "; ++ty)\n";
                src << "            for (int tx = -" << hw << "; tx <= " << hw << "; ++tx) {\n";
                src << "                gx_taps[gx_n++] = " << tap.text << ";\n";
                src << "            }\n";
                src << "            for (int i = 1; i < 9; ++i) { " << acc_ty
                    << " key = gx_taps[i]; int j = i - 1;\n";
                src << "                while (j >= 0 && gx_taps[j] > key) { gx_taps[j+1] = "
                       "gx_taps[j]; --j; }\n";
                src << "                gx_taps[j+1] = key; }\n";
                src << "            " << acc_ty << " gx_acc = gx_taps[4];\n";
            } else {
                src << "            " << acc_ty << " gx_acc = "
                    << (tap_real ? "0.0" : "0LL") << "; int gx_first = 1;\n";
                src << "            for (int ty = -" << hh << "; ty <= " << hh << "; ++ty)\n";
                src << "            for (int tx = -" << hw << "; tx <= " << hw << "; ++tx) {\n";
                src << "                " << acc_ty << " gx_tap = " << tap.text << ";\n";
                switch (lk.combine) {
                case CombineMode::Sum:
                    src << "                gx_acc = gx_first ? gx_tap : gx_acc + gx_tap;\n";
                    break;
                case CombineMode::Min:
                    src << "                gx_acc = gx_first || gx_tap < gx_acc ? gx_tap : "
                           "gx_acc;\n";
                    break;
                case CombineMode::Max:
                    src << "                gx_acc = gx_first || gx_tap > gx_acc ? gx_tap : "
                           "gx_acc;\n";
                    break;
                }
                src << "                gx_first = 0;\n";
                src << "            }\n";
            }
            std::string result = "gx_acc";
            if (lk.post_body) {
                EmitCtx post_cx = cx;
                post_cx.local = &lk;
                post_cx.combined_name = "gx_acc";
                post_cx.combined_real = tap_real;
                // post bodies never read windows; tx/ty do not exist here
                CExpr post = emit_expr(*lk.post_body, post_cx);
                result = post.text;
            }
            src << "            " << store_channel(out_names[0], d.format, 0, result) << "\n";
            src << "        }\n    }\n}\n";
            if (lk.mask.empty()) src << "#undef gx_mask\n";
        }

        EmittedKernel ek;
        ek.function_name = fname;
        ek.source = src.str();
        ek.node = nid;
        program.kernels.push_back(std::move(ek));
    }

    manifest["launch_order"] = json::array();
    for (const EmittedKernel& ek : program.kernels)
        manifest["launch_order"].push_back(ek.function_name);
    program.manifest_json = manifest.dump(2) + "\n";
    return program;
}

// ------------------------------------------------------------ stream plan

StreamPlan emit_stream_plan(const VerifiedGraph& vg, int v, int fifo_slack) {
    if (v < 1) throw Error(ErrorCode::SchemaError, "replication factor must be >= 1");
    const AppGraph& g = vg.graph();
    const Context& ctx = vg.context();

    // single-writer guard; cannot trip for graphs built through the API
    for (ObjectId id : g.data()) {
        int writers = 0;
        for (const OperatorNode& n : g.nodes())
            for (const Binding& b : n.bindings)
                if (b.direction == Direction::Output && b.object == id) ++writers;
        if (writers > 1)
            throw Error(ErrorCode::NonStreamable,
                        "data object #" + std::to_string(id) + " has several producers", id);
    }

    StreamPlan plan;
    plan.replication = v;
    plan.fifo_slack = fifo_slack;

    std::vector<ObjectId> order = g.topo_sort();
    int segment = 0;
    for (ObjectId nid : order) {
        const OperatorNode* n = g.node(nid);
        const AbstractionKernel& k = *n->abstraction;
        StreamStage stage;
        stage.node = nid;
        stage.label = n->label.empty() ? k.name : n->label;
        stage.kind = k.kind;
        stage.barrier = k.kind != AbstractionKind::Point && k.kind != AbstractionKind::Local;
        if (k.kind == AbstractionKind::Local) {
            const LocalKernel& lk = k.local();
            stage.window_w = lk.window_w;
            stage.window_h = lk.window_h;
            stage.line_buffer_rows = lk.window_h - 1;
            stage.line_buffer_extra = lk.window_w - 1;
        }
        if (stage.barrier && !plan.stages.empty()) ++segment;
        stage.segment = segment;
        plan.stages.push_back(stage);
        if (stage.barrier) ++segment;
    }

    // replication applies to the innermost (final) stage of each segment
    for (std::size_t i = 0; i < plan.stages.size(); ++i) {
        bool last_of_segment =
            i + 1 == plan.stages.size() || plan.stages[i + 1].segment != plan.stages[i].segment;
        if (last_of_segment && !plan.stages[i].barrier) plan.stages[i].replication = v;
    }

    for (ObjectId id : g.data()) {
        const DataObject* obj = ctx.find(id);
        if (!obj || !obj->is_virtual) continue;
        ObjectId producer = g.producer(id);
        if (producer == kInvalidId) continue;
        for (ObjectId consumer : g.consumers(id)) {
            StreamFifo fifo;
            fifo.data = id;
            fifo.from_node = producer;
            fifo.to_node = consumer;
            fifo.depth = std::max(1, 1 + fifo_slack);
            plan.fifos.push_back(fifo);
        }
    }
    std::sort(plan.fifos.begin(), plan.fifos.end(), [](const StreamFifo& a, const StreamFifo& b) {
        return std::tie(a.data, a.to_node) < std::tie(b.data, b.to_node);
    });
    return plan;
}

std::string stream_plan_json(const StreamPlan& plan) {
    json j;
    j["replication"] = plan.replication;
    j["fifo_slack"] = plan.fifo_slack;
    j["stages"] = json::array();
    for (const StreamStage& s : plan.stages) {
        json stage;
        stage["node"] = s.node;
        stage["label"] = s.label;
        stage["kind"] = to_string(s.kind);
        stage["segment"] = s.segment;
        stage["barrier"] = s.barrier;
        stage["replication"] = s.replication;
        if (s.kind == AbstractionKind::Local) {
            stage["window"] = {s.window_w, s.window_h};
            stage["line_buffer"] = {{"rows", s.line_buffer_rows},
                                    {"extra_pixels", s.line_buffer_extra}};
        }
        j["stages"].push_back(stage);
    }
    j["fifos"] = json::array();
    for (const StreamFifo& f : plan.fifos) {
        json fifo;
        fifo["data"] = f.data;
        fifo["from"] = f.from_node;
        fifo["to"] = f.to_node;
        fifo["depth"] = f.depth;
        j["fifos"].push_back(fifo);
    }
    return j.dump(2) + "\n";
}

} // namespace gvx
