#include "graphvx/graph_io.hpp"

#include "graphvx/registry.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace gvx {

using nlohmann::json;

ObjectId LoadedGraph::object(const std::string& key) const {
    auto it = objects.find(key);
    if (it == objects.end())
        throw Error(ErrorCode::SchemaError, "no object named '" + key + "' in the graph file");
    return it->second;
}

// ------------------------------------------------------------ expressions

namespace {

json expr_to_json(const Expr& e);

ExprPtr expr_from_json(const json& j) {
    if (!j.is_object() || !j.contains("op"))
        throw Error(ErrorCode::SchemaError, "expression node needs an \"op\" field");
    std::string ops = j.at("op").get<std::string>();
    ExprOp op;
    if (!parse_expr_op(ops, op))
        throw Error(ErrorCode::SchemaError, "unknown expression op '" + ops + "'");

    switch (op) {
    case ExprOp::ConstI: return const_i(j.at("value").get<std::int64_t>());
    case ExprOp::ConstF: return const_f(j.at("value").get<double>());
    case ExprOp::InputPixel: {
        Channel ch = Channel::C0;
        if (j.contains("channel")) {
            if (!parse_channel(j.at("channel").get<std::string>(), ch))
                throw Error(ErrorCode::SchemaError, "bad channel");
        }
        return input_pixel(j.at("index").get<int>(), ch);
    }
    case ExprOp::WindowPixel: {
        Channel ch = Channel::C0;
        if (j.contains("channel")) {
            if (!parse_channel(j.at("channel").get<std::string>(), ch))
                throw Error(ErrorCode::SchemaError, "bad channel");
        }
        return window_pixel(j.value("index", 0), j.value("dx", 0), j.value("dy", 0), ch);
    }
    case ExprOp::MaskCoef: return mask_coef(j.value("dx", 0), j.value("dy", 0));
    case ExprOp::ArrayAt:
        return array_at(j.at("index").get<int>(), expr_from_json(j.at("at")));
    case ExprOp::Select:
        return select(expr_from_json(j.at("cond")), expr_from_json(j.at("then")),
                      expr_from_json(j.at("else")));
    case ExprOp::Cast: {
        ScalarType t;
        if (!parse_scalar_type(j.at("to").get<std::string>(), t))
            throw Error(ErrorCode::SchemaError, "bad cast target");
        CastPolicy policy = j.value("policy", std::string("saturate")) == "wrap"
                                ? CastPolicy::Wrap
                                : CastPolicy::Saturate;
        return cast(t, policy, expr_from_json(j.at("arg")));
    }
    default:
        if (is_binary(op)) return binary(op, expr_from_json(j.at("lhs")), expr_from_json(j.at("rhs")));
        return unary(op, expr_from_json(j.at("arg")));
    }
}

json expr_to_json(const Expr& e) {
    json j;
    j["op"] = to_string(e.op);
    switch (e.op) {
    case ExprOp::ConstI: j["value"] = e.ival; break;
    case ExprOp::ConstF: j["value"] = e.fval; break;
    case ExprOp::InputPixel:
        j["index"] = e.input;
        if (e.channel != Channel::C0) j["channel"] = to_string(e.channel);
        break;
    case ExprOp::WindowPixel:
        j["index"] = e.input;
        j["dx"] = e.dx;
        j["dy"] = e.dy;
        if (e.channel != Channel::C0) j["channel"] = to_string(e.channel);
        break;
    case ExprOp::MaskCoef:
        j["dx"] = e.dx;
        j["dy"] = e.dy;
        break;
    case ExprOp::ArrayAt:
        j["index"] = e.input;
        j["at"] = expr_to_json(*e.a);
        break;
    case ExprOp::Select:
        j["cond"] = expr_to_json(*e.a);
        j["then"] = expr_to_json(*e.b);
        j["else"] = expr_to_json(*e.c);
        break;
    case ExprOp::Cast:
        j["to"] = to_string(e.cast_to);
        j["policy"] = e.policy == CastPolicy::Wrap ? "wrap" : "saturate";
        j["arg"] = expr_to_json(*e.a);
        break;
    default:
        if (is_binary(e.op)) {
            j["lhs"] = expr_to_json(*e.a);
            j["rhs"] = expr_to_json(*e.b);
        } else {
            j["arg"] = expr_to_json(*e.a);
        }
    }
    return j;
}

Value value_from_json(const json& j, ScalarType t) {
    if (is_float(t)) return Value::of_real(j.get<double>());
    return Value::of_int(j.get<std::int64_t>());
}

// ----------------------------------------------------------- custom kernels

KernelSignature signature_from_json(const json& j) {
    std::vector<SignatureParam> params;
    for (const json& pj : j) {
        SignatureParam p;
        std::string dir = pj.value("direction", std::string("input"));
        p.direction = dir == "output" ? Direction::Output : Direction::Input;
        std::string kind = pj.value("kind", std::string("image"));
        if (kind == "image")
            p.kind = ObjKind::Image;
        else if (kind == "scalar")
            p.kind = ObjKind::Scalar;
        else if (kind == "array")
            p.kind = ObjKind::Array;
        else if (kind == "matrix")
            p.kind = ObjKind::Matrix;
        else
            throw Error(ErrorCode::SchemaError, "bad parameter kind '" + kind + "'");
        if (pj.contains("format")) {
            std::string fs = pj.at("format").get<std::string>();
            if (fs != "ANY") {
                ImageFormat f;
                ScalarType t;
                if (p.kind == ObjKind::Image) {
                    if (!parse_image_format(fs, f))
                        throw Error(ErrorCode::SchemaError, "bad format '" + fs + "'");
                    p.formats = {f};
                } else if (parse_scalar_type(fs, t)) {
                    p.element_type = t;
                }
            }
        }
        if (pj.value("state", std::string("required")) == "optional")
            p.state = ParamState::Optional;
        p.name = pj.value("name", std::string());
        params.push_back(std::move(p));
    }
    return KernelSignature(std::move(params));
}

AbstractionPtr custom_kernel_from_json(const json& j) {
    std::string name = j.at("name").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    KernelSignature sig = signature_from_json(j.at("signature"));

    if (kind == "point") {
        PointKernel pk;
        pk.arity = sig.input_count();
        if (j.contains("bodies")) {
            for (const json& bj : j.at("bodies"))
                pk.outputs.push_back(PointOutput{{expr_from_json(bj)}});
        } else {
            pk.outputs.push_back(PointOutput{{expr_from_json(j.at("body"))}});
        }
        return make_point_kernel(std::move(name), std::move(sig), std::move(pk));
    }
    if (kind == "local") {
        LocalKernel lk;
        const json& wj = j.at("window");
        lk.window_w = wj.at(0).get<int>();
        lk.window_h = wj.at(1).get<int>();
        std::string boundary = j.value("boundary", std::string("clamp"));
        if (boundary == "clamp")
            lk.boundary = BoundaryMode::Clamp;
        else if (boundary == "undefined")
            lk.boundary = BoundaryMode::Undefined;
        else if (boundary == "constant") {
            lk.boundary = BoundaryMode::Constant;
            lk.boundary_value = Value::of_int(j.value("boundary_value", 0));
        } else {
            throw Error(ErrorCode::SchemaError, "bad boundary mode '" + boundary + "'");
        }
        std::string combine = j.value("combine", std::string("sum"));
        if (combine == "sum")
            lk.combine = CombineMode::Sum;
        else if (combine == "min")
            lk.combine = CombineMode::Min;
        else if (combine == "max")
            lk.combine = CombineMode::Max;
        else
            throw Error(ErrorCode::SchemaError, "bad combine mode '" + combine + "'");
        if (j.contains("mask")) {
            lk.mask_is_real = false;
            for (const json& mv : j.at("mask")) {
                if (mv.is_number_float()) lk.mask_is_real = true;
            }
            for (const json& mv : j.at("mask"))
                lk.mask.push_back(lk.mask_is_real ? Value::of_real(mv.get<double>())
                                                  : Value::of_int(mv.get<std::int64_t>()));
        }
        lk.tap_body = expr_from_json(j.at("tap_body"));
        if (j.contains("post_body")) lk.post_body = expr_from_json(j.at("post_body"));
        return make_local_kernel(std::move(name), std::move(sig), std::move(lk));
    }
    throw Error(ErrorCode::SchemaError, "custom kernels must be point or local, got '" + kind +
                                            "'");
}

AttrMap attrs_from_json(const json& j) {
    AttrMap attrs;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const json& v = it.value();
        if (v.is_string())
            attrs[it.key()] = v.get<std::string>();
        else if (v.is_number_float())
            attrs[it.key()] = v.get<double>();
        else if (v.is_number_integer() || v.is_number_unsigned())
            attrs[it.key()] = v.get<std::int64_t>();
        else
            throw Error(ErrorCode::SchemaError, "attribute '" + it.key() + "' must be scalar");
    }
    return attrs;
}

} // namespace

ExprPtr expr_from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::SchemaError, "bad expression JSON");
    return expr_from_json(j);
}

std::string expr_to_json_text(const ExprPtr& e) { return expr_to_json(*e).dump(); }

LoadedGraph load_graph_json(const std::string& text, const std::string& name_hint) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
        throw Error(ErrorCode::SchemaError, "graph file is not valid JSON");
    if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "graph file must be an object");

    LoadedGraph lg;
    lg.ctx = std::make_unique<Context>();
    lg.name = doc.value("name", name_hint);

    // custom kernels extend a copy of the built-in registry
    if (doc.contains("custom_kernels") && !doc.at("custom_kernels").empty()) {
        auto reg = std::make_shared<KernelRegistry>(KernelRegistry::builtin().clone());
        for (const json& kj : doc.at("custom_kernels")) reg->add_custom(custom_kernel_from_json(kj));
        lg.ctx->set_registry(reg);
        lg.custom_kernels_json = doc.at("custom_kernels").dump();
    }

    AppGraph& g = lg.ctx->create_graph(GraphPhase::Application);
    lg.graph = &g;

    auto declare = [&](const std::string& name, ObjectId id) {
        if (!lg.objects.emplace(name, id).second)
            throw Error(ErrorCode::SchemaError, "duplicate object name '" + name + "'");
    };

    for (const json& ij : doc.value("images", json::array())) {
        std::string name = ij.at("name").get<std::string>();
        bool is_virtual = ij.value("virtual", false);
        if (is_virtual) {
            DataObject& obj = lg.ctx->create_virtual_image(g, name);
            // virtual images may still declare dimensions ahead of
            // verification (scale targets)
            obj.width = ij.value("width", 0);
            obj.height = ij.value("height", 0);
            if (ij.contains("format")) {
                ImageFormat f;
                if (!parse_image_format(ij.at("format").get<std::string>(), f))
                    throw Error(ErrorCode::SchemaError, "bad image format");
                obj.format = f;
            }
            declare(name, obj.id);
        } else {
            ImageFormat f;
            if (!parse_image_format(ij.at("format").get<std::string>(), f))
                throw Error(ErrorCode::SchemaError, "bad image format");
            DataObject& obj =
                lg.ctx->create_image(ij.at("width").get<int>(), ij.at("height").get<int>(), f,
                                     name);
            g.note_data(obj.id);
            declare(name, obj.id);
        }
    }

    for (const json& sj : doc.value("scalars", json::array())) {
        std::string name = sj.at("name").get<std::string>();
        ScalarType t;
        if (!parse_scalar_type(sj.value("format", std::string("S32")), t))
            throw Error(ErrorCode::SchemaError, "bad scalar format");
        if (sj.value("virtual", false))
            throw Error(ErrorCode::SchemaError, "scalars cannot be virtual");
        std::optional<Value> v;
        if (sj.contains("value")) v = value_from_json(sj.at("value"), t);
        DataObject& obj = lg.ctx->create_scalar(t, v, name);
        g.note_data(obj.id);
        declare(name, obj.id);
    }

    for (const json& mj : doc.value("matrices", json::array())) {
        std::string name = mj.at("name").get<std::string>();
        ScalarType t;
        if (!parse_scalar_type(mj.value("format", std::string("S32")), t))
            throw Error(ErrorCode::SchemaError, "bad matrix format");
        std::vector<Value> values;
        for (const json& vj : mj.value("values", json::array()))
            values.push_back(value_from_json(vj, t));
        DataObject& obj = lg.ctx->create_matrix(t, mj.at("rows").get<int>(),
                                                mj.at("cols").get<int>(), std::move(values), name);
        g.note_data(obj.id);
        declare(name, obj.id);
    }

    for (const json& aj : doc.value("arrays", json::array())) {
        std::string name = aj.at("name").get<std::string>();
        ScalarType t;
        if (!parse_scalar_type(aj.value("format", std::string("S32")), t))
            throw Error(ErrorCode::SchemaError, "bad array format");
        DataObject& obj =
            lg.ctx->create_array(t, aj.value("capacity", std::int64_t{0}), name);
        g.note_data(obj.id);
        declare(name, obj.id);
    }

    const KernelRegistry& reg = lg.ctx->registry();
    for (const json& nj : doc.value("nodes", json::array())) {
        std::string kernel = nj.at("kernel").get<std::string>();
        OperatorNode node;
        node.kernel = kernel;
        if (nj.contains("attrs")) node.attrs = attrs_from_json(nj.at("attrs"));

        const KernelEntry* entry = reg.find(kernel);
        const json& params = nj.value("params", json::array());
        for (std::size_t i = 0; i < params.size(); ++i) {
            const json& pj = params[i];
            if (pj.is_null()) continue; // unbound optional parameter
            std::string pname = pj.get<std::string>();
            if (pname.empty()) continue;
            Binding b;
            b.param = static_cast<int>(i);
            b.object = lg.object(pname);
            // resolve direction from the signature when known; unknown
            // kernels surface as verifier diagnostics
            b.direction = Direction::Input;
            if (entry && i < entry->signature.params.size())
                b.direction = entry->signature.params[i].direction;
            node.bindings.push_back(b);
        }
        g.add_node_unchecked(std::move(node));
    }

    for (const json& oj : doc.value("outputs", json::array()))
        lg.declared_outputs.push_back(lg.object(oj.get<std::string>()));

    return lg;
}

LoadedGraph load_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string base = path;
    std::size_t slash = base.find_last_of('/');
    if (slash != std::string::npos) base = base.substr(slash + 1);
    std::size_t dot = base.find_last_of('.');
    if (dot != std::string::npos) base = base.substr(0, dot);
    return load_graph_json(ss.str(), base);
}

std::string save_graph_json(const LoadedGraph& lg) {
    const Context& ctx = *lg.ctx;
    const AppGraph& g = *lg.graph;
    json doc;
    doc["name"] = lg.name;

    std::map<ObjectId, std::string> names;
    for (const auto& [name, id] : lg.objects) names[id] = name;
    auto name_of = [&](ObjectId id) {
        auto it = names.find(id);
        return it == names.end() ? "obj" + std::to_string(id) : it->second;
    };

    json images = json::array(), scalars = json::array(), matrices = json::array(),
         arrays = json::array();
    for (ObjectId id : g.data()) {
        const DataObject* obj = ctx.find(id);
        if (!obj) continue;
        json j;
        j["name"] = name_of(id);
        switch (obj->kind) {
        case ObjKind::Image:
            if (obj->is_virtual) {
                j["virtual"] = true;
                if (obj->width > 0) j["width"] = obj->width;
                if (obj->height > 0) j["height"] = obj->height;
                if (obj->format != ImageFormat::UNRESOLVED) j["format"] = to_string(obj->format);
            } else {
                j["width"] = obj->width;
                j["height"] = obj->height;
                j["format"] = to_string(obj->format);
            }
            images.push_back(j);
            break;
        case ObjKind::Scalar:
            j["format"] = to_string(obj->element_type);
            if (obj->scalar_value) {
                if (obj->scalar_value->real)
                    j["value"] = obj->scalar_value->f;
                else
                    j["value"] = obj->scalar_value->i;
            }
            scalars.push_back(j);
            break;
        case ObjKind::Matrix: {
            j["format"] = to_string(obj->element_type);
            j["rows"] = obj->rows;
            j["cols"] = obj->cols;
            json vals = json::array();
            for (const Value& v : obj->matrix_values) {
                if (v.real)
                    vals.push_back(v.f);
                else
                    vals.push_back(v.i);
            }
            j["values"] = vals;
            matrices.push_back(j);
            break;
        }
        case ObjKind::Array:
            j["format"] = to_string(obj->element_type);
            j["capacity"] = obj->capacity;
            arrays.push_back(j);
            break;
        }
    }
    doc["images"] = images;
    if (!scalars.empty()) doc["scalars"] = scalars;
    if (!matrices.empty()) doc["matrices"] = matrices;
    if (!arrays.empty()) doc["arrays"] = arrays;

    json nodes = json::array();
    for (const OperatorNode& n : g.nodes()) {
        json j;
        j["kernel"] = n.kernel;
        json params = json::array();
        int max_param = -1;
        for (const Binding& b : n.bindings) max_param = std::max(max_param, b.param);
        for (int i = 0; i <= max_param; ++i) {
            const Binding* b = n.binding_for(i);
            if (b)
                params.push_back(name_of(b->object));
            else
                params.push_back(nullptr);
        }
        j["params"] = params;
        if (!n.attrs.empty()) {
            json attrs;
            for (const auto& [key, value] : n.attrs) {
                if (const auto* s = std::get_if<std::string>(&value))
                    attrs[key] = *s;
                else if (const auto* d = std::get_if<double>(&value))
                    attrs[key] = *d;
                else
                    attrs[key] = std::get<std::int64_t>(value);
            }
            j["attrs"] = attrs;
        }
        nodes.push_back(j);
    }
    doc["nodes"] = nodes;

    json outputs = json::array();
    for (ObjectId id : lg.declared_outputs) outputs.push_back(name_of(id));
    doc["outputs"] = outputs;

    if (!lg.custom_kernels_json.empty())
        doc["custom_kernels"] = json::parse(lg.custom_kernels_json);

    return doc.dump(2) + "\n";
}

} // namespace gvx
