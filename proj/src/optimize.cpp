#include "graphvx/optimize.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace gvx {

std::vector<ObjectId> FilteredGraph::alive_nodes() const {
    std::vector<ObjectId> out;
    for (ObjectId id : base_.graph().topo_sort())
        if (alive_.count(id)) out.push_back(id);
    return out;
}

std::vector<ObjectId> FilteredGraph::alive_data() const {
    std::vector<ObjectId> out;
    for (ObjectId id : base_.graph().data())
        if (alive_.count(id)) out.push_back(id);
    return out;
}

std::vector<std::pair<ObjectId, ObjectId>> FilteredGraph::edges() const {
    std::vector<std::pair<ObjectId, ObjectId>> out;
    for (const auto& e : base_.graph().edges())
        if (alive_.count(e.first) && alive_.count(e.second)) out.push_back(e);
    return out;
}

// ------------------------------------------------------------------- DCE

FilteredGraph eliminate_dead_nodes(const VerifiedGraph& vg) {
    if (!vg.stamped())
        throw Error(ErrorCode::UnstampedGraph, "dead-computation elimination needs a stamp");
    const AppGraph& g = vg.graph();
    Context& ctx = vg.context();

    // Candidate non-virtual roots and leaves. Data nodes with both in- and
    // out-edges join both sets; D_in is kept although only the leaves seed
    // the visits, matching the published procedure.
    std::set<ObjectId> d_in, d_out;
    for (ObjectId id : g.data()) {
        const DataObject* obj = ctx.find(id);
        if (!obj || obj->is_virtual) continue;
        const bool has_producer = g.producer(id) != kInvalidId;
        const bool has_consumer = !g.consumers(id).empty();
        if (!has_producer)
            d_in.insert(id);
        else if (!has_consumer)
            d_out.insert(id);
        else {
            d_in.insert(id);
            d_out.insert(id);
        }
    }

    // Transposed adjacency over V = D u N.
    std::map<ObjectId, std::vector<ObjectId>> trans;
    for (const auto& [from, to] : g.edges()) trans[to].push_back(from);
    for (auto& [id, list] : trans) std::sort(list.begin(), list.end());

    std::set<ObjectId> alive;
    std::set<ObjectId> expanded;

    // Iterative depth-first visit on the transposed graph. Stops at input
    // data nodes (except the visit root, which is allowed to expand) and at
    // vertices some earlier visit already expanded.
    auto depth_first_visit = [&](ObjectId start) {
        std::vector<ObjectId> stack{start};
        while (!stack.empty()) {
            ObjectId v = stack.back();
            stack.pop_back();
            alive.insert(v);
            if (v != start && d_in.count(v)) continue;
            if (!expanded.insert(v).second) continue;
            auto it = trans.find(v);
            if (it == trans.end()) continue;
            for (ObjectId pred : it->second) stack.push_back(pred);
        }
    };

    for (ObjectId v_start : d_out) depth_first_visit(v_start);

    return FilteredGraph(vg, std::move(alive));
}

// -------------------------------------------------------------- transfers

TransferPlan plan_transfers(const FilteredGraph& fg) {
    const AppGraph& g = fg.base().graph();
    Context& ctx = fg.base().context();

    std::vector<ObjectId> nodes = fg.alive_nodes();
    TransferPlan plan;
    plan.naive_count = static_cast<int>(nodes.size()) * 2;

    // Union alive operator nodes connected through virtual data.
    std::map<ObjectId, ObjectId> parent;
    std::function<ObjectId(ObjectId)> find_root = [&](ObjectId x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (ObjectId n : nodes) parent[n] = n;
    auto unite = [&](ObjectId a, ObjectId b) {
        a = find_root(a);
        b = find_root(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    for (ObjectId data : fg.alive_data()) {
        const DataObject* obj = ctx.find(data);
        if (!obj || !obj->is_virtual) continue;
        ObjectId producer = g.producer(data);
        if (producer == kInvalidId || !fg.is_alive(producer)) continue;
        for (ObjectId consumer : g.consumers(data))
            if (fg.is_alive(consumer)) unite(producer, consumer);
    }

    // Stable segment numbering in topo order.
    std::map<ObjectId, int> segment_of_root;
    for (ObjectId n : nodes) {
        ObjectId root = find_root(n);
        auto it = segment_of_root.find(root);
        int seg = it == segment_of_root.end()
                      ? (segment_of_root[root] = static_cast<int>(segment_of_root.size()))
                      : it->second;
        plan.node_segment[n] = seg;
    }
    plan.segment_count = static_cast<int>(segment_of_root.size());

    // Boundary transfers at non-virtual data.
    std::set<std::tuple<int, int, ObjectId>> ordered; // (segment, dir, data)
    for (ObjectId data : fg.alive_data()) {
        const DataObject* obj = ctx.find(data);
        if (!obj || obj->is_virtual) continue;
        ObjectId producer = g.producer(data);
        if (producer != kInvalidId && fg.is_alive(producer))
            ordered.emplace(plan.node_segment[producer], 1, data);
        std::set<int> consumer_segments;
        for (ObjectId consumer : g.consumers(data))
            if (fg.is_alive(consumer)) consumer_segments.insert(plan.node_segment[consumer]);
        for (int seg : consumer_segments) ordered.emplace(seg, 0, data);
    }
    for (const auto& [seg, dir, data] : ordered)
        plan.transfers.push_back(
            Transfer{dir == 0 ? TransferDir::HostToDevice : TransferDir::DeviceToHost, data, seg});

    return plan;
}

// ------------------------------------------------------------------ fuse

namespace {

struct WorkNode {
    ObjectId id;
    AbstractionPtr kernel;
    std::vector<ObjectId> inputs;            // bound objects per input param
    std::vector<ObjectId> outputs;           // bound objects per output param
    std::vector<ObjectId> members;           // original node ids, topo order
    ObjectId provenance = kInvalidId;
    std::string label;
};

ObjKind kind_of(const Context& ctx, ObjectId id) { return ctx.at(id).kind; }

/// Rewrites InputPixel/ArrayAt indices via `map`; entries of -1 mean "replace
/// with subst body for that input" (per channel where the producer writes
/// multiple channels).
ExprPtr remap_expr(const ExprPtr& e, const std::vector<int>& map,
                   const std::vector<ExprPtr>* subst_channels, bool to_window) {
    if (!e) return e;
    switch (e->op) {
    case ExprOp::InputPixel: {
        int m = map[static_cast<std::size_t>(e->input)];
        if (m < 0) {
            const std::vector<ExprPtr>& bodies = *subst_channels;
            std::size_t ch = 0;
            if (bodies.size() == 3) {
                // producer writes RGB; pick the channel this read asks for
                if (e->channel == Channel::G) ch = 1;
                if (e->channel == Channel::B) ch = 2;
            }
            return bodies[ch];
        }
        Expr copy = *e;
        copy.input = m;
        return std::make_shared<const Expr>(std::move(copy));
    }
    case ExprOp::WindowPixel: {
        Expr copy = *e;
        copy.input = map[static_cast<std::size_t>(e->input)];
        return std::make_shared<const Expr>(std::move(copy));
    }
    case ExprOp::ArrayAt: {
        Expr copy = *e;
        copy.input = map[static_cast<std::size_t>(e->input)];
        copy.a = remap_expr(e->a, map, subst_channels, to_window);
        return std::make_shared<const Expr>(std::move(copy));
    }
    default: {
        if (!e->a && !e->b && !e->c) return e;
        Expr copy = *e;
        copy.a = remap_expr(e->a, map, subst_channels, to_window);
        copy.b = remap_expr(e->b, map, subst_channels, to_window);
        copy.c = remap_expr(e->c, map, subst_channels, to_window);
        return std::make_shared<const Expr>(std::move(copy));
    }
    }
}

/// Turns a point body into window form: image reads become window reads at
/// (dx, dy); scalar and array reads stay pointwise.
ExprPtr to_window_form(const ExprPtr& e, const std::vector<int>& map,
                       const std::vector<bool>& is_image, int dx, int dy) {
    if (!e) return e;
    switch (e->op) {
    case ExprOp::InputPixel: {
        int m = map[static_cast<std::size_t>(e->input)];
        if (is_image[static_cast<std::size_t>(e->input)])
            return window_pixel(m, dx, dy, e->channel);
        Expr copy = *e;
        copy.input = m;
        return std::make_shared<const Expr>(std::move(copy));
    }
    case ExprOp::ArrayAt: {
        Expr copy = *e;
        copy.input = map[static_cast<std::size_t>(e->input)];
        copy.a = to_window_form(e->a, map, is_image, dx, dy);
        return std::make_shared<const Expr>(std::move(copy));
    }
    default: {
        if (!e->a && !e->b && !e->c) return e;
        Expr copy = *e;
        copy.a = to_window_form(e->a, map, is_image, dx, dy);
        copy.b = to_window_form(e->b, map, is_image, dx, dy);
        copy.c = to_window_form(e->c, map, is_image, dx, dy);
        return std::make_shared<const Expr>(std::move(copy));
    }
    }
}

KernelSignature merged_signature(const Context& ctx, const std::vector<ObjectId>& inputs,
                                 const AbstractionKernel& sink, ImageFormat out_fmt) {
    std::vector<SignatureParam> params;
    for (ObjectId id : inputs) {
        SignatureParam p;
        p.direction = Direction::Input;
        p.kind = kind_of(ctx, id);
        p.element_type = ctx.at(id).element_type;
        p.name = "in" + std::to_string(params.size());
        params.push_back(p);
    }
    int oi = 0;
    for (const SignatureParam& sp : sink.signature.params) {
        if (sp.direction != Direction::Output) continue;
        SignatureParam p = sp;
        p.name = "out" + std::to_string(oi++);
        if (p.kind == ObjKind::Image && out_fmt != ImageFormat::UNRESOLVED)
            p.formats = {out_fmt};
        params.push_back(p);
    }
    return KernelSignature(std::move(params));
}

class Fuser {
public:
    Fuser(const FilteredGraph& fg, Context& ctx) : fg_(fg), ctx_(ctx) {}

    FusionResult run();

private:
    const FilteredGraph& fg_;
    Context& ctx_;
    std::vector<WorkNode> work_;

    int single_consumer(ObjectId data, int exclude) const;
    bool try_fuse();
    void merge_point_point(int u, int w, ObjectId via);
    void merge_local_point(int u, int w, ObjectId via);
    void merge_point_local(int u, int w, ObjectId via);
};

int Fuser::single_consumer(ObjectId data, int exclude) const {
    int found = -1;
    for (std::size_t i = 0; i < work_.size(); ++i) {
        if (static_cast<int>(i) == exclude) continue;
        for (ObjectId in : work_[i].inputs) {
            if (in != data) continue;
            if (found != -1 && found != static_cast<int>(i)) return -1;
            found = static_cast<int>(i);
        }
    }
    return found;
}

bool Fuser::try_fuse() {
    for (std::size_t ui = 0; ui < work_.size(); ++ui) {
        const WorkNode& u = work_[ui];
        if (!u.kernel) continue;
        AbstractionKind uk = u.kernel->kind;
        if (uk != AbstractionKind::Point && uk != AbstractionKind::Local) continue;
        if (u.outputs.size() != 1) continue; // multi-output producers stay
        ObjectId via = u.outputs[0];
        const DataObject* obj = ctx_.find(via);
        if (!obj || !obj->is_virtual) continue; // only across virtual data
        int wi = single_consumer(via, static_cast<int>(ui));
        if (wi < 0) continue;
        const WorkNode& w = work_[static_cast<std::size_t>(wi)];
        AbstractionKind wk = w.kernel->kind;

        if (uk == AbstractionKind::Point && wk == AbstractionKind::Point) {
            merge_point_point(static_cast<int>(ui), wi, via);
            return true;
        }
        if (uk == AbstractionKind::Local && wk == AbstractionKind::Point &&
            w.outputs.size() == 1 && w.kernel->point().outputs.size() == 1 &&
            w.kernel->point().outputs[0].channel_bodies.size() == 1) {
            merge_local_point(static_cast<int>(ui), wi, via);
            return true;
        }
        if (uk == AbstractionKind::Point && wk == AbstractionKind::Local &&
            !w.inputs.empty() && w.inputs[0] == via &&
            u.kernel->point().outputs.size() == 1 &&
            u.kernel->point().outputs[0].channel_bodies.size() == 1) {
            merge_point_local(static_cast<int>(ui), wi, via);
            return true;
        }
    }
    return false;
}

// point -> point: substitute the producer body at every read of `via`.
void Fuser::merge_point_point(int ui, int wi, ObjectId via) {
    WorkNode u = work_[static_cast<std::size_t>(ui)];
    WorkNode w = work_[static_cast<std::size_t>(wi)];

    std::vector<ObjectId> inputs;
    std::vector<int> w_map(w.inputs.size());
    for (std::size_t j = 0; j < w.inputs.size(); ++j) {
        if (w.inputs[j] == via) {
            w_map[j] = -1;
        } else {
            w_map[j] = static_cast<int>(inputs.size());
            inputs.push_back(w.inputs[j]);
        }
    }
    std::vector<int> u_map(u.inputs.size());
    for (std::size_t i = 0; i < u.inputs.size(); ++i) {
        u_map[i] = static_cast<int>(inputs.size());
        inputs.push_back(u.inputs[i]);
    }

    // producer bodies rewritten into the merged input space
    std::vector<ExprPtr> subst;
    for (const ExprPtr& body : u.kernel->point().outputs[0].channel_bodies)
        subst.push_back(remap_expr(body, u_map, nullptr, false));

    PointKernel merged;
    merged.arity = static_cast<int>(inputs.size());
    for (const PointOutput& out : w.kernel->point().outputs) {
        PointOutput po;
        for (const ExprPtr& body : out.channel_bodies)
            po.channel_bodies.push_back(remap_expr(body, w_map, &subst, false));
        merged.outputs.push_back(std::move(po));
    }

    ImageFormat out_fmt = fg_.base().resolved().count(w.outputs[0])
                              ? fg_.base().desc(w.outputs[0]).format
                              : ImageFormat::UNRESOLVED;
    WorkNode m;
    m.id = ctx_.allocate_id();
    m.kernel = make_point_kernel(u.label + "+" + w.label,
                                 merged_signature(ctx_, inputs, *w.kernel, out_fmt),
                                 std::move(merged));
    m.inputs = std::move(inputs);
    m.outputs = w.outputs;
    m.members = u.members;
    m.members.insert(m.members.end(), w.members.begin(), w.members.end());
    m.provenance = w.provenance;
    m.label = u.label + "+" + w.label;

    std::size_t lo = std::min<std::size_t>(ui, wi);
    std::size_t hi = std::max<std::size_t>(ui, wi);
    work_.erase(work_.begin() + static_cast<std::ptrdiff_t>(hi));
    work_[lo] = std::move(m);
}

// local -> point: the point body becomes (part of) the post body.
void Fuser::merge_local_point(int ui, int wi, ObjectId via) {
    WorkNode u = work_[static_cast<std::size_t>(ui)];
    WorkNode w = work_[static_cast<std::size_t>(wi)];
    const LocalKernel& ul = u.kernel->local();

    // merged inputs: the local's own inputs keep their slots, the point's
    // other inputs append as pointwise reads
    std::vector<ObjectId> inputs = u.inputs;
    std::vector<int> w_map(w.inputs.size());
    for (std::size_t j = 0; j < w.inputs.size(); ++j) {
        if (w.inputs[j] == via) {
            w_map[j] = -1;
        } else {
            w_map[j] = static_cast<int>(inputs.size());
            inputs.push_back(w.inputs[j]);
        }
    }

    // the producer's post body (or the raw combined value) substitutes reads
    // of `via` inside the point body
    ExprPtr prior = ul.post_body ? ul.post_body : input_pixel(0);
    std::vector<ExprPtr> subst{prior};

    LocalKernel merged = ul;
    merged.post_body =
        remap_expr(w.kernel->point().outputs[0].channel_bodies[0], w_map, &subst, false);
    merged.point_arity = static_cast<int>(inputs.size()) - static_cast<int>(u.inputs.size()) +
                         ul.point_arity;

    ImageFormat out_fmt = fg_.base().resolved().count(w.outputs[0])
                              ? fg_.base().desc(w.outputs[0]).format
                              : ImageFormat::UNRESOLVED;
    WorkNode m;
    m.id = ctx_.allocate_id();
    m.kernel = make_local_kernel(u.label + "+" + w.label,
                                 merged_signature(ctx_, inputs, *w.kernel, out_fmt),
                                 std::move(merged));
    m.inputs = std::move(inputs);
    m.outputs = w.outputs;
    m.members = u.members;
    m.members.insert(m.members.end(), w.members.begin(), w.members.end());
    m.provenance = w.provenance;
    m.label = u.label + "+" + w.label;

    std::size_t lo = std::min<std::size_t>(ui, wi);
    std::size_t hi = std::max<std::size_t>(ui, wi);
    work_.erase(work_.begin() + static_cast<std::ptrdiff_t>(hi));
    work_[lo] = std::move(m);
}

// point -> local: inline the point body at every window tap of input 0.
void Fuser::merge_point_local(int ui, int wi, ObjectId) {
    WorkNode u = work_[static_cast<std::size_t>(ui)];
    WorkNode w = work_[static_cast<std::size_t>(wi)];
    const LocalKernel& wl = w.kernel->local();

    // merged inputs: the point's inputs take over slot 0.., the local's
    // remaining inputs follow
    std::vector<ObjectId> inputs = u.inputs;
    std::vector<int> u_map(u.inputs.size());
    std::vector<bool> u_is_image(u.inputs.size());
    for (std::size_t i = 0; i < u.inputs.size(); ++i) {
        u_map[i] = static_cast<int>(i);
        u_is_image[i] = kind_of(ctx_, u.inputs[i]) == ObjKind::Image;
    }
    std::vector<int> w_map(w.inputs.size());
    w_map[0] = -1; // window input replaced by the point's inputs
    for (std::size_t j = 1; j < w.inputs.size(); ++j) {
        w_map[j] = static_cast<int>(inputs.size());
        inputs.push_back(w.inputs[j]);
    }

    const ExprPtr& point_body = u.kernel->point().outputs[0].channel_bodies[0];

    // every WindowPixel(0, dx, dy) becomes the point body read at (dx, dy)
    LocalKernel merged = wl;
    std::function<ExprPtr(const ExprPtr&)> rewrite_tap = [&](const ExprPtr& e) -> ExprPtr {
        if (!e) return e;
        if (e->op == ExprOp::WindowPixel) {
            if (w_map[static_cast<std::size_t>(e->input)] == -1)
                return to_window_form(point_body, u_map, u_is_image, e->dx, e->dy);
            Expr copy = *e;
            copy.input = w_map[static_cast<std::size_t>(e->input)];
            return std::make_shared<const Expr>(std::move(copy));
        }
        if (e->op == ExprOp::InputPixel || e->op == ExprOp::ArrayAt) {
            Expr copy = *e;
            copy.input = w_map[static_cast<std::size_t>(e->input)];
            if (e->op == ExprOp::ArrayAt) copy.a = rewrite_tap(e->a);
            return std::make_shared<const Expr>(std::move(copy));
        }
        if (!e->a && !e->b && !e->c) return e;
        Expr copy = *e;
        copy.a = rewrite_tap(e->a);
        copy.b = rewrite_tap(e->b);
        copy.c = rewrite_tap(e->c);
        return std::make_shared<const Expr>(std::move(copy));
    };
    merged.tap_body = rewrite_tap(wl.tap_body);
    if (wl.post_body) {
        // combined value keeps slot 0; other pointwise inputs remap
        std::vector<int> post_map(w.inputs.size());
        post_map[0] = 0;
        for (std::size_t j = 1; j < w.inputs.size(); ++j) post_map[j] = w_map[j];
        merged.post_body = remap_expr(wl.post_body, post_map, nullptr, false);
    }

    ImageFormat out_fmt = fg_.base().resolved().count(w.outputs[0])
                              ? fg_.base().desc(w.outputs[0]).format
                              : ImageFormat::UNRESOLVED;
    WorkNode m;
    m.id = ctx_.allocate_id();
    m.kernel = make_local_kernel(u.label + "+" + w.label,
                                 merged_signature(ctx_, inputs, *w.kernel, out_fmt),
                                 std::move(merged));
    m.inputs = std::move(inputs);
    m.outputs = w.outputs;
    m.members = u.members;
    m.members.insert(m.members.end(), w.members.begin(), w.members.end());
    m.provenance = w.provenance;
    m.label = u.label + "+" + w.label;

    std::size_t lo = std::min<std::size_t>(ui, wi);
    std::size_t hi = std::max<std::size_t>(ui, wi);
    work_.erase(work_.begin() + static_cast<std::ptrdiff_t>(hi));
    work_[lo] = std::move(m);
}

FusionResult Fuser::run() {
    const AppGraph& g = fg_.base().graph();
    for (ObjectId nid : fg_.alive_nodes()) {
        const OperatorNode* n = g.node(nid);
        WorkNode wn;
        wn.id = nid;
        wn.kernel = n->abstraction;
        wn.members = {nid};
        wn.provenance = n->provenance;
        wn.label = n->label.empty() ? n->kernel : n->label;
        for (std::size_t i = 0; i < n->abstraction->signature.params.size(); ++i) {
            const Binding* b = n->binding_for(static_cast<int>(i));
            if (n->abstraction->signature.params[i].direction == Direction::Input)
                wn.inputs.push_back(b ? b->object : kInvalidId);
            else
                wn.outputs.push_back(b ? b->object : kInvalidId);
        }
        work_.push_back(std::move(wn));
    }

    while (try_fuse()) {
    }

    FusionResult result;
    AppGraph& fused = ctx_.create_graph(GraphPhase::Implementation);
    result.fused = &fused;
    for (WorkNode& wn : work_) {
        // rebuild the argument list in signature order
        std::vector<ObjectId> args;
        std::size_t ii = 0, oi = 0;
        for (const SignatureParam& p : wn.kernel->signature.params)
            args.push_back(p.direction == Direction::Input ? wn.inputs[ii++]
                                                           : wn.outputs[oi++]);
        OperatorNode& node =
            fused.add_abstraction_node(wn.kernel, args, wn.provenance, wn.label);
        if (wn.members.size() >= 2) {
            FusedKernel fk;
            fk.members = wn.members;
            fk.merged = wn.kernel;
            fk.fused_node = node.id;
            result.groups.push_back(std::move(fk));
        }
    }
    return result;
}

} // namespace

FusionResult fuse(const FilteredGraph& g, Context& ctx) { return Fuser(g, ctx).run(); }

OptimizedPlan optimize(const VerifiedGraph& g, Context& ctx, const OptimizeOptions& opt) {
    OptimizedPlan plan;
    plan.base = g;
    plan.stats.nodes_before = static_cast<int>(g.graph().nodes().size());

    if (opt.dce) {
        plan.filtered = eliminate_dead_nodes(g);
    } else {
        std::set<ObjectId> all;
        for (const OperatorNode& n : g.graph().nodes()) all.insert(n.id);
        for (ObjectId d : g.graph().data()) all.insert(d);
        plan.filtered = FilteredGraph(g, std::move(all));
    }
    plan.stats.nodes_alive = static_cast<int>(plan.filtered.alive_nodes().size());
    plan.stats.nodes_removed = plan.stats.nodes_before - plan.stats.nodes_alive;
    plan.stats.launches_before = plan.stats.nodes_alive;

    plan.transfers = plan_transfers(plan.filtered);
    plan.stats.transfers_naive = plan.transfers.naive_count;
    plan.stats.transfers_optimized = plan.transfers.optimized_count();

    FusionResult fr;
    if (opt.fusion) {
        fr = fuse(plan.filtered, ctx);
    } else {
        // rebuild the alive view as a graph without applying any rule
        AppGraph& fused = ctx.create_graph(GraphPhase::Implementation);
        const AppGraph& src = g.graph();
        for (ObjectId nid : plan.filtered.alive_nodes()) {
            OperatorNode copy = *src.node(nid);
            copy.id = kInvalidId;
            fused.add_node_unchecked(std::move(copy));
        }
        fr.fused = &fused;
    }
    plan.groups = fr.groups;
    plan.stats.fused_groups = static_cast<int>(fr.groups.size());
    plan.stats.launches_after = static_cast<int>(fr.fused->nodes().size());

    VerifyResult vr = verify(*fr.fused);
    if (!vr.ok()) {
        std::string msg = "fused graph failed verification:";
        for (const Diagnostic& d : vr.diagnostics) msg += "\n  " + d.render();
        throw Error(ErrorCode::BadKernel, msg);
    }
    plan.fused = std::move(vr.verified);
    return plan;
}

} // namespace gvx
