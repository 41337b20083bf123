#include "graphvx/verify.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace gvx {

const char* to_string(DiagCode c) {
    switch (c) {
    case DiagCode::CycleDetected: return "CycleDetected";
    case DiagCode::NotBipartite: return "NotBipartite";
    case DiagCode::UnboundParam: return "UnboundParam";
    case DiagCode::DirectionMismatch: return "DirectionMismatch";
    case DiagCode::FormatMismatch: return "FormatMismatch";
    case DiagCode::MultipleWriters: return "MultipleWriters";
    case DiagCode::UnresolvedVirtualFormat: return "UnresolvedVirtualFormat";
    case DiagCode::UnknownKernel: return "UnknownKernel";
    }
    return "?";
}

std::string Diagnostic::render() const {
    std::ostringstream os;
    os << to_string(code) << " object#";
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        if (i) os << ",";
        os << subjects[i];
    }
    os << ": " << message;
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Diagnostic& d) { return os << d.render(); }

const ResolvedDesc& VerifiedGraph::desc(ObjectId id) const {
    auto it = resolved_.find(id);
    if (it == resolved_.end())
        throw Error(ErrorCode::UnknownObject, "object #" + std::to_string(id) + " not resolved",
                    id);
    return it->second;
}

struct VerifyAccess {
    static void fill(VerifiedGraph& vg, std::shared_ptr<const AppGraph> graph, Context* ctx,
                     std::map<ObjectId, ResolvedDesc> resolved,
                     std::map<ObjectId, std::vector<ScalarType>> node_types, bool stamp) {
        static std::atomic<std::uint64_t> counter{1};
        vg.graph_ = std::move(graph);
        vg.ctx_ = ctx;
        vg.resolved_ = std::move(resolved);
        vg.node_types_ = std::move(node_types);
        vg.stamp_ = stamp ? counter.fetch_add(1) : 0;
    }
};

namespace {

class Verifier {
public:
    explicit Verifier(const AppGraph& g) : g_(g), ctx_(g.context()), reg_(ctx_.registry()) {}

    VerifyResult run();

private:
    const AppGraph& g_;
    Context& ctx_;
    const KernelRegistry& reg_;
    std::vector<Diagnostic> diags_;
    std::map<ObjectId, ResolvedDesc> resolved_;
    std::map<ObjectId, std::vector<ScalarType>> node_types_;

    void report(DiagCode code, std::vector<ObjectId> subjects, std::string msg) {
        diags_.push_back(Diagnostic{code, std::move(subjects), std::move(msg)});
    }

    bool is_node_id(ObjectId id) const { return g_.node(id) != nullptr; }

    void check_structure();
    void check_node_params(const OperatorNode& n);
    const KernelSignature* signature_of(const OperatorNode& n);
    bool propagate();
    bool infer_node(const OperatorNode& n);
    void assign_output(const OperatorNode& n, ObjectId out_id, const ResolvedDesc& want);
};

void Verifier::check_structure() {
    // single writer
    std::map<ObjectId, std::vector<ObjectId>> writers;
    for (const OperatorNode& n : g_.nodes())
        for (const Binding& b : n.bindings)
            if (b.direction == Direction::Output) writers[b.object].push_back(n.id);
    for (const auto& [data, list] : writers) {
        if (list.size() > 1) {
            std::vector<ObjectId> subj{data};
            subj.insert(subj.end(), list.begin(), list.end());
            report(DiagCode::MultipleWriters, std::move(subj),
                   "data object has " + std::to_string(list.size()) + " producers");
        }
    }

    // bipartite: every binding must target a data object, never a node
    for (const OperatorNode& n : g_.nodes()) {
        for (const Binding& b : n.bindings) {
            if (is_node_id(b.object))
                report(DiagCode::NotBipartite, {n.id, b.object},
                       "node is wired to another node");
            else if (!ctx_.find(b.object))
                report(DiagCode::UnboundParam, {n.id, b.object},
                       "binding targets a released or unknown object");
        }
    }

    try {
        g_.topo_sort();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CycleDetected) {
            report(DiagCode::CycleDetected, {g_.id()}, "graph contains a cycle");
        } else {
            throw;
        }
    }
}

const KernelSignature* Verifier::signature_of(const OperatorNode& n) {
    if (n.abstraction) return &n.abstraction->signature;
    const KernelEntry* entry = reg_.find(n.kernel);
    if (!entry) {
        report(DiagCode::UnknownKernel, {n.id}, "kernel '" + n.kernel + "' is not registered");
        return nullptr;
    }
    return &entry->signature;
}

void Verifier::check_node_params(const OperatorNode& n) {
    const KernelSignature* sig = signature_of(n);
    if (!sig) return;

    for (std::size_t i = 0; i < sig->params.size(); ++i) {
        const SignatureParam& p = sig->params[i];
        const Binding* b = n.binding_for(static_cast<int>(i));
        if (!b) {
            if (p.state == ParamState::Required)
                report(DiagCode::UnboundParam, {n.id},
                       "required parameter " + std::to_string(i) + " (" + p.name +
                           ") of '" + n.kernel + "' is unbound");
            continue;
        }
        const DataObject* obj = ctx_.find(b->object);
        if (!obj) continue; // reported in check_structure
        if (obj->kind != p.kind) {
            report(DiagCode::DirectionMismatch, {n.id, b->object},
                   "parameter " + std::to_string(i) + " of '" + n.kernel + "' expects " +
                       to_string(p.kind) + ", got " + to_string(obj->kind));
            continue;
        }
        if (p.kind == ObjKind::Image && !p.formats.empty() && !obj->is_virtual &&
            std::find(p.formats.begin(), p.formats.end(), obj->format) == p.formats.end()) {
            report(DiagCode::FormatMismatch, {n.id, b->object},
                   "parameter " + std::to_string(i) + " of '" + n.kernel +
                       "' does not accept format " + to_string(obj->format));
        }
        if (obj->is_virtual && obj->kind != ObjKind::Image && b->direction == Direction::Input &&
            g_.producer(b->object) == kInvalidId) {
            report(DiagCode::UnresolvedVirtualFormat, {b->object},
                   "virtual object consumed but never produced");
        }
    }

    // bindings beyond the signature
    for (const Binding& b : n.bindings)
        if (b.param < 0 || b.param >= static_cast<int>(sig->params.size()))
            report(DiagCode::DirectionMismatch, {n.id, b.object},
                   "'" + n.kernel + "' has no parameter " + std::to_string(b.param));
}

void Verifier::assign_output(const OperatorNode& n, ObjectId out_id, const ResolvedDesc& want) {
    const DataObject* obj = ctx_.find(out_id);
    if (!obj) return;
    auto it = resolved_.find(out_id);
    if (it == resolved_.end()) {
        resolved_[out_id] = want;
        return;
    }
    const ResolvedDesc& have = it->second;
    if (have.kind != want.kind) return; // kind mismatch reported elsewhere
    bool conflict = false;
    if (want.kind == ObjKind::Image)
        conflict = have.width != want.width || have.height != want.height ||
                   have.format != want.format;
    else if (want.kind == ObjKind::Scalar)
        conflict = have.element_type != want.element_type;
    else if (want.kind == ObjKind::Array)
        conflict = have.element_type != want.element_type || have.capacity != want.capacity;
    if (conflict) {
        std::vector<ObjectId> consumers = g_.consumers(out_id);
        std::vector<ObjectId> subj{out_id, n.id};
        subj.insert(subj.end(), consumers.begin(), consumers.end());
        std::string msg = "producer '" + n.kernel + "' resolves object to ";
        msg += want.kind == ObjKind::Image
                   ? std::string(to_string(want.format)) + " " + std::to_string(want.width) + "x" +
                         std::to_string(want.height)
                   : std::string(to_string(want.element_type));
        msg += ", conflicting with ";
        msg += have.kind == ObjKind::Image
                   ? std::string(to_string(have.format)) + " " + std::to_string(have.width) + "x" +
                         std::to_string(have.height)
                   : std::string(to_string(have.element_type));
        report(DiagCode::FormatMismatch, std::move(subj), std::move(msg));
    }
}

bool Verifier::infer_node(const OperatorNode& n) {
    const KernelSignature* sig = n.abstraction ? &n.abstraction->signature : nullptr;
    const KernelEntry* entry = nullptr;
    if (!sig) {
        entry = reg_.find(n.kernel);
        if (!entry) return true; // UnknownKernel already reported; stop here
        sig = &entry->signature;
    }

    std::vector<ResolvedDesc> inputs;
    std::vector<ObjectId> in_ids, out_ids;
    for (std::size_t i = 0; i < sig->params.size(); ++i) {
        const SignatureParam& p = sig->params[i];
        const Binding* b = n.binding_for(static_cast<int>(i));
        if (p.direction == Direction::Input) {
            if (!b) {
                if (p.state == ParamState::Required) return true; // unbound, reported
                inputs.push_back(ResolvedDesc{});
                in_ids.push_back(kInvalidId);
                continue;
            }
            auto it = resolved_.find(b->object);
            if (it == resolved_.end()) return false; // inputs not ready yet
            const ResolvedDesc& d = it->second;
            if (d.kind == ObjKind::Image &&
                (d.format == ImageFormat::UNRESOLVED || d.width == 0))
                return false;
            if (d.kind != p.kind) return true; // mismatch reported already
            inputs.push_back(d);
            in_ids.push_back(b->object);
        } else {
            out_ids.push_back(b ? b->object : kInvalidId);
        }
    }

    std::vector<ResolvedDesc> outputs;
    try {
        InferArgs args;
        args.inputs = inputs;
        args.attrs = &n.attrs;
        args.node = &n;
        args.ctx = &ctx_;
        if (n.abstraction) {
            std::vector<ScalarType> types;
            outputs = infer_abstraction(*n.abstraction, args, &types);
            node_types_[n.id] = std::move(types);
        } else {
            outputs = entry->infer(args);
        }
    } catch (const Error& e) {
        report(DiagCode::FormatMismatch, {n.id}, std::string("'") + n.kernel + "': " + e.what());
        return true;
    }

    for (std::size_t oi = 0; oi < outputs.size() && oi < out_ids.size(); ++oi) {
        if (out_ids[oi] == kInvalidId) continue;
        assign_output(n, out_ids[oi], outputs[oi]);
    }
    return true;
}

bool Verifier::propagate() {
    // seed with concrete descriptions of non-virtual objects (and virtual
    // ones declared with explicit dimensions in a graph file)
    for (ObjectId id : g_.data()) {
        const DataObject* obj = ctx_.find(id);
        if (!obj) continue;
        ResolvedDesc d = obj->desc();
        bool concrete = true;
        if (obj->kind == ObjKind::Image)
            concrete = obj->format != ImageFormat::UNRESOLVED && obj->width > 0;
        if (!obj->is_virtual || concrete) resolved_[id] = d;
    }

    std::vector<ObjectId> order;
    try {
        order = g_.topo_sort();
    } catch (const Error&) {
        return false; // cycle already reported
    }

    std::set<ObjectId> done;
    bool progress = true;
    while (progress) {
        progress = false;
        for (ObjectId nid : order) {
            if (done.count(nid)) continue;
            const OperatorNode* n = g_.node(nid);
            if (!n) continue;
            if (infer_node(*n)) {
                done.insert(nid);
                progress = true;
            }
        }
    }

    for (ObjectId id : g_.data()) {
        const DataObject* obj = ctx_.find(id);
        if (!obj || !obj->is_virtual) continue;
        auto it = resolved_.find(id);
        bool ok = it != resolved_.end();
        if (ok && obj->kind == ObjKind::Image)
            ok = it->second.format != ImageFormat::UNRESOLVED && it->second.width > 0;
        if (!ok)
            report(DiagCode::UnresolvedVirtualFormat, {id},
                   "virtual object '" + obj->name + "' could not be resolved");
    }
    return true;
}

VerifyResult Verifier::run() {
    check_structure();
    for (const OperatorNode& n : g_.nodes()) check_node_params(n);
    propagate();

    std::stable_sort(diags_.begin(), diags_.end(), [](const Diagnostic& a, const Diagnostic& b) {
        if (a.code != b.code) return static_cast<int>(a.code) < static_cast<int>(b.code);
        ObjectId ia = a.subjects.empty() ? 0 : a.subjects.front();
        ObjectId ib = b.subjects.empty() ? 0 : b.subjects.front();
        return ia < ib;
    });
    // drop duplicates produced by repeated propagation attempts
    diags_.erase(std::unique(diags_.begin(), diags_.end(),
                             [](const Diagnostic& a, const Diagnostic& b) {
                                 return a.code == b.code && a.subjects == b.subjects &&
                                        a.message == b.message;
                             }),
                 diags_.end());

    VerifyResult result;
    result.diagnostics = std::move(diags_);
    auto frozen = std::make_shared<AppGraph>(g_);
    VerifyAccess::fill(result.verified, frozen, &ctx_, std::move(resolved_),
                       std::move(node_types_), result.diagnostics.empty());
    return result;
}

} // namespace

VerifyResult verify(const AppGraph& g) { return Verifier(g).run(); }

} // namespace gvx
