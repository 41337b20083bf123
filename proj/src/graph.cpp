#include "graphvx/graph.hpp"

#include "graphvx/registry.hpp"

#include <algorithm>
#include <queue>

namespace gvx {

ResolvedDesc DataObject::desc() const {
    ResolvedDesc d;
    d.kind = kind;
    d.width = width;
    d.height = height;
    d.format = format;
    d.element_type = element_type;
    d.rows = rows;
    d.cols = cols;
    d.capacity = capacity;
    return d;
}

const Binding* OperatorNode::binding_for(int param) const {
    for (const Binding& b : bindings)
        if (b.param == param) return &b;
    return nullptr;
}

std::vector<ObjectId> OperatorNode::inputs() const {
    std::vector<ObjectId> out;
    for (const Binding& b : bindings)
        if (b.direction == Direction::Input) out.push_back(b.object);
    return out;
}

std::vector<ObjectId> OperatorNode::outputs() const {
    std::vector<ObjectId> out;
    for (const Binding& b : bindings)
        if (b.direction == Direction::Output) out.push_back(b.object);
    return out;
}

const OperatorNode* AppGraph::node(ObjectId id) const {
    for (const OperatorNode& n : nodes_)
        if (n.id == id) return &n;
    return nullptr;
}

OperatorNode* AppGraph::node_mut(ObjectId id) {
    for (OperatorNode& n : nodes_)
        if (n.id == id) return &n;
    return nullptr;
}

std::vector<std::pair<ObjectId, ObjectId>> AppGraph::edges() const {
    std::set<std::pair<ObjectId, ObjectId>> set;
    for (const OperatorNode& n : nodes_) {
        for (const Binding& b : n.bindings) {
            if (b.direction == Direction::Input)
                set.emplace(b.object, n.id);
            else
                set.emplace(n.id, b.object);
        }
    }
    return {set.begin(), set.end()};
}

ObjectId AppGraph::producer(ObjectId data) const {
    for (const OperatorNode& n : nodes_)
        for (const Binding& b : n.bindings)
            if (b.direction == Direction::Output && b.object == data) return n.id;
    return kInvalidId;
}

std::vector<ObjectId> AppGraph::consumers(ObjectId data) const {
    std::set<ObjectId> out;
    for (const OperatorNode& n : nodes_)
        for (const Binding& b : n.bindings)
            if (b.direction == Direction::Input && b.object == data) out.insert(n.id);
    return {out.begin(), out.end()};
}

void AppGraph::attach_bindings(OperatorNode& n, const std::vector<SignatureParam>& params,
                               const std::vector<ObjectId>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == kInvalidId) continue; // optional parameter left unbound
        if (i >= params.size())
            throw Error(ErrorCode::BadKernel, "too many arguments for kernel signature");
        Binding b;
        b.param = static_cast<int>(i);
        b.object = args[i];
        b.direction = params[i].direction;
        n.bindings.push_back(b);

        const DataObject* obj = ctx_->find(args[i]);
        if (obj) {
            if (obj->is_virtual && obj->owner_graph != id_)
                throw Error(ErrorCode::CrossGraphVirtual,
                            "virtual object #" + std::to_string(args[i]) +
                                " belongs to another graph",
                            args[i]);
            if (b.direction == Direction::Output) {
                ObjectId prev = producer(args[i]);
                if (prev != kInvalidId && prev != n.id)
                    throw Error(ErrorCode::MultipleWriters,
                                "data object #" + std::to_string(args[i]) +
                                    " already has a producer",
                                args[i]);
            }
            data_.insert(args[i]);
        }
    }
}

OperatorNode& AppGraph::add_node(const std::string& kernel, const std::vector<ObjectId>& args,
                                 AttrMap attrs) {
    const KernelRegistry& reg = ctx_->registry();
    const KernelEntry* entry = reg.find(kernel);
    if (!entry) throw Error(ErrorCode::UnknownKernel, "kernel '" + kernel + "' is not registered");

    OperatorNode node;
    node.id = ctx_->allocate_id();
    node.kernel = kernel;
    node.attrs = std::move(attrs);
    node.graph = id_;
    nodes_.push_back(std::move(node));
    OperatorNode& ref = nodes_.back();
    try {
        attach_bindings(ref, entry->signature.params, args);
    } catch (...) {
        nodes_.pop_back();
        throw;
    }
    ++revision_;
    return ref;
}

OperatorNode& AppGraph::add_node_unchecked(OperatorNode node) {
    if (node.id == kInvalidId) node.id = ctx_->allocate_id();
    node.graph = id_;
    for (const Binding& b : node.bindings) data_.insert(b.object);
    nodes_.push_back(std::move(node));
    ++revision_;
    return nodes_.back();
}

OperatorNode& AppGraph::add_abstraction_node(AbstractionPtr kernel,
                                             const std::vector<ObjectId>& args,
                                             ObjectId provenance, std::string label) {
    OperatorNode node;
    node.id = ctx_->allocate_id();
    node.kernel = kernel->name;
    node.abstraction = std::move(kernel);
    node.graph = id_;
    node.provenance = provenance;
    node.label = std::move(label);
    nodes_.push_back(std::move(node));
    OperatorNode& ref = nodes_.back();
    try {
        attach_bindings(ref, ref.abstraction->signature.params, args);
    } catch (...) {
        nodes_.pop_back();
        throw;
    }
    ++revision_;
    return ref;
}

std::vector<ObjectId> AppGraph::topo_sort() const {
    // Kahn over operator nodes with data objects contracted away;
    // min-id heap gives the deterministic tie-break.
    std::map<ObjectId, int> indegree;
    std::map<ObjectId, std::set<ObjectId>> succ;
    for (const OperatorNode& n : nodes_) indegree[n.id] = 0;
    for (const OperatorNode& n : nodes_) {
        for (const Binding& b : n.bindings) {
            if (b.direction != Direction::Output) continue;
            for (const OperatorNode& m : nodes_) {
                if (m.id == n.id) continue;
                for (const Binding& mb : m.bindings)
                    if (mb.direction == Direction::Input && mb.object == b.object)
                        succ[n.id].insert(m.id);
            }
        }
        // a node both reading and writing the same object depends on itself
        for (const Binding& b : n.bindings)
            if (b.direction == Direction::Output)
                for (const Binding& rb : n.bindings)
                    if (rb.direction == Direction::Input && rb.object == b.object)
                        succ[n.id].insert(n.id);
    }
    for (const auto& [src, dsts] : succ)
        for (ObjectId d : dsts) indegree[d] += 1;

    std::priority_queue<ObjectId, std::vector<ObjectId>, std::greater<>> ready;
    for (const auto& [id, deg] : indegree)
        if (deg == 0) ready.push(id);

    std::vector<ObjectId> order;
    while (!ready.empty()) {
        ObjectId id = ready.top();
        ready.pop();
        order.push_back(id);
        auto it = succ.find(id);
        if (it == succ.end()) continue;
        for (ObjectId d : it->second)
            if (--indegree[d] == 0) ready.push(d);
    }
    if (order.size() != nodes_.size())
        throw Error(ErrorCode::CycleDetected, "graph contains a cycle");
    return order;
}

// ----------------------------------------------------------------- Context

DataObject& Context::insert(DataObject obj) {
    obj.id = next_id_++;
    if (obj.name.empty()) obj.name = "obj" + std::to_string(obj.id);
    auto [it, ok] = objects_.emplace(obj.id, std::move(obj));
    return it->second;
}

AppGraph& Context::create_graph(GraphPhase phase) {
    ObjectId id = next_id_++;
    auto [it, ok] = graphs_.emplace(id, AppGraph(this, id, phase));
    return it->second;
}

DataObject& Context::create_image(int w, int h, ImageFormat fmt, std::string name) {
    if (w < 1 || h < 1)
        throw Error(ErrorCode::ZeroDimension, "image dimensions must be at least 1x1");
    if (fmt == ImageFormat::UNRESOLVED)
        throw Error(ErrorCode::BadFormat, "non-virtual image needs a concrete format");
    DataObject obj;
    obj.kind = ObjKind::Image;
    obj.width = w;
    obj.height = h;
    obj.format = fmt;
    obj.name = std::move(name);
    return insert(std::move(obj));
}

DataObject& Context::create_virtual_image(AppGraph& g, std::string name) {
    DataObject obj;
    obj.kind = ObjKind::Image;
    obj.is_virtual = true;
    obj.owner_graph = g.id();
    obj.format = ImageFormat::UNRESOLVED;
    obj.name = std::move(name);
    DataObject& ref = insert(std::move(obj));
    g.note_data(ref.id);
    return ref;
}

DataObject& Context::create_scalar(ScalarType t, std::optional<Value> value, std::string name) {
    DataObject obj;
    obj.kind = ObjKind::Scalar;
    obj.element_type = t;
    obj.scalar_value = value;
    obj.name = std::move(name);
    return insert(std::move(obj));
}

DataObject& Context::create_array(ScalarType elem, std::int64_t capacity, std::string name) {
    DataObject obj;
    obj.kind = ObjKind::Array;
    obj.element_type = elem;
    obj.capacity = capacity;
    obj.name = std::move(name);
    return insert(std::move(obj));
}

DataObject& Context::create_matrix(ScalarType elem, int rows, int cols, std::vector<Value> values,
                                   std::string name) {
    if (rows < 1 || cols < 1) throw Error(ErrorCode::ZeroDimension, "matrix needs rows, cols >= 1");
    DataObject obj;
    obj.kind = ObjKind::Matrix;
    obj.element_type = elem;
    obj.rows = rows;
    obj.cols = cols;
    obj.matrix_values = std::move(values);
    obj.name = std::move(name);
    return insert(std::move(obj));
}

DataObject& Context::create_virtual_object(AppGraph& g, ObjKind kind, std::string name) {
    DataObject obj;
    obj.kind = kind;
    obj.is_virtual = true;
    obj.owner_graph = g.id();
    if (kind == ObjKind::Image) obj.format = ImageFormat::UNRESOLVED;
    obj.name = std::move(name);
    DataObject& ref = insert(std::move(obj));
    g.note_data(ref.id);
    return ref;
}

const DataObject* Context::find(ObjectId id) const {
    auto it = objects_.find(id);
    return it == objects_.end() ? nullptr : &it->second;
}

DataObject* Context::find_mut(ObjectId id) {
    auto it = objects_.find(id);
    return it == objects_.end() ? nullptr : &it->second;
}

const DataObject& Context::at(ObjectId id) const {
    const DataObject* obj = find(id);
    if (!obj)
        throw Error(ErrorCode::UnknownObject, "no data object #" + std::to_string(id), id);
    return *obj;
}

AppGraph* Context::graph(ObjectId id) {
    auto it = graphs_.find(id);
    return it == graphs_.end() ? nullptr : &it->second;
}

const AppGraph* Context::graph(ObjectId id) const {
    auto it = graphs_.find(id);
    return it == graphs_.end() ? nullptr : &it->second;
}

void Context::check_host_access(ObjectId id) const {
    const DataObject& obj = at(id);
    if (obj.is_virtual)
        throw Error(ErrorCode::AccessDenied,
                    "virtual object '" + obj.name + "' cannot be accessed from the host", id);
}

const KernelRegistry& Context::registry() const {
    return registry_ ? *registry_ : KernelRegistry::builtin();
}

void Context::release() {
    objects_.clear();
    graphs_.clear();
}

} // namespace gvx
