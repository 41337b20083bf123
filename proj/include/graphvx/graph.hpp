#pragma once

#include "graphvx/kernel.hpp"
#include "graphvx/value.hpp"

#include <deque>
#include <memory>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gvx {

class Context;
class KernelRegistry;

/// A vertex of the application graph holding data: image, scalar, array or
/// matrix. Virtual objects are graph-scoped intermediates that cannot be
/// accessed from outside graph execution.
struct DataObject {
    ObjectId id = kInvalidId;
    std::string name;
    ObjKind kind = ObjKind::Image;
    bool is_virtual = false;
    ObjectId owner_graph = kInvalidId; // set for virtual objects only

    // image
    int width = 0;
    int height = 0;
    ImageFormat format = ImageFormat::UNRESOLVED;

    // scalar
    ScalarType element_type = ScalarType::U8;
    std::optional<Value> scalar_value;

    // array
    std::int64_t capacity = 0;

    // matrix
    int rows = 0;
    int cols = 0;
    std::vector<Value> matrix_values;

    ResolvedDesc desc() const;
};

struct Binding {
    int param = 0;
    ObjectId object = kInvalidId;
    Direction direction = Direction::Input; // resolved from the signature
};

/// Immediate node attributes: enum-like configuration that is not a data
/// object (channel selector, threshold mode, depth-conversion target, ...).
using AttrValue = std::variant<std::int64_t, double, std::string>;
using AttrMap = std::map<std::string, AttrValue>;

/// A kernel instance vertex. Application-graph nodes reference a registry
/// kernel by name; implementation-graph nodes carry the abstraction kernel
/// produced by expansion.
struct OperatorNode {
    ObjectId id = kInvalidId;
    std::string kernel;            // registry kernel name (app graphs)
    AbstractionPtr abstraction;    // set on implementation-graph nodes
    std::vector<Binding> bindings; // ordered by param index
    AttrMap attrs;
    ObjectId graph = kInvalidId;
    ObjectId provenance = kInvalidId; // impl nodes: originating CV node
    std::string label;                // impl nodes: stable display name

    const Binding* binding_for(int param) const;
    std::vector<ObjectId> inputs() const;
    std::vector<ObjectId> outputs() const;
};

enum class GraphPhase : std::uint8_t { Application, Implementation };

/// Bipartite DAG over data objects and operator nodes. Edges are derived
/// from bindings (INPUT: data->node, OUTPUT: node->data) and never stored.
class AppGraph {
public:
    AppGraph() = default;
    AppGraph(Context* ctx, ObjectId id, GraphPhase phase)
        : ctx_(ctx), id_(id), phase_(phase) {}

    ObjectId id() const { return id_; }
    GraphPhase phase() const { return phase_; }
    Context& context() const { return *ctx_; }

    const std::deque<OperatorNode>& nodes() const { return nodes_; }
    const std::set<ObjectId>& data() const { return data_; }
    const OperatorNode* node(ObjectId id) const;
    OperatorNode* node_mut(ObjectId id);

    /// Derived edge set E over V = data() ∪ nodes().
    std::vector<std::pair<ObjectId, ObjectId>> edges() const;

    /// Producer node of a data object, if any (single-writer).
    ObjectId producer(ObjectId data) const;
    /// Consumer nodes of a data object, ascending id.
    std::vector<ObjectId> consumers(ObjectId data) const;

    /// Checked node insertion: resolves directions against the registry
    /// signature, enforces single-writer and virtual ownership.
    /// Throws UnknownKernel, CrossGraphVirtual, MultipleWriters.
    OperatorNode& add_node(const std::string& kernel,
                           const std::vector<ObjectId>& args,
                           AttrMap attrs = {});

    /// Unchecked insertion used by file loading and fault-injection tests;
    /// problems surface as verifier diagnostics instead of exceptions.
    OperatorNode& add_node_unchecked(OperatorNode node);

    /// Operator nodes in dependency order, ties broken by ascending id.
    /// Throws CycleDetected.
    std::vector<ObjectId> topo_sort() const;

    std::uint64_t revision() const { return revision_; }

    // Used by expansion to assemble implementation graphs.
    OperatorNode& add_abstraction_node(AbstractionPtr kernel,
                                       const std::vector<ObjectId>& args,
                                       ObjectId provenance, std::string label);

    void note_data(ObjectId id) { data_.insert(id); }

private:
    friend class Context;

    Context* ctx_ = nullptr;
    ObjectId id_ = kInvalidId;
    GraphPhase phase_ = GraphPhase::Application;
    std::deque<OperatorNode> nodes_;
    std::set<ObjectId> data_;
    std::uint64_t revision_ = 0;

    void attach_bindings(OperatorNode& n, const std::vector<SignatureParam>& params,
                         const std::vector<ObjectId>& args);
};

/// Owner of every graph and data object. All access is id-based; releasing
/// the context invalidates every id it handed out.
class Context {
public:
    Context() = default;
    Context(const Context&) = delete;
    Context& operator=(const Context&) = delete;

    AppGraph& create_graph(GraphPhase phase = GraphPhase::Application);

    /// Non-virtual image; w, h >= 1 and a concrete format.
    /// Throws ZeroDimension, BadFormat.
    DataObject& create_image(int w, int h, ImageFormat fmt, std::string name = {});

    /// Graph-scoped virtual image: 0x0, UNRESOLVED until verification.
    DataObject& create_virtual_image(AppGraph& g, std::string name = {});

    DataObject& create_scalar(ScalarType t, std::optional<Value> value = {},
                              std::string name = {});
    DataObject& create_array(ScalarType elem, std::int64_t capacity, std::string name = {});
    DataObject& create_matrix(ScalarType elem, int rows, int cols,
                              std::vector<Value> values = {}, std::string name = {});

    /// Internal virtual object of arbitrary kind (expansion intermediates).
    DataObject& create_virtual_object(AppGraph& g, ObjKind kind, std::string name = {});

    const DataObject* find(ObjectId id) const;
    DataObject* find_mut(ObjectId id);
    const DataObject& at(ObjectId id) const; // throws UnknownObject
    AppGraph* graph(ObjectId id);
    const AppGraph* graph(ObjectId id) const;

    /// Virtual data cannot be touched by host read/write APIs.
    /// Throws AccessDenied / UnknownObject.
    void check_host_access(ObjectId id) const;

    std::size_t object_count() const { return objects_.size() + graphs_.size(); }

    /// Fresh id for an operator node (nodes share the object id space).
    ObjectId allocate_id() { return next_id_++; }

    /// Kernel catalog consulted by add_node and the verifier. Defaults to
    /// the built-in registry; graph files with custom kernels install an
    /// extended copy.
    const KernelRegistry& registry() const;
    void set_registry(std::shared_ptr<const KernelRegistry> reg) { registry_ = std::move(reg); }

    /// Releases every owned graph and data object.
    void release();

private:
    ObjectId next_id_ = 1;
    std::map<ObjectId, DataObject> objects_;
    std::map<ObjectId, AppGraph> graphs_;
    std::shared_ptr<const KernelRegistry> registry_;

    DataObject& insert(DataObject obj);
};

} // namespace gvx
