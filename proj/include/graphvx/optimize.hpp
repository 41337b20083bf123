#pragma once

#include "graphvx/verify.hpp"

#include <set>

namespace gvx {

/// Alive-node view of a verified graph produced by dead-computation
/// elimination. Hides non-alive vertices and their edges; the underlying
/// graph is untouched.
class FilteredGraph {
public:
    FilteredGraph() = default;
    FilteredGraph(VerifiedGraph base, std::set<ObjectId> alive)
        : base_(std::move(base)), alive_(std::move(alive)) {}

    const VerifiedGraph& base() const { return base_; }
    const std::set<ObjectId>& alive() const { return alive_; }
    bool is_alive(ObjectId id) const { return alive_.count(id) != 0; }

    /// Alive operator nodes in topo order.
    std::vector<ObjectId> alive_nodes() const;
    /// Alive data objects.
    std::vector<ObjectId> alive_data() const;
    /// Edges of the view (both endpoints alive).
    std::vector<std::pair<ObjectId, ObjectId>> edges() const;

private:
    VerifiedGraph base_;
    std::set<ObjectId> alive_;
};

/// Dead computation elimination. Classifies non-virtual data nodes into
/// roots and leaves by degree, walks the transposed graph depth-first from
/// every result node and keeps only the vertices reached.
/// Throws UnstampedGraph.
FilteredGraph eliminate_dead_nodes(const VerifiedGraph& g);

enum class TransferDir : std::uint8_t { HostToDevice, DeviceToHost };

struct Transfer {
    TransferDir direction;
    ObjectId data;
    int segment;
};

/// Host/device movement schedule: maximal device segments are the connected
/// components of alive operator nodes linked through virtual data; transfers
/// happen only at non-virtual boundaries.
struct TransferPlan {
    int segment_count = 0;
    std::vector<Transfer> transfers;
    std::map<ObjectId, int> node_segment;
    /// One upload plus one download per operator node, for comparison.
    int naive_count = 0;

    int optimized_count() const { return static_cast<int>(transfers.size()); }
};

TransferPlan plan_transfers(const FilteredGraph& g);

/// A group of point/local nodes merged into one kernel.
struct FusedKernel {
    std::vector<ObjectId> members; // original node ids, topo order
    AbstractionPtr merged;
    ObjectId fused_node = kInvalidId; // node id in the fused graph
};

struct FusionResult {
    AppGraph* fused = nullptr; // owned by the context
    std::vector<FusedKernel> groups;
};

/// Kernel fusion over single-consumer virtual edges, applied to fixpoint in
/// topo order: point->point composes bodies, local->point extends the post
/// body, point->local inlines the point at every window tap. Local->local
/// never fuses; global kinds are barriers; multi-consumer and multi-output
/// producers are left alone.
FusionResult fuse(const FilteredGraph& g, Context& ctx);

struct PassStats {
    int nodes_before = 0;
    int nodes_alive = 0;
    int nodes_removed = 0;
    int transfers_naive = 0;
    int transfers_optimized = 0;
    int fused_groups = 0;
    int launches_before = 0;
    int launches_after = 0;
};

struct OptimizeOptions {
    bool dce = true;
    bool fusion = true;
};

/// Full pass pipeline: DCE -> transfer planning -> fusion, with the fused
/// graph re-verified so it can be executed directly.
struct OptimizedPlan {
    VerifiedGraph base; // the verified input graph
    FilteredGraph filtered;
    TransferPlan transfers;
    VerifiedGraph fused;
    std::vector<FusedKernel> groups;
    PassStats stats;
};

OptimizedPlan optimize(const VerifiedGraph& g, Context& ctx, const OptimizeOptions& opt = {});

} // namespace gvx
