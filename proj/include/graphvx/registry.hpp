#pragma once

#include "graphvx/graph.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gvx {

class VerifiedGraph;

/// Inference context handed to a kernel's shape/format rule.
struct InferArgs {
    std::vector<ResolvedDesc> inputs; // one per INPUT param, in order; unbound
                                      // optional params appear as zero descs
    const AttrMap* attrs = nullptr;
    const OperatorNode* node = nullptr;
    const Context* ctx = nullptr;
};

/// Expansion context: the implementation graph under construction plus the
/// resolved originals.
struct ExpandArgs {
    AppGraph* impl = nullptr;
    Context* ctx = nullptr;
    const OperatorNode* node = nullptr;       // original CV node
    std::vector<ResolvedDesc> inputs;         // resolved input descs
    std::vector<ObjectId> input_ids;          // bound objects per INPUT param
    std::vector<ObjectId> output_ids;         // bound objects per OUTPUT param
};

struct KernelEntry {
    std::string name;
    KernelSignature signature;
    /// Output descriptions given concrete inputs; throws Error for
    /// range/format violations (verifier turns these into diagnostics).
    std::function<std::vector<ResolvedDesc>(const InferArgs&)> infer;
    /// Replace the CV node by one or more abstraction nodes wired through
    /// fresh virtual intermediates.
    std::function<void(ExpandArgs&)> expand;
};

/// Immutable catalog of CV functions expressed as compositions of
/// abstraction kernels. The built-in registry is created once at startup;
/// graph files carrying custom kernels extend a copy of it.
class KernelRegistry {
public:
    const KernelEntry* find(const std::string& name) const;
    std::vector<std::string> names() const;

    void add(KernelEntry entry);

    /// Registers a user-defined abstraction kernel: infer follows typecheck,
    /// expansion is the kernel itself (custom nodes pass through).
    void add_custom(AbstractionPtr kernel);

    static const KernelRegistry& builtin();
    KernelRegistry clone() const { return *this; }

private:
    std::map<std::string, KernelEntry> entries_;
};

/// Expands a structurally verified application graph into an implementation
/// graph of abstraction nodes. Provenance is recorded on each node; custom
/// abstraction nodes pass through unchanged. Expanding an implementation
/// graph is the identity (a fresh copy). Throws UnknownKernel.
AppGraph& expand(const VerifiedGraph& g, Context& ctx);

// Registry construction helpers shared with graph file loading.
ExprPtr saturate_to(ScalarType t, ExprPtr e);

/// Shape/format rule for a bare abstraction kernel: typechecks the bodies
/// and derives output descriptions from the kind (same-dims for point/local/
/// scan, explicit output dims for scale, scalar/array for globals). Used for
/// implementation-graph nodes and user-defined kernels alike.
std::vector<ResolvedDesc> infer_abstraction(const AbstractionKernel& k, const InferArgs& args,
                                            std::vector<ScalarType>* types_out = nullptr);

} // namespace gvx
