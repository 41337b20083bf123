#pragma once

#include "graphvx/registry.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace gvx {

enum class DiagCode : std::uint8_t {
    CycleDetected,
    NotBipartite,
    UnboundParam,
    DirectionMismatch,
    FormatMismatch,
    MultipleWriters,
    UnresolvedVirtualFormat,
    UnknownKernel,
};

const char* to_string(DiagCode c);

struct Diagnostic {
    DiagCode code;
    std::vector<ObjectId> subjects;
    std::string message;

    /// Rendered as `CODE object#id: message`.
    std::string render() const;
};

/// A format-resolved, structurally sound graph. Holds its own frozen copy;
/// mutations of the source graph do not leak in. The stamp is what the
/// optimizer and executors check before accepting a graph.
class VerifiedGraph {
public:
    VerifiedGraph() = default;

    const AppGraph& graph() const { return *graph_; }
    Context& context() const { return *ctx_; }
    bool stamped() const { return stamp_ != 0; }
    std::uint64_t stamp() const { return stamp_; }

    /// Resolved description of any data object in the graph.
    const ResolvedDesc& desc(ObjectId id) const;
    const std::map<ObjectId, ResolvedDesc>& resolved() const { return resolved_; }

    /// Inferred output types per node output param (impl graphs).
    const std::map<ObjectId, std::vector<ScalarType>>& node_types() const { return node_types_; }

private:
    friend struct VerifyAccess;
    std::shared_ptr<const AppGraph> graph_;
    Context* ctx_ = nullptr;
    std::map<ObjectId, ResolvedDesc> resolved_;
    std::map<ObjectId, std::vector<ScalarType>> node_types_;
    std::uint64_t stamp_ = 0;
};

struct VerifyResult {
    std::vector<Diagnostic> diagnostics;
    VerifiedGraph verified; // stamped only when diagnostics is empty

    bool ok() const { return diagnostics.empty(); }
};

/// Full verification pass: cycle detection, bipartiteness, parameter
/// presence/direction/kind checks, range checks, format propagation to a
/// forward fixpoint over virtual objects, and the single-writer rule.
/// Collects every diagnostic instead of stopping at the first; diagnostics
/// come back ordered by (code, first subject id).
VerifyResult verify(const AppGraph& g);

std::ostream& operator<<(std::ostream& os, const Diagnostic& d);

} // namespace gvx
