#pragma once

#include "graphvx/execute.hpp"

#include <string>
#include <vector>

namespace gvx {

/// DOT rendering of any graph stage: data objects as ellipses, operator
/// nodes as boxes, stable ordering by id. When `overlay` is given, vertices
/// missing from its alive set render grey.
std::string emit_dot(const AppGraph& g, const std::string& stage_label,
                     const FilteredGraph* overlay = nullptr);

/// One emitted kernel: a self-contained function in a portable C subset.
struct EmittedKernel {
    std::string function_name;
    std::string source;
    ObjectId node = kInvalidId;
    bool host_step = false; // global kinds appear in the manifest only
};

struct EmittedProgram {
    std::vector<EmittedKernel> kernels;
    std::string manifest_json; // function names, I/O descriptors, launch order
};

/// Emits every point/local kernel of a verified (usually fused) graph as a
/// C function plus a JSON manifest describing buffers and launch order.
/// Global kernels are listed as host steps. Bound scalars and matrices are
/// specialized into the generated source as constants.
EmittedProgram emit_kernel_source(const VerifiedGraph& g);

/// Streaming-pipeline description: FIFO depths per virtual edge, line
/// buffers per local stage, barriers at global stages, replication factor
/// for the innermost stage of each segment.
struct StreamStage {
    ObjectId node;
    std::string label;
    AbstractionKind kind;
    int window_w = 0, window_h = 0;
    int line_buffer_rows = 0;   // window_h - 1
    int line_buffer_extra = 0;  // window_w - 1
    int replication = 1;
    bool barrier = false;
    int segment = 0;
};

struct StreamFifo {
    ObjectId data;
    ObjectId from_node;
    ObjectId to_node;
    int depth = 1;
};

struct StreamPlan {
    std::vector<StreamStage> stages; // topo order
    std::vector<StreamFifo> fifos;
    int replication = 1;
    int fifo_slack = 2;
};

/// Builds the streaming plan for a fused graph with replication factor
/// v >= 1 applied to the innermost (final) stage of each pipeline segment.
/// Throws NonStreamable when a data object has several producers.
StreamPlan emit_stream_plan(const VerifiedGraph& g, int v, int fifo_slack = 2);

std::string stream_plan_json(const StreamPlan& plan);

} // namespace gvx
