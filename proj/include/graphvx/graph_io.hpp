#pragma once

#include "graphvx/graph.hpp"

#include <iosfwd>
#include <memory>
#include <string>

namespace gvx {

/// A graph description file loaded into a fresh context: one application
/// graph plus named objects. Custom kernels declared in the file are
/// registered into a context-local registry copy.
struct LoadedGraph {
    std::unique_ptr<Context> ctx;
    AppGraph* graph = nullptr;
    std::string name;
    std::map<std::string, ObjectId> objects; // by declared name
    std::vector<ObjectId> declared_outputs;
    std::string custom_kernels_json; // verbatim block, re-embedded on save

    ObjectId object(const std::string& name) const;
};

/// Parses the JSON document. Throws SchemaError / IoError on malformed
/// input; semantic problems (unknown kernels, bad wiring) are left for the
/// verifier so files can be linted.
LoadedGraph load_graph_file(const std::string& path);
LoadedGraph load_graph_json(const std::string& text, const std::string& name_hint = "graph");

/// Canonical serialization: sorted keys, stable float formatting. Loading
/// the output yields an identical graph.
std::string save_graph_json(const LoadedGraph& g);

/// Expression (de)serialization used by custom kernel bodies.
ExprPtr expr_from_json_text(const std::string& text);
std::string expr_to_json_text(const ExprPtr& e);

} // namespace gvx
