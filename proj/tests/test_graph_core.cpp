#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "graphvx/graph.hpp"
#include "graphvx/registry.hpp"

#include <set>

using namespace gvx;

TEST_CASE("create_image validates dimensions and format") {
    Context ctx;
    DataObject& img = ctx.create_image(1024, 1024, ImageFormat::U8);
    CHECK(img.width == 1024);
    CHECK(img.height == 1024);
    CHECK_FALSE(img.is_virtual);

    CHECK_NOTHROW((void)ctx.create_image(1, 1, ImageFormat::F32));

    try {
        (void)ctx.create_image(0, 5, ImageFormat::U8);
        FAIL("expected ZeroDimension");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroDimension);
    }
    try {
        (void)ctx.create_image(4, 4, ImageFormat::UNRESOLVED);
        FAIL("expected BadFormat");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadFormat);
    }
}

TEST_CASE("virtual images start unresolved and are graph-scoped") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    DataObject& v = ctx.create_virtual_image(g);
    CHECK(v.width == 0);
    CHECK(v.height == 0);
    CHECK(v.format == ImageFormat::UNRESOLVED);
    CHECK(v.is_virtual);
    CHECK(v.owner_graph == g.id());

    DataObject& v2 = ctx.create_virtual_image(g);
    CHECK(v.id != v2.id);

    // external access is rejected
    try {
        ctx.check_host_access(v.id);
        FAIL("expected AccessDenied");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AccessDenied);
    }
    CHECK_NOTHROW(ctx.check_host_access(ctx.create_image(2, 2, ImageFormat::U8).id));
}

TEST_CASE("object ids are unique within a context") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    std::set<ObjectId> ids;
    for (int i = 0; i < 100; ++i) {
        ids.insert(ctx.create_image(1, 1, ImageFormat::U8).id);
        ids.insert(ctx.create_virtual_image(g).id);
        ids.insert(ctx.create_scalar(ScalarType::S32).id);
    }
    CHECK(ids.size() == 300);
}

TEST_CASE("context release empties the registry") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    (void)ctx.create_image(4, 4, ImageFormat::U8);
    (void)ctx.create_virtual_image(g);
    (void)ctx.create_scalar(ScalarType::U8);
    CHECK(ctx.object_count() > 0);
    ctx.release();
    CHECK(ctx.object_count() == 0);
}

TEST_CASE("add_node derives edges from bindings") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    ObjectId v0 = ctx.create_virtual_image(g, "v0").id;
    ObjectId v1 = ctx.create_virtual_image(g, "v1").id;
    OperatorNode& n = g.add_node("Gaussian3x3", {v0, v1});
    CHECK(n.inputs() == std::vector<ObjectId>{v0});
    CHECK(n.outputs() == std::vector<ObjectId>{v1});

    auto edges = g.edges();
    REQUIRE(edges.size() == 2);
    CHECK(edges[0] == std::pair<ObjectId, ObjectId>{v0, n.id});
    CHECK(edges[1] == std::pair<ObjectId, ObjectId>{n.id, v1});
}

TEST_CASE("sobel produces two out-edges") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    ObjectId v1 = ctx.create_virtual_image(g).id;
    ObjectId v2 = ctx.create_virtual_image(g).id;
    ObjectId v3 = ctx.create_virtual_image(g).id;
    OperatorNode& n = g.add_node("Sobel3x3", {v1, v2, v3});
    CHECK(n.outputs().size() == 2);
    CHECK(g.edges().size() == 3);
}

TEST_CASE("single-writer rule is enforced at add_node") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    ObjectId a = ctx.create_virtual_image(g).id;
    ObjectId b = ctx.create_virtual_image(g).id;
    ObjectId out = ctx.create_virtual_image(g).id;
    g.add_node("Gaussian3x3", {a, out});
    try {
        g.add_node("Box3x3", {b, out});
        FAIL("expected MultipleWriters");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MultipleWriters);
    }
    // the failed node must not linger
    CHECK(g.nodes().size() == 1);
}

TEST_CASE("unknown kernels are rejected") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    ObjectId v = ctx.create_virtual_image(g).id;
    try {
        g.add_node("NoSuchKernel", {v, v});
        FAIL("expected UnknownKernel");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownKernel);
    }
}

TEST_CASE("virtual objects cannot cross graphs") {
    Context ctx;
    AppGraph& g1 = ctx.create_graph();
    AppGraph& g2 = ctx.create_graph();
    ObjectId foreign = ctx.create_virtual_image(g1).id;
    ObjectId local = ctx.create_virtual_image(g2).id;
    try {
        g2.add_node("Gaussian3x3", {foreign, local});
        FAIL("expected CrossGraphVirtual");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CrossGraphVirtual);
    }
}

TEST_CASE("edges stay bipartite by construction") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    ObjectId imgs[3];
    imgs[0] = ctx.create_image(8, 8, ImageFormat::U8).id;
    imgs[1] = ctx.create_virtual_image(g).id;
    imgs[2] = ctx.create_virtual_image(g).id;
    g.note_data(imgs[0]);
    g.add_node("Gaussian3x3", {imgs[0], imgs[1]});
    g.add_node("Box3x3", {imgs[1], imgs[2]});

    std::set<ObjectId> node_ids;
    for (const OperatorNode& n : g.nodes()) node_ids.insert(n.id);
    for (const auto& [from, to] : g.edges()) {
        bool from_is_node = node_ids.count(from) != 0;
        bool to_is_node = node_ids.count(to) != 0;
        CHECK(from_is_node != to_is_node);
    }
}

TEST_CASE("topo_sort orders the edge-detector chain and breaks ties by id") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    ObjectId img0 = ctx.create_image(16, 16, ImageFormat::UYVY, "img0").id;
    ObjectId img1 = ctx.create_image(16, 16, ImageFormat::U8, "img1").id;
    ObjectId thr = ctx.create_scalar(ScalarType::U8, Value::of_int(100), "thresh").id;
    ObjectId v0 = ctx.create_virtual_image(g).id;
    ObjectId v1 = ctx.create_virtual_image(g).id;
    ObjectId v2 = ctx.create_virtual_image(g).id;
    ObjectId v3 = ctx.create_virtual_image(g).id;
    ObjectId v4 = ctx.create_virtual_image(g).id;
    g.note_data(img0);
    g.note_data(img1);
    g.note_data(thr);

    ObjectId a =
        g.add_node("ChannelExtract", {img0, v0}, {{"channel", std::string("Y")}}).id;
    ObjectId b = g.add_node("Gaussian3x3", {v0, v1}).id;
    ObjectId c = g.add_node("Sobel3x3", {v1, v2, v3}).id;
    ObjectId d = g.add_node("Magnitude", {v3, v3, v4}).id;
    ObjectId e = g.add_node("Threshold", {v4, thr, kInvalidId, img1}).id;

    CHECK(g.topo_sort() == std::vector<ObjectId>{a, b, c, d, e});
}

TEST_CASE("topo_sort of an empty graph is empty") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    CHECK(g.topo_sort().empty());
}

TEST_CASE("topo_sort detects cycles") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    ObjectId a = ctx.create_virtual_image(g).id;
    ObjectId b = ctx.create_virtual_image(g).id;
    // two nodes feeding each other through their outputs
    OperatorNode n1;
    n1.kernel = "Gaussian3x3";
    n1.bindings = {{0, a, Direction::Input}, {1, b, Direction::Output}};
    g.add_node_unchecked(std::move(n1));
    OperatorNode n2;
    n2.kernel = "Gaussian3x3";
    n2.bindings = {{0, b, Direction::Input}, {1, a, Direction::Output}};
    g.add_node_unchecked(std::move(n2));

    try {
        (void)g.topo_sort();
        FAIL("expected CycleDetected");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CycleDetected);
    }
}

TEST_CASE("topo_sort output is a permutation respecting all edges") {
    Context ctx;
    AppGraph& g = ctx.create_graph();
    // diamond: in -> (gauss, box) -> absdiff -> out
    ObjectId in = ctx.create_image(8, 8, ImageFormat::U8).id;
    ObjectId va = ctx.create_virtual_image(g).id;
    ObjectId vb = ctx.create_virtual_image(g).id;
    ObjectId out = ctx.create_image(8, 8, ImageFormat::U8).id;
    g.note_data(in);
    g.note_data(out);
    ObjectId n1 = g.add_node("Gaussian3x3", {in, va}).id;
    ObjectId n2 = g.add_node("Box3x3", {in, vb}).id;
    ObjectId n3 = g.add_node("AbsDiff", {va, vb, out}).id;

    std::vector<ObjectId> order = g.topo_sort();
    REQUIRE(order.size() == 3);
    std::set<ObjectId> all(order.begin(), order.end());
    CHECK(all == std::set<ObjectId>{n1, n2, n3});
    CHECK(order.back() == n3);
}
