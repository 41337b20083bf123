#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "graphvx/execute.hpp"
#include "graphvx/registry.hpp"
#include "graphvx/verify.hpp"
#include "reference.hpp"

using namespace gvx;

namespace {

/// One CV node wired to fresh objects, verified, expanded and executed.
struct Harness {
    Context ctx;
    AppGraph* app;

    Harness() { app = &ctx.create_graph(); }

    ObjectId image(int w, int h, ImageFormat f, const std::string& name) {
        ObjectId id = ctx.create_image(w, h, f, name).id;
        app->note_data(id);
        return id;
    }
    ObjectId virt(const std::string& name) { return ctx.create_virtual_image(*app, name).id; }
    ObjectId scalar(ScalarType t, Value v, const std::string& name) {
        ObjectId id = ctx.create_scalar(t, v, name).id;
        app->note_data(id);
        return id;
    }
    ObjectId array(ScalarType t, std::int64_t cap, const std::string& name) {
        ObjectId id = ctx.create_array(t, cap, name).id;
        app->note_data(id);
        return id;
    }
    ObjectId matrix(ScalarType t, int rows, int cols, std::vector<Value> vals,
                    const std::string& name) {
        ObjectId id = ctx.create_matrix(t, rows, cols, std::move(vals), name).id;
        app->note_data(id);
        return id;
    }

    VerifiedGraph verified_impl() {
        VerifyResult vr = verify(*app);
        REQUIRE_MESSAGE(vr.ok(), [&] {
            std::string all;
            for (const Diagnostic& d : vr.diagnostics) all += d.render() + "; ";
            return all;
        }());
        AppGraph& impl = expand(vr.verified, ctx);
        VerifyResult ir = verify(impl);
        REQUIRE_MESSAGE(ir.ok(), [&] {
            std::string all;
            for (const Diagnostic& d : ir.diagnostics) all += d.render() + "; ";
            return all;
        }());
        return std::move(ir.verified);
    }

    ExecutionReport run(const InputMap& inputs) { return run_naive(verified_impl(), inputs); }
};

Buffer random_u8(int w, int h, std::uint64_t seed) {
    ResolvedDesc d;
    d.kind = ObjKind::Image;
    d.width = w;
    d.height = h;
    d.format = ImageFormat::U8;
    return random_buffer(d, seed);
}

Buffer random_img(int w, int h, ImageFormat f, std::uint64_t seed) {
    ResolvedDesc d;
    d.kind = ObjKind::Image;
    d.width = w;
    d.height = h;
    d.format = f;
    return random_buffer(d, seed);
}

constexpr int kSeeds = 12;
constexpr int kW = 16, kH = 16;

} // namespace

TEST_CASE("expansion: single Add becomes one point node") {
    Harness h;
    ObjectId a = h.image(kW, kH, ImageFormat::U8, "a");
    ObjectId b = h.image(kW, kH, ImageFormat::U8, "b");
    ObjectId out = h.image(kW, kH, ImageFormat::S16, "out");
    h.app->add_node("Add", {a, b, out});
    VerifiedGraph impl = h.verified_impl();
    REQUIRE(impl.graph().nodes().size() == 1);
    CHECK(impl.graph().nodes().front().abstraction->kind == AbstractionKind::Point);
}

TEST_CASE("expansion: sobel becomes two parallel local operators") {
    Harness h;
    ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
    ObjectId gx = h.image(kW, kH, ImageFormat::S16, "gx");
    ObjectId gy = h.image(kW, kH, ImageFormat::S16, "gy");
    h.app->add_node("Sobel3x3", {in, gx, gy});
    VerifiedGraph impl = h.verified_impl();
    REQUIRE(impl.graph().nodes().size() == 2);
    for (const OperatorNode& n : impl.graph().nodes())
        CHECK(n.abstraction->kind == AbstractionKind::Local);
}

TEST_CASE("expansion: equalize-hist is histogram + table + point") {
    Harness h;
    ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
    ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
    h.app->add_node("EqualizeHist", {in, out});
    VerifiedGraph impl = h.verified_impl();
    REQUIRE(impl.graph().nodes().size() == 3);
    std::multiset<AbstractionKind> kinds;
    for (const OperatorNode& n : impl.graph().nodes()) kinds.insert(n.abstraction->kind);
    CHECK(kinds == std::multiset<AbstractionKind>{AbstractionKind::Histogram,
                                                  AbstractionKind::Table,
                                                  AbstractionKind::Point});
}

TEST_CASE("expansion preserves external data objects and is idempotent") {
    Harness h;
    ObjectId in = h.image(kW, kH, ImageFormat::UYVY, "in");
    ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
    ObjectId v = h.virt("v");
    h.app->add_node("ChannelExtract", {in, v}, {{"channel", std::string("Y")}});
    h.app->add_node("Gaussian3x3", {v, out});

    VerifyResult vr = verify(*h.app);
    REQUIRE(vr.ok());
    AppGraph& impl = expand(vr.verified, h.ctx);
    // external objects are untouched, only intermediates may be added
    for (ObjectId id : h.app->data()) CHECK(impl.data().count(id) == 1);

    VerifyResult ir = verify(impl);
    REQUIRE(ir.ok());
    AppGraph& impl2 = expand(ir.verified, h.ctx);
    CHECK(impl2.nodes().size() == impl.nodes().size());
    CHECK(impl2.data() == impl.data());
}

TEST_CASE("oracle: pointwise arithmetic kernels") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 100 + seed);
        Buffer b = random_u8(kW, kH, 200 + seed);

        struct Case {
            const char* kernel;
            ImageFormat out_fmt;
            Buffer expect;
        };
        std::vector<Case> cases;
        cases.push_back({"Add", ImageFormat::S16, gvx_ref::add(a, b, ImageFormat::S16)});
        cases.push_back({"Subtract", ImageFormat::S16, gvx_ref::subtract(a, b, ImageFormat::S16)});
        cases.push_back({"Multiply", ImageFormat::S32, gvx_ref::multiply(a, b, 1.0,
                                                                         ImageFormat::S32)});
        cases.push_back({"AbsDiff", ImageFormat::U8, gvx_ref::absdiff(a, b)});
        cases.push_back({"And", ImageFormat::U8, gvx_ref::bit_and(a, b)});
        cases.push_back({"Or", ImageFormat::U8, gvx_ref::bit_or(a, b)});
        cases.push_back({"Xor", ImageFormat::U8, gvx_ref::bit_xor(a, b)});

        for (Case& c : cases) {
            CAPTURE(c.kernel);
            Harness h;
            ObjectId ia = h.image(kW, kH, ImageFormat::U8, "a");
            ObjectId ib = h.image(kW, kH, ImageFormat::U8, "b");
            ObjectId out = h.image(kW, kH, c.out_fmt, "out");
            h.app->add_node(c.kernel, {ia, ib, out});
            ExecutionReport r = h.run({{ia, a}, {ib, b}});
            REQUIRE(r.outputs.count(out) == 1);
            CHECK(r.outputs.at(out).bytes == c.expect.bytes);
        }
    }
}

TEST_CASE("oracle: multiply with scale attribute") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 300 + seed);
        Buffer b = random_u8(kW, kH, 400 + seed);
        Harness h;
        ObjectId ia = h.image(kW, kH, ImageFormat::U8, "a");
        ObjectId ib = h.image(kW, kH, ImageFormat::U8, "b");
        ObjectId out = h.image(kW, kH, ImageFormat::S32, "out");
        h.app->add_node("Multiply", {ia, ib, out}, {{"scale", 0.25}});
        ExecutionReport r = h.run({{ia, a}, {ib, b}});
        CHECK(r.outputs.at(out).bytes == gvx_ref::multiply(a, b, 0.25, ImageFormat::S32).bytes);
    }
}

TEST_CASE("oracle: not") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 500 + seed);
        Harness h;
        ObjectId ia = h.image(kW, kH, ImageFormat::U8, "a");
        ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
        h.app->add_node("Not", {ia, out});
        ExecutionReport r = h.run({{ia, a}});
        CHECK(r.outputs.at(out).bytes == gvx_ref::bit_not(a).bytes);
    }
}

TEST_CASE("oracle: magnitude and phase") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer gx = random_img(kW, kH, ImageFormat::S16, 600 + seed);
        Buffer gy = random_img(kW, kH, ImageFormat::S16, 700 + seed);
        {
            Harness h;
            ObjectId ia = h.image(kW, kH, ImageFormat::S16, "gx");
            ObjectId ib = h.image(kW, kH, ImageFormat::S16, "gy");
            ObjectId out = h.image(kW, kH, ImageFormat::S16, "out");
            h.app->add_node("Magnitude", {ia, ib, out});
            ExecutionReport r = h.run({{ia, gx}, {ib, gy}});
            CHECK(r.outputs.at(out).bytes == gvx_ref::magnitude(gx, gy).bytes);
        }
        {
            Harness h;
            ObjectId ia = h.image(kW, kH, ImageFormat::S16, "gx");
            ObjectId ib = h.image(kW, kH, ImageFormat::S16, "gy");
            ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
            h.app->add_node("Phase", {ia, ib, out});
            ExecutionReport r = h.run({{ia, gx}, {ib, gy}});
            CHECK(r.outputs.at(out).bytes == gvx_ref::phase(gx, gy).bytes);
        }
    }
}

TEST_CASE("oracle: thresholds") {
    // frozen example: pixels {99,100,101} against t=100 give {0,0,255}
    {
        Harness h;
        ObjectId in = h.image(3, 1, ImageFormat::U8, "in");
        ObjectId t = h.scalar(ScalarType::U8, Value::of_int(100), "t");
        ObjectId out = h.image(3, 1, ImageFormat::U8, "out");
        h.app->add_node("Threshold", {in, t, kInvalidId, out});
        Buffer px = gvx_ref::make_image(3, 1, ImageFormat::U8);
        px.bytes = {99, 100, 101};
        ExecutionReport r = h.run({{in, px}});
        CHECK(r.outputs.at(out).bytes == std::vector<std::uint8_t>{0, 0, 255});
    }
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 800 + seed);
        {
            Harness h;
            ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
            ObjectId t = h.scalar(ScalarType::U8, Value::of_int(90), "t");
            ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
            h.app->add_node("Threshold", {in, t, kInvalidId, out});
            ExecutionReport r = h.run({{in, a}});
            CHECK(r.outputs.at(out).bytes == gvx_ref::threshold_binary(a, 90).bytes);
        }
        {
            Harness h;
            ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
            ObjectId lo = h.scalar(ScalarType::U8, Value::of_int(50), "lo");
            ObjectId hi = h.scalar(ScalarType::U8, Value::of_int(180), "hi");
            ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
            h.app->add_node("Threshold", {in, lo, hi, out}, {{"mode", std::string("range")}});
            ExecutionReport r = h.run({{in, a}});
            CHECK(r.outputs.at(out).bytes == gvx_ref::threshold_range(a, 50, 180).bytes);
        }
    }
}

TEST_CASE("oracle: channel extract and combine") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        {
            Buffer in = random_img(kW, kH, ImageFormat::UYVY, 900 + seed);
            Harness h;
            ObjectId ia = h.image(kW, kH, ImageFormat::UYVY, "in");
            ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
            h.app->add_node("ChannelExtract", {ia, out}, {{"channel", std::string("Y")}});
            ExecutionReport r = h.run({{ia, in}});
            CHECK(r.outputs.at(out).bytes == gvx_ref::channel_extract_uyvy_y(in).bytes);
        }
        {
            Buffer in = random_img(kW, kH, ImageFormat::RGB, 1000 + seed);
            const char* chans[3] = {"R", "G", "B"};
            for (int c = 0; c < 3; ++c) {
                Harness h;
                ObjectId ia = h.image(kW, kH, ImageFormat::RGB, "in");
                ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
                h.app->add_node("ChannelExtract", {ia, out},
                                {{"channel", std::string(chans[c])}});
                ExecutionReport r = h.run({{ia, in}});
                CHECK(r.outputs.at(out).bytes == gvx_ref::channel_extract_rgb(in, c).bytes);
            }
        }
        {
            Buffer r8 = random_u8(kW, kH, 1100 + seed);
            Buffer g8 = random_u8(kW, kH, 1200 + seed);
            Buffer b8 = random_u8(kW, kH, 1300 + seed);
            Harness h;
            ObjectId ir = h.image(kW, kH, ImageFormat::U8, "r");
            ObjectId ig = h.image(kW, kH, ImageFormat::U8, "g");
            ObjectId ib = h.image(kW, kH, ImageFormat::U8, "b");
            ObjectId out = h.image(kW, kH, ImageFormat::RGB, "out");
            h.app->add_node("ChannelCombine", {ir, ig, ib, out});
            ExecutionReport r = h.run({{ir, r8}, {ig, g8}, {ib, b8}});
            CHECK(r.outputs.at(out).bytes == gvx_ref::channel_combine_rgb(r8, g8, b8).bytes);
        }
    }
}

TEST_CASE("oracle: convert depth and copy") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 1400 + seed);
        {
            Harness h;
            ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
            ObjectId out = h.image(kW, kH, ImageFormat::S16, "out");
            h.app->add_node("ConvertDepth", {in, out},
                            {{"to", std::string("S16")}, {"shift", std::int64_t{4}}});
            ExecutionReport r = h.run({{in, a}});
            CHECK(r.outputs.at(out).bytes ==
                  gvx_ref::convert_depth(a, ImageFormat::S16, 4, false).bytes);
        }
        {
            Buffer s = random_img(kW, kH, ImageFormat::S16, 1500 + seed);
            Harness h;
            ObjectId in = h.image(kW, kH, ImageFormat::S16, "in");
            ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
            h.app->add_node("ConvertDepth", {in, out},
                            {{"to", std::string("U8")}, {"shift", std::int64_t{8}}});
            ExecutionReport r = h.run({{in, s}});
            CHECK(r.outputs.at(out).bytes ==
                  gvx_ref::convert_depth(s, ImageFormat::U8, 8, false).bytes);
        }
        {
            Harness h;
            ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
            ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
            h.app->add_node("Copy", {in, out});
            ExecutionReport r = h.run({{in, a}});
            CHECK(r.outputs.at(out).bytes == a.bytes);
        }
    }
}

TEST_CASE("oracle: 3x3 local kernels") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 1600 + seed);

        struct Case {
            const char* kernel;
            Buffer expect;
        };
        Buffer gx, gy;
        gvx_ref::sobel3x3(a, gx, gy);
        std::vector<Case> cases;
        cases.push_back({"Box3x3", gvx_ref::box3x3(a)});
        cases.push_back({"Gaussian3x3", gvx_ref::gaussian3x3(a)});
        cases.push_back({"Dilate3x3", gvx_ref::dilate3x3(a)});
        cases.push_back({"Erode3x3", gvx_ref::erode3x3(a)});
        cases.push_back({"Median3x3", gvx_ref::median3x3(a)});
        for (Case& c : cases) {
            CAPTURE(c.kernel);
            Harness h;
            ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
            ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
            h.app->add_node(c.kernel, {in, out});
            ExecutionReport r = h.run({{in, a}});
            CHECK(r.outputs.at(out).bytes == c.expect.bytes);
        }
        {
            Harness h;
            ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
            ObjectId ogx = h.image(kW, kH, ImageFormat::S16, "gx");
            ObjectId ogy = h.image(kW, kH, ImageFormat::S16, "gy");
            h.app->add_node("Sobel3x3", {in, ogx, ogy});
            ExecutionReport r = h.run({{in, a}});
            CHECK(r.outputs.at(ogx).bytes == gx.bytes);
            CHECK(r.outputs.at(ogy).bytes == gy.bytes);
        }
    }
}

TEST_CASE("oracle: custom convolution with integer and float matrices") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 1700 + seed);
        {
            // laplacian-style integer matrix
            std::vector<Value> m = {Value::of_int(0), Value::of_int(1),  Value::of_int(0),
                                    Value::of_int(1), Value::of_int(-4), Value::of_int(1),
                                    Value::of_int(0), Value::of_int(1),  Value::of_int(0)};
            Harness h;
            ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
            ObjectId mat = h.matrix(ScalarType::S32, 3, 3, m, "m");
            ObjectId out = h.image(kW, kH, ImageFormat::S16, "out");
            h.app->add_node("Convolve", {in, mat, out});
            ExecutionReport r = h.run({{in, a}});
            CHECK(r.outputs.at(out).bytes ==
                  gvx_ref::convolve(a, {0, 1, 0, 1, -4, 1, 0, 1, 0}, 3, 3, false, 1,
                                    ImageFormat::S16)
                      .bytes);
        }
        {
            // 5x5 binomial with divisor, U8 output
            std::vector<double> coef = {1,  4, 6, 4, 1, 4, 16, 24, 16, 4, 6, 24, 36,
                                        24, 6, 4, 16, 24, 16, 4, 1, 4, 6, 4,  1};
            std::vector<Value> m;
            for (double c : coef) m.push_back(Value::of_int(static_cast<std::int64_t>(c)));
            Harness h;
            ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
            ObjectId mat = h.matrix(ScalarType::S32, 5, 5, m, "m");
            ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
            h.app->add_node("Convolve", {in, mat, out},
                            {{"scale", std::int64_t{256}}, {"out", std::string("U8")}});
            ExecutionReport r = h.run({{in, a}});
            CHECK(r.outputs.at(out).bytes ==
                  gvx_ref::convolve(a, coef, 5, 5, false, 256, ImageFormat::U8).bytes);
        }
    }
}

TEST_CASE("oracle: histogram") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 1800 + seed);
        Harness h;
        ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
        ObjectId dist = h.array(ScalarType::S32, 16, "dist");
        h.app->add_node("Histogram", {in, dist},
                        {{"bins", std::int64_t{16}},
                         {"offset", std::int64_t{0}},
                         {"range", std::int64_t{256}}});
        ExecutionReport r = h.run({{in, a}});
        REQUIRE(r.outputs.at(dist).has_dist);
        CHECK(r.outputs.at(dist).dist.counts == gvx_ref::histogram(a, 16, 0, 256));
    }
}

TEST_CASE("oracle: min-max-loc with tracked first locations") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 1900 + seed);
        Harness h;
        ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
        ObjectId mn = h.scalar(ScalarType::U8, {}, "mn");
        ObjectId mx = h.scalar(ScalarType::U8, {}, "mx");
        ObjectId minloc = h.array(ScalarType::S32, 2, "minloc");
        ObjectId maxloc = h.array(ScalarType::S32, 2, "maxloc");
        h.app->add_node("MinMaxLoc", {in, mn, mx, minloc, maxloc});
        ExecutionReport r = h.run({{in, a}});

        std::int64_t emn, emx;
        int mnx, mny, mxx, mxy;
        gvx_ref::min_max_loc(a, emn, emx, mnx, mny, mxx, mxy);
        CHECK(r.outputs.at(mn).scalar.i == emn);
        CHECK(r.outputs.at(mx).scalar.i == emx);
        REQUIRE(r.outputs.at(minloc).elements.size() == 2);
        CHECK(r.outputs.at(minloc).elements[0].i == mnx);
        CHECK(r.outputs.at(minloc).elements[1].i == mny);
        CHECK(r.outputs.at(maxloc).elements[0].i == mxx);
        CHECK(r.outputs.at(maxloc).elements[1].i == mxy);
    }
}

TEST_CASE("oracle: mean and standard deviation") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 2000 + seed);
        Harness h;
        ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
        ObjectId mean = h.scalar(ScalarType::F32, {}, "mean");
        ObjectId stddev = h.scalar(ScalarType::F32, {}, "stddev");
        h.app->add_node("MeanStdDev", {in, mean, stddev});
        ExecutionReport r = h.run({{in, a}});

        double em, es;
        gvx_ref::mean_stddev(a, em, es);
        CHECK(r.outputs.at(mean).scalar.as_real() == doctest::Approx(em).epsilon(1e-9));
        CHECK(r.outputs.at(stddev).scalar.as_real() == doctest::Approx(es).epsilon(1e-9));
    }
}

TEST_CASE("oracle: integral image, including the 2x2 example") {
    {
        Harness h;
        ObjectId in = h.image(2, 2, ImageFormat::U8, "in");
        ObjectId out = h.image(2, 2, ImageFormat::S32, "out");
        h.app->add_node("IntegralImage", {in, out});
        Buffer px = gvx_ref::make_image(2, 2, ImageFormat::U8);
        px.bytes = {1, 2, 3, 4};
        ExecutionReport r = h.run({{in, px}});
        const std::int32_t* p =
            reinterpret_cast<const std::int32_t*>(r.outputs.at(out).bytes.data());
        CHECK(p[0] == 1);
        CHECK(p[1] == 3);
        CHECK(p[2] == 4);
        CHECK(p[3] == 10);
    }
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 2100 + seed);
        Harness h;
        ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
        ObjectId out = h.image(kW, kH, ImageFormat::S32, "out");
        h.app->add_node("IntegralImage", {in, out});
        ExecutionReport r = h.run({{in, a}});
        CHECK(r.outputs.at(out).bytes == gvx_ref::integral_image(a).bytes);
    }
}

TEST_CASE("oracle: image scaling") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 2200 + seed);
        for (bool bilinear : {false, true}) {
            for (auto [ow, oh] : {std::pair{8, 8}, std::pair{24, 12}}) {
                Harness h;
                ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
                ObjectId out = h.image(ow, oh, ImageFormat::U8, "out");
                h.app->add_node(
                    "ScaleImage", {in, out},
                    {{"interp", std::string(bilinear ? "bilinear" : "nearest")}});
                ExecutionReport r = h.run({{in, a}});
                CHECK(r.outputs.at(out).bytes == gvx_ref::scale_image(a, ow, oh, bilinear).bytes);
            }
        }
    }
}

TEST_CASE("oracle: histogram equalization") {
    for (int seed = 0; seed < kSeeds; ++seed) {
        Buffer a = random_u8(kW, kH, 2300 + seed);
        Harness h;
        ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
        ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
        h.app->add_node("EqualizeHist", {in, out});
        ExecutionReport r = h.run({{in, a}});
        CHECK(r.outputs.at(out).bytes == gvx_ref::equalize_hist(a).bytes);
    }
    {
        // constant image: the identity mapping applies
        Harness h;
        ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
        ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
        h.app->add_node("EqualizeHist", {in, out});
        Buffer c = gvx_ref::make_image(kW, kH, ImageFormat::U8);
        std::fill(c.bytes.begin(), c.bytes.end(), 77);
        ExecutionReport r = h.run({{in, c}});
        CHECK(r.outputs.at(out).bytes == c.bytes);
    }
}

TEST_CASE("local kernel properties: blur fixes constants, morphology brackets") {
    Buffer c = gvx_ref::make_image(kW, kH, ImageFormat::U8);
    std::fill(c.bytes.begin(), c.bytes.end(), 17);
    for (const char* kernel : {"Gaussian3x3", "Box3x3"}) {
        Harness h;
        ObjectId in = h.image(kW, kH, ImageFormat::U8, "in");
        ObjectId out = h.image(kW, kH, ImageFormat::U8, "out");
        h.app->add_node(kernel, {in, out});
        ExecutionReport r = h.run({{in, c}});
        CHECK(r.outputs.at(out).bytes == c.bytes);
    }
    for (int seed = 0; seed < 4; ++seed) {
        Buffer a = random_u8(kW, kH, 2400 + seed);
        Harness hd, he;
        ObjectId in_d = hd.image(kW, kH, ImageFormat::U8, "in");
        ObjectId out_d = hd.image(kW, kH, ImageFormat::U8, "out");
        hd.app->add_node("Dilate3x3", {in_d, out_d});
        Buffer dil = hd.run({{in_d, a}}).outputs.at(out_d);
        ObjectId in_e = he.image(kW, kH, ImageFormat::U8, "in");
        ObjectId out_e = he.image(kW, kH, ImageFormat::U8, "out");
        he.app->add_node("Erode3x3", {in_e, out_e});
        Buffer ero = he.run({{in_e, a}}).outputs.at(out_e);
        for (std::size_t i = 0; i < a.bytes.size(); ++i) {
            CHECK(dil.bytes[i] >= a.bytes[i]);
            CHECK(ero.bytes[i] <= a.bytes[i]);
        }
    }
}
