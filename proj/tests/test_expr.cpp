#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "graphvx/expr.hpp"
#include "graphvx/kernel.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace gvx;

namespace {

/// Environment backed by fixed tables, for expression-level tests.
class TableEnv : public EvalEnv {
public:
    std::vector<Value> inputs;
    std::vector<std::vector<Value>> windows; // per input, (2r+1)^2 row-major
    std::vector<Value> mask_values;
    int radius = 1;

    Value input(int index, Channel) const override {
        return inputs[static_cast<std::size_t>(index)];
    }
    Value window(int index, int dx, int dy, Channel) const override {
        int side = 2 * radius + 1;
        return windows[static_cast<std::size_t>(index)]
                      [static_cast<std::size_t>((dy + radius) * side + dx + radius)];
    }
    Value mask(int dx, int dy) const override {
        int side = 2 * radius + 1;
        return mask_values[static_cast<std::size_t>((dy + radius) * side + dx + radius)];
    }
    Value array_element(int, std::int64_t at) const override {
        return Value::of_int(at * 10);
    }
};

TypeEnv env_with(std::initializer_list<ScalarType> types) {
    TypeEnv env;
    for (ScalarType t : types) {
        ExprInput slot;
        slot.kind = ExprInput::Kind::ScalarValue;
        slot.type = t;
        env.inputs.push_back(slot);
    }
    return env;
}

} // namespace

TEST_CASE("cast saturates and wraps") {
    CHECK(cast_value(ScalarType::U8, CastPolicy::Saturate, Value::of_int(300)).i == 255);
    CHECK(cast_value(ScalarType::U8, CastPolicy::Saturate, Value::of_int(-5)).i == 0);
    CHECK(cast_value(ScalarType::U8, CastPolicy::Wrap, Value::of_int(300)).i == 44);
    CHECK(cast_value(ScalarType::S16, CastPolicy::Saturate, Value::of_int(40000)).i == 32767);
    CHECK(cast_value(ScalarType::S16, CastPolicy::Wrap, Value::of_int(0x18000)).i == -32768);
    // float sources round half away from zero before clamping
    CHECK(cast_value(ScalarType::U8, CastPolicy::Saturate, Value::of_real(16.5)).i == 17);
    CHECK(cast_value(ScalarType::S16, CastPolicy::Saturate, Value::of_real(-2.5)).i == -3);
    CHECK(cast_value(ScalarType::U8, CastPolicy::Saturate, Value::of_real(16.999796)).i == 17);
    // wrap truncates toward zero
    CHECK(cast_value(ScalarType::U8, CastPolicy::Wrap, Value::of_real(16.9)).i == 16);
}

TEST_CASE("typecheck: magnitude body over S16 pairs") {
    // sqrt(x^2 + y^2) with an explicit saturating cast lands on S16
    ExprPtr body = cast(ScalarType::S16, CastPolicy::Saturate,
                        unary(ExprOp::Sqrt, add(mul(input_pixel(0), input_pixel(0)),
                                                mul(input_pixel(1), input_pixel(1)))));
    TypeEnv env = env_with({ScalarType::S16, ScalarType::S16});
    CHECK(typecheck_expr(*body, env) == ScalarType::S16);
}

TEST_CASE("typecheck: identity passthrough keeps the storage type") {
    TypeEnv env = env_with({ScalarType::U8});
    CHECK(typecheck_expr(*input_pixel(0), env) == ScalarType::U8);
    // arithmetic promotes into the internal domain
    CHECK(typecheck_expr(*add(input_pixel(0), input_pixel(0)), env) == ScalarType::I64);
}

TEST_CASE("typecheck: window offsets outside the window are rejected") {
    TypeEnv env;
    ExprInput img;
    img.kind = ExprInput::Kind::Image;
    img.format = ImageFormat::U8;
    img.type = ScalarType::U8;
    env.inputs = {img};
    env.allow_window = true;
    env.window_w = 3;
    env.window_h = 3;
    CHECK_NOTHROW((void)typecheck_expr(*window_pixel(0, 1, -1), env));
    try {
        (void)typecheck_expr(*window_pixel(0, 2, 0), env);
        FAIL("expected OffsetOutOfWindow");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OffsetOutOfWindow);
    }
}

TEST_CASE("typecheck: division by constant zero is rejected statically") {
    TypeEnv env = env_with({ScalarType::U8});
    CHECK_THROWS_AS((void)typecheck_expr(*div(input_pixel(0), const_i(0)), env), Error);
    CHECK_NOTHROW((void)typecheck_expr(*div(input_pixel(0), const_i(2)), env));
}

TEST_CASE("typecheck: bitwise ops reject float operands") {
    TypeEnv env = env_with({ScalarType::F32});
    CHECK_THROWS_AS((void)typecheck_expr(*binary(ExprOp::And, input_pixel(0), const_i(1)), env),
                    Error);
}

TEST_CASE("eval: select takes only one branch") {
    TableEnv env;
    ExprPtr e = select(binary(ExprOp::Lt, const_i(5), const_i(3)), const_i(1), const_i(0));
    CHECK(eval_expr(*e, env).i == 0);
    // the untaken branch would divide by zero
    TableEnv env2;
    env2.inputs = {Value::of_int(0)};
    ExprPtr guarded = select(binary(ExprOp::Gt, const_i(5), const_i(3)), const_i(7),
                             div(const_i(1), input_pixel(0)));
    CHECK(eval_expr(*guarded, env2).i == 7);
    CompiledExpr compiled(guarded);
    CHECK(compiled.run(env2).i == 7);
}

TEST_CASE("eval: runtime division by zero throws") {
    TableEnv env;
    env.inputs = {Value::of_int(0)};
    ExprPtr e = div(const_i(10), input_pixel(0));
    CHECK_THROWS_AS((void)eval_expr(*e, env), Error);
}

TEST_CASE("eval: gaussian float mask over a constant window returns the constant") {
    // the 3x3 blur coefficients sum to one, so a constant image is fixed
    const double coef[9] = {0.057118, 0.124758, 0.057118, 0.124758, 0.272496,
                            0.124758, 0.057118, 0.124758, 0.057118};
    TableEnv env;
    env.windows.resize(1);
    for (int i = 0; i < 9; ++i) {
        env.windows[0].push_back(Value::of_int(17));
        env.mask_values.push_back(Value::of_real(coef[i]));
    }
    double sum = 0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            ExprPtr tap = mul(mask_coef(dx, dy), window_pixel(0, dx, dy));
            sum += eval_expr(*tap, env).as_real();
        }
    CHECK(cast_value(ScalarType::U8, CastPolicy::Saturate, Value::of_real(sum)).i == 17);
}

TEST_CASE("eval is pure: repeated evaluation yields identical values") {
    TableEnv env;
    env.inputs = {Value::of_int(123), Value::of_real(4.5)};
    ExprPtr e = cast(ScalarType::S32, CastPolicy::Saturate,
                     add(mul(input_pixel(0), const_i(3)),
                         unary(ExprOp::Sqrt, input_pixel(1))));
    Value first = eval_expr(*e, env);
    for (int i = 0; i < 100; ++i) CHECK(eval_expr(*e, env) == first);
}

TEST_CASE("compiled programs match tree evaluation on random expressions") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> pick(0, 11);
    std::uniform_int_distribution<std::int64_t> lit(-100, 100);

    std::function<ExprPtr(int)> gen = [&](int depth) -> ExprPtr {
        if (depth <= 0) {
            switch (pick(rng) % 3) {
            case 0: return const_i(lit(rng));
            case 1: return input_pixel(0);
            default: return input_pixel(1);
            }
        }
        switch (pick(rng)) {
        case 0: return add(gen(depth - 1), gen(depth - 1));
        case 1: return sub(gen(depth - 1), gen(depth - 1));
        case 2: return mul(gen(depth - 1), gen(depth - 1));
        case 3: return binary(ExprOp::Min, gen(depth - 1), gen(depth - 1));
        case 4: return binary(ExprOp::Max, gen(depth - 1), gen(depth - 1));
        case 5: return binary(ExprOp::Xor, gen(depth - 1), gen(depth - 1));
        case 6:
            return select(binary(ExprOp::Lt, gen(depth - 1), gen(depth - 1)), gen(depth - 1),
                          gen(depth - 1));
        case 7: return unary(ExprOp::Neg, gen(depth - 1));
        case 8: return unary(ExprOp::Abs, gen(depth - 1));
        case 9: return cast(ScalarType::S16, CastPolicy::Saturate, gen(depth - 1));
        case 10: return cast(ScalarType::U8, CastPolicy::Wrap, gen(depth - 1));
        default: return binary(ExprOp::Shr, gen(depth - 1), const_i(lit(rng) & 7));
        }
    };

    for (int trial = 0; trial < 200; ++trial) {
        ExprPtr e = gen(4);
        CompiledExpr compiled(e);
        TableEnv env;
        for (int s = 0; s < 5; ++s) {
            env.inputs = {Value::of_int(lit(rng)), Value::of_int(lit(rng))};
            CHECK(compiled.run(env) == eval_expr(*e, env));
        }
    }
}

TEST_CASE("point kernels cannot carry window reads") {
    PointKernel pk;
    pk.arity = 1;
    pk.outputs.push_back(PointOutput{{window_pixel(0, 0, 0)}});
    KernelSignature sig({SignatureParam{Direction::Input, ObjKind::Image, {}, ScalarType::F64,
                                        ParamState::Required, "in"},
                         SignatureParam{Direction::Output, ObjKind::Image, {ImageFormat::U8},
                                        ScalarType::F64, ParamState::Required, "out"}});
    CHECK_THROWS_AS((void)make_point_kernel("bad", sig, pk), Error);
}

TEST_CASE("local kernels require odd window dimensions") {
    LocalKernel lk;
    lk.window_w = 4;
    lk.window_h = 3;
    lk.tap_body = window_pixel(0, 0, 0);
    KernelSignature sig({SignatureParam{Direction::Input, ObjKind::Image, {}, ScalarType::F64,
                                        ParamState::Required, "in"},
                         SignatureParam{Direction::Output, ObjKind::Image, {ImageFormat::U8},
                                        ScalarType::F64, ParamState::Required, "out"}});
    CHECK_THROWS_AS((void)make_local_kernel("bad", sig, lk), Error);
}

TEST_CASE("kernel typecheck enforces missing casts") {
    KernelSignature sig({SignatureParam{Direction::Input, ObjKind::Image, {ImageFormat::U8},
                                        ScalarType::F64, ParamState::Required, "in"},
                         SignatureParam{Direction::Output, ObjKind::Image, {ImageFormat::U8},
                                        ScalarType::F64, ParamState::Required, "out"}});
    ResolvedDesc in;
    in.kind = ObjKind::Image;
    in.width = 4;
    in.height = 4;
    in.format = ImageFormat::U8;

    PointKernel no_cast;
    no_cast.arity = 1;
    no_cast.outputs.push_back(PointOutput{{add(input_pixel(0), const_i(1))}});
    AbstractionPtr bad = make_point_kernel("bad", sig, no_cast);
    CHECK_THROWS_AS((void)typecheck(*bad, {in}), Error);

    PointKernel with_cast;
    with_cast.arity = 1;
    with_cast.outputs.push_back(PointOutput{
        {cast(ScalarType::U8, CastPolicy::Saturate, add(input_pixel(0), const_i(1)))}});
    AbstractionPtr good = make_point_kernel("good", sig, with_cast);
    CHECK(typecheck(*good, {in}) == std::vector<ScalarType>{ScalarType::U8});

    PointKernel identity;
    identity.arity = 1;
    identity.outputs.push_back(PointOutput{{input_pixel(0)}});
    AbstractionPtr id = make_point_kernel("identity", sig, identity);
    CHECK(typecheck(*id, {in}) == std::vector<ScalarType>{ScalarType::U8});
}
