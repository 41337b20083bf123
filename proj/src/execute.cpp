#include "graphvx/execute.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <random>
#include <thread>

namespace gvx {

namespace {

std::size_t image_bytes(const ResolvedDesc& d) {
    return static_cast<std::size_t>(d.width) * static_cast<std::size_t>(d.height) *
           static_cast<std::size_t>(bytes_per_pixel(d.format));
}

} // namespace

Buffer Buffer::image(const ResolvedDesc& d) {
    Buffer b;
    b.desc = d;
    b.bytes.assign(image_bytes(d), 0);
    return b;
}

Buffer Buffer::scalar_value(ScalarType t, Value v) {
    Buffer b;
    b.desc.kind = ObjKind::Scalar;
    b.desc.element_type = t;
    b.scalar = v;
    return b;
}

Value Buffer::load(int x, int y, Channel ch) const {
    const int w = desc.width;
    switch (desc.format) {
    case ImageFormat::U8:
        return Value::of_int(bytes[static_cast<std::size_t>(y) * w + x]);
    case ImageFormat::U16: {
        const std::uint16_t* p = reinterpret_cast<const std::uint16_t*>(bytes.data());
        return Value::of_int(p[static_cast<std::size_t>(y) * w + x]);
    }
    case ImageFormat::S16: {
        const std::int16_t* p = reinterpret_cast<const std::int16_t*>(bytes.data());
        return Value::of_int(p[static_cast<std::size_t>(y) * w + x]);
    }
    case ImageFormat::S32: {
        const std::int32_t* p = reinterpret_cast<const std::int32_t*>(bytes.data());
        return Value::of_int(p[static_cast<std::size_t>(y) * w + x]);
    }
    case ImageFormat::F32: {
        const float* p = reinterpret_cast<const float*>(bytes.data());
        return Value::of_real(p[static_cast<std::size_t>(y) * w + x]);
    }
    case ImageFormat::RGB: {
        int c = ch == Channel::G ? 1 : ch == Channel::B ? 2 : 0;
        return Value::of_int(bytes[(static_cast<std::size_t>(y) * w + x) * 3 +
                                   static_cast<std::size_t>(c)]);
    }
    case ImageFormat::UYVY: {
        // packed U Y0 V Y1 per two pixels; luma is full resolution
        std::size_t row = static_cast<std::size_t>(y) * w * 2;
        if (ch == Channel::U) return Value::of_int(bytes[row + 4 * (x / 2)]);
        if (ch == Channel::V) return Value::of_int(bytes[row + 4 * (x / 2) + 2]);
        return Value::of_int(bytes[row + 2 * x + 1]);
    }
    case ImageFormat::UNRESOLVED: break;
    }
    throw Error(ErrorCode::BadFormat, "load from unresolved image");
}

void Buffer::store(int x, int y, Channel ch, const Value& v) {
    const int w = desc.width;
    switch (desc.format) {
    case ImageFormat::U8:
        bytes[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(v.i);
        return;
    case ImageFormat::U16: {
        std::uint16_t* p = reinterpret_cast<std::uint16_t*>(bytes.data());
        p[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint16_t>(v.i);
        return;
    }
    case ImageFormat::S16: {
        std::int16_t* p = reinterpret_cast<std::int16_t*>(bytes.data());
        p[static_cast<std::size_t>(y) * w + x] = static_cast<std::int16_t>(v.i);
        return;
    }
    case ImageFormat::S32: {
        std::int32_t* p = reinterpret_cast<std::int32_t*>(bytes.data());
        p[static_cast<std::size_t>(y) * w + x] = static_cast<std::int32_t>(v.i);
        return;
    }
    case ImageFormat::F32: {
        float* p = reinterpret_cast<float*>(bytes.data());
        p[static_cast<std::size_t>(y) * w + x] = static_cast<float>(v.as_real());
        return;
    }
    case ImageFormat::RGB: {
        int c = ch == Channel::G ? 1 : ch == Channel::B ? 2 : 0;
        bytes[(static_cast<std::size_t>(y) * w + x) * 3 + static_cast<std::size_t>(c)] =
            static_cast<std::uint8_t>(v.i);
        return;
    }
    default: break;
    }
    throw Error(ErrorCode::BadFormat, "store into unsupported format");
}

bool Buffer::byte_equal(const Buffer& other) const {
    if (desc.kind != other.desc.kind) return false;
    switch (desc.kind) {
    case ObjKind::Image: return bytes == other.bytes;
    case ObjKind::Scalar: return scalar == other.scalar;
    case ObjKind::Array:
        if (has_dist != other.has_dist) return false;
        if (has_dist) return dist.counts == other.dist.counts;
        return elements == other.elements;
    case ObjKind::Matrix: return elements == other.elements;
    }
    return false;
}

Buffer random_buffer(const ResolvedDesc& desc, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Buffer b;
    b.desc = desc;
    switch (desc.kind) {
    case ObjKind::Image: {
        b = Buffer::image(desc);
        if (desc.format == ImageFormat::F32) {
            float* p = reinterpret_cast<float*>(b.bytes.data());
            std::uniform_real_distribution<float> d(0.0f, 255.0f);
            for (std::size_t i = 0; i < b.bytes.size() / 4; ++i) p[i] = d(rng);
        } else if (desc.format == ImageFormat::S16) {
            std::int16_t* p = reinterpret_cast<std::int16_t*>(b.bytes.data());
            std::uniform_int_distribution<int> d(-32768, 32767);
            for (std::size_t i = 0; i < b.bytes.size() / 2; ++i)
                p[i] = static_cast<std::int16_t>(d(rng));
        } else if (desc.format == ImageFormat::U16) {
            std::uint16_t* p = reinterpret_cast<std::uint16_t*>(b.bytes.data());
            std::uniform_int_distribution<int> d(0, 65535);
            for (std::size_t i = 0; i < b.bytes.size() / 2; ++i)
                p[i] = static_cast<std::uint16_t>(d(rng));
        } else if (desc.format == ImageFormat::S32) {
            std::int32_t* p = reinterpret_cast<std::int32_t*>(b.bytes.data());
            std::uniform_int_distribution<std::int32_t> d(-100000, 100000);
            for (std::size_t i = 0; i < b.bytes.size() / 4; ++i) p[i] = d(rng);
        } else {
            std::uniform_int_distribution<int> d(0, 255);
            for (std::uint8_t& byte : b.bytes) byte = static_cast<std::uint8_t>(d(rng));
        }
        break;
    }
    case ObjKind::Scalar: {
        std::uniform_int_distribution<int> d(0, 255);
        b.scalar = is_float(desc.element_type)
                       ? Value::of_real(static_cast<double>(d(rng)))
                       : Value::of_int(d(rng));
        b.desc = desc;
        break;
    }
    case ObjKind::Array:
    case ObjKind::Matrix: {
        std::uniform_int_distribution<int> d(-8, 8);
        std::int64_t n = desc.kind == ObjKind::Array
                             ? desc.capacity
                             : static_cast<std::int64_t>(desc.rows) * desc.cols;
        for (std::int64_t i = 0; i < n; ++i)
            b.elements.push_back(is_float(desc.element_type)
                                     ? Value::of_real(d(rng))
                                     : Value::of_int(d(rng)));
        break;
    }
    }
    return b;
}

// ------------------------------------------------------------------ engine

namespace {

struct ReadCounter {
    std::int64_t reads = 0;
};

/// Per-node evaluation environment. Input slots follow the kernel's input
/// parameter order; scalars broadcast, images read at the current pixel.
/// During local-tap evaluation the current tap offset (tdx, tdy) shifts
/// every window and mask read, so written tap bodies address offsets
/// relative to the tap position.
class NodeEnv final : public EvalEnv {
public:
    std::vector<const Buffer*> ins;
    int px = 0, py = 0;

    // local-kernel state
    const LocalKernel* local = nullptr;
    const std::vector<Value>* mask_table = nullptr;
    int mask_w = 0, mask_h = 0;
    int tdx = 0, tdy = 0; // current tap offset

    // reduce combine state: slot 0 = accumulator, slot 1 = current pixel
    bool reduce_mode = false;
    Value acc_v, px_v;

    // post/finalize state: slot 0 = combined value; finalize adds the pixel
    // count at slot 1 and shifts the remaining kernel inputs up by one
    bool use_combined = false;
    Value combined;
    bool use_count = false;
    std::int64_t count = 0;
    int input_shift = 0;

    mutable ReadCounter* counter = nullptr;

    Value input(int index, Channel ch) const override {
        if (reduce_mode) return index == 0 ? acc_v : px_v;
        if (use_combined && index == 0) return combined;
        if (use_count && index == 1) return Value::of_int(count);
        const Buffer* b = ins[static_cast<std::size_t>(index - input_shift)];
        switch (b->desc.kind) {
        case ObjKind::Scalar: return b->scalar;
        case ObjKind::Image:
            if (counter) ++counter->reads;
            return b->load(px, py, ch);
        default:
            throw Error(ErrorCode::TypeMismatch, "pointwise read from non-image input");
        }
    }

    Value window(int index, int dx, int dy, Channel ch) const override {
        const Buffer* b = ins[static_cast<std::size_t>(index)];
        int x = px + tdx + dx;
        int y = py + tdy + dy;
        if (local->boundary == BoundaryMode::Constant) {
            if (x < 0 || y < 0 || x >= b->desc.width || y >= b->desc.height)
                return local->boundary_value;
        } else {
            // Clamp mode; Undefined borders are interior-only but composed
            // offsets may still peek past the window, clamp those too
            x = std::clamp(x, 0, b->desc.width - 1);
            y = std::clamp(y, 0, b->desc.height - 1);
        }
        if (counter) ++counter->reads;
        return b->load(x, y, ch);
    }

    Value mask(int dx, int dy) const override {
        int ix = std::clamp(tdx + dx + mask_w / 2, 0, mask_w - 1);
        int iy = std::clamp(tdy + dy + mask_h / 2, 0, mask_h - 1);
        return (*mask_table)[static_cast<std::size_t>(iy) * mask_w + ix];
    }

    Value array_element(int index, std::int64_t at) const override {
        const Buffer* b = ins[static_cast<std::size_t>(index - input_shift)];
        if (b->has_dist) {
            if (at < 0 || at >= b->dist.bins)
                throw Error(ErrorCode::ShapeMismatch, "distribution index out of range");
            return Value::of_int(b->dist.counts[static_cast<std::size_t>(at)]);
        }
        if (at < 0 || at >= static_cast<std::int64_t>(b->elements.size()))
            throw Error(ErrorCode::ShapeMismatch, "array index out of range");
        return b->elements[static_cast<std::size_t>(at)];
    }
};

class Engine {
public:
    Engine(const VerifiedGraph& vg, const InputMap& inputs) : vg_(vg), ctx_(vg.context()) {
        bind_inputs(inputs);
    }

    ExecutionReport run();

private:
    const VerifiedGraph& vg_;
    Context& ctx_;
    std::map<ObjectId, Buffer> store_;
    ExecCounters counters_;

    void bind_inputs(const InputMap& inputs);
    Buffer& buffer_of(ObjectId id);
    void execute(const OperatorNode& n);
    void exec_point(const OperatorNode& n, const AbstractionKernel& k);
    void exec_local(const OperatorNode& n, const AbstractionKernel& k);
    void exec_reduce(const OperatorNode& n, const AbstractionKernel& k);
    void exec_histogram(const OperatorNode& n, const AbstractionKernel& k);
    void exec_scan(const OperatorNode& n);
    void exec_scale(const OperatorNode& n, const AbstractionKernel& k);
    void exec_table(const OperatorNode& n, const AbstractionKernel& k);

    std::vector<const Buffer*> input_buffers(const OperatorNode& n,
                                             const KernelSignature& sig);
    std::vector<ObjectId> output_ids(const OperatorNode& n, const KernelSignature& sig);

};

void Engine::bind_inputs(const InputMap& inputs) {
    const AppGraph& g = vg_.graph();
    for (const auto& [id, buf] : inputs) {
        const DataObject* obj = ctx_.find(id);
        if (!obj) throw Error(ErrorCode::UnknownObject, "input #" + std::to_string(id), id);
        if (obj->is_virtual)
            throw Error(ErrorCode::AccessDenied,
                        "virtual object '" + obj->name + "' cannot be written from the host", id);
    }
    for (ObjectId id : g.data()) {
        const DataObject* obj = ctx_.find(id);
        if (!obj || obj->is_virtual) continue;
        if (g.producer(id) != kInvalidId) continue; // produced during execution
        auto it = inputs.find(id);
        if (it != inputs.end()) {
            const ResolvedDesc& want = vg_.desc(id);
            const Buffer& given = it->second;
            if (want.kind != given.desc.kind ||
                (want.kind == ObjKind::Image &&
                 (want.width != given.desc.width || want.height != given.desc.height ||
                  want.format != given.desc.format)))
                throw Error(ErrorCode::ShapeMismatch,
                            "input '" + obj->name + "' does not match its declaration", id);
            store_[id] = given;
            store_[id].id = id;
            continue;
        }
        // scalars and matrices may carry initial values on the object
        if (obj->kind == ObjKind::Scalar && obj->scalar_value) {
            Buffer b = Buffer::scalar_value(obj->element_type, *obj->scalar_value);
            b.id = id;
            b.desc = vg_.desc(id);
            store_[id] = std::move(b);
            continue;
        }
        if (obj->kind == ObjKind::Matrix && !obj->matrix_values.empty()) {
            Buffer b;
            b.id = id;
            b.desc = vg_.desc(id);
            b.elements = obj->matrix_values;
            store_[id] = std::move(b);
            continue;
        }
        if (!g.consumers(id).empty())
            throw Error(ErrorCode::MissingInput, "no buffer for input '" + obj->name + "'", id);
    }
}

Buffer& Engine::buffer_of(ObjectId id) {
    auto it = store_.find(id);
    if (it != store_.end()) return it->second;
    Buffer b;
    b.id = id;
    b.desc = vg_.desc(id);
    if (b.desc.kind == ObjKind::Image) b = Buffer::image(b.desc);
    b.id = id;
    b.desc = vg_.desc(id);
    auto [at, ok] = store_.emplace(id, std::move(b));
    return at->second;
}

std::vector<const Buffer*> Engine::input_buffers(const OperatorNode& n,
                                                 const KernelSignature& sig) {
    std::vector<const Buffer*> out;
    for (std::size_t i = 0; i < sig.params.size(); ++i) {
        if (sig.params[i].direction != Direction::Input) continue;
        const Binding* b = n.binding_for(static_cast<int>(i));
        if (!b) {
            out.push_back(nullptr);
            continue;
        }
        auto it = store_.find(b->object);
        if (it == store_.end())
            throw Error(ErrorCode::MissingInput,
                        "node '" + n.kernel + "' input #" + std::to_string(b->object) +
                            " has no buffer",
                        b->object);
        out.push_back(&it->second);
    }
    return out;
}

std::vector<ObjectId> Engine::output_ids(const OperatorNode& n, const KernelSignature& sig) {
    std::vector<ObjectId> out;
    for (std::size_t i = 0; i < sig.params.size(); ++i) {
        if (sig.params[i].direction != Direction::Output) continue;
        const Binding* b = n.binding_for(static_cast<int>(i));
        out.push_back(b ? b->object : kInvalidId);
    }
    return out;
}

/// Deterministic row-parallel loop: each worker owns a contiguous row band.
template <typename Fn>
void parallel_rows(int height, int width, Fn&& fn) {
    const std::int64_t pixels = static_cast<std::int64_t>(height) * width;
    unsigned workers = std::min(4u, std::max(1u, std::thread::hardware_concurrency()));
    if (pixels < 16384 || workers < 2) {
        fn(0, height);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    int rows_per = (height + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    for (unsigned t = 0; t < workers; ++t) {
        int y0 = static_cast<int>(t) * rows_per;
        int y1 = std::min(height, y0 + rows_per);
        if (y0 >= y1) break;
        threads.emplace_back([&, t, y0, y1] {
            try {
                fn(y0, y1);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (std::thread& th : threads) th.join();
    for (std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

void Engine::exec_point(const OperatorNode& n, const AbstractionKernel& k) {
    const PointKernel& pk = k.point();
    std::vector<const Buffer*> ins = input_buffers(n, k.signature);
    std::vector<ObjectId> outs = output_ids(n, k.signature);

    int w = 0, h = 0;
    for (const Buffer* b : ins)
        if (b && b->desc.kind == ObjKind::Image) {
            w = b->desc.width;
            h = b->desc.height;
            break;
        }
    if (w == 0) {
        const ResolvedDesc& d = vg_.desc(outs[0]);
        w = d.width;
        h = d.height;
    }

    struct OutSlot {
        Buffer* buf;
        std::vector<CompiledExpr> bodies;
    };
    std::vector<OutSlot> slots;
    for (std::size_t oi = 0; oi < pk.outputs.size() && oi < outs.size(); ++oi) {
        if (outs[oi] == kInvalidId) continue;
        OutSlot slot;
        slot.buf = &buffer_of(outs[oi]);
        for (const ExprPtr& body : pk.outputs[oi].channel_bodies)
            slot.bodies.emplace_back(body);
        slots.push_back(std::move(slot));
    }

    std::int64_t reads = 0, writes = 0;
    std::mutex m;
    parallel_rows(h, w, [&](int y0, int y1) {
        NodeEnv env;
        env.ins = ins;
        ReadCounter rc;
        env.counter = &rc;
        std::int64_t local_writes = 0;
        for (int y = y0; y < y1; ++y) {
            env.py = y;
            for (int x = 0; x < w; ++x) {
                env.px = x;
                for (OutSlot& slot : slots) {
                    const ImageFormat f = slot.buf->desc.format;
                    if (slot.bodies.size() == 3 && f == ImageFormat::RGB) {
                        slot.buf->store(x, y, Channel::R, slot.bodies[0].run(env));
                        slot.buf->store(x, y, Channel::G, slot.bodies[1].run(env));
                        slot.buf->store(x, y, Channel::B, slot.bodies[2].run(env));
                    } else {
                        slot.buf->store(x, y, Channel::C0, slot.bodies[0].run(env));
                    }
                    ++local_writes;
                }
            }
        }
        std::lock_guard<std::mutex> lock(m);
        reads += rc.reads;
        writes += local_writes;
    });
    counters_.pixels_read += reads;
    counters_.pixels_written += writes;
}

namespace sorting_network {
// 19-exchange median network for 9 elements.
inline void sort2(Value& a, Value& b) {
    bool swap = a.real || b.real ? a.as_real() > b.as_real() : a.i > b.i;
    if (swap) std::swap(a, b);
}
inline Value median9(Value v[9]) {
    sort2(v[1], v[2]); sort2(v[4], v[5]); sort2(v[7], v[8]);
    sort2(v[0], v[1]); sort2(v[3], v[4]); sort2(v[6], v[7]);
    sort2(v[1], v[2]); sort2(v[4], v[5]); sort2(v[7], v[8]);
    sort2(v[0], v[3]); sort2(v[5], v[8]); sort2(v[4], v[7]);
    sort2(v[3], v[6]); sort2(v[1], v[4]); sort2(v[2], v[5]);
    sort2(v[4], v[7]); sort2(v[4], v[2]); sort2(v[6], v[4]);
    sort2(v[4], v[2]);
    return v[4];
}
} // namespace sorting_network

void Engine::exec_local(const OperatorNode& n, const AbstractionKernel& k) {
    const LocalKernel& lk = k.local();
    std::vector<const Buffer*> ins = input_buffers(n, k.signature);
    std::vector<ObjectId> outs = output_ids(n, k.signature);
    Buffer& out = buffer_of(outs[0]);

    const int w = out.desc.width;
    const int h = out.desc.height;
    const int hw = lk.window_w / 2;
    const int hh = lk.window_h / 2;

    // mask: the kernel's own table or the first bound matrix
    std::vector<Value> matrix_mask;
    const std::vector<Value>* mask = &lk.mask;
    if (lk.mask.empty()) {
        for (const Buffer* b : ins)
            if (b && b->desc.kind == ObjKind::Matrix) {
                matrix_mask = b->elements;
                mask = &matrix_mask;
                break;
            }
    }

    CompiledExpr tap(lk.tap_body);
    CompiledExpr post;
    if (lk.post_body) post = CompiledExpr(lk.post_body);

    const ScalarType out_type = scalar_of(out.desc.format);
    const bool undefined = lk.boundary == BoundaryMode::Undefined;

    std::int64_t reads = 0, writes = 0;
    std::mutex m;
    parallel_rows(h, w, [&](int y0, int y1) {
        NodeEnv env;
        env.ins = ins;
        env.local = &lk;
        env.mask_table = mask;
        env.mask_w = lk.window_w;
        env.mask_h = lk.window_h;
        ReadCounter rc;
        env.counter = &rc;
        std::int64_t local_writes = 0;
        for (int y = y0; y < y1; ++y) {
            env.py = y;
            for (int x = 0; x < w; ++x) {
                env.px = x;
                if (undefined && (x < hw || y < hh || x >= w - hw || y >= h - hh)) {
                    out.store(x, y, Channel::C0, cast_value(out_type, CastPolicy::Saturate,
                                                            Value::of_int(0)));
                    ++local_writes;
                    continue;
                }
                Value combined;
                if (lk.median3x3) {
                    Value taps[9];
                    int idx = 0;
                    for (int dy = -hh; dy <= hh; ++dy)
                        for (int dx = -hw; dx <= hw; ++dx) {
                            env.tdx = dx;
                            env.tdy = dy;
                            taps[idx++] = tap.run(env);
                        }
                    combined = sorting_network::median9(taps);
                } else {
                    bool first = true;
                    for (int dy = -hh; dy <= hh; ++dy) {
                        for (int dx = -hw; dx <= hw; ++dx) {
                            env.tdx = dx;
                            env.tdy = dy;
                            Value v = tap.run(env);
                            if (first) {
                                combined = v;
                                first = false;
                                continue;
                            }
                            switch (lk.combine) {
                            case CombineMode::Sum:
                                combined = combined.real || v.real
                                               ? Value::of_real(combined.as_real() + v.as_real())
                                               : Value::of_int(combined.i + v.i);
                                break;
                            case CombineMode::Min:
                                combined = combined.real || v.real
                                               ? Value::of_real(std::min(combined.as_real(),
                                                                         v.as_real()))
                                               : Value::of_int(std::min(combined.i, v.i));
                                break;
                            case CombineMode::Max:
                                combined = combined.real || v.real
                                               ? Value::of_real(std::max(combined.as_real(),
                                                                         v.as_real()))
                                               : Value::of_int(std::max(combined.i, v.i));
                                break;
                            }
                        }
                    }
                }
                Value result;
                if (lk.post_body) {
                    env.tdx = 0;
                    env.tdy = 0;
                    env.use_combined = true;
                    env.combined = combined;
                    result = post.run(env);
                    env.use_combined = false;
                } else {
                    result = combined;
                }
                out.store(x, y, Channel::C0, result);
                ++local_writes;
            }
        }
        std::lock_guard<std::mutex> lock(m);
        reads += rc.reads;
        writes += local_writes;
    });
    counters_.pixels_read += reads;
    counters_.pixels_written += writes;
}

void Engine::exec_reduce(const OperatorNode& n, const AbstractionKernel& k) {
    const ReduceKernel& rk = k.reduce();
    std::vector<const Buffer*> ins = input_buffers(n, k.signature);
    std::vector<ObjectId> outs = output_ids(n, k.signature);
    const Buffer* img = ins[0];
    const int w = img->desc.width;
    const int h = img->desc.height;

    CompiledExpr combine(rk.combine);
    NodeEnv env;
    env.ins = ins;
    ReadCounter rc;
    env.counter = &rc;

    Value acc = rk.init;
    bool seeded = !rk.seed_first;
    int arg_x = 0, arg_y = 0;
    env.reduce_mode = true;
    // fixed row-major combination order keeps reductions bit-deterministic
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            ++rc.reads;
            Value px = img->load(x, y, Channel::C0);
            if (!seeded) {
                acc = px;
                seeded = true;
                arg_x = x;
                arg_y = y;
                continue;
            }
            if (rk.track == ReduceKernel::Track::ArgMin) {
                bool better = px.real || acc.real ? px.as_real() < acc.as_real() : px.i < acc.i;
                if (better) {
                    arg_x = x;
                    arg_y = y;
                }
            } else if (rk.track == ReduceKernel::Track::ArgMax) {
                bool better = px.real || acc.real ? px.as_real() > acc.as_real() : px.i > acc.i;
                if (better) {
                    arg_x = x;
                    arg_y = y;
                }
            }
            env.acc_v = acc;
            env.px_v = px;
            acc = combine.run(env);
        }
    }
    env.reduce_mode = false;

    Value result = acc;
    if (rk.finalize) {
        env.use_combined = true;
        env.combined = acc;
        env.use_count = true;
        env.count = static_cast<std::int64_t>(w) * h;
        env.input_shift = 1; // finalize slot k >= 2 reads kernel input k-1
        CompiledExpr fin(rk.finalize);
        result = fin.run(env);
        env.input_shift = 0;
    }

    Buffer& out = buffer_of(outs[0]);
    out.scalar = result;
    counters_.pixels_read += rc.reads;
    ++counters_.pixels_written;

    if (outs.size() > 1 && outs[1] != kInvalidId && rk.track != ReduceKernel::Track::None) {
        Buffer& loc = buffer_of(outs[1]);
        loc.elements = {Value::of_int(arg_x), Value::of_int(arg_y)};
        ++counters_.pixels_written;
    }
}

void Engine::exec_histogram(const OperatorNode& n, const AbstractionKernel& k) {
    const HistogramKernel& hk = k.histogram();
    std::vector<const Buffer*> ins = input_buffers(n, k.signature);
    std::vector<ObjectId> outs = output_ids(n, k.signature);
    const Buffer* img = ins[0];

    CompiledExpr bin_of(hk.bin_of);
    NodeEnv env;
    env.ins = ins;
    ReadCounter rc;
    env.counter = &rc;

    Buffer& out = buffer_of(outs[0]);
    out.has_dist = true;
    out.dist.bins = hk.bins;
    out.dist.offset = hk.offset;
    out.dist.range = hk.range;
    out.dist.counts.assign(static_cast<std::size_t>(hk.bins), 0);

    for (int y = 0; y < img->desc.height; ++y) {
        env.py = y;
        for (int x = 0; x < img->desc.width; ++x) {
            env.px = x;
            std::int64_t bin = bin_of.run(env).as_int();
            if (bin >= 0 && bin < hk.bins) ++out.dist.counts[static_cast<std::size_t>(bin)];
        }
    }
    counters_.pixels_read += rc.reads;
    counters_.pixels_written += hk.bins;
}

void Engine::exec_scan(const OperatorNode& n) {
    const AbstractionKernel& k = *n.abstraction;
    std::vector<const Buffer*> ins = input_buffers(n, k.signature);
    std::vector<ObjectId> outs = output_ids(n, k.signature);
    const Buffer* img = ins[0];
    Buffer& out = buffer_of(outs[0]);
    const int w = img->desc.width;
    const int h = img->desc.height;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            ++counters_.pixels_read;
            std::int64_t v = img->load(x, y, Channel::C0).i;
            if (x > 0) v += out.load(x - 1, y, Channel::C0).i;
            if (y > 0) v += out.load(x, y - 1, Channel::C0).i;
            if (x > 0 && y > 0) v -= out.load(x - 1, y - 1, Channel::C0).i;
            out.store(x, y, Channel::C0,
                      cast_value(ScalarType::S32, CastPolicy::Saturate, Value::of_int(v)));
            ++counters_.pixels_written;
        }
    }
}

void Engine::exec_scale(const OperatorNode& n, const AbstractionKernel& k) {
    const ScaleKernel& sk = k.scale();
    std::vector<const Buffer*> ins = input_buffers(n, k.signature);
    std::vector<ObjectId> outs = output_ids(n, k.signature);
    const Buffer* src = ins[0];
    Buffer& out = buffer_of(outs[0]);
    const int sw = src->desc.width, sh = src->desc.height;
    const int dw = out.desc.width, dh = out.desc.height;
    const ScalarType t = scalar_of(out.desc.format);

    std::int64_t reads = 0, writes = 0;
    std::mutex m;
    parallel_rows(dh, dw, [&](int y0, int y1) {
        std::int64_t lr = 0, lw = 0;
        for (int y = y0; y < y1; ++y) {
            double yin = (y + 0.5) * static_cast<double>(sh) / dh - 0.5;
            for (int x = 0; x < dw; ++x) {
                double xin = (x + 0.5) * static_cast<double>(sw) / dw - 0.5;
                Value v;
                if (sk.interp == InterpMode::Nearest) {
                    int xi = std::clamp(static_cast<int>(std::floor(xin + 0.5)), 0, sw - 1);
                    int yi = std::clamp(static_cast<int>(std::floor(yin + 0.5)), 0, sh - 1);
                    ++lr;
                    v = src->load(xi, yi, Channel::C0);
                } else {
                    int x0 = std::clamp(static_cast<int>(std::floor(xin)), 0, sw - 1);
                    int y0i = std::clamp(static_cast<int>(std::floor(yin)), 0, sh - 1);
                    int x1 = std::min(x0 + 1, sw - 1);
                    int y1i = std::min(y0i + 1, sh - 1);
                    double fx = std::clamp(xin - x0, 0.0, 1.0);
                    double fy = std::clamp(yin - y0i, 0.0, 1.0);
                    lr += 4;
                    double p00 = src->load(x0, y0i, Channel::C0).as_real();
                    double p10 = src->load(x1, y0i, Channel::C0).as_real();
                    double p01 = src->load(x0, y1i, Channel::C0).as_real();
                    double p11 = src->load(x1, y1i, Channel::C0).as_real();
                    double r = p00 * (1 - fx) * (1 - fy) + p10 * fx * (1 - fy) +
                               p01 * (1 - fx) * fy + p11 * fx * fy;
                    v = Value::of_real(r);
                }
                out.store(x, y, Channel::C0, cast_value(t, CastPolicy::Saturate, v));
                ++lw;
            }
        }
        std::lock_guard<std::mutex> lock(m);
        reads += lr;
        writes += lw;
    });
    counters_.pixels_read += reads;
    counters_.pixels_written += writes;
}

void Engine::exec_table(const OperatorNode& n, const AbstractionKernel& k) {
    std::vector<const Buffer*> ins = input_buffers(n, k.signature);
    std::vector<ObjectId> outs = output_ids(n, k.signature);
    const Buffer* hist = ins[0];
    if (!hist->has_dist)
        throw Error(ErrorCode::ShapeMismatch, "table step expects a distribution input");

    // histogram-equalization LUT: lut[i] scales the cumulative distribution
    // to [0, 255], identity when the image is constant
    const std::vector<std::int64_t>& counts = hist->dist.counts;
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    std::vector<std::int64_t> cdf(counts.size(), 0);
    std::int64_t running = 0;
    std::int64_t cdf_min = 0;
    bool found_min = false;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        running += counts[i];
        cdf[i] = running;
        if (!found_min && counts[i] > 0) {
            cdf_min = running;
            found_min = true;
        }
    }

    Buffer& out = buffer_of(outs[0]);
    out.elements.clear();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::int64_t v;
        if (!found_min || total == cdf_min) {
            v = static_cast<std::int64_t>(i);
        } else {
            double scaled = 255.0 * static_cast<double>(cdf[i] - cdf_min) /
                            static_cast<double>(total - cdf_min);
            v = std::llround(scaled);
        }
        out.elements.push_back(Value::of_int(std::clamp<std::int64_t>(v, 0, 255)));
    }
    counters_.pixels_written += static_cast<std::int64_t>(counts.size());
}

void Engine::execute(const OperatorNode& n) {
    if (!n.abstraction)
        throw Error(ErrorCode::UnknownKernel,
                    "node '" + n.kernel + "' has no abstraction kernel (expand first)");
    const AbstractionKernel& k = *n.abstraction;
    ++counters_.kernel_launches;
    switch (k.kind) {
    case AbstractionKind::Point: exec_point(n, k); break;
    case AbstractionKind::Local: exec_local(n, k); break;
    case AbstractionKind::Reduce: exec_reduce(n, k); break;
    case AbstractionKind::Histogram: exec_histogram(n, k); break;
    case AbstractionKind::Scan: exec_scan(n); break;
    case AbstractionKind::Scale: exec_scale(n, k); break;
    case AbstractionKind::Table: exec_table(n, k); break;
    }
}

ExecutionReport Engine::run() {
    const AppGraph& g = vg_.graph();
    for (ObjectId nid : g.topo_sort()) execute(*g.node(nid));

    ExecutionReport report;
    report.counters = counters_;
    for (ObjectId id : g.data()) {
        const DataObject* obj = ctx_.find(id);
        if (!obj || obj->is_virtual) continue;
        if (g.producer(id) == kInvalidId) continue;
        auto it = store_.find(id);
        if (it != store_.end()) report.outputs[id] = it->second;
    }
    return report;
}

} // namespace

ExecutionReport run_naive(const VerifiedGraph& g, const InputMap& inputs) {
    if (!g.stamped()) throw Error(ErrorCode::UnstampedGraph, "execution needs a verified graph");
    Engine engine(g, inputs);
    ExecutionReport report = engine.run();
    // naive schedule: one upload and one download per operator node
    report.counters.transfers_executed =
        static_cast<std::int64_t>(g.graph().nodes().size()) * 2;
    return report;
}

ExecutionReport run_plan(const OptimizedPlan& plan, const InputMap& inputs) {
    if (!plan.fused.stamped())
        throw Error(ErrorCode::UnstampedGraph, "plan execution needs a verified fused graph");
    Engine engine(plan.fused, inputs);
    ExecutionReport report = engine.run();
    report.counters.transfers_executed = plan.transfers.optimized_count();
    return report;
}

} // namespace gvx
