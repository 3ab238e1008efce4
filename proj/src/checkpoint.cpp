#include "aplab/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "aplab/errors.hpp"

namespace aplab {

namespace {

constexpr char kMagic[4] = {'A', 'P', 'L', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    buf.push_back(static_cast<std::uint8_t>(v & 0xff));
    buf.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    buf.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    buf.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& buf, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u32(buf, bits);
}

class Cursor {
  public:
    Cursor(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = static_cast<std::uint32_t>(data_[pos_]) |
                          (static_cast<std::uint32_t>(data_[pos_ + 1]) << 8) |
                          (static_cast<std::uint32_t>(data_[pos_ + 2]) << 16) |
                          (static_cast<std::uint32_t>(data_[pos_ + 3]) << 24);
        pos_ += 4;
        return v;
    }

    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    const std::uint8_t* bytes(std::size_t n) {
        need(n);
        const std::uint8_t* p = data_ + pos_;
        pos_ += n;
        return p;
    }

    std::size_t remaining() const { return size_ - pos_; }

  private:
    void need(std::size_t n) const {
        if (size_ - pos_ < n) throw FormatError("checkpoint truncated");
    }

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

std::size_t mask_bytes(std::size_t in_dim, std::size_t out_dim) {
    return (in_dim * out_dim + 7) / 8;
}

}  // namespace

std::size_t checkpoint_byte_size(const MlpModel& model) {
    std::size_t total = 4 + 4 + 4;  // magic, version, n_layers
    for (const Layer& layer : model.layers) {
        const std::size_t in = layer.spec.in_dim;
        const std::size_t out = layer.spec.out_dim;
        total += 4 + 4 + 1 + 4;                      // dims, activation code, leaky slope
        total += 4 * in * out + 4 * out;             // weights, bias
        total += mask_bytes(in, out);                // packed mask
    }
    return total;
}

void save_checkpoint(const MlpModel& model, const PruneMask& mask, const std::string& path) {
    model.validate();
    check_congruent(model, mask);

    std::vector<std::uint8_t> buf;
    buf.reserve(checkpoint_byte_size(model));
    buf.insert(buf.end(), kMagic, kMagic + 4);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(model.layers.size()));

    for (std::size_t k = 0; k < model.layers.size(); ++k) {
        const Layer& layer = model.layers[k];
        const Mat& m = mask.layers[k];
        const Eigen::Index in = layer.weights.rows();
        const Eigen::Index out = layer.weights.cols();

        put_u32(buf, static_cast<std::uint32_t>(in));
        put_u32(buf, static_cast<std::uint32_t>(out));
        buf.push_back(static_cast<std::uint8_t>(layer.spec.activation.kind));
        put_f32(buf, layer.spec.activation.leaky_slope);

        for (Eigen::Index r = 0; r < in; ++r)
            for (Eigen::Index c = 0; c < out; ++c) put_f32(buf, layer.weights(r, c));
        for (Eigen::Index c = 0; c < out; ++c) put_f32(buf, layer.bias(c));

        const std::size_t nbits = static_cast<std::size_t>(in) * static_cast<std::size_t>(out);
        std::vector<std::uint8_t> packed(mask_bytes(in, out), 0);
        for (std::size_t b = 0; b < nbits; ++b) {
            const Eigen::Index r = static_cast<Eigen::Index>(b / out);
            const Eigen::Index c = static_cast<Eigen::Index>(b % out);
            if (m(r, c) != 0.0f) packed[b / 8] |= static_cast<std::uint8_t>(1u << (b % 8));
        }
        buf.insert(buf.end(), packed.begin(), packed.end());
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open checkpoint for writing: " + path);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw InputError("failed writing checkpoint: " + path);
}

std::pair<MlpModel, PruneMask> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open checkpoint: " + path);
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) throw InputError("failed reading checkpoint: " + path);

    Cursor cur(buf.data(), buf.size());
    const std::uint8_t* magic = cur.bytes(4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad checkpoint magic");
    const std::uint32_t version = cur.u32();
    if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t n_layers = cur.u32();
    if (n_layers == 0) throw FormatError("checkpoint has no layers");

    MlpModel model;
    PruneMask mask;
    model.layers.reserve(n_layers);
    mask.layers.reserve(n_layers);

    std::uint32_t prev_out = 0;
    for (std::uint32_t k = 0; k < n_layers; ++k) {
        const std::uint32_t in_dim = cur.u32();
        const std::uint32_t out_dim = cur.u32();
        if (in_dim == 0 || out_dim == 0) throw FormatError("checkpoint layer with zero dimension");
        if (k > 0 && in_dim != prev_out) throw FormatError("checkpoint layer dimensions do not chain");
        prev_out = out_dim;

        const std::uint8_t code = cur.u8();
        if (code > static_cast<std::uint8_t>(Activation::Tanh))
            throw FormatError("unknown activation code " + std::to_string(code));
        const float slope = cur.f32();

        ActivationKind act;
        act.kind = static_cast<Activation>(code);
        act.leaky_slope = slope;
        if (act.kind == Activation::LeakyReLU && !(slope > 0.0f))
            throw FormatError("leaky slope must be positive");

        Layer layer;
        layer.spec = LayerSpec{in_dim, out_dim, act};
        layer.weights.resize(in_dim, out_dim);
        layer.bias.resize(out_dim);
        for (std::uint32_t r = 0; r < in_dim; ++r)
            for (std::uint32_t c = 0; c < out_dim; ++c) layer.weights(r, c) = cur.f32();
        for (std::uint32_t c = 0; c < out_dim; ++c) layer.bias(c) = cur.f32();

        const std::size_t nbits = static_cast<std::size_t>(in_dim) * out_dim;
        const std::uint8_t* packed = cur.bytes(mask_bytes(in_dim, out_dim));
        Mat m(in_dim, out_dim);
        for (std::size_t b = 0; b < nbits; ++b) {
            const bool set = (packed[b / 8] >> (b % 8)) & 1u;
            m(static_cast<Eigen::Index>(b / out_dim), static_cast<Eigen::Index>(b % out_dim)) =
                set ? 1.0f : 0.0f;
        }
        // Trailing bits in the final byte must be zero padding.
        for (std::size_t b = nbits; b < mask_bytes(in_dim, out_dim) * 8; ++b)
            if ((packed[b / 8] >> (b % 8)) & 1u) throw FormatError("nonzero mask padding bits");

        model.layers.push_back(std::move(layer));
        mask.layers.push_back(std::move(m));
    }

    if (cur.remaining() != 0) throw FormatError("trailing bytes after checkpoint payload");
    return {std::move(model), std::move(mask)};
}

}  // namespace aplab
