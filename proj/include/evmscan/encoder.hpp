// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "vocabulary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace evmscan
{
struct EncoderConfig
{
    size_t vocab_size = kTokenVocabSize;
    size_t d_model = 64;
    size_t n_layers = 2;
    size_t n_heads = 4;
    size_t max_len = 512;
    uint64_t seed = 0;

    size_t head_dim() const noexcept { return d_model / n_heads; }
    /// Feed-forward width is fixed at 4 * d_model.
    size_t d_ff() const noexcept { return 4 * d_model; }

    void validate() const
    {
        if (vocab_size == 0 || d_model == 0 || n_heads == 0 || max_len == 0)
            throw ConfigError("encoder dimensions must be positive");
        if (d_model % n_heads != 0)
            throw ConfigError("d_model (" + std::to_string(d_model) +
                              ") must be divisible by n_heads (" + std::to_string(n_heads) + ")");
    }

    /// Shape equality; the seed is not part of the shape.
    bool same_shape(const EncoderConfig& o) const noexcept
    {
        return vocab_size == o.vocab_size && d_model == o.d_model && n_layers == o.n_layers &&
               n_heads == o.n_heads && max_len == o.max_len;
    }
};

struct EncoderLayerWeights
{
    MatrixF attn_q, attn_q_bias;
    MatrixF attn_k, attn_k_bias;
    MatrixF attn_v, attn_v_bias;
    MatrixF attn_out, attn_out_bias;
    MatrixF ln1_gamma, ln1_beta;
    MatrixF ffn_in, ffn_in_bias;
    MatrixF ffn_out, ffn_out_bias;
    MatrixF ln2_gamma, ln2_beta;

    friend bool operator==(const EncoderLayerWeights&, const EncoderLayerWeights&) = default;
};

struct EncoderWeights
{
    EncoderConfig config;
    MatrixF token_embedding;     // vocab_size x d_model
    MatrixF position_embedding;  // max_len x d_model
    MatrixF segment_embedding;   // 2 x d_model
    std::vector<EncoderLayerWeights> layers;

    bool operator==(const EncoderWeights& o) const
    {
        return config.same_shape(o.config) && token_embedding == o.token_embedding &&
               position_embedding == o.position_embedding &&
               segment_embedding == o.segment_embedding && layers == o.layers;
    }
};

enum class TensorInit
{
    Uniform,
    Zeros,
    Ones,
};

/// Visits every tensor in interchange-file order with its name, expected shape
/// and initializer. `W` is EncoderWeights or const EncoderWeights.
template <typename W, typename F>
void visit_tensors(W& w, F&& fn)
{
    const auto& c = w.config;
    const size_t d = c.d_model;
    fn("token_embedding", w.token_embedding, c.vocab_size, d, TensorInit::Uniform);
    fn("position_embedding", w.position_embedding, c.max_len, d, TensorInit::Uniform);
    fn("segment_embedding", w.segment_embedding, size_t{2}, d, TensorInit::Uniform);
    for (size_t l = 0; l < w.layers.size(); ++l)
    {
        auto& L = w.layers[l];
        const std::string p = "layer" + std::to_string(l) + ".";
        fn(p + "attn_q.weight", L.attn_q, d, d, TensorInit::Uniform);
        fn(p + "attn_q.bias", L.attn_q_bias, size_t{1}, d, TensorInit::Zeros);
        fn(p + "attn_k.weight", L.attn_k, d, d, TensorInit::Uniform);
        fn(p + "attn_k.bias", L.attn_k_bias, size_t{1}, d, TensorInit::Zeros);
        fn(p + "attn_v.weight", L.attn_v, d, d, TensorInit::Uniform);
        fn(p + "attn_v.bias", L.attn_v_bias, size_t{1}, d, TensorInit::Zeros);
        fn(p + "attn_out.weight", L.attn_out, d, d, TensorInit::Uniform);
        fn(p + "attn_out.bias", L.attn_out_bias, size_t{1}, d, TensorInit::Zeros);
        fn(p + "ln1.gamma", L.ln1_gamma, size_t{1}, d, TensorInit::Ones);
        fn(p + "ln1.beta", L.ln1_beta, size_t{1}, d, TensorInit::Zeros);
        fn(p + "ffn_in.weight", L.ffn_in, d, c.d_ff(), TensorInit::Uniform);
        fn(p + "ffn_in.bias", L.ffn_in_bias, size_t{1}, c.d_ff(), TensorInit::Zeros);
        fn(p + "ffn_out.weight", L.ffn_out, c.d_ff(), d, TensorInit::Uniform);
        fn(p + "ffn_out.bias", L.ffn_out_bias, size_t{1}, d, TensorInit::Zeros);
        fn(p + "ln2.gamma", L.ln2_gamma, size_t{1}, d, TensorInit::Ones);
        fn(p + "ln2.beta", L.ln2_beta, size_t{1}, d, TensorInit::Zeros);
    }
}

/// Matrices and embedding tables ~ U[-0.05, 0.05]; biases 0; layer-norm gains 1.
inline EncoderWeights init_weights(const EncoderConfig& config)
{
    config.validate();
    EncoderWeights w;
    w.config = config;
    w.layers.resize(config.n_layers);
    SplitMix64 rng(config.seed);
    visit_tensors(w, [&](const std::string&, MatrixF& m, size_t rows, size_t cols, TensorInit init) {
        m = MatrixF(rows, cols);
        for (auto& v : m.data())
        {
            switch (init)
            {
            case TensorInit::Uniform:
                v = static_cast<float>(-0.05 + 0.1 * rng.unit());
                break;
            case TensorInit::Zeros:
                v = 0.0f;
                break;
            case TensorInit::Ones:
                v = 1.0f;
                break;
            }
        }
    });
    return w;
}

// ---------------------------------------------------------------------------
// Weight interchange file
//
//   evmscan-weights 1\n
//   vocab_size <int>\n d_model <int>\n n_layers <int>\n n_heads <int>\n max_len <int>\n
//   then, for each tensor in visit_tensors order:
//   tensor <name> <rows> <cols>\n  followed by rows*cols float32 little-endian, row-major
//   end\n
// ---------------------------------------------------------------------------

inline constexpr std::string_view kWeightsMagic = "evmscan-weights 1";

inline void write_weights(const EncoderWeights& w, std::ostream& os)
{
    const auto& c = w.config;
    os << kWeightsMagic << '\n'
       << "vocab_size " << c.vocab_size << '\n'
       << "d_model " << c.d_model << '\n'
       << "n_layers " << c.n_layers << '\n'
       << "n_heads " << c.n_heads << '\n'
       << "max_len " << c.max_len << '\n';
    visit_tensors(w, [&](const std::string& name, const MatrixF& m, size_t, size_t, TensorInit) {
        os << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        std::string buf;
        buf.reserve(m.size() * 4);
        for (const float v : m.data())
        {
            const auto bits = std::bit_cast<uint32_t>(v);
            for (int s = 0; s < 32; s += 8)
                buf.push_back(static_cast<char>((bits >> s) & 0xff));
        }
        os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    });
    os << "end\n";
}

inline void save_weights(const EncoderWeights& w, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw WeightFormatError("cannot open " + path + " for writing");
    write_weights(w, os);
    if (!os)
        throw WeightFormatError("write failed: " + path);
}

namespace detail
{
inline std::string read_header_line(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw WeightFormatError("unexpected end of file");
    return line;
}

inline size_t read_header_field(std::istream& is, std::string_view key)
{
    const auto line = read_header_line(is);
    std::istringstream ss(line);
    std::string k;
    long long v = -1;
    std::string rest;
    if (!(ss >> k >> v) || k != key || v < 0 || (ss >> rest))
        throw WeightFormatError("expected '" + std::string(key) + " <int>', got '" + line + "'");
    return static_cast<size_t>(v);
}
}  // namespace detail

/// Reads a weight file; the shape comes from its header.
inline EncoderWeights read_weights(std::istream& is)
{
    if (detail::read_header_line(is) != kWeightsMagic)
        throw WeightFormatError("bad magic line");
    EncoderWeights w;
    w.config.vocab_size = detail::read_header_field(is, "vocab_size");
    w.config.d_model = detail::read_header_field(is, "d_model");
    w.config.n_layers = detail::read_header_field(is, "n_layers");
    w.config.n_heads = detail::read_header_field(is, "n_heads");
    w.config.max_len = detail::read_header_field(is, "max_len");
    try
    {
        w.config.validate();
    }
    catch (const ConfigError& e)
    {
        throw WeightFormatError(e.what());
    }
    if (w.config.n_layers > 1024 || w.config.d_model > (1u << 16) || w.config.max_len > (1u << 20) ||
        w.config.vocab_size > (1u << 20))
        throw WeightFormatError("implausible header dimensions");
    w.layers.resize(w.config.n_layers);

    visit_tensors(w, [&](const std::string& name, MatrixF& m, size_t rows, size_t cols, TensorInit) {
        const auto line = detail::read_header_line(is);
        std::istringstream ss(line);
        std::string tag, got_name;
        size_t r = 0, c = 0;
        if (!(ss >> tag >> got_name >> r >> c) || tag != "tensor")
            throw WeightFormatError("malformed tensor header '" + line + "'");
        if (got_name != name)
            throw WeightFormatError("expected tensor " + name + ", found " + got_name);
        if (r != rows || c != cols)
            throw WeightFormatError("tensor " + name + " has shape " + std::to_string(r) + "x" +
                                    std::to_string(c) + ", config requires " +
                                    std::to_string(rows) + "x" + std::to_string(cols));
        std::string buf(rows * cols * 4, '\0');
        if (!is.read(buf.data(), static_cast<std::streamsize>(buf.size())))
            throw WeightFormatError("truncated data for tensor " + name);
        m = MatrixF(rows, cols);
        for (size_t i = 0; i < m.size(); ++i)
        {
            uint32_t bits = 0;
            for (int b = 0; b < 4; ++b)
                bits |= uint32_t{static_cast<uint8_t>(buf[4 * i + static_cast<size_t>(b)])} << (8 * b);
            const float v = std::bit_cast<float>(bits);
            if (!std::isfinite(v))
                throw WeightFormatError("non-finite value in tensor " + name);
            m.data()[i] = v;
        }
    });
    if (detail::read_header_line(is) != "end")
        throw WeightFormatError("missing end marker");
    return w;
}

inline EncoderWeights load_weights(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw WeightFormatError("cannot open " + path);
    return read_weights(is);
}

/// Loads and checks the header against `expected` (seed is ignored).
inline EncoderWeights load_weights(const std::string& path, const EncoderConfig& expected)
{
    auto w = load_weights(path);
    if (!w.config.same_shape(expected))
        throw WeightFormatError(path + ": header shape does not match the expected encoder config");
    w.config.seed = expected.seed;
    return w;
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

/// Composite input embedding: token + position + segment (segment id is 0).
inline MatrixD embed_tokens(std::span<const TokenId> tokens, const EncoderWeights& w)
{
    const auto& c = w.config;
    if (tokens.size() > c.max_len)
        throw LengthError(std::to_string(tokens.size()) + " tokens exceed max_len " +
                          std::to_string(c.max_len));
    MatrixD x(tokens.size(), c.d_model);
    for (size_t i = 0; i < tokens.size(); ++i)
    {
        if (tokens[i] >= c.vocab_size)
            throw VocabError("token id " + std::to_string(tokens[i]) + " outside vocabulary of " +
                             std::to_string(c.vocab_size));
        const auto tok = w.token_embedding.row(tokens[i]);
        const auto pos = w.position_embedding.row(i);
        const auto seg = w.segment_embedding.row(0);
        auto out = x.row(i);
        for (size_t j = 0; j < c.d_model; ++j)
            out[j] = static_cast<double>(tok[j]) + static_cast<double>(pos[j]) +
                     static_cast<double>(seg[j]);
    }
    return x;
}

/// Row-wise softmax(Q K^T / sqrt(d_k)) with keys where `key_mask` is false
/// excluded. A row with no admissible key gets all-zero weights.
inline MatrixD attention_weights(const MatrixD& q, const MatrixD& k, std::span<const bool> key_mask = {})
{
    assert(q.cols() == k.cols());
    assert(key_mask.empty() || key_mask.size() == k.rows());
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    MatrixD scores = matmul_transposed(q, k);
    for (size_t i = 0; i < scores.rows(); ++i)
    {
        auto r = scores.row(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < r.size(); ++j)
        {
            if (key_mask.empty() || key_mask[j])
                mx = std::max(mx, r[j] * scale);
        }
        if (!std::isfinite(mx))
        {
            std::fill(r.begin(), r.end(), 0.0);
            continue;
        }
        double sum = 0.0;
        for (size_t j = 0; j < r.size(); ++j)
        {
            r[j] = (key_mask.empty() || key_mask[j]) ? std::exp(r[j] * scale - mx) : 0.0;
            sum += r[j];
        }
        for (auto& v : r)
            v /= sum;
    }
    return scores;
}

/// softmax(Q K^T / sqrt(d_k)) V.
inline MatrixD self_attention(
    const MatrixD& q, const MatrixD& k, const MatrixD& v, std::span<const bool> key_mask = {})
{
    assert(k.rows() == v.rows());
    return matmul(attention_weights(q, k, key_mask), v);
}

namespace detail
{
inline MatrixD linear(const MatrixD& x, const MatrixF& weight, const MatrixF& bias)
{
    auto y = matmul(x, weight);
    add_row_vector(y, bias.row(0));
    return y;
}

inline void layer_norm_inplace(MatrixD& x, const MatrixF& gamma, const MatrixF& beta)
{
    constexpr double eps = 1e-5;
    const auto g = gamma.row(0);
    const auto b = beta.row(0);
    for (size_t i = 0; i < x.rows(); ++i)
    {
        auto r = x.row(i);
        double mean = 0.0;
        for (const auto v : r)
            mean += v;
        mean /= static_cast<double>(r.size());
        double var = 0.0;
        for (const auto v : r)
            var += (v - mean) * (v - mean);
        var /= static_cast<double>(r.size());
        const double inv = 1.0 / std::sqrt(var + eps);
        for (size_t j = 0; j < r.size(); ++j)
            r[j] = (r[j] - mean) * inv * static_cast<double>(g[j]) + static_cast<double>(b[j]);
    }
}

inline double gelu(double x)
{
    return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

inline MatrixD column_slice(const MatrixD& m, size_t first, size_t count)
{
    MatrixD out(m.rows(), count);
    for (size_t i = 0; i < m.rows(); ++i)
        std::copy_n(m.row(i).begin() + static_cast<ptrdiff_t>(first), count, out.row(i).begin());
    return out;
}

inline MatrixD multi_head_attention(
    const MatrixD& x, const EncoderLayerWeights& L, size_t n_heads, std::span<const bool> mask)
{
    const auto q = linear(x, L.attn_q, L.attn_q_bias);
    const auto k = linear(x, L.attn_k, L.attn_k_bias);
    const auto v = linear(x, L.attn_v, L.attn_v_bias);
    const size_t dk = x.cols() / n_heads;
    MatrixD concat(x.rows(), x.cols());
    for (size_t h = 0; h < n_heads; ++h)
    {
        const auto head = self_attention(column_slice(q, h * dk, dk), column_slice(k, h * dk, dk),
            column_slice(v, h * dk, dk), mask);
        for (size_t i = 0; i < x.rows(); ++i)
            std::copy_n(head.row(i).begin(), dk, concat.row(i).begin() + static_cast<ptrdiff_t>(h * dk));
    }
    return linear(concat, L.attn_out, L.attn_out_bias);
}

inline void encoder_layer(MatrixD& x, const EncoderLayerWeights& L, size_t n_heads, std::span<const bool> mask)
{
    const auto attn = multi_head_attention(x, L, n_heads, mask);
    for (size_t i = 0; i < x.size(); ++i)
        x.data()[i] += attn.data()[i];
    layer_norm_inplace(x, L.ln1_gamma, L.ln1_beta);

    auto hidden = linear(x, L.ffn_in, L.ffn_in_bias);
    for (auto& v : hidden.data())
        v = gelu(v);
    const auto ff = linear(hidden, L.ffn_out, L.ffn_out_bias);
    for (size_t i = 0; i < x.size(); ++i)
        x.data()[i] += ff.data()[i];
    layer_norm_inplace(x, L.ln2_gamma, L.ln2_beta);
}
}  // namespace detail

using EmbeddingVector = std::vector<double>;

/// Final hidden states, one row per input token. PAD positions are masked
/// out as attention keys.
inline MatrixD encode_hidden(std::span<const TokenId> tokens, const EncoderWeights& w)
{
    auto x = embed_tokens(tokens, w);
    const auto mask_storage = std::make_unique<bool[]>(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i)
        mask_storage[i] = tokens[i] != kPadToken;
    const std::span<const bool> mask{mask_storage.get(), tokens.size()};
    for (const auto& layer : w.layers)
        detail::encoder_layer(x, layer, w.config.n_heads, mask);
    return x;
}

/// Mean of the final hidden states over non-PAD positions. An input with no
/// non-PAD token encodes to the zero vector.
inline EmbeddingVector encode(std::span<const TokenId> tokens, const EncoderWeights& w)
{
    EmbeddingVector out(w.config.d_model, 0.0);
    const auto n_real = static_cast<size_t>(
        std::count_if(tokens.begin(), tokens.end(), [](TokenId t) { return t != kPadToken; }));
    if (n_real == 0)
    {
        if (tokens.size() > w.config.max_len)
            throw LengthError(std::to_string(tokens.size()) + " tokens exceed max_len " +
                              std::to_string(w.config.max_len));
        return out;
    }
    const auto h = encode_hidden(tokens, w);
    for (size_t i = 0; i < tokens.size(); ++i)
    {
        if (tokens[i] == kPadToken)
            continue;
        const auto r = h.row(i);
        for (size_t j = 0; j < out.size(); ++j)
            out[j] += r[j];
    }
    for (auto& v : out)
        v /= static_cast<double>(n_real);
    return out;
}

}  // namespace evmscan
