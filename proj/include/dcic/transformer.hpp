/*
Copyright 2026 the dcic authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
you may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef DCIC_TRANSFORMER_HPP
#define DCIC_TRANSFORMER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "features.hpp"
#include "nn.hpp"
#include "schema.hpp"

namespace dcic {

struct TransformerConfig {
    int L = 2;          // memory buffer length in messages
    int d_model = 64;
    int heads = 4;
    int enc_layers = 2;
    int dec_layers = 2;
    int ffn_mult = 4;
    int R = 0;          // integers per message
    int s_output = 0;   // max field width
    uint32_t dict_size = 0; // flat dictionary size, padding token excluded

    int s_encoder() const { return L * R; }
    int vocab() const { return int(dict_size) + 1; }

    bool operator==(const TransformerConfig& o) const
    {
        return L == o.L && d_model == o.d_model && heads == o.heads &&
               enc_layers == o.enc_layers && dec_layers == o.dec_layers &&
               ffn_mult == o.ffn_mult && R == o.R && s_output == o.s_output &&
               dict_size == o.dict_size;
    }
};

// Encoder/decoder transformer mapping (u_enc, u_dec) to per-bit probabilities
// for the next field. Token embedding + sinusoidal positions, encoder
// self-attention over the L-message history, decoder self-attention over the
// revealed prefix with cross-attention to the encoder output, and a sigmoid
// head of width s_output read at the last decoder position.
template <typename S>
class Transformer {
public:
    Transformer() = default;

    Transformer(const TransformerConfig& cfg, uint64_t init_seed) : cfg_(cfg)
    {
        if (cfg.R <= 0 || cfg.s_output <= 0 || cfg.dict_size == 0)
            throw ConfigError("transformer: R, s_output and dict_size must be set");
        emb_ = nn::Embedding<S>(cfg.vocab(), cfg.d_model);
        int ffn_hidden = cfg.d_model * cfg.ffn_mult;
        for (int i = 0; i < cfg.enc_layers; i++)
            enc_.emplace_back(cfg.d_model, cfg.heads, ffn_hidden);
        for (int i = 0; i < cfg.dec_layers; i++)
            dec_.emplace_back(cfg.d_model, cfg.heads, ffn_hidden);
        head_ = nn::Dense<S>(cfg.d_model, cfg.s_output);
        pe_ = nn::sinusoidal_positions<S>(cfg.d_model, std::max(cfg.s_encoder(), cfg.R));

        Rng rng(init_seed);
        emb_.init(rng);
        for (auto& l : enc_)
            l.init(rng);
        for (auto& l : dec_)
            l.init(rng);
        head_.init(rng);
        collect();
    }

    // params_ holds pointers into this object, so copies and moves re-collect.
    Transformer(const Transformer& o)
        : schema_hash(o.schema_hash), field_order(o.field_order),
          best_val_bce(o.best_val_bce), best_epoch(o.best_epoch), cfg_(o.cfg_), emb_(o.emb_),
          enc_(o.enc_), dec_(o.dec_), head_(o.head_), pe_(o.pe_)
    {
        collect();
    }

    Transformer(Transformer&& o) noexcept
        : schema_hash(o.schema_hash), field_order(std::move(o.field_order)),
          best_val_bce(o.best_val_bce), best_epoch(o.best_epoch), cfg_(o.cfg_),
          emb_(std::move(o.emb_)), enc_(std::move(o.enc_)), dec_(std::move(o.dec_)),
          head_(std::move(o.head_)), pe_(std::move(o.pe_))
    {
        collect();
    }

    Transformer& operator=(Transformer o)
    {
        schema_hash = o.schema_hash;
        field_order = std::move(o.field_order);
        best_val_bce = o.best_val_bce;
        best_epoch = o.best_epoch;
        cfg_ = o.cfg_;
        emb_ = std::move(o.emb_);
        enc_ = std::move(o.enc_);
        dec_ = std::move(o.dec_);
        head_ = std::move(o.head_);
        pe_ = std::move(o.pe_);
        collect();
        return *this;
    }

    const TransformerConfig& config() const { return cfg_; }
    nn::ParamList<S>& params() { return params_; }

    struct EncCtx {
        std::vector<int32_t> tokens;
        std::vector<typename nn::EncoderLayer<S>::Ctx> layers;
        nn::Mat<S> out;
        int B = 0;
    };

    struct DecCtx {
        std::vector<int32_t> tokens;
        std::vector<typename nn::DecoderLayer<S>::Ctx> layers;
        typename nn::Dense<S>::Ctx head;
        nn::Mat<S> dec_out;
        int T = 0, B = 0;
    };

    // tokens: B concatenated sequences of s_encoder ints each.
    EncCtx encode(std::vector<int32_t> tokens, int B, bool keep_for_backward) const
    {
        int T = cfg_.s_encoder();
        if (int(tokens.size()) != T * B)
            throw ConfigError("transformer encode: token count mismatch");
        EncCtx ctx;
        ctx.B = B;
        nn::Mat<S> x = embed(tokens, T, B);
        ctx.layers.resize(enc_.size());
        for (size_t i = 0; i < enc_.size(); i++)
            x = enc_[i].forward(x, T, B, keep_for_backward ? &ctx.layers[i] : nullptr);
        ctx.out = std::move(x);
        if (keep_for_backward)
            ctx.tokens = std::move(tokens);
        return ctx;
    }

    // dec_tokens: B concatenated revealed prefixes of length T each (T >= 1;
    // an empty prefix is represented by one padding token). Returns logits
    // s_output x B pooled at each sample's last prefix position.
    nn::Mat<S> decode(const nn::Mat<S>& enc_out, std::vector<int32_t> dec_tokens, int T, int B,
                      DecCtx* ctx) const
    {
        if (int(dec_tokens.size()) != T * B)
            throw ConfigError("transformer decode: token count mismatch");
        if (T < 1 || T > cfg_.R)
            throw ConfigError("transformer decode: prefix length out of range");
        DecCtx local;
        DecCtx& c = ctx ? *ctx : local;
        c.T = T;
        c.B = B;
        nn::Mat<S> x = embed(dec_tokens, T, B);
        c.layers.resize(dec_.size());
        int Tenc = cfg_.s_encoder();
        for (size_t i = 0; i < dec_.size(); i++)
            x = dec_[i].forward(x, enc_out, T, Tenc, B, ctx ? &c.layers[i] : nullptr);
        if (ctx) {
            c.dec_out = x;
            c.tokens = std::move(dec_tokens);
        }
        nn::Mat<S> pooled(cfg_.d_model, B);
        for (int b = 0; b < B; b++)
            pooled.col(b) = x.col(Eigen::Index(b) * T + (T - 1));
        return head_.forward(pooled, ctx ? &c.head : nullptr);
    }

    // Accumulates the cross-attention gradient into denc (same shape as the
    // encoder output that produced this decode).
    void decode_backward(const nn::Mat<S>& dlogits, DecCtx& c, nn::Mat<S>& denc)
    {
        nn::Mat<S> dpooled = head_.backward(dlogits, c.head);
        nn::Mat<S> dx = nn::Mat<S>::Zero(cfg_.d_model, Eigen::Index(c.T) * c.B);
        for (int b = 0; b < c.B; b++)
            dx.col(Eigen::Index(b) * c.T + (c.T - 1)) = dpooled.col(b);
        for (size_t i = dec_.size(); i-- > 0;)
            dx = dec_[i].backward(dx, c.layers[i], denc);
        embed_backward(dx, c.tokens, c.T, c.B);
    }

    void encode_backward(const nn::Mat<S>& denc, EncCtx& c)
    {
        nn::Mat<S> dx = denc;
        for (size_t i = enc_.size(); i-- > 0;)
            dx = enc_[i].backward(dx, c.layers[i]);
        embed_backward(dx, c.tokens, cfg_.s_encoder(), c.B);
    }

    // Single-sample inference: probabilities for the next field's bits given
    // the revealed prefix. Reuses a per-message encoder pass.
    nn::Mat<S> encode_history(const std::vector<std::vector<uint32_t>>& history) const
    {
        FeaturePair f = build_features(history, {}, plan_ref(), cfg_.L);
        return encode(f.enc, 1, false).out;
    }

    std::vector<double> field_probabilities(const nn::Mat<S>& enc_out,
                                            const std::vector<uint32_t>& revealed,
                                            int valid_bits) const
    {
        std::vector<int32_t> toks;
        if (revealed.empty())
            toks.push_back(int32_t(cfg_.dict_size)); // padding token
        else
            for (uint32_t r : revealed)
                toks.push_back(int32_t(r));
        nn::Mat<S> logits = decode(enc_out, toks, int(toks.size()), 1, nullptr);
        std::vector<double> p(static_cast<size_t>(valid_bits));
        for (int j = 0; j < valid_bits; j++)
            p[size_t(j)] = 1.0 / (1.0 + std::exp(-double(logits(j, 0))));
        return p;
    }

    // --- metadata carried in the model file ---
    uint64_t schema_hash = 0;
    std::vector<int> field_order; // processing-order permutation of fields
    float best_val_bce = 0;
    uint32_t best_epoch = 0;

    void save(std::ostream& os) const
    {
        os.write("DCML", 4);
        write_le<uint16_t>(os, 1);
        write_le<uint8_t>(os, 0); // model type: transformer
        write_le<int32_t>(os, cfg_.L);
        write_le<int32_t>(os, cfg_.d_model);
        write_le<int32_t>(os, cfg_.heads);
        write_le<int32_t>(os, cfg_.enc_layers);
        write_le<int32_t>(os, cfg_.dec_layers);
        write_le<int32_t>(os, cfg_.ffn_mult);
        write_le<int32_t>(os, cfg_.R);
        write_le<int32_t>(os, cfg_.s_output);
        write_le<uint32_t>(os, cfg_.dict_size);
        write_le<uint64_t>(os, schema_hash);
        write_le<uint16_t>(os, uint16_t(field_order.size()));
        for (int p : field_order)
            write_le<uint16_t>(os, uint16_t(p));
        write_le<float>(os, best_val_bce);
        write_le<uint32_t>(os, best_epoch);
        nn::save_params(os, params_);
    }

    void save(const std::string& path) const
    {
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw ConfigError("cannot open model file for writing: " + path);
        save(os);
    }

    static Transformer<S> load(std::istream& is)
    {
        char magic[4];
        is.read(magic, 4);
        if (!is || std::memcmp(magic, "DCML", 4) != 0)
            throw CorruptInput("model file: bad magic");
        uint16_t version = read_le<uint16_t>(is);
        if (version != 1)
            throw CorruptInput("model file: unsupported version");
        uint8_t type = read_le<uint8_t>(is);
        if (type != 0)
            throw CorruptInput("model file: not a transformer model");
        TransformerConfig cfg;
        cfg.L = read_le<int32_t>(is);
        cfg.d_model = read_le<int32_t>(is);
        cfg.heads = read_le<int32_t>(is);
        cfg.enc_layers = read_le<int32_t>(is);
        cfg.dec_layers = read_le<int32_t>(is);
        cfg.ffn_mult = read_le<int32_t>(is);
        cfg.R = read_le<int32_t>(is);
        cfg.s_output = read_le<int32_t>(is);
        cfg.dict_size = read_le<uint32_t>(is);
        Transformer<S> m(cfg, 0);
        m.schema_hash = read_le<uint64_t>(is);
        uint16_t nperm = read_le<uint16_t>(is);
        m.field_order.resize(nperm);
        for (auto& p : m.field_order)
            p = read_le<uint16_t>(is);
        m.best_val_bce = read_le<float>(is);
        m.best_epoch = read_le<uint32_t>(is);
        nn::load_params(is, m.params_);
        return m;
    }

    static Transformer<S> load(const std::string& path)
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            throw ConfigError("cannot open model file: " + path);
        return load(is);
    }

private:
    // A plan is needed only for the padding token id in encode_history; keep a
    // minimal stand-in to avoid storing a full SegmentPlan.
    SegmentPlan plan_ref() const
    {
        SegmentPlan p;
        p.total_integers = cfg_.R;
        p.dict_size = cfg_.dict_size;
        return p;
    }

    nn::Mat<S> embed(const std::vector<int32_t>& tokens, int T, int B) const
    {
        for (int32_t t : tokens)
            if (t < 0 || t >= cfg_.vocab())
                throw CorruptInput("token id out of vocabulary range");
        nn::Mat<S> y = emb_.forward(tokens) * S(std::sqrt(double(cfg_.d_model)));
        for (int b = 0; b < B; b++)
            for (int pos = 0; pos < T; pos++)
                y.col(Eigen::Index(b) * T + pos) += pe_.col(pos);
        return y;
    }

    void embed_backward(const nn::Mat<S>& dy, const std::vector<int32_t>& tokens, int, int)
    {
        emb_.backward(dy * S(std::sqrt(double(cfg_.d_model))), tokens);
    }

    void collect()
    {
        params_.clear();
        emb_.collect_params(params_, "emb");
        for (size_t i = 0; i < enc_.size(); i++)
            enc_[i].collect_params(params_, "enc" + std::to_string(i));
        for (size_t i = 0; i < dec_.size(); i++)
            dec_[i].collect_params(params_, "dec" + std::to_string(i));
        head_.collect_params(params_, "head");
    }

    TransformerConfig cfg_;
    nn::Embedding<S> emb_;
    std::vector<nn::EncoderLayer<S>> enc_;
    std::vector<nn::DecoderLayer<S>> dec_;
    nn::Dense<S> head_;
    nn::Mat<S> pe_;
    nn::ParamList<S> params_;
};

// ---------------------------------------------------------------------------
// Training

struct TrainOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double weight_decay = 1e-4;
    int batch_messages = 16; // messages per step; x D fields gives the sample count
    int max_epochs = 50;
    int patience = 5;
    double validation_fraction = 0.1;
    size_t max_messages_per_epoch = 0; // 0 = full pass; else a reshuffled subset
    uint64_t seed = 1;
};

struct EpochLog {
    int epoch = 0;
    double train_bce = 0;    // Eq-style masked mean per field, nats
    double val_bce = 0;
    double val_bits_per_bit = 0;
};

struct TrainSummary {
    double best_val_bce = 0;
    int best_epoch = 0;
    std::vector<EpochLog> log;
};

namespace detail {

inline std::vector<int32_t> encoder_tokens_for(const std::vector<std::vector<uint32_t>>& ints,
                                               size_t t, const SegmentPlan& plan, int L)
{
    const int R = plan.total_integers;
    std::vector<int32_t> toks(size_t(L) * size_t(R), int32_t(plan.padding_token()));
    for (int l = 0; l < L; l++) {
        if (t < size_t(l + 1))
            break;
        const auto& m = ints[t - size_t(l) - 1];
        for (int j = 0; j < R; j++)
            toks[size_t(l) * size_t(R) + size_t(j)] = int32_t(m[size_t(j)]);
    }
    return toks;
}

// Per-field decoder prefix for the batch; empty prefixes become one pad token.
inline std::pair<std::vector<int32_t>, int> decoder_tokens_for(
    const std::vector<std::vector<uint32_t>>& ints, const std::vector<size_t>& batch,
    const SegmentPlan& plan, int k)
{
    int prefix = plan.field_first_segment[size_t(k)];
    int T = std::max(prefix, 1);
    std::vector<int32_t> toks;
    toks.reserve(size_t(T) * batch.size());
    for (size_t t : batch) {
        if (prefix == 0) {
            toks.push_back(int32_t(plan.padding_token()));
        } else {
            for (int j = 0; j < prefix; j++)
                toks.push_back(int32_t(ints[t][size_t(j)]));
        }
    }
    return {toks, T};
}

} // namespace detail

// One pass over `order` message indices. When `adam` is non-null this is a
// training pass (gradient step per batch); otherwise only losses accumulate.
// Returns (mean Eq-style BCE per field in nats, total bits, total valid bit count).
template <typename S>
inline std::tuple<double, double, uint64_t> transformer_pass(
    Transformer<S>& model, const DciSchema& schema, const SegmentPlan& plan,
    const std::vector<DciMessage>& messages, const std::vector<std::vector<uint32_t>>& ints,
    const std::vector<size_t>& order, int batch_messages, nn::Adam<S>* adam)
{
    const int D = schema.field_count();
    const int S_out = model.config().s_output;
    double loss_sum = 0;
    double bits_sum = 0;
    uint64_t field_samples = 0, bit_samples = 0;

    for (size_t start = 0; start < order.size(); start += size_t(batch_messages)) {
        size_t end = std::min(order.size(), start + size_t(batch_messages));
        std::vector<size_t> batch(order.begin() + long(start), order.begin() + long(end));
        int B = int(batch.size());

        std::vector<int32_t> enc_toks;
        enc_toks.reserve(size_t(model.config().s_encoder()) * size_t(B));
        for (size_t t : batch) {
            auto e = detail::encoder_tokens_for(ints, t, plan, model.config().L);
            enc_toks.insert(enc_toks.end(), e.begin(), e.end());
        }
        auto enc_ctx = model.encode(std::move(enc_toks), B, adam != nullptr);
        nn::Mat<S> denc = nn::Mat<S>::Zero(enc_ctx.out.rows(), enc_ctx.out.cols());

        double inv_norm = 1.0 / double(B * D);
        for (int k = 0; k < D; k++) {
            auto [dec_toks, T] = detail::decoder_tokens_for(ints, batch, plan, k);
            typename Transformer<S>::DecCtx dctx;
            nn::Mat<S> logits = model.decode(enc_ctx.out, std::move(dec_toks), T, B,
                                             adam ? &dctx : nullptr);
            nn::Mat<S> dlogits = nn::Mat<S>::Zero(S_out, B);
            for (int b = 0; b < B; b++) {
                FieldLabel lab = make_label(messages[batch[size_t(b)]], schema, k, S_out);
                std::vector<double> yhat(static_cast<size_t>(S_out));
                for (int j = 0; j < S_out; j++)
                    yhat[size_t(j)] = 1.0 / (1.0 + std::exp(-double(logits(j, b))));
                double l = bce_loss(yhat, lab);
                loss_sum += l;
                for (int j = 0; j < lab.valid; j++) {
                    double p = std::min(std::max(yhat[size_t(j)], kProbFloor), 1.0 - kProbFloor);
                    bits_sum += lab.y[size_t(j)] ? -std::log2(p) : -std::log2(1.0 - p);
                    if (adam)
                        dlogits(j, b) =
                            S((yhat[size_t(j)] - double(lab.y[size_t(j)])) / double(S_out) * inv_norm);
                }
                field_samples++;
                bit_samples += uint64_t(lab.valid);
            }
            if (adam)
                model.decode_backward(dlogits, dctx, denc);
        }
        if (adam) {
            model.encode_backward(denc, enc_ctx);
            adam->step(model.params());
            nn::zero_grads(model.params());
        }
    }
    double mean_loss = field_samples ? loss_sum / double(field_samples) : 0.0;
    if (!(mean_loss == mean_loss))
        throw VerificationError("transformer training diverged (NaN loss)");
    return {mean_loss, bits_sum, bit_samples};
}

// Trains on the leading (1 - validation_fraction) of `messages` (temporal
// order preserved), evaluates validation BCE each epoch, keeps the best
// parameters and stops early after `patience` epochs without improvement.
template <typename S>
inline TrainSummary train_transformer(Transformer<S>& model, const DciSchema& schema,
                                      const SegmentPlan& plan,
                                      const std::vector<DciMessage>& messages,
                                      const TrainOptions& opt)
{
    if (messages.size() < 2)
        throw ConfigError("transformer training needs at least 2 messages");
    std::vector<std::vector<uint32_t>> ints;
    ints.reserve(messages.size());
    for (const auto& m : messages)
        ints.push_back(message_to_integers(m, plan));

    size_t n_val = size_t(std::llround(opt.validation_fraction * double(messages.size())));
    n_val = std::min(std::max<size_t>(n_val, 1), messages.size() - 1);
    size_t n_train = messages.size() - n_val;

    std::vector<size_t> val_order(n_val);
    for (size_t i = 0; i < n_val; i++)
        val_order[i] = n_train + i;

    nn::Adam<S> adam(opt.lr, opt.beta1, opt.beta2, 1e-8, opt.weight_decay);
    TrainSummary summary;
    summary.best_val_bce = 1e300;

    std::vector<nn::Mat<S>> best_params;
    int since_best = 0;
    for (int epoch = 1; epoch <= opt.max_epochs; epoch++) {
        std::vector<size_t> order(n_train);
        for (size_t i = 0; i < n_train; i++)
            order[i] = i;
        Rng shuffle_rng(mix_seed(opt.seed, uint64_t(epoch)));
        for (size_t i = n_train; i > 1; i--)
            std::swap(order[i - 1], order[shuffle_rng.raw() % i]);
        if (opt.max_messages_per_epoch > 0 && order.size() > opt.max_messages_per_epoch)
            order.resize(opt.max_messages_per_epoch);

        auto [train_bce, tb, tn] =
            transformer_pass(model, schema, plan, messages, ints, order, opt.batch_messages, &adam);
        (void)tb;
        (void)tn;
        auto [val_bce, val_bits, val_bits_n] = transformer_pass(
            model, schema, plan, messages, ints, val_order, opt.batch_messages,
            static_cast<nn::Adam<S>*>(nullptr));

        EpochLog log;
        log.epoch = epoch;
        log.train_bce = train_bce;
        log.val_bce = val_bce;
        log.val_bits_per_bit = val_bits_n ? val_bits / double(val_bits_n) : 0.0;
        summary.log.push_back(log);

        if (val_bce < summary.best_val_bce) {
            summary.best_val_bce = val_bce;
            summary.best_epoch = epoch;
            best_params.clear();
            for (const auto& p : model.params())
                best_params.push_back(*p.value);
            since_best = 0;
        } else if (++since_best >= opt.patience) {
            break;
        }
    }

    if (!best_params.empty())
        for (size_t i = 0; i < model.params().size(); i++)
            *model.params()[i].value = best_params[i];
    model.best_val_bce = float(summary.best_val_bce);
    model.best_epoch = uint32_t(summary.best_epoch);
    return summary;
}

} // namespace dcic

#endif
