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

#ifndef DCIC_RNN_HPP
#define DCIC_RNN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include "features.hpp"
#include "nn.hpp"
#include "schema.hpp"

namespace dcic {

// Bit-wise recurrent baseline: one GRU invocation per DCI bit over a fixed
// window of the most recent bits of the concatenated message stream. The
// conceptual L*N + (i-1) history is truncated (or pad-extended) to
// window_bits, which keeps the per-bit cost flat.
struct RnnConfig {
    int window_bits = 48;
    int hidden = 24;
    int embed = 4;

    bool operator==(const RnnConfig& o) const
    {
        return window_bits == o.window_bits && hidden == o.hidden && embed == o.embed;
    }
};

constexpr int32_t kBitPadToken = 2; // tokens: 0, 1, pad

template <typename S>
class GruModel {
public:
    GruModel() = default;

    GruModel(const RnnConfig& cfg, uint64_t init_seed) : cfg_(cfg)
    {
        emb_ = nn::Embedding<S>(3, cfg.embed);
        int in = cfg.embed + cfg.hidden;
        wz_ = nn::Dense<S>(in, cfg.hidden);
        wr_ = nn::Dense<S>(in, cfg.hidden);
        wh_ = nn::Dense<S>(in, cfg.hidden);
        head_ = nn::Dense<S>(cfg.hidden, 1);
        Rng rng(init_seed);
        emb_.init(rng);
        wz_.init(rng);
        wr_.init(rng);
        wh_.init(rng);
        head_.init(rng);
        collect();
    }

    // params_ holds pointers into this object, so copies and moves re-collect.
    GruModel(const GruModel& o)
        : schema_hash(o.schema_hash), best_val_bce(o.best_val_bce), best_epoch(o.best_epoch),
          cfg_(o.cfg_), emb_(o.emb_), wz_(o.wz_), wr_(o.wr_), wh_(o.wh_), head_(o.head_)
    {
        collect();
    }

    GruModel(GruModel&& o) noexcept
        : schema_hash(o.schema_hash), best_val_bce(o.best_val_bce), best_epoch(o.best_epoch),
          cfg_(o.cfg_), emb_(std::move(o.emb_)), wz_(std::move(o.wz_)), wr_(std::move(o.wr_)),
          wh_(std::move(o.wh_)), head_(std::move(o.head_))
    {
        collect();
    }

    GruModel& operator=(GruModel o)
    {
        schema_hash = o.schema_hash;
        best_val_bce = o.best_val_bce;
        best_epoch = o.best_epoch;
        cfg_ = o.cfg_;
        emb_ = std::move(o.emb_);
        wz_ = std::move(o.wz_);
        wr_ = std::move(o.wr_);
        wh_ = std::move(o.wh_);
        head_ = std::move(o.head_);
        collect();
        return *this;
    }

    const RnnConfig& config() const { return cfg_; }
    nn::ParamList<S>& params() { return params_; }

    struct Ctx {
        std::vector<int32_t> tokens;
        std::vector<nn::Mat<S>> h;       // h[t] after step t, plus h[-1] at index 0
        std::vector<nn::Mat<S>> z, r, hc; // gate activations per step
        std::vector<typename nn::Dense<S>::Ctx> zc, rc, hcc;
        typename nn::Dense<S>::Ctx head;
        int B = 0;
    };

    // windows: B sample-major token sequences of window_bits each.
    // Returns one logit per sample.
    nn::Mat<S> forward(const std::vector<int32_t>& windows, int B, Ctx* ctx) const
    {
        const int W = cfg_.window_bits;
        if (int(windows.size()) != W * B)
            throw ConfigError("gru forward: window token count mismatch");
        Ctx local;
        Ctx& c = ctx ? *ctx : local;
        c.B = B;
        if (ctx) {
            c.h.resize(size_t(W) + 1);
            c.z.resize(size_t(W));
            c.r.resize(size_t(W));
            c.hc.resize(size_t(W));
            c.zc.resize(size_t(W));
            c.rc.resize(size_t(W));
            c.hcc.resize(size_t(W));
        }
        nn::Mat<S> h = nn::Mat<S>::Zero(cfg_.hidden, B);
        if (ctx)
            c.h[0] = h;
        std::vector<int32_t> step_tokens(static_cast<size_t>(B));
        for (int t = 0; t < W; t++) {
            for (int b = 0; b < B; b++)
                step_tokens[size_t(b)] = windows[size_t(b) * size_t(W) + size_t(t)];
            nn::Mat<S> x = emb_.forward(step_tokens);
            nn::Mat<S> xin(cfg_.embed + cfg_.hidden, B);
            xin.topRows(cfg_.embed) = x;
            xin.bottomRows(cfg_.hidden) = h;

            nn::Mat<S> z = sigmoid(wz_.forward(xin, ctx ? &c.zc[size_t(t)] : nullptr));
            nn::Mat<S> r = sigmoid(wr_.forward(xin, ctx ? &c.rc[size_t(t)] : nullptr));
            nn::Mat<S> xin_h = xin;
            xin_h.bottomRows(cfg_.hidden) = (r.array() * h.array()).matrix();
            nn::Mat<S> hc =
                wh_.forward(xin_h, ctx ? &c.hcc[size_t(t)] : nullptr).array().tanh().matrix();
            h = ((S(1) - z.array()) * h.array() + z.array() * hc.array()).matrix();
            if (ctx) {
                c.z[size_t(t)] = std::move(z);
                c.r[size_t(t)] = std::move(r);
                c.hc[size_t(t)] = std::move(hc);
                c.h[size_t(t) + 1] = h;
            }
        }
        if (ctx)
            c.tokens = windows;
        return head_.forward(h, ctx ? &c.head : nullptr);
    }

    void backward(const nn::Mat<S>& dlogits, Ctx& c)
    {
        const int W = cfg_.window_bits;
        nn::Mat<S> dh = head_.backward(dlogits, c.head);
        std::vector<int32_t> step_tokens(static_cast<size_t>(c.B));
        for (int t = W - 1; t >= 0; t--) {
            const nn::Mat<S>& z = c.z[size_t(t)];
            const nn::Mat<S>& r = c.r[size_t(t)];
            const nn::Mat<S>& hc = c.hc[size_t(t)];
            const nn::Mat<S>& hprev = c.h[size_t(t)];

            nn::Mat<S> dz = (dh.array() * (hc.array() - hprev.array())).matrix();
            nn::Mat<S> dhc = (dh.array() * z.array()).matrix();
            nn::Mat<S> dhprev = (dh.array() * (S(1) - z.array())).matrix();

            nn::Mat<S> da_h = (dhc.array() * (S(1) - hc.array().square())).matrix();
            nn::Mat<S> dxin_h = wh_.backward(da_h, c.hcc[size_t(t)]);
            nn::Mat<S> dx = dxin_h.topRows(cfg_.embed);
            nn::Mat<S> drh = dxin_h.bottomRows(cfg_.hidden);
            nn::Mat<S> dr = (drh.array() * hprev.array()).matrix();
            dhprev += (drh.array() * r.array()).matrix();

            nn::Mat<S> da_z = (dz.array() * z.array() * (S(1) - z.array())).matrix();
            nn::Mat<S> dxin = wz_.backward(da_z, c.zc[size_t(t)]);
            nn::Mat<S> da_r = (dr.array() * r.array() * (S(1) - r.array())).matrix();
            dxin += wr_.backward(da_r, c.rc[size_t(t)]);
            dx += dxin.topRows(cfg_.embed);
            dhprev += dxin.bottomRows(cfg_.hidden);

            for (int b = 0; b < c.B; b++)
                step_tokens[size_t(b)] = c.tokens[size_t(b) * size_t(W) + size_t(t)];
            emb_.backward(dx, step_tokens);
            dh = std::move(dhprev);
        }
    }

    double prob_one(const std::vector<int32_t>& window) const
    {
        nn::Mat<S> logit = forward(window, 1, nullptr);
        return 1.0 / (1.0 + std::exp(-double(logit(0, 0))));
    }

    uint64_t schema_hash = 0;
    float best_val_bce = 0;
    uint32_t best_epoch = 0;

    void save(std::ostream& os) const
    {
        os.write("DCML", 4);
        write_le<uint16_t>(os, 1);
        write_le<uint8_t>(os, 1); // model type: rnn
        write_le<int32_t>(os, cfg_.window_bits);
        write_le<int32_t>(os, cfg_.hidden);
        write_le<int32_t>(os, cfg_.embed);
        write_le<uint64_t>(os, schema_hash);
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

    static GruModel<S> load(std::istream& is)
    {
        char magic[4];
        is.read(magic, 4);
        if (!is || std::memcmp(magic, "DCML", 4) != 0)
            throw CorruptInput("model file: bad magic");
        if (read_le<uint16_t>(is) != 1)
            throw CorruptInput("model file: unsupported version");
        if (read_le<uint8_t>(is) != 1)
            throw CorruptInput("model file: not an rnn model");
        RnnConfig cfg;
        cfg.window_bits = read_le<int32_t>(is);
        cfg.hidden = read_le<int32_t>(is);
        cfg.embed = read_le<int32_t>(is);
        GruModel<S> m(cfg, 0);
        m.schema_hash = read_le<uint64_t>(is);
        m.best_val_bce = read_le<float>(is);
        m.best_epoch = read_le<uint32_t>(is);
        nn::load_params(is, m.params_);
        return m;
    }

    static GruModel<S> load(const std::string& path)
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            throw ConfigError("cannot open model file: " + path);
        return load(is);
    }

private:
    static nn::Mat<S> sigmoid(const nn::Mat<S>& x)
    {
        return (S(1) / (S(1) + (-x.array()).exp())).matrix();
    }

    void collect()
    {
        params_.clear();
        emb_.collect_params(params_, "emb");
        wz_.collect_params(params_, "wz");
        wr_.collect_params(params_, "wr");
        wh_.collect_params(params_, "wh");
        head_.collect_params(params_, "head");
    }

    RnnConfig cfg_;
    nn::Embedding<S> emb_;
    nn::Dense<S> wz_, wr_, wh_;
    nn::Dense<S> head_;
    nn::ParamList<S> params_;
};

// ---------------------------------------------------------------------------

struct RnnTrainOptions {
    double lr = 2e-3;
    int batch = 256;
    int max_epochs = 6;
    int patience = 2;
    double validation_fraction = 0.1;
    size_t max_samples_per_epoch = 30000;
    uint64_t seed = 1;
};

struct RnnTrainSummary {
    double best_val_bce = 0; // nats per bit
    int best_epoch = 0;
    std::vector<std::pair<double, double>> log; // (train, val) per epoch
};

namespace detail {

inline void fill_window(const std::vector<uint8_t>& stream, size_t bit_index, int W,
                        int32_t* out)
{
    for (int j = 0; j < W; j++) {
        long src = long(bit_index) - W + j;
        out[j] = src < 0 ? kBitPadToken : int32_t(stream[size_t(src)]);
    }
}

} // namespace detail

template <typename S>
inline RnnTrainSummary train_rnn(GruModel<S>& model, const std::vector<DciMessage>& messages,
                                 const RnnTrainOptions& opt)
{
    std::vector<uint8_t> stream;
    for (const auto& m : messages)
        stream.insert(stream.end(), m.bits.begin(), m.bits.end());
    if (stream.size() < 16)
        throw ConfigError("rnn training needs more bits");

    const int W = model.config().window_bits;
    size_t n_val = size_t(double(stream.size()) * opt.validation_fraction);
    n_val = std::min(std::max<size_t>(n_val, 1), stream.size() - 1);
    size_t n_train = stream.size() - n_val;

    auto run_batch = [&](const std::vector<size_t>& idx, bool train,
                         nn::Adam<S>& adam) -> double {
        double loss = 0;
        size_t done = 0;
        while (done < idx.size()) {
            size_t bsz = std::min(size_t(opt.batch), idx.size() - done);
            std::vector<int32_t> windows(bsz * size_t(W));
            for (size_t b = 0; b < bsz; b++)
                detail::fill_window(stream, idx[done + b], W, &windows[b * size_t(W)]);
            typename GruModel<S>::Ctx ctx;
            nn::Mat<S> logits = model.forward(windows, int(bsz), train ? &ctx : nullptr);
            nn::Mat<S> dlogits(1, Eigen::Index(bsz));
            for (size_t b = 0; b < bsz; b++) {
                double p = 1.0 / (1.0 + std::exp(-double(logits(0, Eigen::Index(b)))));
                double y = double(stream[idx[done + b]]);
                double pc = std::min(std::max(p, kProbFloor), 1.0 - kProbFloor);
                loss += -(y * std::log(pc) + (1 - y) * std::log(1 - pc));
                dlogits(0, Eigen::Index(b)) = S((p - y) / double(bsz));
            }
            if (train) {
                model.backward(dlogits, ctx);
                adam.step(model.params());
                nn::zero_grads(model.params());
            }
            done += bsz;
        }
        return idx.empty() ? 0.0 : loss / double(idx.size());
    };

    nn::Adam<S> adam(opt.lr);
    RnnTrainSummary summary;
    summary.best_val_bce = 1e300;
    std::vector<nn::Mat<S>> best_params;
    int since_best = 0;

    std::vector<size_t> val_idx;
    for (size_t i = n_train; i < stream.size(); i++)
        val_idx.push_back(i);

    for (int epoch = 1; epoch <= opt.max_epochs; epoch++) {
        std::vector<size_t> idx(n_train);
        for (size_t i = 0; i < n_train; i++)
            idx[i] = i;
        Rng rng(mix_seed(opt.seed, uint64_t(epoch), 0x52u));
        for (size_t i = n_train; i > 1; i--)
            std::swap(idx[i - 1], idx[rng.raw() % i]);
        if (idx.size() > opt.max_samples_per_epoch)
            idx.resize(opt.max_samples_per_epoch);

        double train_bce = run_batch(idx, true, adam);
        double val_bce = run_batch(val_idx, false, adam);
        if (!(train_bce == train_bce) || !(val_bce == val_bce))
            throw VerificationError("rnn training diverged (NaN loss)");
        summary.log.push_back({train_bce, val_bce});
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
