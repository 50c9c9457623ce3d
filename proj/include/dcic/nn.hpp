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

#ifndef DCIC_NN_HPP
#define DCIC_NN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "common.hpp"
#include "tracegen.hpp" // Rng

namespace dcic {
namespace nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Named view of one parameter tensor and its gradient accumulator. Everything
// that owns parameters exposes them through collect_params(); the optimizer,
// the serializer and the finite-difference checker all walk the same list.
template <typename S>
struct ParamRef {
    std::string name;
    Mat<S>* value;
    Mat<S>* grad;
};

template <typename S>
using ParamList = std::vector<ParamRef<S>>;

template <typename S>
inline void zero_grads(ParamList<S>& params)
{
    for (auto& p : params)
        p.grad->setZero();
}

// ---------------------------------------------------------------------------

template <typename S>
class Dense {
public:
    Dense() = default;
    Dense(int in, int out)
    {
        W.setZero(out, in);
        b.setZero(out, 1);
        gW.setZero(out, in);
        gb.setZero(out, 1);
    }

    void init(Rng& rng)
    {
        S scale = S(std::sqrt(2.0 / double(W.rows() + W.cols())));
        for (Eigen::Index j = 0; j < W.cols(); j++)
            for (Eigen::Index i = 0; i < W.rows(); i++)
                W(i, j) = S(rng.normal()) * scale;
        b.setZero();
    }

    struct Ctx {
        Mat<S> x;
    };

    Mat<S> forward(const Mat<S>& x, Ctx* ctx) const
    {
        if (ctx)
            ctx->x = x;
        Mat<S> y = W * x;
        y.colwise() += Eigen::Ref<const Vec<S>>(b.col(0));
        return y;
    }

    Mat<S> backward(const Mat<S>& dy, const Ctx& ctx)
    {
        gW.noalias() += dy * ctx.x.transpose();
        gb.col(0) += dy.rowwise().sum();
        return W.transpose() * dy;
    }

    void collect_params(ParamList<S>& out, const std::string& prefix)
    {
        out.push_back({prefix + ".W", &W, &gW});
        out.push_back({prefix + ".b", &b, &gb});
    }

    Mat<S> W, b, gW, gb;
};

// ---------------------------------------------------------------------------

template <typename S>
class LayerNorm {
public:
    LayerNorm() = default;
    explicit LayerNorm(int d)
    {
        gamma.setOnes(d, 1);
        beta.setZero(d, 1);
        ggamma.setZero(d, 1);
        gbeta.setZero(d, 1);
    }

    struct Ctx {
        Mat<S> xhat;
        Vec<S> inv_std;
    };

    Mat<S> forward(const Mat<S>& x, Ctx* ctx) const
    {
        const S eps = S(1e-5);
        Eigen::Index d = x.rows(), n = x.cols();
        Mat<S> xhat(d, n);
        Vec<S> inv_std(n);
        for (Eigen::Index j = 0; j < n; j++) {
            S mu = x.col(j).mean();
            Vec<S> c = x.col(j).array() - mu;
            S var = c.squaredNorm() / S(d);
            S is = S(1) / std::sqrt(var + eps);
            xhat.col(j) = c * is;
            inv_std(j) = is;
        }
        Mat<S> y = (xhat.array().colwise() * gamma.col(0).array()).colwise() +
                   beta.col(0).array();
        if (ctx) {
            ctx->xhat = std::move(xhat);
            ctx->inv_std = std::move(inv_std);
        }
        return y;
    }

    Mat<S> backward(const Mat<S>& dy, const Ctx& ctx)
    {
        Eigen::Index d = dy.rows(), n = dy.cols();
        ggamma.col(0) += (dy.array() * ctx.xhat.array()).rowwise().sum().matrix();
        gbeta.col(0) += dy.rowwise().sum();
        Mat<S> dxhat = dy.array().colwise() * gamma.col(0).array();
        Mat<S> dx(d, n);
        for (Eigen::Index j = 0; j < n; j++) {
            S m1 = dxhat.col(j).mean();
            S m2 = (dxhat.col(j).array() * ctx.xhat.col(j).array()).mean();
            dx.col(j) =
                ctx.inv_std(j) *
                (dxhat.col(j).array() - m1 - ctx.xhat.col(j).array() * m2).matrix();
        }
        return dx;
    }

    void collect_params(ParamList<S>& out, const std::string& prefix)
    {
        out.push_back({prefix + ".gamma", &gamma, &ggamma});
        out.push_back({prefix + ".beta", &beta, &gbeta});
    }

    Mat<S> gamma, beta, ggamma, gbeta;
};

// ---------------------------------------------------------------------------

// Scaled dot-product multi-head attention over concatenated equal-length
// sequences: inputs are d x (T*B) with sample b occupying columns [b*T, (b+1)*T).
template <typename S>
class MultiHeadAttention {
public:
    MultiHeadAttention() = default;
    MultiHeadAttention(int d, int heads) : d_(d), heads_(heads), dh_(d / heads)
    {
        if (d % heads != 0)
            throw ConfigError("attention heads must divide d_model");
        wq_ = Dense<S>(d, d);
        wk_ = Dense<S>(d, d);
        wv_ = Dense<S>(d, d);
        wo_ = Dense<S>(d, d);
    }

    void init(Rng& rng)
    {
        wq_.init(rng);
        wk_.init(rng);
        wv_.init(rng);
        wo_.init(rng);
    }

    struct Ctx {
        typename Dense<S>::Ctx q_ctx, k_ctx, v_ctx, o_ctx;
        Mat<S> Q, K, V;
        std::vector<Mat<S>> attn; // B*heads entries, each Tk x Tq
        Mat<S> concat;
        int Tq = 0, Tk = 0, B = 0;
    };

    Mat<S> forward(const Mat<S>& xq, const Mat<S>& xkv, int Tq, int Tk, int B, Ctx* ctx) const
    {
        Ctx local;
        Ctx& c = ctx ? *ctx : local;
        c.Tq = Tq;
        c.Tk = Tk;
        c.B = B;
        c.Q = wq_.forward(xq, ctx ? &c.q_ctx : nullptr);
        c.K = wk_.forward(xkv, ctx ? &c.k_ctx : nullptr);
        c.V = wv_.forward(xkv, ctx ? &c.v_ctx : nullptr);
        c.attn.assign(size_t(B) * size_t(heads_), Mat<S>());
        c.concat.setZero(d_, Eigen::Index(Tq) * B);

        const S inv_sqrt_dh = S(1.0 / std::sqrt(double(dh_)));
        for (int b = 0; b < B; b++) {
            auto Qb = c.Q.middleCols(Eigen::Index(b) * Tq, Tq);
            auto Kb = c.K.middleCols(Eigen::Index(b) * Tk, Tk);
            auto Vb = c.V.middleCols(Eigen::Index(b) * Tk, Tk);
            for (int h = 0; h < heads_; h++) {
                Mat<S> scores = (Kb.middleRows(h * dh_, dh_).transpose() *
                                 Qb.middleRows(h * dh_, dh_)) *
                                inv_sqrt_dh; // Tk x Tq
                // softmax over keys (rows) per query column
                for (Eigen::Index j = 0; j < scores.cols(); j++) {
                    S mx = scores.col(j).maxCoeff();
                    Vec<S> e = (scores.col(j).array() - mx).exp();
                    scores.col(j) = e / e.sum();
                }
                c.concat.block(h * dh_, Eigen::Index(b) * Tq, dh_, Tq).noalias() =
                    Vb.middleRows(h * dh_, dh_) * scores;
                c.attn[size_t(b) * size_t(heads_) + size_t(h)] = std::move(scores);
            }
        }
        return wo_.forward(c.concat, ctx ? &c.o_ctx : nullptr);
    }

    // Returns dXq; the key/value input gradient is accumulated into dxkv.
    Mat<S> backward(const Mat<S>& dy, Ctx& c, Mat<S>& dxkv)
    {
        Mat<S> dconcat = wo_.backward(dy, c.o_ctx);
        Mat<S> dQ = Mat<S>::Zero(c.Q.rows(), c.Q.cols());
        Mat<S> dK = Mat<S>::Zero(c.K.rows(), c.K.cols());
        Mat<S> dV = Mat<S>::Zero(c.V.rows(), c.V.cols());

        const S inv_sqrt_dh = S(1.0 / std::sqrt(double(dh_)));
        for (int b = 0; b < c.B; b++) {
            auto Qb = c.Q.middleCols(Eigen::Index(b) * c.Tq, c.Tq);
            auto Kb = c.K.middleCols(Eigen::Index(b) * c.Tk, c.Tk);
            auto Vb = c.V.middleCols(Eigen::Index(b) * c.Tk, c.Tk);
            for (int h = 0; h < heads_; h++) {
                const Mat<S>& A = c.attn[size_t(b) * size_t(heads_) + size_t(h)];
                auto dOut = dconcat.block(h * dh_, Eigen::Index(b) * c.Tq, dh_, c.Tq);
                Mat<S> dA = Vb.middleRows(h * dh_, dh_).transpose() * dOut; // Tk x Tq
                dV.block(h * dh_, Eigen::Index(b) * c.Tk, dh_, c.Tk).noalias() +=
                    dOut * A.transpose();
                // softmax backward per query column
                Mat<S> dScores(A.rows(), A.cols());
                for (Eigen::Index j = 0; j < A.cols(); j++) {
                    S dot = A.col(j).dot(dA.col(j));
                    dScores.col(j) = A.col(j).array() * (dA.col(j).array() - dot);
                }
                dScores *= inv_sqrt_dh;
                dQ.block(h * dh_, Eigen::Index(b) * c.Tq, dh_, c.Tq).noalias() +=
                    Kb.middleRows(h * dh_, dh_) * dScores;
                dK.block(h * dh_, Eigen::Index(b) * c.Tk, dh_, c.Tk).noalias() +=
                    Qb.middleRows(h * dh_, dh_) * dScores.transpose();
            }
        }
        Mat<S> dxq = wq_.backward(dQ, c.q_ctx);
        dxkv += wk_.backward(dK, c.k_ctx);
        dxkv += wv_.backward(dV, c.v_ctx);
        return dxq;
    }

    void collect_params(ParamList<S>& out, const std::string& prefix)
    {
        wq_.collect_params(out, prefix + ".wq");
        wk_.collect_params(out, prefix + ".wk");
        wv_.collect_params(out, prefix + ".wv");
        wo_.collect_params(out, prefix + ".wo");
    }

private:
    int d_ = 0, heads_ = 0, dh_ = 0;
    Dense<S> wq_, wk_, wv_, wo_;
};

// ---------------------------------------------------------------------------

template <typename S>
class FeedForward {
public:
    FeedForward() = default;
    FeedForward(int d, int hidden) : lin1_(d, hidden), lin2_(hidden, d) {}

    void init(Rng& rng)
    {
        lin1_.init(rng);
        lin2_.init(rng);
    }

    struct Ctx {
        typename Dense<S>::Ctx c1, c2;
        Mat<S> pre;
    };

    Mat<S> forward(const Mat<S>& x, Ctx* ctx) const
    {
        Ctx local;
        Ctx& c = ctx ? *ctx : local;
        c.pre = lin1_.forward(x, ctx ? &c.c1 : nullptr);
        Mat<S> act = c.pre.cwiseMax(S(0));
        return lin2_.forward(act, ctx ? &c.c2 : nullptr);
    }

    Mat<S> backward(const Mat<S>& dy, Ctx& c)
    {
        Mat<S> dact = lin2_.backward(dy, c.c2);
        Mat<S> dpre =
            (dact.array() * (c.pre.array() > S(0)).template cast<S>()).matrix();
        return lin1_.backward(dpre, c.c1);
    }

    void collect_params(ParamList<S>& out, const std::string& prefix)
    {
        lin1_.collect_params(out, prefix + ".lin1");
        lin2_.collect_params(out, prefix + ".lin2");
    }

private:
    Dense<S> lin1_, lin2_;
};

// ---------------------------------------------------------------------------

template <typename S>
class Embedding {
public:
    Embedding() = default;
    Embedding(int vocab, int d)
    {
        table.setZero(d, vocab);
        gtable.setZero(d, vocab);
    }

    void init(Rng& rng)
    {
        S scale = S(1.0 / std::sqrt(double(table.rows())));
        for (Eigen::Index j = 0; j < table.cols(); j++)
            for (Eigen::Index i = 0; i < table.rows(); i++)
                table(i, j) = S(rng.normal()) * scale;
    }

    Mat<S> forward(const std::vector<int32_t>& tokens) const
    {
        Mat<S> y(table.rows(), Eigen::Index(tokens.size()));
        for (size_t i = 0; i < tokens.size(); i++)
            y.col(Eigen::Index(i)) = table.col(tokens[i]);
        return y;
    }

    void backward(const Mat<S>& dy, const std::vector<int32_t>& tokens)
    {
        for (size_t i = 0; i < tokens.size(); i++)
            gtable.col(tokens[i]) += dy.col(Eigen::Index(i));
    }

    void collect_params(ParamList<S>& out, const std::string& prefix)
    {
        out.push_back({prefix + ".table", &table, &gtable});
    }

    Mat<S> table, gtable;
};

// Fixed sinusoidal positional encoding, one column per position.
template <typename S>
inline Mat<S> sinusoidal_positions(int d, int max_len)
{
    Mat<S> pe(d, max_len);
    for (int pos = 0; pos < max_len; pos++) {
        for (int i = 0; i < d; i += 2) {
            double div = std::exp(-std::log(10000.0) * double(i) / double(d));
            pe(i, pos) = S(std::sin(double(pos) * div));
            if (i + 1 < d)
                pe(i + 1, pos) = S(std::cos(double(pos) * div));
        }
    }
    return pe;
}

// ---------------------------------------------------------------------------

template <typename S>
class EncoderLayer {
public:
    EncoderLayer() = default;
    EncoderLayer(int d, int heads, int ffn_hidden)
        : attn_(d, heads), ln1_(d), ffn_(d, ffn_hidden), ln2_(d) {}

    void init(Rng& rng)
    {
        attn_.init(rng);
        ffn_.init(rng);
    }

    struct Ctx {
        typename MultiHeadAttention<S>::Ctx attn;
        typename LayerNorm<S>::Ctx ln1, ln2;
        typename FeedForward<S>::Ctx ffn;
    };

    Mat<S> forward(const Mat<S>& x, int T, int B, Ctx* ctx) const
    {
        Ctx local;
        Ctx& c = ctx ? *ctx : local;
        Mat<S> a = attn_.forward(x, x, T, T, B, ctx ? &c.attn : nullptr);
        Mat<S> x1 = ln1_.forward(x + a, ctx ? &c.ln1 : nullptr);
        Mat<S> f = ffn_.forward(x1, ctx ? &c.ffn : nullptr);
        return ln2_.forward(x1 + f, ctx ? &c.ln2 : nullptr);
    }

    Mat<S> backward(const Mat<S>& dy, Ctx& c)
    {
        Mat<S> dsum2 = ln2_.backward(dy, c.ln2);
        Mat<S> dx1 = dsum2 + ffn_.backward(dsum2, c.ffn);
        Mat<S> dsum1 = ln1_.backward(dx1, c.ln1);
        Mat<S> dself = Mat<S>::Zero(dsum1.rows(), dsum1.cols());
        Mat<S> dxq = attn_.backward(dsum1, c.attn, dself);
        return dsum1 + dxq + dself; // residual + query grad + key/value grad
    }

    void collect_params(ParamList<S>& out, const std::string& prefix)
    {
        attn_.collect_params(out, prefix + ".attn");
        ln1_.collect_params(out, prefix + ".ln1");
        ffn_.collect_params(out, prefix + ".ffn");
        ln2_.collect_params(out, prefix + ".ln2");
    }

private:
    MultiHeadAttention<S> attn_;
    LayerNorm<S> ln1_;
    FeedForward<S> ffn_;
    LayerNorm<S> ln2_;
};

template <typename S>
class DecoderLayer {
public:
    DecoderLayer() = default;
    DecoderLayer(int d, int heads, int ffn_hidden)
        : self_(d, heads), ln1_(d), cross_(d, heads), ln2_(d), ffn_(d, ffn_hidden), ln3_(d) {}

    void init(Rng& rng)
    {
        self_.init(rng);
        cross_.init(rng);
        ffn_.init(rng);
    }

    struct Ctx {
        typename MultiHeadAttention<S>::Ctx self_attn, cross_attn;
        typename LayerNorm<S>::Ctx ln1, ln2, ln3;
        typename FeedForward<S>::Ctx ffn;
    };

    Mat<S> forward(const Mat<S>& x, const Mat<S>& enc_out, int T, int Tenc, int B,
                   Ctx* ctx) const
    {
        Ctx local;
        Ctx& c = ctx ? *ctx : local;
        Mat<S> a = self_.forward(x, x, T, T, B, ctx ? &c.self_attn : nullptr);
        Mat<S> x1 = ln1_.forward(x + a, ctx ? &c.ln1 : nullptr);
        Mat<S> cr = cross_.forward(x1, enc_out, T, Tenc, B, ctx ? &c.cross_attn : nullptr);
        Mat<S> x2 = ln2_.forward(x1 + cr, ctx ? &c.ln2 : nullptr);
        Mat<S> f = ffn_.forward(x2, ctx ? &c.ffn : nullptr);
        return ln3_.forward(x2 + f, ctx ? &c.ln3 : nullptr);
    }

    // denc accumulates the cross-attention gradient wrt the encoder output.
    Mat<S> backward(const Mat<S>& dy, Ctx& c, Mat<S>& denc)
    {
        Mat<S> dsum3 = ln3_.backward(dy, c.ln3);
        Mat<S> dx2 = dsum3 + ffn_.backward(dsum3, c.ffn);
        Mat<S> dsum2 = ln2_.backward(dx2, c.ln2);
        Mat<S> dx1 = dsum2 + cross_.backward(dsum2, c.cross_attn, denc);
        Mat<S> dsum1 = ln1_.backward(dx1, c.ln1);
        Mat<S> dself = Mat<S>::Zero(dsum1.rows(), dsum1.cols());
        Mat<S> dxq = self_.backward(dsum1, c.self_attn, dself);
        return dsum1 + dxq + dself;
    }

    void collect_params(ParamList<S>& out, const std::string& prefix)
    {
        self_.collect_params(out, prefix + ".self");
        ln1_.collect_params(out, prefix + ".ln1");
        cross_.collect_params(out, prefix + ".cross");
        ln2_.collect_params(out, prefix + ".ln2");
        ffn_.collect_params(out, prefix + ".ffn");
        ln3_.collect_params(out, prefix + ".ln3");
    }

private:
    MultiHeadAttention<S> self_;
    LayerNorm<S> ln1_;
    MultiHeadAttention<S> cross_;
    LayerNorm<S> ln2_;
    FeedForward<S> ffn_;
    LayerNorm<S> ln3_;
};

// ---------------------------------------------------------------------------

// Adam with decoupled weight decay (applied directly to the parameters, not
// through the moments).
template <typename S>
class Adam {
public:
    Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
         double weight_decay = 0.0)
        : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), wd_(weight_decay) {}

    void step(ParamList<S>& params)
    {
        if (m_.empty()) {
            for (auto& p : params) {
                m_.push_back(Mat<S>::Zero(p.value->rows(), p.value->cols()));
                v_.push_back(Mat<S>::Zero(p.value->rows(), p.value->cols()));
            }
        }
        t_++;
        double bc1 = 1.0 - std::pow(b1_, double(t_));
        double bc2 = 1.0 - std::pow(b2_, double(t_));
        for (size_t i = 0; i < params.size(); i++) {
            Mat<S>& g = *params[i].grad;
            m_[i] = S(b1_) * m_[i] + S(1 - b1_) * g;
            v_[i] = (S(b2_) * v_[i].array() + S(1 - b2_) * g.array().square()).matrix();
            if (wd_ != 0.0)
                *params[i].value *= S(1.0 - lr_ * wd_);
            params[i].value->array() -= S(lr_) * (m_[i].array() / S(bc1)) /
                                        ((v_[i].array() / S(bc2)).sqrt() + S(eps_));
        }
    }

private:
    double lr_, b1_, b2_, eps_, wd_;
    uint64_t t_ = 0;
    std::vector<Mat<S>> m_, v_;
};

// ---------------------------------------------------------------------------

// Parameter blocks on disk: name, shape, little-endian float32 payload and an
// FNV checksum per block. Doubles are narrowed to float32, which also pins the
// serialized precision for bit-exact round trips.
template <typename S>
inline void save_params(std::ostream& os, const ParamList<S>& params)
{
    write_le<uint32_t>(os, uint32_t(params.size()));
    for (const auto& p : params) {
        write_le<uint16_t>(os, uint16_t(p.name.size()));
        os.write(p.name.data(), std::streamsize(p.name.size()));
        write_le<uint32_t>(os, uint32_t(p.value->rows()));
        write_le<uint32_t>(os, uint32_t(p.value->cols()));
        std::vector<float> buf;
        buf.reserve(size_t(p.value->size()));
        for (Eigen::Index j = 0; j < p.value->cols(); j++)
            for (Eigen::Index i = 0; i < p.value->rows(); i++)
                buf.push_back(float((*p.value)(i, j)));
        os.write(reinterpret_cast<const char*>(buf.data()),
                 std::streamsize(buf.size() * sizeof(float)));
        write_le<uint64_t>(os, fnv1a64(buf.data(), buf.size() * sizeof(float)));
    }
}

template <typename S>
inline void load_params(std::istream& is, ParamList<S>& params)
{
    uint32_t n = read_le<uint32_t>(is);
    if (n != params.size())
        throw CorruptInput("model file: parameter block count mismatch");
    for (auto& p : params) {
        uint16_t name_len = read_le<uint16_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (name != p.name)
            throw CorruptInput("model file: expected block '" + p.name + "', found '" + name + "'");
        uint32_t rows = read_le<uint32_t>(is);
        uint32_t cols = read_le<uint32_t>(is);
        if (rows != uint32_t(p.value->rows()) || cols != uint32_t(p.value->cols()))
            throw CorruptInput("model file: block '" + name + "' shape mismatch");
        std::vector<float> buf(size_t(rows) * size_t(cols));
        is.read(reinterpret_cast<char*>(buf.data()),
                std::streamsize(buf.size() * sizeof(float)));
        if (!is)
            throw CorruptInput("model file: truncated block '" + name + "'");
        uint64_t sum = read_le<uint64_t>(is);
        if (sum != fnv1a64(buf.data(), buf.size() * sizeof(float)))
            throw CorruptInput("model file: checksum mismatch in block '" + name + "'");
        size_t idx = 0;
        for (Eigen::Index j = 0; j < p.value->cols(); j++)
            for (Eigen::Index i = 0; i < p.value->rows(); i++)
                (*p.value)(i, j) = S(buf[idx++]);
    }
}

// Central finite differences against the analytic gradient. loss() must be a
// pure function of the current parameter values; grads must already hold the
// analytic gradient of the same loss.
template <typename S>
struct GradCheckReport {
    double max_rel_err = 0;
    std::string worst_param;
    double worst_analytic = 0, worst_numeric = 0;
};

template <typename S>
GradCheckReport<S> gradient_check(ParamList<S>& params, const std::function<double()>& loss,
                                  double step = 1e-4)
{
    GradCheckReport<S> rep;
    for (auto& p : params) {
        for (Eigen::Index j = 0; j < p.value->cols(); j++) {
            for (Eigen::Index i = 0; i < p.value->rows(); i++) {
                S keep = (*p.value)(i, j);
                (*p.value)(i, j) = keep + S(step);
                double lp = loss();
                (*p.value)(i, j) = keep - S(step);
                double lm = loss();
                (*p.value)(i, j) = keep;
                double numeric = (lp - lm) / (2.0 * step);
                double analytic = double((*p.grad)(i, j));
                if (std::abs(numeric) < 1e-7 && std::abs(analytic) < 1e-7)
                    continue; // below finite-difference noise, counts as agreement
                double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
                double rel = std::abs(numeric - analytic) / denom;
                if (rel > rep.max_rel_err) {
                    rep.max_rel_err = rel;
                    rep.worst_param = p.name + "(" + std::to_string(i) + "," +
                                      std::to_string(j) + ")";
                    rep.worst_analytic = analytic;
                    rep.worst_numeric = numeric;
                }
            }
        }
    }
    return rep;
}

} // namespace nn
} // namespace dcic

#endif
