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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "dcic/features.hpp"
#include "dcic/predictors.hpp"
#include "dcic/rnn.hpp"
#include "dcic/transformer.hpp"

using namespace dcic;

namespace {

// fields [3,2] at eta=2: field 0 splits into segments of 2+1 bits (s=6),
// field 1 is one segment (s=4): R=3, dictionary 10, S_output=3
DciSchema toy_schema() { return DciSchema({{"a", 3}, {"b", 2}}, 2); }

TransformerConfig toy_config()
{
    TransformerConfig cfg;
    cfg.L = 2;
    cfg.d_model = 8;
    cfg.heads = 2;
    cfg.enc_layers = 2;
    cfg.dec_layers = 2;
    cfg.ffn_mult = 2;
    cfg.R = 3;
    cfg.s_output = 3;
    cfg.dict_size = 10;
    return cfg;
}

std::vector<DciMessage> constant_trace(const DciSchema& schema, size_t n, uint32_t a, uint32_t b)
{
    DciMessage m;
    m.bits.assign(size_t(schema.total_bits()), 0);
    set_field_value(m, schema, 0, a);
    set_field_value(m, schema, 1, b);
    return std::vector<DciMessage>(n, m);
}

} // namespace

TEST_CASE("build_features follows the causal construction")
{
    auto schema = toy_schema();
    auto plan = build_segment_plan(schema);
    REQUIRE(plan.total_integers == 3);
    REQUIRE(plan.dict_size == 10);
    const int32_t pad = int32_t(plan.padding_token());

    // segment dictionary offsets: 0 (alphabet 4), 4 (alphabet 2), 6 (alphabet 4)
    DciMessage m1;
    m1.bits = {1, 0, 1, 1, 1}; // a = 101 -> segs (10, 1) -> 2, 4+1; b = 11 -> 6+3
    auto i1 = message_to_integers(m1, plan);
    REQUIRE(i1 == std::vector<uint32_t>{2, 5, 9});
    DciMessage m2;
    m2.bits = {0, 1, 0, 0, 1}; // a = 010 -> (01, 0) -> 1, 4+0; b = 01 -> 6+1
    auto i2 = message_to_integers(m2, plan);
    REQUIRE(i2 == std::vector<uint32_t>{1, 4, 7});

    SECTION("u_enc concatenates the previous L messages, newest first")
    {
        auto f = build_features({i1, i2}, {}, plan, 2);
        CHECK(f.enc == std::vector<int32_t>{2, 5, 9, 1, 4, 7});
    }

    SECTION("missing history slots hold the padding pseudo-message")
    {
        auto f = build_features({i1}, {}, plan, 2);
        CHECK(f.enc == std::vector<int32_t>{2, 5, 9, pad, pad, pad});
        auto f0 = build_features({}, {}, plan, 2);
        CHECK(f0.enc == std::vector<int32_t>(6, pad));
    }

    SECTION("u_dec is the revealed prefix padded to R")
    {
        auto f = build_features({i1}, {2, 5}, plan, 2);
        CHECK(f.dec == std::vector<int32_t>{2, 5, pad});
        CHECK(f.revealed == 2);
        auto fk1 = build_features({i1}, {}, plan, 2);
        CHECK(fk1.dec == std::vector<int32_t>(3, pad)); // first field: all padding
    }
}

TEST_CASE("bce_loss closed forms")
{
    FieldLabel lab;
    lab.valid = 3;
    lab.y = {1, 0, 1};

    SECTION("uniform prediction with full mask gives ln 2 per bit")
    {
        double l = bce_loss({0.5, 0.5, 0.5}, lab);
        CHECK(l == Catch::Approx(std::log(2.0)));
    }

    SECTION("perfect prediction is ~0 within the clamp epsilon")
    {
        double l = bce_loss({1.0, 0.0, 1.0}, lab);
        double clamp_floor = -std::log(1.0 - kProbFloor); // per valid bit
        CHECK(l <= clamp_floor + 1e-12);
        CHECK(l >= 0.0);
    }

    SECTION("masked positions do not contribute")
    {
        FieldLabel short_lab;
        short_lab.valid = 2;
        short_lab.y = {1, 0, 0};
        double l1 = bce_loss({0.7, 0.3, 0.9}, short_lab);
        double l2 = bce_loss({0.7, 0.3, 0.1}, short_lab);
        CHECK(l1 == l2);
        // normalization is by S_output, not by the mask size
        CHECK(l1 == Catch::Approx(-(std::log(0.7) + std::log(0.7)) / 3.0));
    }
}

TEST_CASE("adaptive order-0 counts")
{
    auto schema = toy_schema();
    AdaptivePredictor pred(schema);

    SECTION("no observations -> 0.5 everywhere")
    {
        for (int k = 0; k < 2; k++)
            for (int j = 0; j < schema.fields()[size_t(k)].width; j++)
                CHECK(pred.prob_one(k, j) == 0.5);
    }

    SECTION("98 ones -> 99/100")
    {
        for (int i = 0; i < 98; i++)
            pred.observe(0, 1, 1);
        CHECK(pred.prob_one(0, 1) == Catch::Approx(99.0 / 100.0));
        CHECK(pred.prob_one(0, 0) == 0.5); // untouched position
    }

    SECTION("encoder/decoder stay identical after a shared prefix")
    {
        AdaptivePredictor a(schema), b(schema);
        std::mt19937_64 rng(3);
        for (int i = 0; i < 200; i++) {
            int k = int(rng() % 2);
            int j = int(rng() % uint64_t(schema.fields()[size_t(k)].width));
            int bit = int(rng() & 1);
            REQUIRE(a.prob_one(k, j) == b.prob_one(k, j));
            a.observe(k, j, bit);
            b.observe(k, j, bit);
        }
    }
}

TEST_CASE("transformer forward basics")
{
    auto cfg = toy_config();
    Transformer<float> model(cfg, 42);

    std::vector<std::vector<uint32_t>> hist = {{2, 5, 9}, {1, 4, 7}};
    auto enc_out = model.encode_history(hist);

    SECTION("determinism")
    {
        auto p1 = model.field_probabilities(enc_out, {}, 3);
        auto p2 = model.field_probabilities(enc_out, {}, 3);
        CHECK(p1 == p2);
        auto enc2 = model.encode_history(hist);
        auto p3 = model.field_probabilities(enc2, {}, 3);
        CHECK(p1 == p3);
    }

    SECTION("outputs live strictly inside (0,1)")
    {
        auto p = model.field_probabilities(enc_out, {2, 5}, 3);
        for (double v : p) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }

    SECTION("zeroed head gives sigmoid(0) = 0.5")
    {
        Transformer<float> z(cfg, 42);
        for (auto& p : z.params())
            if (p.name == "head.W" || p.name == "head.b")
                p.value->setZero();
        auto e = z.encode_history(hist);
        for (double v : z.field_probabilities(e, {1}, 3))
            CHECK(v == 0.5);
    }

    SECTION("positional encoding makes token order matter")
    {
        std::vector<std::vector<uint32_t>> swapped = {{5, 2, 9}, {1, 4, 7}};
        auto enc_sw = model.encode_history(swapped);
        auto pa = model.field_probabilities(enc_out, {}, 3);
        auto pb = model.field_probabilities(enc_sw, {}, 3);
        double diff = 0;
        for (size_t i = 0; i < pa.size(); i++)
            diff += std::abs(pa[i] - pb[i]);
        CHECK(diff > 1e-9);
    }

    SECTION("out-of-vocabulary token is rejected")
    {
        CHECK_THROWS_AS(model.encode_history({{2, 5, 99}}), CorruptInput);
    }
}

TEST_CASE("linear layer gradient is exact")
{
    nn::Dense<double> lin(5, 3);
    Rng rng(9);
    lin.init(rng);
    nn::Mat<double> x(5, 4), target(3, 4);
    for (int j = 0; j < 4; j++)
        for (int i = 0; i < 5; i++)
            x(i, j) = rng.normal();
    for (int j = 0; j < 4; j++)
        for (int i = 0; i < 3; i++)
            target(i, j) = rng.normal();

    nn::ParamList<double> params;
    lin.collect_params(params, "lin");

    auto loss = [&]() {
        typename nn::Dense<double>::Ctx ctx;
        nn::Mat<double> y = lin.forward(x, &ctx);
        return 0.5 * (y - target).squaredNorm();
    };
    nn::zero_grads(params);
    typename nn::Dense<double>::Ctx ctx;
    nn::Mat<double> y = lin.forward(x, &ctx);
    lin.backward(y - target, ctx);

    auto rep = nn::gradient_check<double>(params, loss, 1e-4);
    INFO(rep.worst_param);
    CHECK(rep.max_rel_err < 1e-6);
}

TEST_CASE("full toy transformer gradient check")
{
    auto cfg = toy_config();
    Transformer<double> model(cfg, 7);
    auto schema = toy_schema();

    const int B = 2;
    std::vector<int32_t> enc_toks = {2, 5, 9, 10, 10, 10, 1, 4, 7, 2, 4, 8};
    REQUIRE(int(enc_toks.size()) == cfg.s_encoder() * B);

    struct Sample {
        std::vector<int32_t> dec;
        int T;
        FieldLabel lab0, lab1;
    };
    DciMessage mA, mB;
    mA.bits = {1, 0, 1, 1, 1};
    mB.bits = {0, 1, 1, 0, 1};
    std::vector<Sample> samples;
    samples.push_back({{10, 10}, 1, make_label(mA, schema, 0, 3), make_label(mB, schema, 0, 3)});
    samples.push_back({{2, 5, 1, 4}, 2, make_label(mA, schema, 1, 3), make_label(mB, schema, 1, 3)});

    auto run = [&](bool with_grad) {
        auto enc_ctx = model.encode(enc_toks, B, true);
        nn::Mat<double> denc = nn::Mat<double>::Zero(enc_ctx.out.rows(), enc_ctx.out.cols());
        double loss = 0;
        for (auto& s : samples) {
            typename Transformer<double>::DecCtx dctx;
            nn::Mat<double> logits =
                model.decode(enc_ctx.out, s.dec, s.T, B, with_grad ? &dctx : nullptr);
            nn::Mat<double> dlogits = nn::Mat<double>::Zero(3, B);
            for (int b = 0; b < B; b++) {
                const FieldLabel& lab = (b == 0) ? s.lab0 : s.lab1;
                std::vector<double> yhat(3);
                for (int j = 0; j < 3; j++)
                    yhat[size_t(j)] = 1.0 / (1.0 + std::exp(-logits(j, b)));
                loss += bce_loss(yhat, lab);
                for (int j = 0; j < lab.valid; j++)
                    dlogits(j, b) = (yhat[size_t(j)] - double(lab.y[size_t(j)])) / 3.0;
            }
            if (with_grad)
                model.decode_backward(dlogits, dctx, denc);
        }
        if (with_grad)
            model.encode_backward(denc, enc_ctx);
        return loss;
    };

    nn::zero_grads(model.params());
    run(true);
    auto rep = nn::gradient_check<double>(model.params(), [&]() { return run(false); }, 1e-4);
    INFO(rep.worst_param << " analytic=" << rep.worst_analytic
                         << " numeric=" << rep.worst_numeric);
    CHECK(rep.max_rel_err < 1e-3);

    SECTION("tokens absent from the batch get zero embedding gradient")
    {
        // token ids 0, 3 and 6 appear nowhere above
        for (auto& p : model.params())
            if (p.name == "emb.table") {
                CHECK(p.grad->col(0).norm() == 0.0);
                CHECK(p.grad->col(3).norm() == 0.0);
                CHECK(p.grad->col(6).norm() == 0.0);
                CHECK(p.grad->col(2).norm() > 0.0);
            }
    }
}

TEST_CASE("toy GRU gradient check")
{
    RnnConfig cfg;
    cfg.window_bits = 6;
    cfg.hidden = 4;
    cfg.embed = 2;
    GruModel<double> model(cfg, 5);

    std::vector<int32_t> windows = {2, 2, 0, 1, 1, 0, 0, 1, 0, 1, 0, 1};
    std::vector<double> labels = {1, 0};

    auto run = [&](bool with_grad) {
        typename GruModel<double>::Ctx ctx;
        nn::Mat<double> logits = model.forward(windows, 2, with_grad ? &ctx : nullptr);
        nn::Mat<double> dlogits(1, 2);
        double loss = 0;
        for (int b = 0; b < 2; b++) {
            double p = 1.0 / (1.0 + std::exp(-logits(0, b)));
            loss += -(labels[size_t(b)] * std::log(p) +
                      (1 - labels[size_t(b)]) * std::log(1 - p));
            dlogits(0, b) = p - labels[size_t(b)];
        }
        if (with_grad)
            model.backward(dlogits, ctx);
        return loss;
    };

    nn::zero_grads(model.params());
    run(true);
    auto rep = nn::gradient_check<double>(model.params(), [&]() { return run(false); }, 1e-4);
    INFO(rep.worst_param);
    CHECK(rep.max_rel_err < 1e-3);
}

TEST_CASE("rnn overfits a constant bit stream")
{
    RnnConfig cfg;
    cfg.window_bits = 8;
    cfg.hidden = 8;
    cfg.embed = 2;
    GruModel<float> model(cfg, 11);

    DciSchema one({{"x", 6}}, 4);
    DciMessage ones;
    ones.bits.assign(6, 1);
    std::vector<DciMessage> msgs(120, ones);

    RnnTrainOptions opt;
    opt.lr = 0.02;
    opt.max_epochs = 5;
    opt.max_samples_per_epoch = 2000;
    opt.seed = 2;
    train_rnn(model, msgs, opt);

    std::vector<int32_t> window(8, 1);
    CHECK(model.prob_one(window) > 0.9);
}

TEST_CASE("rnn serialization round trip")
{
    RnnConfig cfg;
    cfg.window_bits = 8;
    cfg.hidden = 6;
    cfg.embed = 2;
    GruModel<float> model(cfg, 3);
    model.schema_hash = 0x1234;

    std::ostringstream os(std::ios::binary);
    model.save(os);
    std::istringstream is(os.str());
    auto loaded = GruModel<float>::load(is);
    CHECK(loaded.schema_hash == 0x1234);

    std::vector<int32_t> w = {2, 2, 1, 0, 1, 1, 0, 1};
    CHECK(model.prob_one(w) == loaded.prob_one(w));

    std::ostringstream os2(std::ios::binary);
    loaded.save(os2);
    CHECK(os.str() == os2.str());
}

TEST_CASE("transformer serialization round trip is bit-exact")
{
    auto cfg = toy_config();
    Transformer<float> model(cfg, 21);
    model.schema_hash = 77;
    model.field_order = {1, 0};
    model.best_val_bce = 0.25f;
    model.best_epoch = 3;

    std::ostringstream os(std::ios::binary);
    model.save(os);
    std::istringstream is(os.str());
    auto loaded = Transformer<float>::load(is);
    CHECK(loaded.schema_hash == 77);
    CHECK(loaded.field_order == std::vector<int>{1, 0});
    CHECK(loaded.best_epoch == 3);

    std::vector<std::vector<uint32_t>> hist = {{2, 5, 9}};
    auto e1 = model.encode_history(hist);
    auto e2 = loaded.encode_history(hist);
    auto p1 = model.field_probabilities(e1, {3}, 3);
    auto p2 = loaded.field_probabilities(e2, {3}, 3);
    CHECK(p1 == p2);

    std::ostringstream os2(std::ios::binary);
    loaded.save(os2);
    CHECK(os.str() == os2.str());

    SECTION("corrupted block fails the checksum")
    {
        std::string buf = os.str();
        buf[buf.size() - 20] = char(buf[buf.size() - 20] ^ 0x40);
        std::istringstream bad(buf);
        CHECK_THROWS_AS(Transformer<float>::load(bad), CorruptInput);
    }
}

TEST_CASE("training drives a constant trace to near-zero BCE")
{
    auto schema = toy_schema();
    auto plan = build_segment_plan(schema);
    auto msgs = constant_trace(schema, 800, 5, 2);

    auto cfg = toy_config();
    cfg.d_model = 16;
    cfg.heads = 2;
    Transformer<float> model(cfg, 13);

    TrainOptions opt;
    opt.lr = 0.02;
    opt.batch_messages = 8;
    opt.max_epochs = 5;
    opt.patience = 5;
    opt.seed = 4;
    auto summary = train_transformer(model, schema, plan, msgs, opt);
    REQUIRE(!summary.log.empty());
    CHECK(summary.log.back().val_bits_per_bit < 0.01);

    SECTION("seed determinism of training")
    {
        Transformer<float> m2(cfg, 13);
        auto s2 = train_transformer(m2, schema, plan, msgs, opt);
        CHECK(s2.best_val_bce == summary.best_val_bce);
        CHECK(s2.best_epoch == summary.best_epoch);
    }
}

TEST_CASE("training loss decreases on correlated data")
{
    // slow 3-bit counter on field a, constant field b: learnable structure
    auto schema = toy_schema();
    auto plan = build_segment_plan(schema);
    std::vector<DciMessage> msgs;
    for (int i = 0; i < 500; i++) {
        DciMessage m;
        m.bits.assign(5, 0);
        set_field_value(m, schema, 0, uint32_t((i / 3) % 8));
        set_field_value(m, schema, 1, 1);
        msgs.push_back(m);
    }
    auto cfg = toy_config();
    Transformer<float> model(cfg, 19);
    TrainOptions opt;
    opt.lr = 5e-3;
    opt.batch_messages = 8;
    opt.max_epochs = 8;
    opt.patience = 8;
    opt.seed = 6;
    auto summary = train_transformer(model, schema, plan, msgs, opt);
    REQUIRE(summary.log.size() >= 4);
    auto smooth = [&](size_t i) {
        return (summary.log[i].train_bce + summary.log[i + 1].train_bce) / 2;
    };
    CHECK(smooth(summary.log.size() - 2) < smooth(0));
}
