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

// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier Monte-Carlo / training work lives here rather than in the
// unit suites.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dcic/pdcch.hpp"
#include "dcic/pipeline.hpp"
#include "dcic/rnn.hpp"
#include "dcic/tracegen.hpp"
#include "dcic/transformer.hpp"

using namespace dcic;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail)
{
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass)
        g_failures++;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Transformer<float> small_transformer(const DciSchema& schema, const std::vector<int>& perm,
                                     uint64_t seed)
{
    auto proc = schema.permuted(perm);
    auto plan = build_segment_plan(proc);
    TransformerConfig cfg;
    cfg.L = 2;
    cfg.d_model = 16;
    cfg.heads = 2;
    cfg.enc_layers = 1;
    cfg.dec_layers = 1;
    cfg.ffn_mult = 2;
    cfg.R = plan.total_integers;
    cfg.s_output = 0;
    for (const auto& f : proc.fields())
        cfg.s_output = std::max(cfg.s_output, f.width);
    cfg.dict_size = plan.dict_size;
    Transformer<float> model(cfg, seed);
    model.schema_hash = schema.hash();
    model.field_order = perm;
    return model;
}

// ---------------------------------------------------------------------------
// 1. Losslessness over >= 10^4 messages for every method (hard gate).

void criterion1()
{
    auto t0 = std::chrono::steady_clock::now();
    auto schema = default_dci39_schema();
    SimConfig cfg;
    cfg.tti_count = 12000;
    cfg.seed = 101;
    auto trace = simulate(cfg, schema);

    // most of the trace is the round-trip target; the head trains codebooks
    auto [train, test] = split_train_test(trace, 0.9);
    size_t n_msgs = test.records.size();

    EvalModels models;
    std::map<uint16_t, HuffmanCodec> hstore;
    std::map<uint16_t, Transformer<float>> tstore;
    std::map<uint16_t, GruModel<float>> rstore;
    RnnConfig rcfg;
    rcfg.window_bits = 16;
    rcfg.hidden = 8;
    rcfg.embed = 2;
    auto perm = identity_order(schema.field_count());
    for (uint16_t ue = 0; ue < trace.ue_count; ue++) {
        hstore.emplace(ue, HuffmanCodec::train(schema, train.ue_messages(ue)));
        tstore.emplace(ue, small_transformer(schema, perm, 600 + ue));
        rstore.emplace(ue, GruModel<float>(rcfg, 700 + ue));
        rstore.at(ue).schema_hash = schema.hash();
        models.huffman[ue] = &hstore.at(ue);
        models.transformer[ue] = &tstore.at(ue);
        models.rnn[ue] = &rstore.at(ue);
    }

    bool pass = n_msgs >= 10000;
    std::string detail;
    try {
        auto report_data = evaluate(train, test, schema, models,
                                    {Method::Huffman, Method::Adaptive, Method::Rnn,
                                     Method::Transformer, Method::Joint});
        size_t checked = 0;
        for (const auto& r : report_data.per_message) {
            if (!r.lossless)
                pass = false;
            checked++;
        }
        double dt = seconds_since(t0);
        std::ostringstream os;
        os << checked << " round trips over " << n_msgs << " messages x 5 methods, " << int(dt)
           << " s";
        detail = os.str();
        if (checked != n_msgs * 5)
            pass = false;
        if (dt > 600.0)
            pass = false;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("round-trip failure: ") + e.what();
    }
    report(1, pass, "losslessness across all methods", detail);
}

// ---------------------------------------------------------------------------
// 2. AC optimality within 1% of the realized entropy + flush overhead.

void criterion2()
{
    bool pass = true;
    std::ostringstream detail;
    Rng rng(202);
    for (double p : {0.5, 0.9, 0.99}) {
        const size_t n = 100000;
        ac::Encoder enc;
        double oracle = 0; // analytic entropy oracle on the drawn sequence
        uint32_t q = ac::quantize_p1(p);
        for (size_t i = 0; i < n; i++) {
            int bit = rng.u01() < p ? 1 : 0;
            enc.encode_bit(bit, q);
            oracle += -std::log2(bit ? p : 1.0 - p);
        }
        enc.finish();
        double out = double(enc.bit_count());
        bool ok = out <= oracle * 1.01 + 2.0;
        pass = pass && ok;
        detail.precision(4);
        detail << "p=" << p << ": " << out << " vs oracle " << oracle << "; ";
    }
    report(2, pass, "AC rate within 1% of entropy + flush", detail.str());
}

// ---------------------------------------------------------------------------
// 3. Gradient check on the full toy transformer, < 1e-3, < 1 min.

void criterion3()
{
    auto t0 = std::chrono::steady_clock::now();
    DciSchema schema({{"a", 3}, {"b", 2}}, 2);
    auto plan = build_segment_plan(schema);
    TransformerConfig cfg;
    cfg.L = 2;
    cfg.d_model = 8;
    cfg.heads = 2;
    cfg.enc_layers = 2;
    cfg.dec_layers = 2;
    cfg.ffn_mult = 2;
    cfg.R = plan.total_integers;
    cfg.s_output = 3;
    cfg.dict_size = plan.dict_size;
    Transformer<double> model(cfg, 303);

    const int B = 2;
    std::vector<int32_t> enc_toks = {2, 5, 9, 10, 10, 10, 1, 4, 7, 3, 4, 6};
    DciMessage mA, mB;
    mA.bits = {1, 0, 1, 1, 1};
    mB.bits = {0, 1, 1, 0, 1};
    struct Sample {
        std::vector<int32_t> dec;
        int T;
    };
    std::vector<Sample> samples = {{{10, 10}, 1}, {{2, 5, 1, 4}, 2}};

    auto run = [&](bool with_grad) {
        auto enc_ctx = model.encode(enc_toks, B, true);
        nn::Mat<double> denc = nn::Mat<double>::Zero(enc_ctx.out.rows(), enc_ctx.out.cols());
        double loss = 0;
        for (size_t si = 0; si < samples.size(); si++) {
            typename Transformer<double>::DecCtx dctx;
            nn::Mat<double> logits = model.decode(enc_ctx.out, samples[si].dec, samples[si].T, B,
                                                  with_grad ? &dctx : nullptr);
            nn::Mat<double> dlogits = nn::Mat<double>::Zero(3, B);
            for (int b = 0; b < B; b++) {
                FieldLabel lab = make_label(b == 0 ? mA : mB, schema, int(si), 3);
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
    double dt = seconds_since(t0);
    bool pass = rep.max_rel_err < 1e-3 && dt < 60.0;
    std::ostringstream os;
    os.precision(3);
    os << "max rel err " << rep.max_rel_err << " at " << rep.worst_param << ", " << dt << " s";
    report(3, pass, "transformer gradients vs finite differences", os.str());
}

// ---------------------------------------------------------------------------
// 4. Compression-ratio trend on the default synthetic trace.

struct Crit4Artifacts {
    std::map<uint32_t, uint64_t> hc_hist;
    std::map<uint32_t, uint64_t> joint_hist;
    bool valid = false;
};

Crit4Artifacts criterion4()
{
    Crit4Artifacts art;
    auto t0 = std::chrono::steady_clock::now();
    auto schema = default_dci39_schema();
    SimConfig gen_cfg; // the default synthetic trace
    gen_cfg.seed = 1;
    auto trace = simulate(gen_cfg, schema);
    auto [train, test] = split_train_test(trace, 0.03);

    EvalModels models;
    std::map<uint16_t, HuffmanCodec> hstore;
    std::map<uint16_t, Transformer<float>> tstore;
    std::map<uint16_t, GruModel<float>> rstore;

    double train_seconds = 0;
    for (uint16_t ue = 0; ue < trace.ue_count; ue++) {
        auto msgs = train.ue_messages(ue);
        hstore.emplace(ue, HuffmanCodec::train(schema, msgs));

        auto entropies = field_entropies(msgs, schema);
        auto order = sort_fields(entropies, true);
        auto proc = schema.permuted(order.perm);
        auto plan = build_segment_plan(proc);
        std::vector<DciMessage> proc_msgs;
        for (const auto& m : msgs)
            proc_msgs.push_back(permute_message(m, schema, order.perm));

        TransformerConfig tcfg;
        tcfg.R = plan.total_integers;
        tcfg.s_output = 0;
        for (const auto& f : proc.fields())
            tcfg.s_output = std::max(tcfg.s_output, f.width);
        tcfg.dict_size = plan.dict_size;
        Transformer<float> model(tcfg, mix_seed(1, ue, 0x7f));
        model.schema_hash = schema.hash();
        model.field_order = order.perm;
        TrainOptions opt;
        opt.seed = mix_seed(1, ue, 0x11);
        opt.max_epochs = 15;
        opt.max_messages_per_epoch = 3000;
        train_transformer(model, proc, plan, proc_msgs, opt);
        tstore.emplace(ue, std::move(model));

        RnnConfig rcfg;
        GruModel<float> rnn(rcfg, mix_seed(1, ue, 0x2e));
        rnn.schema_hash = schema.hash();
        RnnTrainOptions ropt;
        ropt.max_epochs = 4;
        ropt.seed = mix_seed(1, ue, 0x3d);
        train_rnn(rnn, msgs, ropt);
        rstore.emplace(ue, std::move(rnn));
    }
    train_seconds = seconds_since(t0);

    auto te0 = std::chrono::steady_clock::now();
    for (uint16_t ue = 0; ue < trace.ue_count; ue++) {
        models.huffman[ue] = &hstore.at(ue);
        models.transformer[ue] = &tstore.at(ue);
        models.rnn[ue] = &rstore.at(ue);
    }
    auto rep = evaluate(train, test, schema, models,
                        {Method::Identity, Method::Huffman, Method::Adaptive, Method::Rnn,
                         Method::Transformer, Method::Joint});
    double eval_seconds = seconds_since(te0);

    std::map<Method, double> ratio;
    for (const auto& s : rep.summary)
        ratio[s.method] = s.mean_ratio;

    bool pass = true;
    if (!(ratio[Method::Joint] >= ratio[Method::Transformer]))
        pass = false;
    if (!(ratio[Method::Transformer] >= ratio[Method::Huffman]))
        pass = false;
    if (!(ratio[Method::Transformer] >= 1.10 * ratio[Method::Huffman]))
        pass = false;
    if (train_seconds > 1800.0 || eval_seconds > 300.0)
        pass = false;

    std::ostringstream os;
    os.precision(4);
    os << "ratios: hc " << ratio[Method::Huffman] << ", rnn " << ratio[Method::Rnn]
       << ", transformer " << ratio[Method::Transformer] << ", joint " << ratio[Method::Joint]
       << "; train " << int(train_seconds) << " s, eval " << int(eval_seconds) << " s";
    report(4, pass, "joint >= transformer >= 1.1 x HC on the default trace", os.str());

    art.hc_hist = rep.length_hist[Method::Huffman];
    art.joint_hist = rep.length_hist[Method::Joint];
    art.valid = true; // histograms feed criterion 7 whether or not the trend held
    return art;
}

// ---------------------------------------------------------------------------
// 5. Field-ordering ablation: median final val BCE descending <= ascending.

void criterion5()
{
    auto schema = default_dci39_schema();
    std::vector<double> desc_vals, asc_vals;
    for (uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
        SimConfig gen_cfg; // default trace parameters, varying seed
        gen_cfg.seed = seed;
        auto trace = simulate(gen_cfg, schema);
        auto [train, test] = split_train_test(trace, 0.03);
        auto msgs = train.ue_messages(0);
        auto entropies = field_entropies(msgs, schema);
        for (bool descending : {true, false}) {
            auto order = sort_fields(entropies, descending);
            auto proc = schema.permuted(order.perm);
            auto plan = build_segment_plan(proc);
            std::vector<DciMessage> proc_msgs;
            for (const auto& m : msgs)
                proc_msgs.push_back(permute_message(m, schema, order.perm));
            TransformerConfig tcfg;
            tcfg.R = plan.total_integers;
            tcfg.s_output = 13;
            tcfg.dict_size = plan.dict_size;
            Transformer<float> model(tcfg, mix_seed(seed, 0x5a));
            TrainOptions opt;
            opt.seed = mix_seed(seed, 0x5b);
            opt.max_epochs = 8;
            opt.patience = 8;
            opt.max_messages_per_epoch = 2000;
            auto summary = train_transformer(model, proc, plan, proc_msgs, opt);
            (descending ? desc_vals : asc_vals).push_back(summary.best_val_bce);
        }
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    double dm = median(desc_vals), am = median(asc_vals);
    bool pass = dm <= am;
    std::ostringstream os;
    os.precision(5);
    os << "median val BCE descending " << dm << " vs ascending " << am << " over "
       << desc_vals.size() << " seeds";
    report(5, pass, "descending-entropy order trains at least as well", os.str());
}

// ---------------------------------------------------------------------------
// 6. Polar codec: zero-noise identity, FER monotone, smaller K dominates.

void criterion6()
{
    bool pass = true;
    std::ostringstream os;

    // zero-noise identity for 10^3 random payloads, K in 30..63
    Rng rng(606);
    int fails = 0;
    for (int trial = 0; trial < 1000; trial++) {
        int k_total = 30 + int(rng.raw() % 34);
        std::vector<uint8_t> payload(size_t(k_total - polar::kCrcBits));
        for (auto& b : payload)
            b = uint8_t(rng.raw() & 1);
        auto frozen = polar::frozen_mask(128, k_total);
        auto cw = polar::encode_with_crc(payload, frozen);
        std::vector<double> llr(128);
        for (size_t i = 0; i < 128; i++)
            llr[i] = cw[i] ? -20.0 : 20.0;
        polar::SclDecoder dec(frozen, 8);
        auto r = dec.decode(llr);
        if (!r.ok || r.payload != payload)
            fails++;
    }
    if (fails > 0)
        pass = false;
    os << "zero-noise fails " << fails << "/1000; ";

    // FER monotone in SNR with >= 100 errors per point
    pdcch::PdcchConfig cfg;
    cfg.snr_db = {-3.0, -2.5, -2.0};
    cfg.max_frames = 30000;
    cfg.target_errors = 100;
    cfg.seed = 607;
    auto base = pdcch::fer_sweep(cfg, pdcch::PayloadSource::fixed(39, "k63"));
    for (size_t i = 0; i < base.size(); i++) {
        if (base[i].errors < 100)
            pass = false;
        if (i > 0 && !(base[i].fer <= base[i - 1].fer + base[i - 1].ci_halfwidth +
                                          base[i].ci_halfwidth))
            pass = false;
    }
    os << "k63 fer:";
    for (const auto& p : base) {
        os.precision(3);
        os << " " << p.fer << "(" << p.errors << "e)";
    }

    // smaller K dominates at every measured SNR
    pdcch::PdcchConfig cfg2;
    cfg2.snr_db = {-4.0, -3.5, -3.0};
    cfg2.max_frames = 30000;
    cfg2.target_errors = 100;
    cfg2.seed = 608;
    auto big = pdcch::fer_sweep(cfg2, pdcch::PayloadSource::fixed(39, "k63"));
    auto small = pdcch::fer_sweep(cfg2, pdcch::PayloadSource::fixed(20, "k44"));
    os << "; dominance";
    for (size_t i = 0; i < cfg2.snr_db.size(); i++) {
        if (big[i].errors < 100 || small[i].errors < 100)
            pass = false;
        if (!(small[i].fer < big[i].fer))
            pass = false;
        os.precision(3);
        os << " [" << small[i].fer << "<" << big[i].fer << "]";
    }
    report(6, pass, "polar codec identity, monotonicity and rate ordering", os.str());
}

// ---------------------------------------------------------------------------
// 7. Blind-length decoding shows compression gains at FER 1e-2.

void criterion7(const Crit4Artifacts& art)
{
    auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::ostringstream os;
    if (art.hc_hist.empty() || art.joint_hist.empty()) {
        report(7, false, "blind-length decoding gain", "missing length histograms");
        return;
    }

    pdcch::PdcchConfig cfg;
    for (double s = -4.5; s <= -0.45; s += 0.5)
        cfg.snr_db.push_back(s);
    cfg.max_frames = 30000;
    cfg.target_errors = 100;
    cfg.seed = 707;

    auto unc = pdcch::fer_sweep(cfg, pdcch::PayloadSource::fixed(39, "uncompressed"));
    auto hc = pdcch::fer_sweep(cfg, pdcch::PayloadSource::from_hist(art.hc_hist, cfg.code_len,
                                                                    "hc"));
    auto joint = pdcch::fer_sweep(
        cfg, pdcch::PayloadSource::from_hist(art.joint_hist, cfg.code_len, "joint"));

    auto s_unc = pdcch::snr_at_fer(unc, 1e-2);
    auto s_hc = pdcch::snr_at_fer(hc, 1e-2);
    auto s_joint = pdcch::snr_at_fer(joint, 1e-2);
    if (!s_unc || !s_hc || !s_joint) {
        pass = false;
        os << "curves do not bracket FER 1e-2";
    } else {
        double gain_hc = *s_unc - *s_hc;
        double gain_joint = *s_unc - *s_joint;
        if (!(gain_hc > 0.0))
            pass = false;
        if (!(gain_joint >= gain_hc))
            pass = false;
        os.precision(3);
        os << "snr@1e-2: unc " << *s_unc << " dB, hc " << *s_hc << " dB, joint " << *s_joint
           << " dB; gains " << gain_hc << " / " << gain_joint << " dB";
    }
    double dt = seconds_since(t0);
    if (dt > 1800.0)
        pass = false;
    os << "; " << int(dt) << " s";
    report(7, pass, "positive dB gain with joint >= hc", os.str());
}

// ---------------------------------------------------------------------------
// 8. Determinism of every pipeline stage under fixed seeds.

void criterion8()
{
    bool pass = true;
    std::ostringstream os;
    auto schema = default_dci39_schema();

    // gen
    SimConfig gcfg;
    gcfg.tti_count = 600;
    gcfg.seed = 808;
    std::ostringstream t1, t2;
    save_trace(t1, simulate(gcfg, schema));
    save_trace(t2, simulate(gcfg, schema));
    bool gen_ok = t1.str() == t2.str();
    pass = pass && gen_ok;
    os << "gen " << (gen_ok ? "ok" : "DIFF");

    // train (small) + model bytes
    auto trace = simulate(gcfg, schema);
    auto [train, test] = split_train_test(trace, 0.1);
    auto msgs = train.ue_messages(0);
    auto entropies = field_entropies(msgs, schema);
    auto order = sort_fields(entropies, true);
    auto proc = schema.permuted(order.perm);
    auto plan = build_segment_plan(proc);
    std::vector<DciMessage> proc_msgs;
    for (const auto& m : msgs)
        proc_msgs.push_back(permute_message(m, schema, order.perm));
    auto train_once = [&]() {
        TransformerConfig tcfg;
        tcfg.d_model = 16;
        tcfg.heads = 2;
        tcfg.enc_layers = 1;
        tcfg.dec_layers = 1;
        tcfg.ffn_mult = 2;
        tcfg.R = plan.total_integers;
        tcfg.s_output = 13;
        tcfg.dict_size = plan.dict_size;
        Transformer<float> model(tcfg, 809);
        model.schema_hash = schema.hash();
        model.field_order = order.perm;
        TrainOptions opt;
        opt.max_epochs = 2;
        opt.seed = 810;
        train_transformer(model, proc, plan, proc_msgs, opt);
        std::ostringstream buf(std::ios::binary);
        model.save(buf);
        return buf.str();
    };
    std::string m1 = train_once();
    std::string m2 = train_once();
    bool train_ok = m1 == m2;
    pass = pass && train_ok;
    os << ", train " << (train_ok ? "ok" : "DIFF");

    // eval CSVs
    auto eval_once = [&]() {
        EvalModels models;
        std::map<uint16_t, HuffmanCodec> hstore;
        for (uint16_t ue = 0; ue < trace.ue_count; ue++)
            hstore.emplace(ue, HuffmanCodec::train(schema, train.ue_messages(ue)));
        for (uint16_t ue = 0; ue < trace.ue_count; ue++)
            models.huffman[ue] = &hstore.at(ue);
        auto rep = evaluate(train, test, schema, models,
                            {Method::Identity, Method::Huffman, Method::Adaptive});
        std::ostringstream r1, r2;
        write_report_csv(r1, rep);
        write_summary_csv(r2, rep);
        return r1.str() + r2.str();
    };
    bool eval_ok = eval_once() == eval_once();
    pass = pass && eval_ok;
    os << ", eval " << (eval_ok ? "ok" : "DIFF");

    // fer CSV
    auto fer_once = [&]() {
        pdcch::PdcchConfig cfg;
        cfg.snr_db = {-2.0};
        cfg.max_frames = 2000;
        cfg.target_errors = 50;
        cfg.seed = 811;
        auto curve = pdcch::fer_sweep(cfg, pdcch::PayloadSource::fixed(39, "u"));
        std::ostringstream buf;
        pdcch::write_fer_csv(buf, curve);
        return buf.str();
    };
    bool fer_ok = fer_once() == fer_once();
    pass = pass && fer_ok;
    os << ", fer " << (fer_ok ? "ok" : "DIFF");

    report(8, pass, "bit-identical reruns for every stage", os.str());
}

} // namespace

int main()
{
    std::printf("dcic acceptance suite\n");
    criterion1();
    criterion2();
    criterion3();
    auto art = criterion4();
    criterion5();
    criterion6();
    criterion7(art);
    criterion8();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
