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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "dcic/pdcch.hpp"
#include "dcic/pipeline.hpp"
#include "dcic/tracegen.hpp"

namespace fs = std::filesystem;
using namespace dcic;

namespace {

// `key value` lines, '#' comments; used for SimConfig and PdcchConfig files.
std::map<std::string, std::string> read_kv_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string key, value;
        if (!(ls >> key))
            continue;
        if (!(ls >> value))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": key '" + key +
                              "' needs a value");
        kv[key] = value;
    }
    return kv;
}

void ensure_outdir(const std::string& out)
{
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + out + "': " + ec.message());
}

DciSchema load_schema_or_default(const std::string& path)
{
    if (path.empty())
        return default_dci39_schema();
    return load_schema(path);
}

std::vector<double> parse_snr_grid(const std::string& spec)
{
    // "lo:step:hi" or comma list
    std::vector<double> grid;
    if (spec.find(':') != std::string::npos) {
        double lo, step, hi;
        char c1, c2;
        std::istringstream ss(spec);
        if (!(ss >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' || step <= 0)
            throw ConfigError("bad SNR grid '" + spec + "', expected lo:step:hi");
        for (double s = lo; s <= hi + 1e-9; s += step)
            grid.push_back(s);
    } else {
        std::istringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                size_t used = 0;
                double v = std::stod(tok, &used);
                if (used != tok.size())
                    throw std::invalid_argument(tok);
                grid.push_back(v);
            } catch (const std::exception&) {
                throw ConfigError("bad SNR grid entry '" + tok + "'");
            }
        }
    }
    if (grid.empty())
        throw ConfigError("empty SNR grid");
    return grid;
}

Method method_from_name(const std::string& name)
{
    for (Method m : {Method::Identity, Method::Huffman, Method::Adaptive, Method::Rnn,
                     Method::Transformer, Method::Joint})
        if (name == method_name(m))
            return m;
    throw ConfigError("unknown method '" + name + "'");
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string schema_path;
    std::string config_path;
    std::string out = ".";
    uint64_t seed = 1;
    uint32_t ttis = 16000;
    int ues = 3;
    int rbgs = 13;
};

int run_gen(const GenArgs& a)
{
    auto schema = load_schema_or_default(a.schema_path);
    SimConfig cfg;
    cfg.seed = a.seed;
    cfg.tti_count = a.ttis;
    cfg.num_ues = a.ues;
    cfg.num_rbgs = a.rbgs;
    if (!a.config_path.empty()) {
        auto kv = read_kv_file(a.config_path);
        auto get = [&](const char* k, auto& field) {
            auto it = kv.find(k);
            if (it != kv.end())
                field = static_cast<std::remove_reference_t<decltype(field)>>(
                    std::stod(it->second));
        };
        get("num_ues", cfg.num_ues);
        get("num_rbgs", cfg.num_rbgs);
        get("tti_count", cfg.tti_count);
        get("rate_min_mbps", cfg.rate_min_mbps);
        get("rate_max_mbps", cfg.rate_max_mbps);
        get("pf_window_ttis", cfg.pf_window_ttis);
        get("harq_fail_prob", cfg.harq_fail_prob);
        get("retx_delay_ttis", cfg.retx_delay_ttis);
        get("reconfig_mean_period_ttis", cfg.reconfig_mean_period_ttis);
        get("mean_on_ttis", cfg.traffic.mean_on_ttis);
        get("mean_off_ttis", cfg.traffic.mean_off_ttis);
    }
    ensure_outdir(a.out);
    auto trace = simulate(cfg, schema);
    save_trace(a.out + "/trace.bin", trace);
    std::ofstream txt(a.out + "/trace.txt");
    export_trace_text(txt, trace);

    std::cout << "generated trace: ues=" << cfg.num_ues << " ttis=" << cfg.tti_count
              << " N=" << schema.total_bits() << " messages=" << trace.records.size() << "\n";
    for (uint16_t u = 0; u < trace.ue_count; u++)
        std::cout << "  ue " << u << ": " << trace.ue_messages(u).size() << " messages\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string schema_path;
    std::string trace_path = "trace.bin";
    std::string out = ".";
    std::string order = "descending";
    std::string init_model;
    uint64_t seed = 1;
    double test_fraction = 0.03;
    double val_fraction = 0.1;
    int epochs = 15;
    double lr = 1e-3;
    double weight_decay = 1e-4;
    uint64_t epoch_messages = 3000;
    int L = 2;
    int d_model = 64;
    int heads = 4;
    int enc_layers = 2;
    int dec_layers = 2;
    int batch_messages = 16;
    int patience = 5;
    int rnn_epochs = 4;
    int rnn_window = 48;
    int rnn_hidden = 24;
    uint64_t rnn_samples = 30000;
    bool skip_rnn = false;
};

int run_train(const TrainArgs& a)
{
    auto schema = load_schema_or_default(a.schema_path);
    auto trace = load_trace(a.trace_path);
    if (trace.schema_hash != schema.hash())
        throw ConfigError("trace/schema hash mismatch; regenerate the trace");
    auto [train_trace, test_trace] = split_train_test(trace, a.test_fraction);
    (void)test_trace;
    ensure_outdir(a.out);

    for (uint16_t ue = 0; ue < trace.ue_count; ue++) {
        auto msgs = train_trace.ue_messages(ue);
        if (msgs.size() < 8) {
            std::cout << "ue " << ue << ": only " << msgs.size()
                      << " training messages, skipping models\n";
            continue;
        }

        auto entropies = field_entropies(msgs, schema);
        std::vector<int> perm;
        if (a.order == "descending")
            perm = sort_fields(entropies, true).perm;
        else if (a.order == "ascending")
            perm = sort_fields(entropies, false).perm;
        else if (a.order == "none")
            perm = identity_order(schema.field_count());
        else
            throw ConfigError("--order must be descending, ascending or none");

        auto proc = schema.permuted(perm);
        auto plan = build_segment_plan(proc);
        std::vector<DciMessage> proc_msgs;
        proc_msgs.reserve(msgs.size());
        for (const auto& m : msgs)
            proc_msgs.push_back(permute_message(m, schema, perm));

        TransformerConfig tcfg;
        tcfg.L = a.L;
        tcfg.d_model = a.d_model;
        tcfg.heads = a.heads;
        tcfg.enc_layers = a.enc_layers;
        tcfg.dec_layers = a.dec_layers;
        tcfg.R = plan.total_integers;
        tcfg.s_output = 0;
        for (const auto& f : proc.fields())
            tcfg.s_output = std::max(tcfg.s_output, f.width);
        tcfg.dict_size = plan.dict_size;

        Transformer<float> model(tcfg, mix_seed(a.seed, ue, 0x7f));
        if (!a.init_model.empty()) {
            model = Transformer<float>::load(a.init_model);
            if (!(model.config() == tcfg))
                throw ConfigError("--init-model configuration does not match flags");
        }
        model.schema_hash = schema.hash();
        model.field_order = perm;

        TrainSummary summary;
        if (a.epochs > 0) {
            TrainOptions opt;
            opt.lr = a.lr;
            opt.weight_decay = a.weight_decay;
            opt.batch_messages = a.batch_messages;
            opt.max_epochs = a.epochs;
            opt.patience = a.patience;
            opt.validation_fraction = a.val_fraction;
            opt.max_messages_per_epoch = a.epoch_messages;
            opt.seed = mix_seed(a.seed, ue, 0x11);
            summary = train_transformer(model, proc, plan, proc_msgs, opt);
        }
        model.save(a.out + "/model_ue" + std::to_string(ue) + ".bin");

        std::ofstream log(a.out + "/train_log_ue" + std::to_string(ue) + ".csv");
        log << "epoch,train_bce,val_bce,val_bits_per_bit\n";
        log.precision(10);
        for (const auto& e : summary.log)
            log << e.epoch << "," << e.train_bce << "," << e.val_bce << ","
                << e.val_bits_per_bit << "\n";

        auto hc = HuffmanCodec::train(schema, msgs);
        std::ofstream cb(a.out + "/codebook_ue" + std::to_string(ue) + ".txt");
        hc.save(cb);

        if (!a.skip_rnn) {
            RnnConfig rcfg;
            rcfg.window_bits = a.rnn_window;
            rcfg.hidden = a.rnn_hidden;
            GruModel<float> rnn(rcfg, mix_seed(a.seed, ue, 0x2e));
            rnn.schema_hash = schema.hash();
            if (a.rnn_epochs > 0) {
                RnnTrainOptions ropt;
                ropt.max_epochs = a.rnn_epochs;
                ropt.max_samples_per_epoch = a.rnn_samples;
                ropt.seed = mix_seed(a.seed, ue, 0x3d);
                train_rnn(rnn, msgs, ropt);
            }
            rnn.save(a.out + "/rnn_ue" + std::to_string(ue) + ".bin");
        }

        std::cout << "ue " << ue << ": trained on " << msgs.size() << " messages";
        if (!summary.log.empty())
            std::cout << ", best val BCE " << summary.best_val_bce << " (epoch "
                      << summary.best_epoch << ")";
        std::cout << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string schema_path;
    std::string trace_path = "trace.bin";
    std::string models_dir = ".";
    std::string out = ".";
    std::string methods = "identity,huffman,adaptive,rnn,transformer,joint";
    double test_fraction = 0.03;
    uint64_t seed = 1;
};

int run_eval(const EvalArgs& a)
{
    auto schema = load_schema_or_default(a.schema_path);
    auto trace = load_trace(a.trace_path);
    if (trace.schema_hash != schema.hash())
        throw ConfigError("trace/schema hash mismatch");
    auto [train_trace, test_trace] = split_train_test(trace, a.test_fraction);
    ensure_outdir(a.out);

    std::vector<Method> methods;
    {
        std::istringstream ss(a.methods);
        std::string tok;
        while (std::getline(ss, tok, ','))
            methods.push_back(method_from_name(tok));
    }

    bool want_hc = false, want_tr = false, want_rnn = false;
    for (Method m : methods) {
        want_hc |= m == Method::Huffman || m == Method::Joint;
        want_tr |= m == Method::Transformer || m == Method::Joint;
        want_rnn |= m == Method::Rnn;
    }

    std::map<uint16_t, HuffmanCodec> hc_store;
    std::map<uint16_t, Transformer<float>> tr_store;
    std::map<uint16_t, GruModel<float>> rnn_store;
    EvalModels models;
    for (uint16_t ue = 0; ue < trace.ue_count; ue++) {
        std::string sue = std::to_string(ue);
        if (want_hc) {
            std::ifstream cb(a.models_dir + "/codebook_ue" + sue + ".txt");
            if (!cb)
                throw ConfigError("missing codebook_ue" + sue + ".txt in " + a.models_dir);
            hc_store.emplace(ue, HuffmanCodec::load(cb));
            if (hc_store.at(ue).schema_hash() != schema.hash())
                throw ConfigError("codebook_ue" + sue + " schema hash mismatch");
            models.huffman[ue] = &hc_store.at(ue);
        }
        if (want_tr) {
            tr_store.emplace(ue,
                             Transformer<float>::load(a.models_dir + "/model_ue" + sue + ".bin"));
            if (tr_store.at(ue).schema_hash != schema.hash())
                throw ConfigError("model_ue" + sue + " schema hash mismatch");
            models.transformer[ue] = &tr_store.at(ue);
        }
        if (want_rnn) {
            rnn_store.emplace(ue, GruModel<float>::load(a.models_dir + "/rnn_ue" + sue + ".bin"));
            if (rnn_store.at(ue).schema_hash != schema.hash())
                throw ConfigError("rnn_ue" + sue + " schema hash mismatch");
            models.rnn[ue] = &rnn_store.at(ue);
        }
    }

    auto report = evaluate(train_trace, test_trace, schema, models, methods);

    {
        std::ofstream os(a.out + "/report.csv");
        write_report_csv(os, report);
    }
    {
        std::ofstream os(a.out + "/summary.csv");
        write_summary_csv(os, report);
    }
    for (const auto& [m, hist] : report.length_hist) {
        std::ofstream os(a.out + "/lengths_" + method_name(m) + ".csv");
        write_length_hist_csv(os, hist);
    }
    for (const auto& [m, rows] : report.bitmaps) {
        std::ofstream os(a.out + "/bitmap_" + method_name(m) + ".csv");
        write_bitmap_csv(os, rows);
    }

    std::cout << "method,messages,mean_compressed_bits,mean_ratio\n";
    for (const auto& s : report.summary) {
        std::ostringstream row;
        row.precision(6);
        row << std::fixed << method_name(s.method) << "," << s.messages << ","
            << s.mean_compressed_bits << "," << s.mean_ratio;
        std::cout << row.str() << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct FerArgs {
    std::string config_path;
    std::string out = ".";
    std::string snr = "-4.0:0.5:-0.5";
    std::string hc_hist;
    std::string joint_hist;
    int uncompressed_bits = 39;
    int list_size = 8;
    int code_len = 128;
    uint64_t max_frames = 40000;
    uint64_t target_errors = 100;
    uint64_t seed = 1;
    int threads = 2;
};

int run_fer(const FerArgs& a0)
{
    FerArgs a = a0;
    if (!a.config_path.empty()) {
        auto kv = read_kv_file(a.config_path);
        auto get_u64 = [&](const char* k, uint64_t& f) {
            if (kv.count(k))
                f = std::stoull(kv.at(k));
        };
        auto get_int = [&](const char* k, int& f) {
            if (kv.count(k))
                f = std::stoi(kv.at(k));
        };
        if (kv.count("snr"))
            a.snr = kv.at("snr");
        get_int("list_size", a.list_size);
        get_int("code_len", a.code_len);
        get_int("uncompressed_bits", a.uncompressed_bits);
        get_int("threads", a.threads);
        get_u64("max_frames", a.max_frames);
        get_u64("target_errors", a.target_errors);
        get_u64("seed", a.seed);
        if (kv.count("hc_hist"))
            a.hc_hist = kv.at("hc_hist");
        if (kv.count("joint_hist"))
            a.joint_hist = kv.at("joint_hist");
    }

    pdcch::PdcchConfig cfg;
    cfg.code_len = a.code_len;
    cfg.list_size = a.list_size;
    cfg.snr_db = parse_snr_grid(a.snr);
    cfg.max_frames = a.max_frames;
    cfg.target_errors = a.target_errors;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    ensure_outdir(a.out);

    std::vector<pdcch::PayloadSource> sources;
    sources.push_back(pdcch::PayloadSource::fixed(a.uncompressed_bits, "uncompressed"));
    auto add_hist = [&](const std::string& path, const std::string& label) {
        if (path.empty())
            return;
        std::ifstream is(path);
        if (!is)
            throw ConfigError("cannot open length histogram '" + path + "'");
        auto hist = read_length_hist_csv(is);
        sources.push_back(pdcch::PayloadSource::from_hist(hist, cfg.code_len, label));
    };
    add_hist(a.hc_hist, "hc");
    add_hist(a.joint_hist, "joint");

    std::vector<pdcch::FerPoint> all;
    for (const auto& src : sources) {
        auto curve = pdcch::fer_sweep(cfg, src);
        all.insert(all.end(), curve.begin(), curve.end());
        for (const auto& p : curve) {
            std::ostringstream row;
            row.precision(4);
            row << p.label << " snr=" << p.snr_db << " fer=" << p.fer << " (" << p.errors << "/"
                << p.frames << ")";
            std::cout << row.str() << "\n";
        }
    }
    std::ofstream os(a.out + "/fer.csv");
    pdcch::write_fer_csv(os, all);
    return 0;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
    std::string schema_path;
    std::string trace_path;
    double test_fraction = 0.03;
};

int run_inspect(const InspectArgs& a)
{
    auto schema = load_schema_or_default(a.schema_path);
    auto plan = build_segment_plan(schema);
    std::ostringstream hx;
    hx << std::hex << schema.hash();
    std::cout << "schema: " << schema.field_count() << " fields, N=" << schema.total_bits()
              << " bits, eta=" << schema.eta() << ", hash=" << hx.str() << "\n";
    std::cout << "field        width  q  eta_hat  s     segments\n";
    for (int k = 0; k < schema.field_count(); k++) {
        const auto& f = schema.fields()[size_t(k)];
        const auto& seg = plan.fields[size_t(k)];
        std::printf("%-12s %5d %2d %8d %5llu %9d\n", f.name.c_str(), f.width, seg.q, seg.eta_hat,
                    (unsigned long long)seg.s, seg.segment_count);
    }
    std::cout << "R=" << plan.total_integers << " integers per message, dictionary size "
              << plan.dict_size << " (+1 padding token)\n";

    if (!a.trace_path.empty()) {
        auto trace = load_trace(a.trace_path);
        if (trace.schema_hash != schema.hash())
            throw ConfigError("trace/schema hash mismatch");
        auto [train_trace, test_trace] = split_train_test(trace, a.test_fraction);
        (void)test_trace;
        for (uint16_t ue = 0; ue < trace.ue_count; ue++) {
            auto msgs = train_trace.ue_messages(ue);
            if (msgs.empty())
                continue;
            auto ent = field_entropies(msgs, schema);
            auto order = sort_fields(ent);
            std::cout << "ue " << ue << " training entropies (bits):";
            for (int k = 0; k < schema.field_count(); k++) {
                std::ostringstream v;
                v.precision(3);
                v << std::fixed << ent[size_t(k)];
                std::cout << " " << schema.fields()[size_t(k)].name << "=" << v.str();
            }
            std::cout << "\n  descending order:";
            for (int p : order.perm)
                std::cout << " " << schema.fields()[size_t(p)].name;
            std::cout << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"dcic: lossless compression toolkit for DCI-style control messages"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* cgen = app.add_subcommand("gen", "generate a synthetic DCI trace");
    cgen->add_option("--schema", gen.schema_path, "schema file (default: built-in 39-bit layout)");
    cgen->add_option("--config", gen.config_path, "simulator config file (key value lines)");
    cgen->add_option("--out", gen.out, "output directory");
    cgen->add_option("--seed", gen.seed, "rng seed");
    cgen->add_option("--ttis", gen.ttis, "number of TTIs to simulate");
    cgen->add_option("--ues", gen.ues, "number of UEs");
    cgen->add_option("--rbgs", gen.rbgs, "number of RBGs");

    TrainArgs tr;
    auto* ctr = app.add_subcommand("train", "train per-UE models on a trace");
    ctr->add_option("--schema", tr.schema_path, "schema file");
    ctr->add_option("--trace", tr.trace_path, "trace file");
    ctr->add_option("--out", tr.out, "output directory");
    ctr->add_option("--seed", tr.seed, "rng seed");
    ctr->add_option("--order", tr.order, "field order: descending|ascending|none");
    ctr->add_option("--test-fraction", tr.test_fraction, "held-out tail fraction");
    ctr->add_option("--val-fraction", tr.val_fraction, "validation tail fraction of train");
    ctr->add_option("--epochs", tr.epochs, "max training epochs");
    ctr->add_option("--lr", tr.lr, "learning rate");
    ctr->add_option("--weight-decay", tr.weight_decay, "decoupled weight decay");
    ctr->add_option("--epoch-messages", tr.epoch_messages,
                    "cap on messages visited per epoch (0 = all)");
    ctr->add_option("--memory", tr.L, "memory buffer length L in messages");
    ctr->add_option("--d-model", tr.d_model, "embedding width");
    ctr->add_option("--heads", tr.heads, "attention heads");
    ctr->add_option("--enc-layers", tr.enc_layers, "encoder layers");
    ctr->add_option("--dec-layers", tr.dec_layers, "decoder layers");
    ctr->add_option("--batch", tr.batch_messages, "messages per batch");
    ctr->add_option("--patience", tr.patience, "early-stop patience");
    ctr->add_option("--init-model", tr.init_model, "warm-start transformer from a model file");
    ctr->add_option("--rnn-epochs", tr.rnn_epochs, "rnn training epochs");
    ctr->add_option("--rnn-window", tr.rnn_window, "rnn history window in bits");
    ctr->add_option("--rnn-hidden", tr.rnn_hidden, "rnn hidden size");
    ctr->add_option("--rnn-samples", tr.rnn_samples, "rnn samples per epoch");
    ctr->add_flag("--skip-rnn", tr.skip_rnn, "do not train the rnn baseline");

    EvalArgs ev;
    auto* cev = app.add_subcommand("eval", "compression-ratio evaluation on the test split");
    cev->add_option("--schema", ev.schema_path, "schema file");
    cev->add_option("--trace", ev.trace_path, "trace file");
    cev->add_option("--models", ev.models_dir, "directory with trained artifacts");
    cev->add_option("--out", ev.out, "output directory");
    cev->add_option("--methods", ev.methods, "comma list of methods");
    cev->add_option("--test-fraction", ev.test_fraction, "held-out tail fraction");
    cev->add_option("--seed", ev.seed, "rng seed");

    FerArgs fer;
    auto* cfer = app.add_subcommand("fer", "polar-coded PDCCH FER sweep");
    cfer->add_option("--config", fer.config_path, "PdcchConfig file (key value lines)");
    cfer->add_option("--out", fer.out, "output directory");
    cfer->add_option("--snr", fer.snr, "SNR grid, lo:step:hi or comma list (Es/N0 dB)");
    cfer->add_option("--hc-hist", fer.hc_hist, "lengths_huffman.csv from eval");
    cfer->add_option("--joint-hist", fer.joint_hist, "lengths_joint.csv from eval");
    cfer->add_option("--uncompressed-bits", fer.uncompressed_bits, "baseline payload bits");
    cfer->add_option("--list-size", fer.list_size, "SCL list size");
    cfer->add_option("--code-len", fer.code_len, "polar code length");
    cfer->add_option("--frames", fer.max_frames, "max frames per point");
    cfer->add_option("--errors", fer.target_errors, "stop after this many frame errors");
    cfer->add_option("--seed", fer.seed, "rng seed");
    cfer->add_option("--threads", fer.threads, "worker threads");

    InspectArgs ins;
    auto* cins = app.add_subcommand("inspect", "print schema, segment plan and entropies");
    cins->add_option("--schema", ins.schema_path, "schema file");
    cins->add_option("--trace", ins.trace_path, "trace file for entropy estimates");
    cins->add_option("--test-fraction", ins.test_fraction, "held-out tail fraction");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cgen->parsed())
            return run_gen(gen);
        if (ctr->parsed())
            return run_train(tr);
        if (cev->parsed())
            return run_eval(ev);
        if (cfer->parsed())
            return run_fer(fer);
        if (cins->parsed())
            return run_inspect(ins);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
