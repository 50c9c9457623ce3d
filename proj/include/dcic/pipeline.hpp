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

#ifndef DCIC_PIPELINE_HPP
#define DCIC_PIPELINE_HPP

#include <iomanip>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ac.hpp"
#include "huffman.hpp"
#include "predictors.hpp"
#include "trace.hpp"

namespace dcic {

// ---------------------------------------------------------------------------
// Field entropy and ordering

inline double field_entropy(const std::vector<DciMessage>& train, const DciSchema& schema, int k)
{
    if (train.empty())
        throw ConfigError("field_entropy: empty training split");
    std::map<uint32_t, uint64_t> hist;
    for (const auto& m : train)
        hist[field_value(m, schema, k)]++;
    double n = double(train.size());
    double h = 0;
    for (const auto& [v, c] : hist) {
        double p = double(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

inline std::vector<double> field_entropies(const std::vector<DciMessage>& train,
                                           const DciSchema& schema)
{
    std::vector<double> h;
    for (int k = 0; k < schema.field_count(); k++)
        h.push_back(field_entropy(train, schema, k));
    return h;
}

struct FieldOrder {
    std::vector<int> perm;         // perm[i] = original index of the i-th processed field
    std::vector<double> entropies; // per original field index, bits
};

// Descending entropy, ties by ascending original index. descending=false
// gives the ascending ablation order.
inline FieldOrder sort_fields(const std::vector<double>& entropies, bool descending = true)
{
    FieldOrder order;
    order.entropies = entropies;
    order.perm.resize(entropies.size());
    std::iota(order.perm.begin(), order.perm.end(), 0);
    std::stable_sort(order.perm.begin(), order.perm.end(), [&](int a, int b) {
        double ha = entropies[size_t(a)], hb = entropies[size_t(b)];
        if (ha != hb)
            return descending ? ha > hb : ha < hb;
        return a < b;
    });
    return order;
}

inline std::vector<int> identity_order(int d)
{
    std::vector<int> p(static_cast<size_t>(d));
    std::iota(p.begin(), p.end(), 0);
    return p;
}

// Re-lay a message into processing order (the interleaving step applied
// before feature and label construction).
inline DciMessage permute_message(const DciMessage& msg, const DciSchema& orig,
                                  const std::vector<int>& perm)
{
    DciMessage out;
    out.bits.reserve(msg.bits.size());
    for (int p : perm) {
        int off = orig.field_bit_offset(p);
        int w = orig.fields()[size_t(p)].width;
        out.bits.insert(out.bits.end(), msg.bits.begin() + off, msg.bits.begin() + off + w);
    }
    return out;
}

inline DciMessage unpermute_message(const DciMessage& msg, const DciSchema& orig,
                                    const std::vector<int>& perm)
{
    DciMessage out;
    out.bits.assign(msg.bits.size(), 0);
    size_t pos = 0;
    for (int p : perm) {
        int off = orig.field_bit_offset(p);
        int w = orig.fields()[size_t(p)].width;
        for (int i = 0; i < w; i++)
            out.bits[size_t(off + i)] = msg.bits[pos++];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frames

enum class Method : uint8_t {
    Identity = 0,
    Huffman = 1,
    Adaptive = 2,
    Rnn = 3,
    Transformer = 4,
    Joint = 5,
};

inline const char* method_name(Method m)
{
    switch (m) {
    case Method::Identity: return "identity";
    case Method::Huffman: return "huffman";
    case Method::Adaptive: return "adaptive";
    case Method::Rnn: return "rnn";
    case Method::Transformer: return "transformer";
    case Method::Joint: return "joint";
    }
    return "?";
}

struct CompressedFrame {
    Method method = Method::Identity;
    uint32_t bit_len = 0; // K_t
    std::vector<uint8_t> payload;
};

inline void write_frames(std::ostream& os, const std::vector<CompressedFrame>& frames)
{
    write_le<uint32_t>(os, uint32_t(frames.size()));
    for (const auto& f : frames) {
        write_le<uint8_t>(os, uint8_t(f.method));
        write_le<uint32_t>(os, f.bit_len);
        size_t nbytes = (size_t(f.bit_len) + 7) / 8;
        if (f.payload.size() < nbytes)
            throw ConfigError("frame payload shorter than declared length");
        os.write(reinterpret_cast<const char*>(f.payload.data()), std::streamsize(nbytes));
    }
}

inline std::vector<CompressedFrame> read_frames(std::istream& is)
{
    uint32_t n = read_le<uint32_t>(is);
    std::vector<CompressedFrame> frames(n);
    for (auto& f : frames) {
        f.method = Method(read_le<uint8_t>(is));
        f.bit_len = read_le<uint32_t>(is);
        size_t nbytes = (size_t(f.bit_len) + 7) / 8;
        f.payload.resize(nbytes);
        is.read(reinterpret_cast<char*>(f.payload.data()), std::streamsize(nbytes));
        if (!is)
            throw CorruptInput("frame file truncated");
    }
    return frames;
}

// ---------------------------------------------------------------------------
// AC driver: fields in processing order, per-bit probability from the
// predictor, identical quantization on both sides.

inline CompressedFrame ac_compress_message(BitPredictor& pred, const DciSchema& proc_schema,
                                           const DciMessage& proc_msg, Method tag)
{
    validate_message(proc_msg, proc_schema);
    pred.begin_message();
    ac::Encoder enc;
    int off = 0;
    for (int k = 0; k < proc_schema.field_count(); k++) {
        int w = proc_schema.fields()[size_t(k)].width;
        for (int j = 0; j < w; j++) {
            int bit = proc_msg.bits[size_t(off + j)];
            enc.encode_bit_p(bit, pred.prob_one(k, j));
            pred.observe(k, j, bit);
        }
        off += w;
    }
    enc.finish();
    pred.end_message(proc_msg);
    CompressedFrame f;
    f.method = tag;
    f.bit_len = uint32_t(enc.bit_count());
    f.payload = enc.bytes();
    return f;
}

inline DciMessage ac_decompress_message(BitPredictor& pred, const DciSchema& proc_schema,
                                        const uint8_t* payload, size_t payload_bytes,
                                        uint32_t bit_len)
{
    pred.begin_message();
    ac::Decoder dec(payload, payload_bytes, bit_len);
    DciMessage msg;
    msg.bits.assign(size_t(proc_schema.total_bits()), 0);
    int off = 0;
    for (int k = 0; k < proc_schema.field_count(); k++) {
        int w = proc_schema.fields()[size_t(k)].width;
        for (int j = 0; j < w; j++) {
            int bit = dec.decode_bit_p(pred.prob_one(k, j));
            msg.bits[size_t(off + j)] = uint8_t(bit);
            pred.observe(k, j, bit);
        }
        off += w;
    }
    pred.end_message(msg);
    return msg;
}

// ---------------------------------------------------------------------------
// Stream codecs: one encoder or decoder instance per UE stream. Encoder and
// decoder are separate objects whose state advances identically.

class StreamCodec {
public:
    virtual ~StreamCodec() = default;
    virtual CompressedFrame compress(const DciMessage& msg) = 0;
    virtual DciMessage decompress(const CompressedFrame& frame) = 0;
};

class IdentityCodec : public StreamCodec {
public:
    explicit IdentityCodec(const DciSchema& schema) : n_(schema.total_bits()) {}

    CompressedFrame compress(const DciMessage& msg) override
    {
        CompressedFrame f;
        f.method = Method::Identity;
        f.bit_len = uint32_t(n_);
        f.payload = pack_bits_be(msg.bits);
        return f;
    }

    DciMessage decompress(const CompressedFrame& f) override
    {
        DciMessage m;
        m.bits = unpack_bits_be(f.payload, size_t(n_));
        return m;
    }

private:
    int n_;
};

class HuffmanStreamCodec : public StreamCodec {
public:
    HuffmanStreamCodec(const DciSchema& schema, const HuffmanCodec* codec)
        : schema_(schema), codec_(codec) {}

    CompressedFrame compress(const DciMessage& msg) override
    {
        BitWriter out;
        codec_->encode_message(msg, schema_, out);
        CompressedFrame f;
        f.method = Method::Huffman;
        f.bit_len = uint32_t(out.bit_count());
        f.payload = out.take_bytes();
        return f;
    }

    DciMessage decompress(const CompressedFrame& f) override
    {
        BitReader in(f.payload.data(), f.payload.size(), f.bit_len);
        return codec_->decode_message(in, schema_);
    }

private:
    DciSchema schema_;
    const HuffmanCodec* codec_;
};

// Predictor-driven AC codec. `perm` maps original field order to the
// predictor's processing order; messages cross the permutation on the way in
// and out so callers always see the original layout.
class AcStreamCodec : public StreamCodec {
public:
    AcStreamCodec(const DciSchema& orig_schema, std::vector<int> perm,
                  std::unique_ptr<BitPredictor> pred, Method tag)
        : orig_(orig_schema), perm_(std::move(perm)), proc_(orig_schema.permuted(perm_)),
          pred_(std::move(pred)), tag_(tag) {}

    CompressedFrame compress(const DciMessage& msg) override
    {
        return ac_compress_message(*pred_, proc_, permute_message(msg, orig_, perm_), tag_);
    }

    DciMessage decompress(const CompressedFrame& f) override
    {
        DciMessage proc_msg =
            ac_decompress_message(*pred_, proc_, f.payload.data(), f.payload.size(), f.bit_len);
        return unpermute_message(proc_msg, orig_, perm_);
    }

    // Advance model state for a message that was carried by another method
    // (joint fallback path).
    void push_history(const DciMessage& msg)
    {
        pred_->end_message(permute_message(msg, orig_, perm_));
    }

    BitPredictor& predictor() { return *pred_; }

private:
    DciSchema orig_;
    std::vector<int> perm_;
    DciSchema proc_;
    std::unique_ptr<BitPredictor> pred_;
    Method tag_;
};

// Per-message choice of the shorter of transformer-AC and Huffman, signalled
// by one explicit selector bit (0 = transformer, ties included; 1 = Huffman).
// K_t counts the selector.
class JointStreamCodec : public StreamCodec {
public:
    JointStreamCodec(std::unique_ptr<AcStreamCodec> transformer,
                     std::unique_ptr<HuffmanStreamCodec> huffman)
        : tcodec_(std::move(transformer)), hcodec_(std::move(huffman)) {}

    CompressedFrame compress(const DciMessage& msg) override
    {
        CompressedFrame ft = tcodec_->compress(msg); // advances model state either way
        CompressedFrame fh = hcodec_->compress(msg);
        const CompressedFrame& pick = (ft.bit_len <= fh.bit_len) ? ft : fh;
        int selector = (ft.bit_len <= fh.bit_len) ? 0 : 1;

        BitWriter out;
        out.push(selector);
        BitReader in(pick.payload.data(), pick.payload.size(), pick.bit_len);
        for (uint32_t i = 0; i < pick.bit_len; i++)
            out.push(in.next());
        CompressedFrame f;
        f.method = Method::Joint;
        f.bit_len = 1 + pick.bit_len;
        f.payload = out.take_bytes();
        return f;
    }

    DciMessage decompress(const CompressedFrame& f) override
    {
        if (f.bit_len < 1)
            throw CorruptInput("joint frame without selector bit");
        BitReader in(f.payload.data(), f.payload.size(), f.bit_len);
        int selector = in.next();
        // strip the selector: re-pack remaining bits
        BitWriter rest;
        for (uint32_t i = 1; i < f.bit_len; i++)
            rest.push(in.next());
        CompressedFrame inner;
        inner.bit_len = f.bit_len - 1;
        inner.payload = rest.take_bytes();
        if (inner.payload.empty())
            inner.payload.push_back(0);
        if (selector == 0) {
            inner.method = Method::Transformer;
            return tcodec_->decompress(inner);
        }
        inner.method = Method::Huffman;
        DciMessage msg = hcodec_->decompress(inner);
        tcodec_->push_history(msg); // keep the model side in sync
        return msg;
    }

private:
    std::unique_ptr<AcStreamCodec> tcodec_;
    std::unique_ptr<HuffmanStreamCodec> hcodec_;
};

// ---------------------------------------------------------------------------
// Evaluation

struct MessageResult {
    uint16_t ue = 0;
    uint32_t tti = 0;
    Method method = Method::Identity;
    uint32_t original_bits = 0;
    uint32_t compressed_bits = 0;
    bool lossless = false;
};

struct MethodSummary {
    Method method = Method::Identity;
    uint64_t messages = 0;
    double mean_compressed_bits = 0;
    double mean_ratio = 0; // N / mean(K_t)
};

struct CompressionReport {
    std::vector<MessageResult> per_message;
    std::vector<MethodSummary> summary;
    std::map<Method, std::map<uint32_t, uint64_t>> length_hist;
    std::map<Method, std::vector<std::vector<int8_t>>> bitmaps; // 0/1 payload bits, -1 null
};

// Everything evaluate() needs, keyed per UE (models are trained separately
// for each UE, Huffman codebooks included); entries are optional when the
// method list omits them.
struct EvalModels {
    std::map<uint16_t, const HuffmanCodec*> huffman;
    std::map<uint16_t, const Transformer<float>*> transformer;
    std::map<uint16_t, const GruModel<float>*> rnn;
};

namespace detail {

inline const HuffmanCodec* huffman_for(const EvalModels& models, uint16_t ue)
{
    auto it = models.huffman.find(ue);
    if (it == models.huffman.end())
        throw ConfigError("evaluate: huffman codebooks missing for ue " + std::to_string(ue));
    return it->second;
}

inline std::unique_ptr<StreamCodec> make_codec(Method m, const DciSchema& schema,
                                               const EvalModels& models, uint16_t ue,
                                               const std::vector<DciMessage>& train_tail)
{
    switch (m) {
    case Method::Identity:
        return std::make_unique<IdentityCodec>(schema);
    case Method::Huffman:
        return std::make_unique<HuffmanStreamCodec>(schema, huffman_for(models, ue));
    case Method::Adaptive:
        return std::make_unique<AcStreamCodec>(
            schema, identity_order(schema.field_count()),
            std::make_unique<AdaptivePredictor>(schema), Method::Adaptive);
    case Method::Rnn: {
        auto it = models.rnn.find(ue);
        if (it == models.rnn.end())
            throw ConfigError("evaluate: rnn model missing for ue " + std::to_string(ue));
        auto pred = std::make_unique<RnnPredictor>(it->second);
        pred->seed_history(train_tail);
        return std::make_unique<AcStreamCodec>(schema, identity_order(schema.field_count()),
                                               std::move(pred), Method::Rnn);
    }
    case Method::Transformer:
    case Method::Joint: {
        auto it = models.transformer.find(ue);
        if (it == models.transformer.end())
            throw ConfigError("evaluate: transformer model missing for ue " + std::to_string(ue));
        const Transformer<float>* model = it->second;
        if (model->schema_hash != schema.hash())
            throw ConfigError("evaluate: transformer schema hash mismatch");
        std::vector<int> perm = model->field_order;
        if (perm.empty())
            perm = identity_order(schema.field_count());
        DciSchema proc = schema.permuted(perm);
        SegmentPlan plan = build_segment_plan(proc);
        auto pred = std::make_unique<TransformerPredictor>(model, proc, plan);
        std::vector<DciMessage> tail_proc;
        for (const auto& m2 : train_tail)
            tail_proc.push_back(permute_message(m2, schema, perm));
        size_t keep = std::min<size_t>(tail_proc.size(), size_t(model->config().L));
        pred->seed_history({tail_proc.end() - long(keep), tail_proc.end()});
        auto ac = std::make_unique<AcStreamCodec>(schema, perm, std::move(pred),
                                                  Method::Transformer);
        if (m == Method::Transformer)
            return ac;
        return std::make_unique<JointStreamCodec>(
            std::move(ac),
            std::make_unique<HuffmanStreamCodec>(schema, huffman_for(models, ue)));
    }
    }
    throw ConfigError("evaluate: unknown method");
}

} // namespace detail

// Compresses every test message of every UE with each method, verifies the
// round trip (any failure is a hard error) and accumulates ratios pooled over
// all UEs. Transformer/RNN histories are seeded with the training tail.
inline CompressionReport evaluate(const DciTrace& train, const DciTrace& test,
                                  const DciSchema& schema, const EvalModels& models,
                                  const std::vector<Method>& methods)
{
    if (schema.hash() != test.schema_hash || schema.hash() != train.schema_hash)
        throw ConfigError("evaluate: trace/schema hash mismatch");
    const uint32_t N = uint32_t(schema.total_bits());

    CompressionReport report;
    for (Method m : methods) {
        uint64_t count = 0, bits = 0;
        for (uint16_t ue = 0; ue < test.ue_count; ue++) {
            auto test_recs = test.ue_records(ue);
            if (test_recs.empty())
                continue;
            auto train_tail = train.ue_messages(ue);
            auto enc = detail::make_codec(m, schema, models, ue, train_tail);
            auto dec = detail::make_codec(m, schema, models, ue, train_tail);
            for (const auto& rec : test_recs) {
                CompressedFrame frame = enc->compress(rec.msg);
                DciMessage back = dec->decompress(frame);
                bool ok = back == rec.msg;
                report.per_message.push_back(
                    {ue, rec.tti, m, N, frame.bit_len, ok});
                if (!ok)
                    throw VerificationError(std::string("lossless check failed: method ") +
                                            method_name(m) + ", ue " + std::to_string(ue) +
                                            ", tti " + std::to_string(rec.tti));
                report.length_hist[m][frame.bit_len]++;
                auto& bm = report.bitmaps[m];
                std::vector<int8_t> row(size_t(std::max(N, frame.bit_len)), int8_t(-1));
                BitReader br(frame.payload.data(), frame.payload.size(), frame.bit_len);
                for (uint32_t i = 0; i < frame.bit_len; i++)
                    row[i] = int8_t(br.next());
                bm.push_back(std::move(row));
                count++;
                bits += frame.bit_len;
            }
        }
        MethodSummary s;
        s.method = m;
        s.messages = count;
        s.mean_compressed_bits = count ? double(bits) / double(count) : 0.0;
        s.mean_ratio = count ? double(N) / s.mean_compressed_bits : 0.0;
        report.summary.push_back(s);
    }
    return report;
}

// ---------------------------------------------------------------------------
// CSV emission

inline void write_report_csv(std::ostream& os, const CompressionReport& r)
{
    os << "ue,tti,method,original_bits,compressed_bits,lossless_ok\n";
    for (const auto& m : r.per_message)
        os << m.ue << "," << m.tti << "," << method_name(m.method) << "," << m.original_bits
           << "," << m.compressed_bits << "," << (m.lossless ? 1 : 0) << "\n";
}

inline void write_summary_csv(std::ostream& os, const CompressionReport& r)
{
    os << "method,messages,mean_compressed_bits,mean_ratio\n";
    os << std::fixed << std::setprecision(6);
    for (const auto& s : r.summary)
        os << method_name(s.method) << "," << s.messages << "," << s.mean_compressed_bits << ","
           << s.mean_ratio << "\n";
}

inline void write_length_hist_csv(std::ostream& os, const std::map<uint32_t, uint64_t>& hist)
{
    os << "length_bits,count\n";
    for (const auto& [len, c] : hist)
        os << len << "," << c << "\n";
}

inline std::map<uint32_t, uint64_t> read_length_hist_csv(std::istream& is)
{
    std::map<uint32_t, uint64_t> hist;
    std::string line;
    if (!std::getline(is, line) || line.rfind("length_bits", 0) != 0)
        throw CorruptInput("length histogram: missing header");
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw CorruptInput("length histogram: bad line '" + line + "'");
        hist[uint32_t(std::stoul(line.substr(0, comma)))] +=
            uint64_t(std::stoull(line.substr(comma + 1)));
    }
    return hist;
}

// message x bit occupancy matrix; -1 marks the null space past K_t.
inline void write_bitmap_csv(std::ostream& os, const std::vector<std::vector<int8_t>>& rows)
{
    size_t width = 0;
    for (const auto& r : rows)
        width = std::max(width, r.size());
    for (const auto& r : rows) {
        for (size_t i = 0; i < width; i++) {
            if (i)
                os << ",";
            os << (i < r.size() ? int(r[i]) : -1);
        }
        os << "\n";
    }
}

} // namespace dcic

#endif
