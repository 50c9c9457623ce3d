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

#ifndef DCIC_PDCCH_HPP
#define DCIC_PDCCH_HPP

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "polar.hpp"
#include "tracegen.hpp" // Rng

namespace dcic {
namespace pdcch {

// One blind-decodable payload length hypothesis.
struct LengthCandidate {
    int payload_bits = 0;
    double prob = 0;
};

// Compressed-length histogram -> byte-resolution candidate set, capped at the
// 8 most probable byte lengths (most probable first, shorter first on ties).
// Candidates whose payload+CRC would exceed the code length are dropped.
inline std::vector<LengthCandidate> length_candidates(const std::map<uint32_t, uint64_t>& bits_hist,
                                                      int code_len, int max_candidates = 8)
{
    std::map<uint32_t, uint64_t> byte_hist;
    for (const auto& [bits, count] : bits_hist)
        byte_hist[(bits + 7) / 8] += count;

    std::vector<std::pair<uint32_t, uint64_t>> items(byte_hist.begin(), byte_hist.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<LengthCandidate> cands;
    uint64_t mass = 0;
    for (const auto& [bytes, count] : items) {
        int payload_bits = int(bytes) * 8;
        if (payload_bits + polar::kCrcBits > code_len)
            continue; // cannot be carried by this code
        if (int(cands.size()) == max_candidates)
            break;
        cands.push_back({payload_bits, double(count)});
        mass += count;
    }
    if (cands.empty())
        throw ConfigError("length_candidates: histogram left no feasible candidate");
    for (auto& c : cands)
        c.prob /= double(mass);
    return cands;
}

struct PdcchConfig {
    int code_len = 128;
    int list_size = 8;
    std::vector<double> snr_db;  // Es/N0 grid
    uint64_t max_frames = 200000;
    uint64_t target_errors = 100;
    uint64_t seed = 1;
    int threads = 2;
    uint64_t chunk = 1024; // error-count checks happen at chunk boundaries
};

struct FerPoint {
    double snr_db = 0;
    uint64_t frames = 0;
    uint64_t errors = 0;
    double fer = 0;
    double ci_halfwidth = 0; // 95% Wilson interval half-width
    std::string label;
};

inline double wilson_halfwidth(uint64_t errors, uint64_t frames)
{
    if (frames == 0)
        return 0;
    const double z = 1.959963984540054;
    double n = double(frames);
    double p = double(errors) / n;
    double denom = 1.0 + z * z / n;
    double half = (z / denom) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
    return half;
}

// Blind decoding over the candidate payload lengths, most probable first. The
// first CRC pass wins; a pass with the wrong payload is the caller's
// undetected-error case.
struct BlindResult {
    bool ok = false;
    int payload_bits = 0;
    std::vector<uint8_t> payload;
};

class BlindDecoder {
public:
    BlindDecoder(const std::vector<LengthCandidate>& cands, int code_len, int list_size)
    {
        for (const auto& c : cands) {
            decoders_.emplace_back(c.payload_bits,
                                   polar::SclDecoder(polar::frozen_mask(
                                                         code_len, c.payload_bits + polar::kCrcBits),
                                                     list_size));
        }
    }

    BlindResult decode(const std::vector<double>& llrs) const
    {
        for (const auto& [payload_bits, dec] : decoders_) {
            polar::SclResult r = dec.decode(llrs);
            if (r.ok) {
                BlindResult b;
                b.ok = true;
                b.payload_bits = payload_bits;
                b.payload = std::move(r.payload);
                return b;
            }
        }
        return {};
    }

private:
    std::vector<std::pair<int, polar::SclDecoder>> decoders_;
};

// Payload length source for one FER curve: a fixed length or the candidate
// distribution of a compressed-length histogram.
struct PayloadSource {
    std::vector<LengthCandidate> cands; // singleton for the fixed case
    std::string label;

    static PayloadSource fixed(int payload_bits, const std::string& label)
    {
        return {{{payload_bits, 1.0}}, label};
    }

    static PayloadSource from_hist(const std::map<uint32_t, uint64_t>& hist, int code_len,
                                   const std::string& label)
    {
        return {length_candidates(hist, code_len), label};
    }
};

namespace detail {

// single frame simulation; deterministic in frame_seed
inline bool frame_has_error(const PayloadSource& src, const BlindDecoder& blind,
                            const std::vector<std::vector<uint8_t>>& frozen_by_cand,
                            double snr_db, int code_len, uint64_t frame_seed)
{
    Rng rng(frame_seed);
    // draw a candidate length
    double u = rng.u01();
    size_t pick = 0;
    double acc = 0;
    for (size_t i = 0; i < src.cands.size(); i++) {
        acc += src.cands[i].prob;
        if (u < acc) {
            pick = i;
            break;
        }
        pick = i;
    }
    int payload_bits = src.cands[pick].payload_bits;
    std::vector<uint8_t> payload(static_cast<size_t>(payload_bits));
    for (auto& b : payload)
        b = uint8_t(rng.raw() & 1);

    auto cw = polar::encode_with_crc(payload, frozen_by_cand[pick]);

    double n0 = std::pow(10.0, -snr_db / 10.0);
    double sigma2 = n0 / 2.0;
    double sigma = std::sqrt(sigma2);
    std::vector<double> llr(static_cast<size_t>(code_len));
    for (int i = 0; i < code_len; i++) {
        double x = cw[size_t(i)] ? -1.0 : 1.0; // BPSK, bit 0 -> +1
        double y = x + sigma * rng.normal();
        llr[size_t(i)] = 2.0 * y / sigma2;
    }

    BlindResult r = blind.decode(llr);
    if (!r.ok)
        return true;
    return r.payload_bits != payload_bits || r.payload != payload;
}

} // namespace detail

// FER curve for one payload source. Frames run in deterministic per-frame
// substreams; chunks execute in parallel and the stop rule (>= target_errors)
// is evaluated only at chunk boundaries, so results do not depend on thread
// scheduling.
inline std::vector<FerPoint> fer_sweep(const PdcchConfig& cfg, const PayloadSource& src)
{
    if (cfg.snr_db.empty())
        throw ConfigError("fer_sweep: empty SNR grid");
    BlindDecoder blind(src.cands, cfg.code_len, cfg.list_size);
    std::vector<std::vector<uint8_t>> frozen_by_cand;
    for (const auto& c : src.cands)
        frozen_by_cand.push_back(
            polar::frozen_mask(cfg.code_len, c.payload_bits + polar::kCrcBits));

    uint64_t label_hash = fnv1a64(src.label);
    std::vector<FerPoint> curve;
    for (size_t si = 0; si < cfg.snr_db.size(); si++) {
        double snr = cfg.snr_db[si];
        uint64_t frames = 0, errors = 0;
        while (frames < cfg.max_frames && errors < cfg.target_errors) {
            uint64_t todo = std::min(cfg.chunk, cfg.max_frames - frames);
            int nthreads = std::max(1, cfg.threads);
            std::vector<uint64_t> thread_errors(size_t(nthreads), 0);
            std::vector<std::thread> workers;
            for (int w = 0; w < nthreads; w++) {
                workers.emplace_back([&, w]() {
                    uint64_t local = 0;
                    for (uint64_t f = uint64_t(w); f < todo; f += uint64_t(nthreads)) {
                        uint64_t fs = mix_seed(cfg.seed, label_hash, si, frames + f);
                        if (detail::frame_has_error(src, blind, frozen_by_cand, snr,
                                                    cfg.code_len, fs))
                            local++;
                    }
                    thread_errors[size_t(w)] = local;
                });
            }
            for (auto& t : workers)
                t.join();
            for (uint64_t e : thread_errors)
                errors += e;
            frames += todo;
        }
        FerPoint pt;
        pt.snr_db = snr;
        pt.frames = frames;
        pt.errors = errors;
        pt.fer = frames ? double(errors) / double(frames) : 0.0;
        pt.ci_halfwidth = wilson_halfwidth(errors, frames);
        pt.label = src.label;
        curve.push_back(pt);
    }
    return curve;
}

inline void write_fer_csv(std::ostream& os, const std::vector<FerPoint>& points)
{
    os << "snr_db,frames,errors,fer,ci_halfwidth,curve_label\n";
    for (const auto& p : points) {
        std::ostringstream row;
        row.precision(10);
        row << p.snr_db << "," << p.frames << "," << p.errors << "," << p.fer << ","
            << p.ci_halfwidth << "," << p.label;
        os << row.str() << "\n";
    }
}

// SNR (dB) where the log-linear interpolated curve crosses target_fer.
// Requires at least one point on each side; returns nullopt otherwise.
inline std::optional<double> snr_at_fer(const std::vector<FerPoint>& curve, double target_fer)
{
    for (size_t i = 0; i + 1 < curve.size(); i++) {
        double f0 = curve[i].fer, f1 = curve[i + 1].fer;
        if (f0 <= 0 || f1 <= 0)
            continue;
        bool crosses = (f0 >= target_fer && f1 <= target_fer) ||
                       (f0 <= target_fer && f1 >= target_fer);
        if (!crosses || f0 == f1)
            continue;
        double t = (std::log10(target_fer) - std::log10(f0)) /
                   (std::log10(f1) - std::log10(f0));
        return curve[i].snr_db + t * (curve[i + 1].snr_db - curve[i].snr_db);
    }
    return std::nullopt;
}

} // namespace pdcch
} // namespace dcic

#endif
