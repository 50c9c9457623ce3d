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

#ifndef DCIC_POLAR_HPP
#define DCIC_POLAR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "common.hpp"

namespace dcic {
namespace polar {

// CRC-24C (0xB2B117) with all-ones initial register, the DCI attachment
// convention. RNTI masking is out of scope here.
constexpr uint32_t kCrc24Poly = 0xB2B117;
constexpr int kCrcBits = 24;

inline std::vector<uint8_t> crc24(const std::vector<uint8_t>& bits)
{
    uint32_t reg = 0xFFFFFF;
    for (uint8_t bit : bits) {
        uint32_t top = (reg >> 23) & 1u;
        reg = (reg << 1) & 0xFFFFFF;
        if (top ^ uint32_t(bit))
            reg ^= kCrc24Poly;
    }
    std::vector<uint8_t> out(kCrcBits);
    for (int i = 0; i < kCrcBits; i++)
        out[size_t(i)] = uint8_t((reg >> (kCrcBits - 1 - i)) & 1u);
    return out;
}

inline bool crc24_check(const std::vector<uint8_t>& payload, const std::vector<uint8_t>& parity)
{
    return crc24(payload) == parity;
}

// Reliability order from the polarization-weight (beta-expansion) construction
// with beta = 2^(1/4): W(i) = sum_j b_j(i) * beta^j. Higher weight = more
// reliable. Deterministic; ties (none for N <= 128) break by index.
inline std::vector<int> reliability_order(int block_len)
{
    int n = 0;
    while ((1 << n) < block_len)
        n++;
    if ((1 << n) != block_len)
        throw ConfigError("polar: block length must be a power of two");
    std::vector<double> w(size_t(block_len), 0.0);
    const double beta = std::pow(2.0, 0.25);
    for (int i = 0; i < block_len; i++)
        for (int j = 0; j < n; j++)
            if ((i >> j) & 1)
                w[size_t(i)] += std::pow(beta, double(j));
    std::vector<int> order(static_cast<size_t>(block_len));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (w[size_t(a)] != w[size_t(b)])
            return w[size_t(a)] < w[size_t(b)]; // least reliable first
        return a < b;
    });
    return order;
}

// frozen[i] == 1 marks a frozen position; the K most reliable positions carry
// the information bits in ascending index order.
inline std::vector<uint8_t> frozen_mask(int block_len, int info_len)
{
    if (info_len < 0 || info_len > block_len)
        throw ConfigError("polar: info length " + std::to_string(info_len) +
                          " does not fit block length " + std::to_string(block_len));
    auto order = reliability_order(block_len);
    std::vector<uint8_t> frozen(size_t(block_len), 1);
    for (int i = 0; i < info_len; i++)
        frozen[size_t(order[size_t(block_len - 1 - i)])] = 0;
    return frozen;
}

// x = u * F^(x)n (non-bit-reversed), computed by the in-place butterfly.
inline std::vector<uint8_t> encode(const std::vector<uint8_t>& info_bits,
                                   const std::vector<uint8_t>& frozen)
{
    const int N = int(frozen.size());
    size_t expected = 0;
    for (uint8_t f : frozen)
        expected += (f == 0);
    if (info_bits.size() != expected)
        throw ConfigError("polar encode: info bit count does not match the frozen mask");
    std::vector<uint8_t> u(size_t(N), 0);
    size_t next = 0;
    for (int i = 0; i < N; i++)
        if (!frozen[size_t(i)])
            u[size_t(i)] = info_bits[next++];
    for (int len = 1; len < N; len <<= 1)
        for (int blk = 0; blk < N; blk += 2 * len)
            for (int i = 0; i < len; i++)
                u[size_t(blk + i)] = uint8_t(u[size_t(blk + i)] ^ u[size_t(blk + i + len)]);
    return u;
}

// ---------------------------------------------------------------------------
// CRC-aided successive-cancellation list decoding (LLR domain, min-sum f).

struct SclResult {
    bool ok = false;
    std::vector<uint8_t> payload; // info bits with the CRC stripped
    double path_metric = 0;
};

class SclDecoder {
public:
    SclDecoder(std::vector<uint8_t> frozen, int list_size)
        : frozen_(std::move(frozen)), L_(list_size)
    {
        if (L_ < 1)
            throw ConfigError("scl: list size must be >= 1");
        N_ = int(frozen_.size());
        n_ = 0;
        while ((1 << n_) < N_)
            n_++;
        if ((1 << n_) != N_)
            throw ConfigError("scl: block length must be a power of two");
    }

    // llrs: positive favors bit 0. Paths are ranked by metric; the best
    // CRC-passing path wins. Returns failure when no path passes.
    SclResult decode(const std::vector<double>& llrs) const
    {
        if (int(llrs.size()) != N_)
            throw ConfigError("scl: llr length mismatch");
        std::vector<Path> paths(1);
        paths[0].llr.assign(size_t(n_) + 1, {});
        paths[0].lbits.assign(size_t(n_) + 1, {});
        paths[0].llr[0].assign(llrs.begin(), llrs.end());
        paths[0].u.assign(size_t(N_), 0);

        int leaf = 0;
        recurse(paths, 0, leaf);

        std::vector<int> rank(paths.size());
        std::iota(rank.begin(), rank.end(), 0);
        std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
            return paths[size_t(a)].pm < paths[size_t(b)].pm;
        });

        for (int idx : rank) {
            const Path& p = paths[size_t(idx)];
            std::vector<uint8_t> info;
            info.reserve(size_t(N_));
            for (int i = 0; i < N_; i++)
                if (!frozen_[size_t(i)])
                    info.push_back(p.u[size_t(i)]);
            if (int(info.size()) < kCrcBits)
                continue;
            std::vector<uint8_t> payload(info.begin(), info.end() - kCrcBits);
            std::vector<uint8_t> parity(info.end() - kCrcBits, info.end());
            if (crc24_check(payload, parity)) {
                SclResult r;
                r.ok = true;
                r.payload = std::move(payload);
                r.path_metric = p.pm;
                return r;
            }
        }
        return {};
    }

private:
    struct Path {
        std::vector<std::vector<double>> llr;   // llr[d]: current node at depth d
        std::vector<std::vector<uint8_t>> lbits; // completed left-child bits per depth
        std::vector<uint8_t> bits_ret;           // subtree bits handed to the parent
        std::vector<uint8_t> u;                  // all N decisions
        double pm = 0;
    };

    static double f_minsum(double a, double b)
    {
        double s = (a < 0) == (b < 0) ? 1.0 : -1.0;
        return s * std::min(std::abs(a), std::abs(b));
    }

    void recurse(std::vector<Path>& paths, int d, int& leaf) const
    {
        int len = N_ >> d;
        if (len == 1) {
            decide_leaf(paths, d, leaf++);
            return;
        }
        int half = len >> 1;
        for (auto& p : paths) {
            p.llr[size_t(d) + 1].resize(size_t(half));
            for (int i = 0; i < half; i++)
                p.llr[size_t(d) + 1][size_t(i)] =
                    f_minsum(p.llr[size_t(d)][size_t(i)], p.llr[size_t(d)][size_t(i + half)]);
        }
        recurse(paths, d + 1, leaf);
        for (auto& p : paths) {
            p.lbits[size_t(d)] = std::move(p.bits_ret);
            p.llr[size_t(d) + 1].resize(size_t(half));
            for (int i = 0; i < half; i++) {
                double a = p.llr[size_t(d)][size_t(i)];
                double b = p.llr[size_t(d)][size_t(i + half)];
                p.llr[size_t(d) + 1][size_t(i)] = p.lbits[size_t(d)][size_t(i)] ? b - a : b + a;
            }
        }
        recurse(paths, d + 1, leaf);
        for (auto& p : paths) {
            std::vector<uint8_t> comb(static_cast<size_t>(len));
            for (int i = 0; i < half; i++) {
                comb[size_t(i)] = uint8_t(p.lbits[size_t(d)][size_t(i)] ^ p.bits_ret[size_t(i)]);
                comb[size_t(i + half)] = p.bits_ret[size_t(i)];
            }
            p.bits_ret = std::move(comb);
            p.lbits[size_t(d)].clear();
        }
    }

    void decide_leaf(std::vector<Path>& paths, int d, int phi) const
    {
        if (frozen_[size_t(phi)]) {
            for (auto& p : paths) {
                double l = p.llr[size_t(d)][0];
                if (l < 0)
                    p.pm += -l;
                p.u[size_t(phi)] = 0;
                p.bits_ret.assign(1, 0);
            }
            return;
        }
        struct Cand {
            int src;
            int bit;
            double pm;
        };
        std::vector<Cand> cands;
        cands.reserve(paths.size() * 2);
        for (int i = 0; i < int(paths.size()); i++) {
            double l = paths[size_t(i)].llr[size_t(d)][0];
            cands.push_back({i, 0, paths[size_t(i)].pm + (l < 0 ? -l : 0.0)});
            cands.push_back({i, 1, paths[size_t(i)].pm + (l > 0 ? l : 0.0)});
        }
        if (int(cands.size()) > L_) {
            std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
                if (a.pm != b.pm)
                    return a.pm < b.pm;
                if (a.src != b.src)
                    return a.src < b.src;
                return a.bit < b.bit;
            });
            cands.resize(size_t(L_));
        }
        std::vector<Path> next;
        next.reserve(cands.size());
        for (const Cand& c : cands) {
            next.push_back(paths[size_t(c.src)]);
            Path& p = next.back();
            p.pm = c.pm;
            p.u[size_t(phi)] = uint8_t(c.bit);
            p.bits_ret.assign(1, uint8_t(c.bit));
        }
        paths = std::move(next);
    }

    std::vector<uint8_t> frozen_;
    int L_;
    int N_ = 0, n_ = 0;
};

// Convenience wrapper: payload -> payload||crc -> codeword.
inline std::vector<uint8_t> encode_with_crc(const std::vector<uint8_t>& payload,
                                            const std::vector<uint8_t>& frozen)
{
    std::vector<uint8_t> info = payload;
    auto parity = crc24(payload);
    info.insert(info.end(), parity.begin(), parity.end());
    return encode(info, frozen);
}

} // namespace polar
} // namespace dcic

#endif
