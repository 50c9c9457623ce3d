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

#ifndef DCIC_TRACEGEN_HPP
#define DCIC_TRACEGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "common.hpp"
#include "schema.hpp"
#include "trace.hpp"

namespace dcic {

// Deterministic draws on top of mt19937_64. std::*_distribution output is
// implementation-defined, so traces would not be portable through it.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t raw() { return eng_(); }
    double u01() { return double(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }
    uint32_t uniform_int(uint32_t n) { return uint32_t(eng_() % n); } // n small, bias negligible
    bool bernoulli(double p) { return u01() < p; }

    double normal()
    {
        // Box-Muller, one value per call pair cached
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = u01(), u2 = u01();
        if (u1 < 1e-300)
            u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    bool have_cached_ = false;
    double cached_ = 0;
};

// Two-state Markov traffic. mean_*_ttis <= 0 makes that state absorbing.
struct OnOffTraffic {
    double mean_on_ttis = 50;
    double mean_off_ttis = 50;
    bool start_on = true;
};

struct SimConfig {
    int num_ues = 3;
    int num_rbgs = 13;
    uint32_t tti_count = 16000;
    uint64_t seed = 1;
    OnOffTraffic traffic;
    std::vector<OnOffTraffic> traffic_per_ue; // optional per-UE override
    double rate_min_mbps = 10.0;
    double rate_max_mbps = 30.0;
    int pf_window_ttis = 100;
    double harq_fail_prob = 0.1;
    int max_retx = 3;
    int retx_delay_ttis = 8;
    // sporadic RRC-style reconfiguration: re-draw tda/pucch/k1 and the rate
    double reconfig_mean_period_ttis = 120.0;
    double buffer_cap_bits = 2e5;
};

namespace detail {

// per-RBG deliverable bits in one TTI at a given MCS
inline double bits_per_rbg(int mcs) { return 120.0 + 85.0 * mcs; }

constexpr int kHarqProcesses = 16;
constexpr int kMaxMcs = 27;
inline const int kRvCycle[4] = {0, 2, 3, 1};

struct PendingRetx {
    uint32_t due_tti;
    int pid;
    int rbgs;
    int attempt; // 1-based retransmission attempt
};

struct UeState {
    bool on = true;
    double buffer_bits = 0;
    double rate_mbps = 0;
    double cqi = 0;
    double avg_tput = 1000.0;
    uint32_t tda = 0, pucch = 0, k1 = 0;
    uint32_t dai = 0;
    int next_pid = 0;
    uint8_t ndi[kHarqProcesses] = {};
    bool pid_busy[kHarqProcesses] = {};
    std::deque<PendingRetx> retx;
};

struct FieldIdx {
    int rbg_bitmap, tda, mcs, ndi, rv, harq_id, dai, tpc, pucch_res, k1;
};

inline int require_field(const DciSchema& schema, const std::string& name, int width)
{
    int idx = schema.index_of(name);
    if (idx < 0)
        throw ConfigError("tracegen: schema is missing field '" + name + "'");
    if (schema.fields()[size_t(idx)].width != width)
        throw ConfigError("tracegen: field '" + name + "' must be " + std::to_string(width) +
                          " bits, schema has " +
                          std::to_string(schema.fields()[size_t(idx)].width));
    return idx;
}

} // namespace detail

// Single-cell downlink scheduler producing one DCI per scheduled UE per TTI.
// Deterministic given (config, seed). Field dynamics are chosen so traces
// carry temporal persistence (CQI walk, sticky configuration fields, counters)
// punctuated by occasional jumps (traffic gaps, reconfigurations, retx).
inline DciTrace simulate(const SimConfig& cfg, const DciSchema& schema)
{
    using namespace detail;
    if (cfg.num_ues < 1 || cfg.num_rbgs < 1 || cfg.tti_count < 1)
        throw ConfigError("tracegen: num_ues, num_rbgs and tti_count must be >= 1");
    FieldIdx f;
    f.rbg_bitmap = require_field(schema, "rbg_bitmap", cfg.num_rbgs);
    f.tda = require_field(schema, "tda", 4);
    f.mcs = require_field(schema, "mcs", 5);
    f.ndi = require_field(schema, "ndi", 1);
    f.rv = require_field(schema, "rv", 2);
    f.harq_id = require_field(schema, "harq_id", 4);
    f.dai = require_field(schema, "dai", 2);
    f.tpc = require_field(schema, "tpc", 2);
    f.pucch_res = require_field(schema, "pucch_res", 3);
    f.k1 = require_field(schema, "k1", 3);

    Rng rng(cfg.seed);
    std::vector<UeState> ues(size_t(cfg.num_ues));
    for (int u = 0; u < cfg.num_ues; u++) {
        auto& s = ues[size_t(u)];
        const OnOffTraffic& tr =
            (size_t(u) < cfg.traffic_per_ue.size()) ? cfg.traffic_per_ue[size_t(u)] : cfg.traffic;
        s.on = tr.start_on;
        s.rate_mbps = rng.uniform(cfg.rate_min_mbps, cfg.rate_max_mbps);
        s.cqi = 6.0 + rng.u01() * 16.0;
        s.tda = rng.uniform_int(16);
        s.pucch = rng.uniform_int(8);
        s.k1 = rng.uniform_int(8);
    }

    const double alpha = 1.0 / double(cfg.pf_window_ttis);
    const double p_reconfig =
        cfg.reconfig_mean_period_ttis > 0 ? 1.0 / cfg.reconfig_mean_period_ttis : 0.0;

    DciTrace trace;
    trace.schema_hash = schema.hash();
    trace.total_bits = schema.total_bits();
    trace.ue_count = uint16_t(cfg.num_ues);
    trace.tti_span = cfg.tti_count;

    for (uint32_t t = 0; t < cfg.tti_count; t++) {
        // per-UE state evolution, fixed draw order
        for (int u = 0; u < cfg.num_ues; u++) {
            auto& s = ues[size_t(u)];
            const OnOffTraffic& tr =
                (size_t(u) < cfg.traffic_per_ue.size()) ? cfg.traffic_per_ue[size_t(u)]
                                                        : cfg.traffic;
            double p_leave = s.on ? (tr.mean_on_ttis > 0 ? 1.0 / tr.mean_on_ttis : 0.0)
                                  : (tr.mean_off_ttis > 0 ? 1.0 / tr.mean_off_ttis : 0.0);
            if (rng.bernoulli(p_leave))
                s.on = !s.on;
            if (s.on)
                s.buffer_bits = std::min(s.buffer_bits + s.rate_mbps * 1000.0, cfg.buffer_cap_bits);

            double step = rng.u01();
            if (step < 0.2)
                s.cqi += 1.0;
            else if (step < 0.4)
                s.cqi -= 1.0;
            s.cqi = std::clamp(s.cqi, 0.0, double(kMaxMcs));

            if (rng.bernoulli(p_reconfig)) {
                s.tda = rng.uniform_int(16);
                s.pucch = rng.uniform_int(8);
                s.k1 = rng.uniform_int(8);
                s.rate_mbps = rng.uniform(cfg.rate_min_mbps, cfg.rate_max_mbps);
            }
        }

        // PF candidate ranking
        struct Cand {
            int ue;
            double metric;
        };
        std::vector<Cand> cands;
        for (int u = 0; u < cfg.num_ues; u++) {
            auto& s = ues[size_t(u)];
            bool retx_due = !s.retx.empty() && s.retx.front().due_tti <= t;
            if (!retx_due && s.buffer_bits < 1.0)
                continue;
            int mcs = int(std::lround(s.cqi));
            double inst = double(cfg.num_rbgs) * bits_per_rbg(mcs);
            cands.push_back({u, inst / std::max(s.avg_tput, 1e-9)});
        }
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.metric != b.metric)
                return a.metric > b.metric;
            return a.ue < b.ue; // deterministic tie rule
        });

        int next_rbg = 0;
        std::vector<double> served(size_t(cfg.num_ues), 0.0);
        for (const Cand& c : cands) {
            if (next_rbg >= cfg.num_rbgs)
                break;
            auto& s = ues[size_t(c.ue)];
            int mcs = int(std::lround(s.cqi));
            double bpr = bits_per_rbg(mcs);
            bool retx_due = !s.retx.empty() && s.retx.front().due_tti <= t;

            int pid, rv, grant;
            uint8_t ndi_bit;
            int attempt;
            if (retx_due) {
                PendingRetx rx = s.retx.front();
                s.retx.pop_front();
                grant = std::min(rx.rbgs, cfg.num_rbgs - next_rbg);
                pid = rx.pid;
                attempt = rx.attempt;
                rv = kRvCycle[std::min(attempt, 3)];
                ndi_bit = s.ndi[pid]; // unchanged on retransmission
            } else {
                int need = int(std::ceil(s.buffer_bits / bpr));
                grant = std::min(need, cfg.num_rbgs - next_rbg);
                if (grant <= 0)
                    continue;
                // round-robin over currently free HARQ processes
                pid = -1;
                for (int i = 0; i < kHarqProcesses; i++) {
                    int cand_pid = (s.next_pid + i) % kHarqProcesses;
                    if (!s.pid_busy[cand_pid]) {
                        pid = cand_pid;
                        break;
                    }
                }
                if (pid < 0)
                    continue; // all processes in flight
                s.next_pid = (pid + 1) % kHarqProcesses;
                s.pid_busy[pid] = true;
                s.ndi[pid] ^= 1; // new transport block toggles NDI
                ndi_bit = s.ndi[pid];
                rv = 0;
                attempt = 0;
                double tb = std::min(s.buffer_bits, double(grant) * bpr);
                s.buffer_bits -= tb;
                served[size_t(c.ue)] = tb;
            }

            bool fail = rng.bernoulli(cfg.harq_fail_prob);
            if (fail && attempt < cfg.max_retx) {
                s.retx.push_back({t + uint32_t(cfg.retx_delay_ttis), pid, grant, attempt + 1});
            } else {
                s.pid_busy[pid] = false;
            }

            double tp = rng.u01();
            uint32_t tpc = tp < 0.08 ? 0u : tp < 0.88 ? 1u : tp < 0.96 ? 2u : 3u;

            DciMessage msg;
            msg.bits.assign(size_t(schema.total_bits()), 0);
            uint32_t bitmap = 0;
            for (int r = next_rbg; r < next_rbg + grant; r++)
                bitmap |= uint32_t(1) << (cfg.num_rbgs - 1 - r); // RBG 0 at MSB
            set_field_value(msg, schema, f.rbg_bitmap, bitmap);
            set_field_value(msg, schema, f.tda, s.tda);
            set_field_value(msg, schema, f.mcs, uint32_t(mcs));
            set_field_value(msg, schema, f.ndi, ndi_bit);
            set_field_value(msg, schema, f.rv, uint32_t(rv));
            set_field_value(msg, schema, f.harq_id, uint32_t(pid));
            set_field_value(msg, schema, f.dai, s.dai & 3u);
            set_field_value(msg, schema, f.tpc, tpc);
            set_field_value(msg, schema, f.pucch_res, s.pucch);
            set_field_value(msg, schema, f.k1, s.k1);
            s.dai++;

            trace.records.push_back({uint16_t(c.ue), t, std::move(msg)});
            next_rbg += grant;
        }

        for (int u = 0; u < cfg.num_ues; u++) {
            auto& s = ues[size_t(u)];
            s.avg_tput = (1.0 - alpha) * s.avg_tput + alpha * served[size_t(u)];
        }
    }

    std::stable_sort(trace.records.begin(), trace.records.end(),
                     [](const TraceRecord& a, const TraceRecord& b) {
                         if (a.tti != b.tti)
                             return a.tti < b.tti;
                         return a.ue < b.ue;
                     });
    return trace;
}

// Temporal split: the last ceil(fraction*len) messages of every UE go to
// test, order preserved, no shuffling.
inline std::pair<DciTrace, DciTrace> split_train_test(const DciTrace& trace, double test_fraction)
{
    if (trace.records.empty())
        throw ConfigError("split_train_test: empty trace");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("split_train_test: fraction must be in (0,1)");

    DciTrace train = trace, test = trace;
    train.records.clear();
    test.records.clear();

    std::vector<size_t> count(trace.ue_count, 0), cutoff(trace.ue_count, 0), seen(trace.ue_count, 0);
    for (const auto& r : trace.records)
        count[r.ue]++;
    for (uint16_t u = 0; u < trace.ue_count; u++) {
        size_t n_test = size_t(std::ceil(test_fraction * double(count[u])));
        if (n_test >= count[u] && count[u] > 0)
            n_test = count[u] - (count[u] > 1 ? 1 : 0);
        cutoff[u] = count[u] - n_test;
    }
    for (const auto& r : trace.records) {
        if (seen[r.ue]++ < cutoff[r.ue])
            train.records.push_back(r);
        else
            test.records.push_back(r);
    }
    return {train, test};
}

// |Pearson| between bit i at time t and bit j at time t-lag over one message
// stream. Constant bits have no defined correlation and are reported as NaN.
inline std::vector<std::vector<double>> correlation_matrix(const std::vector<DciMessage>& msgs,
                                                           int lag)
{
    if (int(msgs.size()) <= lag + 1)
        throw ConfigError("correlation_matrix: need more than lag+1 messages");
    size_t n = msgs[0].bits.size();
    size_t pairs = msgs.size() - size_t(lag);

    std::vector<double> mean_cur(n, 0), mean_past(n, 0);
    for (size_t t = size_t(lag); t < msgs.size(); t++)
        for (size_t i = 0; i < n; i++) {
            mean_cur[i] += msgs[t].bits[i];
            mean_past[i] += msgs[t - size_t(lag)].bits[i];
        }
    for (size_t i = 0; i < n; i++) {
        mean_cur[i] /= double(pairs);
        mean_past[i] /= double(pairs);
    }

    std::vector<double> var_cur(n, 0), var_past(n, 0);
    std::vector<std::vector<double>> cov(n, std::vector<double>(n, 0.0));
    for (size_t t = size_t(lag); t < msgs.size(); t++) {
        for (size_t i = 0; i < n; i++) {
            double di = msgs[t].bits[i] - mean_cur[i];
            var_cur[i] += di * di;
            double dpi = msgs[t - size_t(lag)].bits[i] - mean_past[i];
            var_past[i] += dpi * dpi;
            for (size_t j = 0; j < n; j++)
                cov[i][j] += di * (msgs[t - size_t(lag)].bits[j] - mean_past[j]);
        }
    }

    std::vector<std::vector<double>> rho(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; i++)
        for (size_t j = 0; j < n; j++) {
            double denom = std::sqrt(var_cur[i] * var_past[j]);
            rho[i][j] = denom > 0 ? std::abs(cov[i][j] / denom)
                                  : std::numeric_limits<double>::quiet_NaN();
        }
    return rho;
}

} // namespace dcic

#endif
