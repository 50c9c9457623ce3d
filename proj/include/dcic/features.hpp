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

#ifndef DCIC_FEATURES_HPP
#define DCIC_FEATURES_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "common.hpp"
#include "schema.hpp"

namespace dcic {

// Shared probability floor: the BCE log clamp and the AC probability clamp
// use the same value so training loss and coding cost stay consistent.
constexpr double kProbFloor = 1.0 / 4096.0;

// Encoder feature: integer forms of the L previous messages, most recent
// first; slots with no history hold the all-padding pseudo-message.
// Decoder feature: integers of the already-revealed fields, padded to R.
struct FeaturePair {
    std::vector<int32_t> enc; // length L*R
    std::vector<int32_t> dec; // length R
    int revealed = 0;         // integers revealed in dec before padding starts
};

// history[0] is x_(t-1), history[1] is x_(t-2), ... (each already in the
// model's processing order). revealed_prefix holds the integer tokens of the
// fields coded so far in message t.
inline FeaturePair build_features(const std::vector<std::vector<uint32_t>>& history,
                                  const std::vector<uint32_t>& revealed_prefix,
                                  const SegmentPlan& plan, int L)
{
    const int R = plan.total_integers;
    const int32_t pad = int32_t(plan.padding_token());
    FeaturePair f;
    f.enc.assign(size_t(L) * size_t(R), pad);
    for (int l = 0; l < L; l++) {
        if (size_t(l) >= history.size())
            break;
        const auto& m = history[size_t(l)];
        if (int(m.size()) != R)
            throw ConfigError("build_features: history message has wrong integer count");
        for (int j = 0; j < R; j++)
            f.enc[size_t(l) * size_t(R) + size_t(j)] = int32_t(m[size_t(j)]);
    }
    if (int(revealed_prefix.size()) > R)
        throw ConfigError("build_features: revealed prefix longer than R");
    f.dec.assign(size_t(R), pad);
    for (size_t j = 0; j < revealed_prefix.size(); j++)
        f.dec[j] = int32_t(revealed_prefix[j]);
    f.revealed = int(revealed_prefix.size());
    return f;
}

// Output label for one field: the field bits then zeros up to S_output, with
// the first `valid` positions carrying meaning.
struct FieldLabel {
    std::vector<uint8_t> y; // length S_output
    int valid = 0;          // = M_k
};

inline FieldLabel make_label(const DciMessage& msg, const DciSchema& schema, int k, int s_output)
{
    FieldLabel lab;
    lab.valid = schema.fields()[size_t(k)].width;
    lab.y.assign(size_t(s_output), 0);
    int off = schema.field_bit_offset(k);
    for (int i = 0; i < lab.valid; i++)
        lab.y[size_t(i)] = msg.bits[size_t(off + i)];
    return lab;
}

// Masked binary cross-entropy in nats, normalized by S_output; positions at
// or beyond the field width contribute nothing.
inline double bce_loss(const std::vector<double>& yhat, const FieldLabel& label)
{
    if (yhat.size() != label.y.size())
        throw ConfigError("bce_loss: shape mismatch");
    double sum = 0;
    for (int j = 0; j < label.valid; j++) {
        double p = std::min(std::max(yhat[size_t(j)], kProbFloor), 1.0 - kProbFloor);
        sum += label.y[size_t(j)] ? std::log(p) : std::log(1.0 - p);
    }
    return -sum / double(yhat.size());
}

} // namespace dcic

#endif
