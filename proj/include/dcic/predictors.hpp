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

#ifndef DCIC_PREDICTORS_HPP
#define DCIC_PREDICTORS_HPP

#include <deque>
#include <memory>
#include <vector>

#include "rnn.hpp"
#include "schema.hpp"
#include "transformer.hpp"

namespace dcic {

// Per-stream probability source driving the arithmetic coder. The pipeline
// calls prob_one/observe for every bit in processing order and end_message
// after each message; encoder and decoder run identical copies so their
// probability sequences match bit for bit.
class BitPredictor {
public:
    virtual ~BitPredictor() = default;
    virtual void begin_message() {}
    virtual double prob_one(int field, int bit) = 0;
    virtual void observe(int field, int bit, int value) = 0;
    virtual void end_message(const DciMessage&) {}
};

class Fixed05Predictor : public BitPredictor {
public:
    double prob_one(int, int) override { return 0.5; }
    void observe(int, int, int) override {}
};

// Order-0 adaptive baseline: per (field, bit position) Laplace counts updated
// online after each coded bit.
class AdaptivePredictor : public BitPredictor {
public:
    explicit AdaptivePredictor(const DciSchema& schema)
    {
        for (const auto& f : schema.fields())
            counts_.emplace_back(size_t(f.width), std::pair<uint64_t, uint64_t>{1, 1});
    }

    double prob_one(int field, int bit) override
    {
        auto [c0, c1] = counts_[size_t(field)][size_t(bit)];
        return double(c1) / double(c0 + c1);
    }

    void observe(int field, int bit, int value) override
    {
        if (value)
            counts_[size_t(field)][size_t(bit)].second++;
        else
            counts_[size_t(field)][size_t(bit)].first++;
    }

private:
    std::vector<std::vector<std::pair<uint64_t, uint64_t>>> counts_;
};

// Transformer adapter. Works in the model's processing order: the schema and
// plan given here must already be permuted. One encoder pass per message, one
// decoder pass per field, bits within a field share the field's probability
// vector.
class TransformerPredictor : public BitPredictor {
public:
    TransformerPredictor(const Transformer<float>* model, const DciSchema& proc_schema,
                         const SegmentPlan& plan)
        : model_(model), schema_(proc_schema), plan_(plan)
    {
        if (model->config().R != plan.total_integers)
            throw ConfigError("transformer predictor: plan/model R mismatch");
    }

    // Pre-load history (e.g. the tail of the training split) so the first
    // compressed message sees real context. msgs are processing-order layout.
    void seed_history(const std::vector<DciMessage>& msgs)
    {
        for (const auto& m : msgs)
            push_history(m);
    }

    void begin_message() override
    {
        std::vector<std::vector<uint32_t>> hist(history_.begin(), history_.end());
        enc_out_ = model_->encode_history(hist);
        revealed_.clear();
        field_bits_.clear();
        cached_field_ = -1;
    }

    double prob_one(int field, int bit) override
    {
        if (field != cached_field_) {
            int width = schema_.fields()[size_t(field)].width;
            probs_ = model_->field_probabilities(enc_out_, revealed_, width);
            cached_field_ = field;
        }
        return probs_[size_t(bit)];
    }

    void observe(int field, int bit, int value) override
    {
        field_bits_.push_back(uint8_t(value));
        int width = schema_.fields()[size_t(field)].width;
        if (bit + 1 == width) {
            reveal_field(field);
            field_bits_.clear();
        }
    }

    void end_message(const DciMessage& msg) override { push_history(msg); }

private:
    void reveal_field(int field)
    {
        int first = plan_.field_first_segment[size_t(field)];
        int count = plan_.fields[size_t(field)].segment_count;
        int consumed = 0;
        for (int s = 0; s < count; s++) {
            const auto& si = plan_.segments[size_t(first + s)];
            uint32_t v = 0;
            for (int i = 0; i < si.width; i++)
                v = (v << 1) | field_bits_[size_t(consumed + i)];
            revealed_.push_back(si.dict_offset + v);
            consumed += si.width;
        }
    }

    void push_history(const DciMessage& msg)
    {
        history_.push_front(message_to_integers(msg, plan_));
        while (int(history_.size()) > model_->config().L)
            history_.pop_back();
    }

    const Transformer<float>* model_;
    DciSchema schema_;
    SegmentPlan plan_;
    std::deque<std::vector<uint32_t>> history_; // most recent first
    nn::Mat<float> enc_out_;
    std::vector<uint32_t> revealed_;
    std::vector<uint8_t> field_bits_;
    std::vector<double> probs_;
    int cached_field_ = -1;
};

// GRU adapter: sliding window over the concatenated bit stream.
class RnnPredictor : public BitPredictor {
public:
    explicit RnnPredictor(const GruModel<float>* model) : model_(model)
    {
        window_.assign(size_t(model->config().window_bits), kBitPadToken);
    }

    void seed_history(const std::vector<DciMessage>& msgs)
    {
        for (const auto& m : msgs)
            for (uint8_t b : m.bits)
                push_bit(b);
    }

    double prob_one(int, int) override
    {
        return model_->prob_one(std::vector<int32_t>(window_.begin(), window_.end()));
    }

    void observe(int, int, int value) override { push_bit(uint8_t(value)); }

private:
    void push_bit(uint8_t b)
    {
        window_.pop_front();
        window_.push_back(int32_t(b));
    }

    const GruModel<float>* model_;
    std::deque<int32_t> window_;
};

} // namespace dcic

#endif
