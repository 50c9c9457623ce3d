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

#ifndef DCIC_AC_HPP
#define DCIC_AC_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "common.hpp"

namespace dcic {

// Binary arithmetic coder over 32-bit range registers. Probabilities are
// quantized to 16-bit precision before use on BOTH sides so encoder and
// decoder perform bit-identical range updates regardless of where the model
// floats came from. No floating point touches the range arithmetic.
namespace ac {

constexpr uint32_t kProbScale = 1u << 16;
// p_min = 1/4096 clamp; overconfident model outputs cannot collapse a range.
constexpr uint32_t kProbMin = kProbScale / 4096;
constexpr uint32_t kProbMax = kProbScale - kProbMin;

constexpr uint64_t kTop = uint64_t(1) << 32;
constexpr uint64_t kHalf = uint64_t(1) << 31;
constexpr uint64_t kQuarter = uint64_t(1) << 30;

inline uint32_t quantize_p1(double p1)
{
    if (!(p1 == p1)) // NaN guard: a broken model must not corrupt the stream
        throw CorruptInput("NaN probability fed to arithmetic coder");
    double scaled = p1 * double(kProbScale);
    long long q = llround(scaled);
    if (q < (long long)kProbMin)
        q = kProbMin;
    if (q > (long long)kProbMax)
        q = kProbMax;
    return uint32_t(q);
}

class Encoder {
public:
    void encode_bit(int bit, uint32_t p1q)
    {
        uint64_t range = high_ - low_ + 1;
        // zero symbol takes [low, split), one takes [split, high]
        uint64_t r0 = (range * (kProbScale - p1q)) >> 16;
        if (bit)
            low_ += r0;
        else
            high_ = low_ + r0 - 1;
        renormalize();
    }

    void encode_bit_p(int bit, double p1) { encode_bit(bit, quantize_p1(p1)); }

    // Quarter-disambiguation flush: 1 + pending bits. Together with the final
    // renormalization output this is the "2 disambiguation bits" the frame
    // length accounting charges per message.
    void finish()
    {
        pending_++;
        if (low_ < kQuarter)
            emit(0);
        else
            emit(1);
    }

    size_t bit_count() const { return out_.bit_count(); }
    const std::vector<uint8_t>& bytes() const { return out_.bytes(); }

private:
    void renormalize()
    {
        for (;;) {
            if (high_ < kHalf) {
                emit(0);
            } else if (low_ >= kHalf) {
                emit(1);
                low_ -= kHalf;
                high_ -= kHalf;
            } else if (low_ >= kQuarter && high_ < 3 * kQuarter) {
                pending_++;
                low_ -= kQuarter;
                high_ -= kQuarter;
            } else {
                break;
            }
            low_ <<= 1;
            high_ = (high_ << 1) | 1;
        }
    }

    void emit(int bit)
    {
        out_.push(bit);
        for (; pending_ > 0; pending_--)
            out_.push(bit ^ 1);
    }

    uint64_t low_ = 0;
    uint64_t high_ = kTop - 1;
    uint64_t pending_ = 0;
    BitWriter out_;
};

class Decoder {
public:
    // declared_bits is the frame's K_t. The register may read zero bits past
    // that point (the encoder's flush guarantees they disambiguate), but a
    // physical buffer shorter than declared_bits raises TruncatedStream.
    Decoder(const uint8_t* data, size_t byte_len, size_t declared_bits)
        : in_(data, byte_len, declared_bits)
    {
        for (int i = 0; i < 32; i++)
            code_ = (code_ << 1) | uint64_t(in_.next());
    }

    Decoder(const std::vector<uint8_t>& bytes, size_t declared_bits)
        : Decoder(bytes.data(), bytes.size(), declared_bits) {}

    int decode_bit(uint32_t p1q)
    {
        uint64_t range = high_ - low_ + 1;
        uint64_t r0 = (range * (kProbScale - p1q)) >> 16;
        int bit;
        if (code_ >= low_ + r0) {
            bit = 1;
            low_ += r0;
        } else {
            bit = 0;
            high_ = low_ + r0 - 1;
        }
        renormalize();
        return bit;
    }

    int decode_bit_p(double p1) { return decode_bit(quantize_p1(p1)); }

private:
    void renormalize()
    {
        for (;;) {
            if (high_ < kHalf) {
                // nothing to subtract
            } else if (low_ >= kHalf) {
                low_ -= kHalf;
                high_ -= kHalf;
                code_ -= kHalf;
            } else if (low_ >= kQuarter && high_ < 3 * kQuarter) {
                low_ -= kQuarter;
                high_ -= kQuarter;
                code_ -= kQuarter;
            } else {
                break;
            }
            low_ <<= 1;
            high_ = (high_ << 1) | 1;
            code_ = (code_ << 1) | uint64_t(in_.next());
        }
    }

    uint64_t low_ = 0;
    uint64_t high_ = kTop - 1;
    uint64_t code_ = 0;
    BitReader in_;
};

} // namespace ac
} // namespace dcic

#endif
