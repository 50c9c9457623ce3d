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

#ifndef DCIC_COMMON_HPP
#define DCIC_COMMON_HPP

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcic {

// Error taxonomy. ConfigError maps to CLI exit code 2, the others to 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class CorruptInput : public std::runtime_error {
public:
    explicit CorruptInput(const std::string& msg) : std::runtime_error(msg) {}
};

class TruncatedStream : public std::runtime_error {
public:
    explicit TruncatedStream(const std::string& msg) : std::runtime_error(msg) {}
};

class VerificationError : public std::runtime_error {
public:
    explicit VerificationError(const std::string& msg) : std::runtime_error(msg) {}
};

// FNV-1a, used for schema hashes and serialized parameter-block checksums.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL)
{
    const uint8_t* p = static_cast<const uint8_t*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; i++) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t seed = 0xcbf29ce484222325ULL)
{
    return fnv1a64(s.data(), s.size(), seed);
}

// splitmix64, used to derive independent per-frame / per-stream seeds.
inline uint64_t splitmix64(uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0)
{
    uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

// Append-only bit sink, MSB-first within each byte.
class BitWriter {
public:
    void push(int bit)
    {
        if ((nbits_ & 7) == 0)
            bytes_.push_back(0);
        if (bit)
            bytes_.back() |= uint8_t(0x80u >> (nbits_ & 7));
        nbits_++;
    }

    void push_bits(uint64_t value, int count)
    {
        for (int i = count - 1; i >= 0; i--)
            push(int((value >> i) & 1));
    }

    size_t bit_count() const { return nbits_; }
    const std::vector<uint8_t>& bytes() const { return bytes_; }
    std::vector<uint8_t> take_bytes() { return std::move(bytes_); }

private:
    std::vector<uint8_t> bytes_;
    size_t nbits_ = 0;
};

// Reads bits MSB-first from a buffer with a declared bit length. Reading past
// declared_bits of a complete stream yields zeros (the AC decoder register can
// legitimately run ahead of the flush point); reading a position below
// declared_bits that the physical buffer does not cover is a truncation.
class BitReader {
public:
    BitReader(const uint8_t* data, size_t byte_len, size_t declared_bits)
        : data_(data), byte_len_(byte_len), declared_bits_(declared_bits) {}

    BitReader(const std::vector<uint8_t>& bytes, size_t declared_bits)
        : BitReader(bytes.data(), bytes.size(), declared_bits) {}

    int next()
    {
        size_t i = pos_++;
        if (i >= declared_bits_)
            return 0;
        if ((i >> 3) >= byte_len_)
            throw TruncatedStream("bitstream exhausted at bit " + std::to_string(i) +
                                  " of declared " + std::to_string(declared_bits_));
        return (data_[i >> 3] >> (7 - (i & 7))) & 1;
    }

    uint64_t next_bits(int count)
    {
        uint64_t v = 0;
        for (int i = 0; i < count; i++)
            v = (v << 1) | uint64_t(next());
        return v;
    }

    size_t position() const { return pos_; }

private:
    const uint8_t* data_;
    size_t byte_len_;
    size_t declared_bits_;
    size_t pos_ = 0;
};

// Little-endian POD stream helpers for the binary file formats.
template <typename T>
void write_le(std::ostream& os, T v)
{
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <typename T>
T read_le(std::istream& is)
{
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    is.read(buf, sizeof(T));
    if (!is)
        throw CorruptInput("unexpected end of stream");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

} // namespace dcic

#endif
