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

#ifndef DCIC_TRACE_HPP
#define DCIC_TRACE_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "schema.hpp"

namespace dcic {

struct TraceRecord {
    uint16_t ue = 0;
    uint32_t tti = 0;
    DciMessage msg;
};

// Time-ordered per-UE DCI streams. Records are kept globally sorted by
// (tti, ue); per-UE views are materialized on demand.
struct DciTrace {
    uint64_t schema_hash = 0;
    int total_bits = 0;
    uint16_t ue_count = 0;
    uint32_t tti_span = 0;
    std::vector<TraceRecord> records;

    std::vector<DciMessage> ue_messages(uint16_t ue) const
    {
        std::vector<DciMessage> out;
        for (const auto& r : records)
            if (r.ue == ue)
                out.push_back(r.msg);
        return out;
    }

    std::vector<TraceRecord> ue_records(uint16_t ue) const
    {
        std::vector<TraceRecord> out;
        for (const auto& r : records)
            if (r.ue == ue)
                out.push_back(r);
        return out;
    }
};

inline std::vector<uint8_t> pack_bits_be(const std::vector<uint8_t>& bits)
{
    std::vector<uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); i++)
        if (bits[i])
            bytes[i >> 3] |= uint8_t(0x80u >> (i & 7));
    return bytes;
}

inline std::vector<uint8_t> unpack_bits_be(const std::vector<uint8_t>& bytes, size_t nbits)
{
    std::vector<uint8_t> bits(nbits, 0);
    for (size_t i = 0; i < nbits; i++)
        bits[i] = (bytes[i >> 3] >> (7 - (i & 7))) & 1;
    return bits;
}

constexpr char kTraceMagic[4] = {'D', 'C', 'T', 'R'};
constexpr uint16_t kTraceVersion = 1;

inline void save_trace(std::ostream& os, const DciTrace& t)
{
    os.write(kTraceMagic, 4);
    write_le<uint16_t>(os, kTraceVersion);
    write_le<uint64_t>(os, t.schema_hash);
    write_le<uint16_t>(os, uint16_t(t.total_bits));
    write_le<uint32_t>(os, t.tti_span);
    write_le<uint16_t>(os, t.ue_count);
    write_le<uint32_t>(os, uint32_t(t.records.size()));
    for (const auto& r : t.records) {
        write_le<uint16_t>(os, r.ue);
        write_le<uint32_t>(os, r.tti);
        auto bytes = pack_bits_be(r.msg.bits);
        os.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    }
}

inline void save_trace(const std::string& path, const DciTrace& t)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ConfigError("cannot open trace file for writing: " + path);
    save_trace(os, t);
}

inline DciTrace load_trace(std::istream& is)
{
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kTraceMagic, 4) != 0)
        throw CorruptInput("trace file: bad magic");
    uint16_t version = read_le<uint16_t>(is);
    if (version != kTraceVersion)
        throw CorruptInput("trace file: unsupported version " + std::to_string(version));
    DciTrace t;
    t.schema_hash = read_le<uint64_t>(is);
    t.total_bits = read_le<uint16_t>(is);
    t.tti_span = read_le<uint32_t>(is);
    t.ue_count = read_le<uint16_t>(is);
    uint32_t n = read_le<uint32_t>(is);
    size_t payload_bytes = size_t(t.total_bits + 7) / 8;
    t.records.reserve(n);
    for (uint32_t i = 0; i < n; i++) {
        TraceRecord r;
        r.ue = read_le<uint16_t>(is);
        r.tti = read_le<uint32_t>(is);
        std::vector<uint8_t> bytes(payload_bytes);
        is.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(payload_bytes));
        if (!is)
            throw CorruptInput("trace file: truncated record " + std::to_string(i));
        r.msg.bits = unpack_bits_be(bytes, size_t(t.total_bits));
        t.records.push_back(std::move(r));
    }
    return t;
}

inline DciTrace load_trace(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot open trace file: " + path);
    return load_trace(is);
}

// One hex payload per line; diff-friendly.
inline void export_trace_text(std::ostream& os, const DciTrace& t)
{
    static const char* hex = "0123456789abcdef";
    for (const auto& r : t.records) {
        auto bytes = pack_bits_be(r.msg.bits);
        std::string line;
        for (uint8_t b : bytes) {
            line += hex[b >> 4];
            line += hex[b & 0xf];
        }
        os << line << "\n";
    }
}

} // namespace dcic

#endif
