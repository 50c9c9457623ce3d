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

#ifndef DCIC_SCHEMA_HPP
#define DCIC_SCHEMA_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace dcic {

// One named bitfield of a control message. Widths are capped at 32 so any
// segment integer fits a machine word at any eta <= 16.
struct FieldSpec {
    std::string name;
    int width = 0;
};

class DciSchema {
public:
    DciSchema() = default;

    DciSchema(std::vector<FieldSpec> fields, int eta) : fields_(std::move(fields)), eta_(eta)
    {
        if (fields_.empty())
            throw ConfigError("schema needs at least one field");
        if (eta_ < 1 || eta_ > 16)
            throw ConfigError("eta must be in 1..16, got " + std::to_string(eta_));
        std::set<std::string> names;
        for (const auto& f : fields_) {
            if (f.width < 1 || f.width > 32)
                throw ConfigError("field '" + f.name + "' width must be in 1..32");
            if (!names.insert(f.name).second)
                throw ConfigError("duplicate field name '" + f.name + "'");
        }
    }

    const std::vector<FieldSpec>& fields() const { return fields_; }
    int field_count() const { return int(fields_.size()); }
    int eta() const { return eta_; }

    int total_bits() const
    {
        int n = 0;
        for (const auto& f : fields_)
            n += f.width;
        return n;
    }

    int field_bit_offset(int k) const
    {
        int off = 0;
        for (int i = 0; i < k; i++)
            off += fields_[size_t(i)].width;
        return off;
    }

    int index_of(const std::string& name) const
    {
        for (size_t i = 0; i < fields_.size(); i++)
            if (fields_[i].name == name)
                return int(i);
        return -1;
    }

    // Stable identity for cross-artifact consistency checks.
    uint64_t hash() const
    {
        std::string canon = "eta=" + std::to_string(eta_) + ";";
        for (const auto& f : fields_)
            canon += f.name + ":" + std::to_string(f.width) + ";";
        return fnv1a64(canon);
    }

    // Same field set in a different processing order.
    DciSchema permuted(const std::vector<int>& perm) const
    {
        if (perm.size() != fields_.size())
            throw ConfigError("permutation length mismatch");
        std::vector<FieldSpec> out;
        out.reserve(fields_.size());
        for (int p : perm)
            out.push_back(fields_.at(size_t(p)));
        return DciSchema(std::move(out), eta_);
    }

private:
    std::vector<FieldSpec> fields_;
    int eta_ = 8;
};

// One N-bit message, field-major in schema order. Kept as an explicit bit
// vector; payload packing for files lives in trace.hpp.
struct DciMessage {
    std::vector<uint8_t> bits;

    bool operator==(const DciMessage& o) const { return bits == o.bits; }
};

inline void validate_message(const DciMessage& msg, const DciSchema& schema)
{
    if (int(msg.bits.size()) != schema.total_bits())
        throw CorruptInput("message has " + std::to_string(msg.bits.size()) +
                           " bits, schema expects " + std::to_string(schema.total_bits()));
}

// Field value as an unsigned integer, big-endian (first bit most significant).
inline uint32_t field_value(const DciMessage& msg, const DciSchema& schema, int k)
{
    int off = schema.field_bit_offset(k);
    int w = schema.fields()[size_t(k)].width;
    uint32_t v = 0;
    for (int i = 0; i < w; i++)
        v = (v << 1) | msg.bits[size_t(off + i)];
    return v;
}

inline void set_field_value(DciMessage& msg, const DciSchema& schema, int k, uint32_t value)
{
    int off = schema.field_bit_offset(k);
    int w = schema.fields()[size_t(k)].width;
    for (int i = 0; i < w; i++)
        msg.bits[size_t(off + i)] = uint8_t((value >> (w - 1 - i)) & 1u);
}

// Field segmentation: a field of M bits maps to ceil-ish segments of width eta
// (one trailing segment of eta_hat = M mod eta bits when it is nonzero), and
// contributes s = q*2^eta + 2^eta_hat integers to the flat dictionary. When
// eta divides M the trailing zero-width segment is dropped and s = q*2^eta.
struct FieldSegmentation {
    int q = 0;
    int eta_hat = 0;
    uint64_t s = 0;
    int segment_count = 0;
};

inline FieldSegmentation segment_field(int width, int eta)
{
    if (width < 1 || eta < 1)
        throw ConfigError("segment_field: width and eta must be >= 1");
    FieldSegmentation r;
    if (width <= eta) {
        r.q = 0;
        r.eta_hat = width;
        r.s = uint64_t(1) << width;
        r.segment_count = 1;
    } else {
        r.q = width / eta;
        r.eta_hat = width % eta;
        r.s = uint64_t(r.q) << eta;
        r.segment_count = r.q;
        if (r.eta_hat > 0) {
            r.s += uint64_t(1) << r.eta_hat;
            r.segment_count += 1;
        }
    }
    return r;
}

// One fixed-width slice of a field, with its slot in the flat dictionary.
struct SegmentInfo {
    int field = 0;
    int bit_offset = 0; // absolute offset in the message
    int width = 0;
    uint32_t alphabet = 0;    // 2^width
    uint32_t dict_offset = 0; // disjoint ranges, strictly increasing
};

// The full field -> integer token mapping for one schema (in its processing
// order). total_integers is the number of tokens one message maps to, and
// dict_size + 1 (padding token) is the embedding dictionary size.
struct SegmentPlan {
    std::vector<FieldSegmentation> fields;
    std::vector<SegmentInfo> segments;
    std::vector<int> field_first_segment;
    int total_integers = 0;
    uint32_t dict_size = 0;

    uint32_t padding_token() const { return dict_size; }
};

inline SegmentPlan build_segment_plan(const DciSchema& schema)
{
    SegmentPlan plan;
    int bit_off = 0;
    uint32_t dict_off = 0;
    for (int k = 0; k < schema.field_count(); k++) {
        const auto& f = schema.fields()[size_t(k)];
        FieldSegmentation seg = segment_field(f.width, schema.eta());
        plan.fields.push_back(seg);
        plan.field_first_segment.push_back(int(plan.segments.size()));
        int remaining = f.width;
        int off = bit_off;
        for (int i = 0; i < seg.segment_count; i++) {
            SegmentInfo si;
            si.field = k;
            si.bit_offset = off;
            si.width = std::min(remaining, schema.eta());
            si.alphabet = uint32_t(1) << si.width;
            si.dict_offset = dict_off;
            plan.segments.push_back(si);
            dict_off += si.alphabet;
            off += si.width;
            remaining -= si.width;
        }
        bit_off += f.width;
    }
    plan.total_integers = int(plan.segments.size());
    plan.dict_size = dict_off;
    return plan;
}

// Integer form of a message: each segment read big-endian, shifted into the
// flat dictionary by its offset.
inline std::vector<uint32_t> message_to_integers(const DciMessage& msg, const SegmentPlan& plan)
{
    std::vector<uint32_t> out;
    out.reserve(plan.segments.size());
    for (const auto& si : plan.segments) {
        uint32_t v = 0;
        for (int i = 0; i < si.width; i++)
            v = (v << 1) | msg.bits[size_t(si.bit_offset + i)];
        out.push_back(si.dict_offset + v);
    }
    return out;
}

inline DciMessage integers_to_message(const std::vector<uint32_t>& ints, const SegmentPlan& plan, int total_bits)
{
    if (ints.size() != plan.segments.size())
        throw CorruptInput("integer sequence length " + std::to_string(ints.size()) +
                           ", plan expects " + std::to_string(plan.segments.size()));
    DciMessage msg;
    msg.bits.assign(size_t(total_bits), 0);
    for (size_t j = 0; j < ints.size(); j++) {
        const auto& si = plan.segments[j];
        if (ints[j] < si.dict_offset || ints[j] >= si.dict_offset + si.alphabet)
            throw CorruptInput("segment " + std::to_string(j) + " integer " +
                               std::to_string(ints[j]) + " outside dictionary range");
        uint32_t v = ints[j] - si.dict_offset;
        for (int i = 0; i < si.width; i++)
            msg.bits[size_t(si.bit_offset + i)] = uint8_t((v >> (si.width - 1 - i)) & 1u);
    }
    return msg;
}

inline std::vector<std::vector<uint8_t>> split_fields(const DciMessage& msg, const DciSchema& schema)
{
    validate_message(msg, schema);
    std::vector<std::vector<uint8_t>> out;
    out.reserve(size_t(schema.field_count()));
    int off = 0;
    for (const auto& f : schema.fields()) {
        out.emplace_back(msg.bits.begin() + off, msg.bits.begin() + off + f.width);
        off += f.width;
    }
    return out;
}

// Schema file: `eta <value>` header plus one `name width` line per field.
// `#` starts a comment; parse errors report 1-based line numbers.
inline DciSchema parse_schema(std::istream& is, const std::string& origin = "<schema>")
{
    int eta = -1;
    std::vector<FieldSpec> fields;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        lineno++;
        auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos)
            line = line.substr(0, hash_pos);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first))
            continue;
        if (first == "eta") {
            long v;
            if (!(ls >> v))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": eta needs a value");
            eta = int(v);
        } else {
            long w;
            if (!(ls >> w))
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'name width', got '" + first + "'");
            if (w < 1 || w > 32)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": width must be in 1..32, got " + std::to_string(w));
            fields.push_back({first, int(w)});
        }
        std::string extra;
        if (ls >> extra)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": trailing token '" + extra + "'");
    }
    if (eta < 0)
        throw ConfigError(origin + ": missing 'eta <value>' header line");
    if (fields.empty())
        throw ConfigError(origin + ": no fields defined");
    try {
        return DciSchema(std::move(fields), eta);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

inline DciSchema load_schema(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open schema file '" + path + "'");
    return parse_schema(is, path);
}

inline void write_schema(std::ostream& os, const DciSchema& schema)
{
    os << "eta " << schema.eta() << "\n";
    for (const auto& f : schema.fields())
        os << f.name << " " << f.width << "\n";
}

// The 39-bit single-cell experiment layout; also shipped as configs/dci39.schema.
inline DciSchema default_dci39_schema()
{
    return DciSchema({{"rbg_bitmap", 13},
                      {"tda", 4},
                      {"mcs", 5},
                      {"ndi", 1},
                      {"rv", 2},
                      {"harq_id", 4},
                      {"dai", 2},
                      {"tpc", 2},
                      {"pucch_res", 3},
                      {"k1", 3}},
                     8);
}

} // namespace dcic

#endif
