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

#ifndef DCIC_HUFFMAN_HPP
#define DCIC_HUFFMAN_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "schema.hpp"

namespace dcic {

// Sort key that places ESCAPE after every real field value.
constexpr uint64_t kEscapeKey = uint64_t(1) << 32;

struct CodeEntry {
    uint64_t key = 0; // field value, or kEscapeKey
    int length = 0;
    uint32_t code = 0; // canonical, MSB-first in the low `length` bits

    bool is_escape() const { return key == kEscapeKey; }
};

// Canonical Huffman code over the field values observed in training plus one
// always-present ESCAPE symbol. ESCAPE emits its codeword followed by the raw
// field bits, so unseen test values stay losslessly codable.
class FieldCodebook {
public:
    FieldCodebook() = default;

    // entries must carry (key, length); canonical codes are assigned here.
    FieldCodebook(int width, std::vector<CodeEntry> entries) : width_(width)
    {
        entries_ = std::move(entries);
        std::sort(entries_.begin(), entries_.end(), [](const CodeEntry& a, const CodeEntry& b) {
            if (a.length != b.length)
                return a.length < b.length;
            return a.key < b.key;
        });
        uint32_t code = 0;
        int prev_len = 0;
        for (auto& e : entries_) {
            code <<= (e.length - prev_len);
            e.code = code;
            code++;
            prev_len = e.length;
        }
        for (const auto& e : entries_)
            by_key_[e.key] = e;
    }

    int width() const { return width_; }
    const std::vector<CodeEntry>& entries() const { return entries_; }

    const CodeEntry* find(uint32_t value) const
    {
        auto it = by_key_.find(value);
        return it == by_key_.end() ? nullptr : &it->second;
    }

    const CodeEntry& escape() const { return by_key_.at(kEscapeKey); }

    double kraft_sum() const
    {
        double s = 0;
        for (const auto& e : entries_)
            s += std::ldexp(1.0, -e.length);
        return s;
    }

    // Codeword bits for `value` plus raw bits when escaping.
    int encode_value(uint32_t value, BitWriter& out) const
    {
        const CodeEntry* e = find(value);
        if (e != nullptr) {
            out.push_bits(e->code, e->length);
            return e->length;
        }
        const CodeEntry& esc = escape();
        out.push_bits(esc.code, esc.length);
        out.push_bits(value, width_);
        return esc.length + width_;
    }

    uint32_t decode_value(BitReader& in) const
    {
        // canonical walk: extend the accumulator until it lands inside the
        // code range of some length
        uint32_t acc = 0;
        int len = 0;
        size_t idx = 0;
        int max_len = entries_.back().length;
        while (len < max_len) {
            acc = (acc << 1) | uint32_t(in.next());
            len++;
            while (idx < entries_.size() && entries_[idx].length == len) {
                if (entries_[idx].code == acc) {
                    if (entries_[idx].is_escape())
                        return uint32_t(in.next_bits(width_));
                    return uint32_t(entries_[idx].key);
                }
                idx++;
            }
        }
        throw CorruptInput("huffman decode fell off the code tree");
    }

private:
    int width_ = 0;
    std::vector<CodeEntry> entries_;
    std::map<uint64_t, CodeEntry> by_key_;
};

// Huffman tree construction with deterministic tie-breaking by (count, key of
// the smallest contained leaf). The ESCAPE leaf enters with count 0.
inline FieldCodebook huffman_build(const std::map<uint32_t, uint64_t>& histogram, int width)
{
    if (histogram.empty())
        throw ConfigError("huffman_build: empty histogram");

    struct Node {
        uint64_t count;
        uint64_t tie_key;
        int left = -1, right = -1;
        uint64_t leaf_key = 0;
        bool leaf = false;
    };
    std::vector<Node> nodes;
    for (const auto& [value, count] : histogram)
        nodes.push_back({count, value, -1, -1, value, true});
    nodes.push_back({0, kEscapeKey, -1, -1, kEscapeKey, true});

    auto cmp = [&](int a, int b) {
        if (nodes[size_t(a)].count != nodes[size_t(b)].count)
            return nodes[size_t(a)].count > nodes[size_t(b)].count;
        return nodes[size_t(a)].tie_key > nodes[size_t(b)].tie_key;
    };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> heap(cmp);
    for (int i = 0; i < int(nodes.size()); i++)
        heap.push(i);

    while (heap.size() > 1) {
        int a = heap.top();
        heap.pop();
        int b = heap.top();
        heap.pop();
        Node parent;
        parent.count = nodes[size_t(a)].count + nodes[size_t(b)].count;
        parent.tie_key = std::min(nodes[size_t(a)].tie_key, nodes[size_t(b)].tie_key);
        parent.left = a;
        parent.right = b;
        nodes.push_back(parent);
        heap.push(int(nodes.size()) - 1);
    }

    std::vector<CodeEntry> entries;
    // iterative depth walk
    std::vector<std::pair<int, int>> stack{{heap.top(), 0}};
    while (!stack.empty()) {
        auto [idx, depth] = stack.back();
        stack.pop_back();
        const Node& n = nodes[size_t(idx)];
        if (n.leaf) {
            CodeEntry e;
            e.key = n.leaf_key;
            e.length = std::max(depth, 1); // lone-root guard; cannot happen with escape present
            entries.push_back(e);
        } else {
            stack.push_back({n.left, depth + 1});
            stack.push_back({n.right, depth + 1});
        }
    }
    return FieldCodebook(width, std::move(entries));
}

// Per-field codebooks for a whole schema.
class HuffmanCodec {
public:
    HuffmanCodec() = default;
    HuffmanCodec(uint64_t schema_hash, std::vector<FieldCodebook> books)
        : schema_hash_(schema_hash), books_(std::move(books)) {}

    static HuffmanCodec train(const DciSchema& schema, const std::vector<DciMessage>& train_msgs)
    {
        if (train_msgs.empty())
            throw ConfigError("huffman train: empty training split");
        std::vector<FieldCodebook> books;
        for (int k = 0; k < schema.field_count(); k++) {
            std::map<uint32_t, uint64_t> hist;
            for (const auto& m : train_msgs)
                hist[field_value(m, schema, k)]++;
            books.push_back(huffman_build(hist, schema.fields()[size_t(k)].width));
        }
        return HuffmanCodec(schema.hash(), std::move(books));
    }

    uint64_t schema_hash() const { return schema_hash_; }
    const std::vector<FieldCodebook>& books() const { return books_; }

    // Concatenation of per-field codewords in schema order.
    void encode_message(const DciMessage& msg, const DciSchema& schema, BitWriter& out) const
    {
        check_schema(schema);
        for (int k = 0; k < schema.field_count(); k++)
            books_[size_t(k)].encode_value(field_value(msg, schema, k), out);
    }

    DciMessage decode_message(BitReader& in, const DciSchema& schema) const
    {
        check_schema(schema);
        DciMessage msg;
        msg.bits.assign(size_t(schema.total_bits()), 0);
        for (int k = 0; k < schema.field_count(); k++)
            set_field_value(msg, schema, k, books_[size_t(k)].decode_value(in));
        return msg;
    }

    void save(std::ostream& os) const
    {
        os << "dcic-codebook v1\n";
        std::ostringstream hx;
        hx << std::hex << schema_hash_;
        os << "schema_hash " << hx.str() << "\n";
        for (size_t k = 0; k < books_.size(); k++) {
            os << "field " << k << " width " << books_[k].width() << " entries "
               << books_[k].entries().size() << "\n";
            for (const auto& e : books_[k].entries()) {
                if (e.is_escape())
                    os << "esc " << e.length << "\n";
                else
                    os << e.key << " " << e.length << "\n";
            }
        }
    }

    static HuffmanCodec load(std::istream& is)
    {
        std::string line;
        if (!std::getline(is, line) || line != "dcic-codebook v1")
            throw CorruptInput("codebook file: bad magic line");
        if (!std::getline(is, line))
            throw CorruptInput("codebook file: missing schema_hash");
        std::istringstream hs(line);
        std::string tag, hex;
        hs >> tag >> hex;
        if (tag != "schema_hash")
            throw CorruptInput("codebook file: missing schema_hash");
        uint64_t schema_hash = std::stoull(hex, nullptr, 16);

        std::vector<FieldCodebook> books;
        while (std::getline(is, line)) {
            if (line.empty())
                continue;
            std::istringstream fs(line);
            std::string ftag;
            size_t idx, nentries;
            int width;
            std::string wtag, etag;
            fs >> ftag >> idx >> wtag >> width >> etag >> nentries;
            if (ftag != "field" || wtag != "width" || etag != "entries")
                throw CorruptInput("codebook file: bad field header '" + line + "'");
            std::vector<CodeEntry> entries;
            for (size_t i = 0; i < nentries; i++) {
                if (!std::getline(is, line))
                    throw CorruptInput("codebook file: truncated entry list");
                std::istringstream es(line);
                std::string v;
                int len;
                es >> v >> len;
                CodeEntry e;
                e.key = (v == "esc") ? kEscapeKey : uint64_t(std::stoul(v));
                e.length = len;
                entries.push_back(e);
            }
            books.emplace_back(width, std::move(entries));
        }
        return HuffmanCodec(schema_hash, std::move(books));
    }

private:
    void check_schema(const DciSchema& schema) const
    {
        if (schema.hash() != schema_hash_)
            throw ConfigError("codebook schema hash mismatch");
        if (books_.size() != size_t(schema.field_count()))
            throw ConfigError("codebook field count mismatch");
    }

    uint64_t schema_hash_ = 0;
    std::vector<FieldCodebook> books_;
};

} // namespace dcic

#endif
