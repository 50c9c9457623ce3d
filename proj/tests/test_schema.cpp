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

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "dcic/schema.hpp"

using namespace dcic;

namespace {

DciMessage random_message(const DciSchema& schema, std::mt19937_64& rng)
{
    DciMessage m;
    m.bits.resize(size_t(schema.total_bits()));
    for (auto& b : m.bits)
        b = uint8_t(rng() & 1);
    return m;
}

} // namespace

TEST_CASE("segment_field matches the segmentation formula")
{
    auto r = segment_field(10, 4);
    CHECK(r.q == 2);
    CHECK(r.eta_hat == 2);
    CHECK(r.s == 2 * 16 + 4);
    CHECK(r.segment_count == 3);

    auto r2 = segment_field(4, 4); // width <= eta branch
    CHECK(r2.s == 16);
    CHECK(r2.segment_count == 1);

    auto r3 = segment_field(13, 8);
    CHECK(r3.q == 1);
    CHECK(r3.eta_hat == 5);
    CHECK(r3.s == 256 + 32);
    CHECK(r3.segment_count == 2);

    // eta divides the width: no zero-width trailing segment
    auto r4 = segment_field(16, 8);
    CHECK(r4.q == 2);
    CHECK(r4.eta_hat == 0);
    CHECK(r4.s == 2 * 256);
    CHECK(r4.segment_count == 2);

    CHECK_THROWS_AS(segment_field(0, 4), ConfigError);
    CHECK_THROWS_AS(segment_field(4, 0), ConfigError);
}

TEST_CASE("segment plan capacity and disjoint dictionary ranges")
{
    auto schema = default_dci39_schema();
    auto plan = build_segment_plan(schema);

    CHECK(schema.total_bits() == 39);
    CHECK(plan.total_integers == int(plan.segments.size()));

    uint64_t dict_sum = 0;
    for (const auto& fs : plan.fields)
        dict_sum += fs.s;
    CHECK(plan.dict_size == dict_sum);

    // per field: segment capacity equals the field width, coverage >= width
    for (int k = 0; k < schema.field_count(); k++) {
        int width = schema.fields()[size_t(k)].width;
        int cap = 0, segs = 0;
        for (const auto& si : plan.segments)
            if (si.field == k) {
                cap += si.width;
                segs++;
            }
        CHECK(cap == width);
        CHECK(segs * schema.eta() >= width);
        CHECK(segs == plan.fields[size_t(k)].segment_count);
    }

    // offsets strictly increasing, ranges disjoint
    uint32_t expect = 0;
    for (const auto& si : plan.segments) {
        CHECK(si.dict_offset == expect);
        expect += si.alphabet;
    }
    CHECK(expect == plan.dict_size);
}

TEST_CASE("message/integer mapping")
{
    SECTION("single field big-endian read")
    {
        DciSchema schema({{"f", 3}}, 4);
        auto plan = build_segment_plan(schema);
        DciMessage m;
        m.bits = {1, 0, 1};
        auto ints = message_to_integers(m, plan);
        REQUIRE(ints.size() == 1);
        CHECK(ints[0] == 5);
    }

    SECTION("all-zero message maps every segment to its dictionary offset")
    {
        auto schema = default_dci39_schema();
        auto plan = build_segment_plan(schema);
        DciMessage zero;
        zero.bits.assign(39, 0);
        auto ints = message_to_integers(zero, plan);
        REQUIRE(ints.size() == plan.segments.size());
        for (size_t j = 0; j < ints.size(); j++)
            CHECK(ints[j] == plan.segments[j].dict_offset);
    }

    SECTION("zero integers decode to the all-zero message")
    {
        auto schema = default_dci39_schema();
        auto plan = build_segment_plan(schema);
        std::vector<uint32_t> ints;
        for (const auto& si : plan.segments)
            ints.push_back(si.dict_offset);
        auto msg = integers_to_message(ints, plan, schema.total_bits());
        for (auto b : msg.bits)
            CHECK(b == 0);
    }

    SECTION("round trip on random messages")
    {
        auto schema = default_dci39_schema();
        auto plan = build_segment_plan(schema);
        std::mt19937_64 rng(7);
        for (int it = 0; it < 1000; it++) {
            auto m = random_message(schema, rng);
            auto ints = message_to_integers(m, plan);
            auto back = integers_to_message(ints, plan, schema.total_bits());
            REQUIRE(back == m);
        }
    }

    SECTION("out-of-range integer is rejected")
    {
        DciSchema schema({{"f", 3}}, 4);
        auto plan = build_segment_plan(schema);
        CHECK_THROWS_AS(integers_to_message({8}, plan, 3), CorruptInput);
    }
}

TEST_CASE("split_fields")
{
    DciSchema schema({{"a", 3}, {"b", 5}}, 4);
    DciMessage m;
    m.bits = {1, 0, 1, 1, 1, 0, 1, 0};
    auto parts = split_fields(m, schema);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0] == std::vector<uint8_t>{1, 0, 1});
    CHECK(parts[1] == std::vector<uint8_t>{1, 1, 0, 1, 0});

    SECTION("single field returns the whole message")
    {
        DciSchema one({{"x", 8}}, 4);
        auto p = split_fields(m, one);
        REQUIRE(p.size() == 1);
        CHECK(p[0] == m.bits);
    }

    SECTION("concat of parts reproduces the message")
    {
        auto schema39 = default_dci39_schema();
        std::mt19937_64 rng(3);
        for (int it = 0; it < 200; it++) {
            auto msg = random_message(schema39, rng);
            auto ps = split_fields(msg, schema39);
            std::vector<uint8_t> cat;
            for (const auto& p : ps)
                cat.insert(cat.end(), p.begin(), p.end());
            REQUIRE(cat == msg.bits);
        }
    }
}

TEST_CASE("field value get/set round trip")
{
    auto schema = default_dci39_schema();
    std::mt19937_64 rng(11);
    DciMessage m;
    m.bits.assign(39, 0);
    for (int it = 0; it < 500; it++) {
        int k = int(rng() % uint64_t(schema.field_count()));
        uint32_t w = uint32_t(schema.fields()[size_t(k)].width);
        uint32_t v = uint32_t(rng()) & ((1u << w) - 1u);
        set_field_value(m, schema, k, v);
        REQUIRE(field_value(m, schema, k) == v);
    }
}

TEST_CASE("schema file parsing")
{
    SECTION("valid file")
    {
        std::istringstream is("# comment\neta 8\nrbg_bitmap 13 # inline\nmcs 5\n");
        auto s = parse_schema(is);
        CHECK(s.eta() == 8);
        CHECK(s.field_count() == 2);
        CHECK(s.total_bits() == 18);
    }

    SECTION("errors carry line numbers")
    {
        std::istringstream is("eta 8\nbroken\n");
        try {
            parse_schema(is, "f.schema");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("f.schema:2") != std::string::npos);
        }
    }

    SECTION("missing eta")
    {
        std::istringstream is("a 3\n");
        CHECK_THROWS_AS(parse_schema(is), ConfigError);
    }

    SECTION("duplicate names")
    {
        std::istringstream is("eta 8\na 3\na 4\n");
        CHECK_THROWS_AS(parse_schema(is), ConfigError);
    }

    SECTION("write/parse round trip keeps the hash")
    {
        auto s = default_dci39_schema();
        std::ostringstream os;
        write_schema(os, s);
        std::istringstream is(os.str());
        auto s2 = parse_schema(is);
        CHECK(s2.hash() == s.hash());
    }
}

TEST_CASE("permuted schema keeps the field set")
{
    auto s = default_dci39_schema();
    std::vector<int> perm = {9, 8, 7, 6, 5, 4, 3, 2, 1, 0};
    auto p = s.permuted(perm);
    CHECK(p.total_bits() == s.total_bits());
    CHECK(p.fields()[0].name == "k1");
    CHECK(p.hash() != s.hash());
}
