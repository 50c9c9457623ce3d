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

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "dcic/tracegen.hpp"

using namespace dcic;

TEST_CASE("simulation is deterministic given the seed")
{
    auto schema = default_dci39_schema();
    SimConfig cfg;
    cfg.tti_count = 2000;
    cfg.seed = 7;
    auto a = simulate(cfg, schema);
    auto b = simulate(cfg, schema);
    REQUIRE(a.records.size() == b.records.size());

    std::ostringstream sa, sb;
    save_trace(sa, a);
    save_trace(sb, b);
    CHECK(sa.str() == sb.str());

    cfg.seed = 8;
    auto c = simulate(cfg, schema);
    std::ostringstream sc;
    save_trace(sc, c);
    CHECK(sa.str() != sc.str());
}

TEST_CASE("NDI toggles exactly on new transport blocks")
{
    // scheduler-rule oracle replayed over the log: per (ue, harq process),
    // rv == 0 marks a new TB and must come with an NDI flip; rv != 0 is a
    // retransmission and must keep NDI
    auto schema = default_dci39_schema();
    SimConfig cfg;
    cfg.tti_count = 100000;
    cfg.seed = 3;
    auto trace = simulate(cfg, schema);
    REQUIRE(trace.records.size() > 1000);

    int f_ndi = schema.index_of("ndi");
    int f_rv = schema.index_of("rv");
    int f_pid = schema.index_of("harq_id");

    std::map<std::pair<int, int>, uint32_t> last_ndi;
    size_t new_tbs = 0, retxs = 0;
    for (const auto& r : trace.records) {
        uint32_t ndi = field_value(r.msg, schema, f_ndi);
        uint32_t rv = field_value(r.msg, schema, f_rv);
        auto key = std::make_pair(int(r.ue), int(field_value(r.msg, schema, f_pid)));
        auto it = last_ndi.find(key);
        if (rv == 0) {
            new_tbs++;
            if (it != last_ndi.end())
                REQUIRE(ndi != it->second);
        } else {
            retxs++;
            REQUIRE(it != last_ndi.end()); // a retx can never precede the first TB
            REQUIRE(ndi == it->second);
        }
        last_ndi[key] = ndi;
    }
    CHECK(new_tbs > 0);
    CHECK(retxs > 0); // default fail probability must exercise the retx path
}

TEST_CASE("permanently OFF traffic yields zero messages for that UE")
{
    auto schema = default_dci39_schema();
    SimConfig cfg;
    cfg.tti_count = 3000;
    cfg.traffic_per_ue.assign(3, cfg.traffic);
    cfg.traffic_per_ue[1].start_on = false;
    cfg.traffic_per_ue[1].mean_off_ttis = 0; // absorbing OFF
    auto trace = simulate(cfg, schema);
    CHECK(trace.ue_messages(0).size() > 0);
    CHECK(trace.ue_messages(1).empty());
    CHECK(trace.ue_messages(2).size() > 0);
}

TEST_CASE("every emitted message round-trips through the segment plan")
{
    auto schema = default_dci39_schema();
    auto plan = build_segment_plan(schema);
    SimConfig cfg;
    cfg.tti_count = 1500;
    auto trace = simulate(cfg, schema);
    for (const auto& r : trace.records) {
        REQUIRE(int(r.msg.bits.size()) == schema.total_bits());
        auto ints = message_to_integers(r.msg, plan);
        REQUIRE(integers_to_message(ints, plan, schema.total_bits()) == r.msg);
    }
}

TEST_CASE("temporal split")
{
    auto schema = default_dci39_schema();

    DciTrace t;
    t.schema_hash = schema.hash();
    t.total_bits = schema.total_bits();
    t.ue_count = 1;
    t.tti_span = 100;
    for (uint32_t i = 0; i < 100; i++) {
        DciMessage m;
        m.bits.assign(39, 0);
        set_field_value(m, schema, 2, i & 31);
        t.records.push_back({0, i, m});
    }

    SECTION("97/3 split keeps the final 3 for test")
    {
        auto [train, test] = split_train_test(t, 0.03);
        CHECK(train.records.size() == 97);
        CHECK(test.records.size() == 3);
        CHECK(test.records.front().tti == 97);
    }

    SECTION("fraction 0.5 on 2 messages -> 1/1")
    {
        DciTrace two = t;
        two.records.resize(2);
        auto [train, test] = split_train_test(two, 0.5);
        CHECK(train.records.size() == 1);
        CHECK(test.records.size() == 1);
    }

    SECTION("ordering preserved per UE")
    {
        SimConfig cfg;
        cfg.tti_count = 2000;
        auto trace = simulate(cfg, schema);
        auto [train, test] = split_train_test(trace, 0.1);
        for (uint16_t u = 0; u < trace.ue_count; u++) {
            auto tr = train.ue_records(u);
            auto te = test.ue_records(u);
            if (tr.empty() || te.empty())
                continue;
            CHECK(tr.back().tti < te.front().tti);
        }
    }

    SECTION("bad inputs")
    {
        DciTrace empty;
        empty.ue_count = 1;
        CHECK_THROWS_AS(split_train_test(empty, 0.1), ConfigError);
        CHECK_THROWS_AS(split_train_test(t, 0.0), ConfigError);
        CHECK_THROWS_AS(split_train_test(t, 1.0), ConfigError);
    }
}

TEST_CASE("correlation matrix basics")
{
    SECTION("duplicated bit has |rho| = 1 at lag 0, diagonal is 1")
    {
        std::mt19937_64 rng(2);
        std::vector<DciMessage> msgs;
        for (int i = 0; i < 400; i++) {
            DciMessage m;
            m.bits.assign(4, 0);
            m.bits[0] = uint8_t(rng() & 1);
            m.bits[1] = m.bits[0];
            m.bits[2] = uint8_t(rng() & 1);
            m.bits[3] = 1; // constant
            msgs.push_back(m);
        }
        auto rho = correlation_matrix(msgs, 0);
        CHECK(rho[0][1] == Catch::Approx(1.0));
        CHECK(rho[0][0] == Catch::Approx(1.0));
        CHECK(rho[2][2] == Catch::Approx(1.0));
        CHECK(std::isnan(rho[3][3])); // constant bit: undefined, not zero
        CHECK(std::isnan(rho[0][3]));
    }

    SECTION("independent fair coins stay below the Monte-Carlo bound")
    {
        std::mt19937_64 rng(77);
        std::vector<DciMessage> msgs;
        for (int i = 0; i < 100000; i++) {
            DciMessage m;
            m.bits.assign(3, 0);
            for (auto& b : m.bits)
                b = uint8_t(rng() & 1);
            msgs.push_back(m);
        }
        auto rho = correlation_matrix(msgs, 1);
        // 5 sigma for n = 1e5 iid samples: 5/sqrt(n) ~ 0.0158 < 0.02
        for (size_t i = 0; i < 3; i++)
            for (size_t j = 0; j < 3; j++)
                CHECK(rho[i][j] < 0.02);
    }

    SECTION("lag must leave at least two samples")
    {
        std::vector<DciMessage> msgs(3, DciMessage{{0, 1}});
        CHECK_THROWS_AS(correlation_matrix(msgs, 5), ConfigError);
    }
}

TEST_CASE("default config produces temporal correlation")
{
    auto schema = default_dci39_schema();
    SimConfig cfg;
    cfg.tti_count = 4000;
    cfg.seed = 11;
    auto trace = simulate(cfg, schema);
    auto msgs = trace.ue_messages(0);
    REQUIRE(msgs.size() > 200);
    auto rho = correlation_matrix(msgs, 1);
    double best = 0;
    for (size_t i = 0; i < rho.size(); i++)
        for (size_t j = 0; j < rho.size(); j++)
            if (i != j && !std::isnan(rho[i][j]))
                best = std::max(best, rho[i][j]);
    CHECK(best > 0.1);
}

TEST_CASE("trace file and text export round trip")
{
    auto schema = default_dci39_schema();
    SimConfig cfg;
    cfg.tti_count = 500;
    auto trace = simulate(cfg, schema);

    std::ostringstream os;
    save_trace(os, trace);
    std::istringstream is(os.str());
    auto back = load_trace(is);
    REQUIRE(back.records.size() == trace.records.size());
    CHECK(back.schema_hash == trace.schema_hash);
    for (size_t i = 0; i < trace.records.size(); i++) {
        CHECK(back.records[i].ue == trace.records[i].ue);
        CHECK(back.records[i].tti == trace.records[i].tti);
        REQUIRE(back.records[i].msg == trace.records[i].msg);
    }

    std::ostringstream text;
    export_trace_text(text, trace);
    size_t lines = 0;
    for (char c : text.str())
        if (c == '\n')
            lines++;
    CHECK(lines == trace.records.size());
}

TEST_CASE("schema without the expected fields is a config error")
{
    DciSchema wrong({{"a", 20}, {"b", 19}}, 8);
    SimConfig cfg;
    cfg.tti_count = 10;
    CHECK_THROWS_AS(simulate(cfg, wrong), ConfigError);
}
