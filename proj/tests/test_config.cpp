#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "modesel/config.hpp"

using namespace modesel;

namespace {

std::string temp_file(const std::string& name, const std::string& content)
{
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << content;
    return p.string();
}

} // namespace

TEST(KvParse, CommentsBlankLinesAndDuplicates)
{
    const auto t = kv::parse("# header\n\n a = 1 \nb=two # trailing\na = 3\n");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.at("a"), "3");
    EXPECT_EQ(t.at("b"), "two");
    EXPECT_THROW(kv::parse("no equals sign\n"), config_error);
    EXPECT_THROW(kv::parse(" = 4\n"), config_error);
}

TEST(KvParse, Scalars)
{
    EXPECT_DOUBLE_EQ(kv::to_double("k", "-3.5e2"), -350.0);
    EXPECT_THROW(kv::to_double("k", "3.5x"), config_error);
    EXPECT_EQ(kv::to_int("k", "42"), 42);
    EXPECT_THROW(kv::to_int("k", "4.2"), config_error);
    EXPECT_TRUE(kv::to_bool("k", "yes"));
    EXPECT_FALSE(kv::to_bool("k", "0"));
    EXPECT_THROW(kv::to_bool("k", "maybe"), config_error);
    EXPECT_EQ(kv::split(" a, b ,,c ", ','), (std::vector<std::string>{"a", "b", "c"}));
    // Reference values of 64-bit FNV-1a.
    EXPECT_EQ(kv::fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(kv::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, EmptyFileGivesDefaults)
{
    const auto path = temp_file("modesel_empty.conf", "");
    const auto cfg = load_config(path, {}, {});
    const auto def = build_config({});
    EXPECT_EQ(cfg.echo(), def.echo());
    EXPECT_EQ(cfg.engine.runs, 10);
    EXPECT_EQ(cfg.engine.steps, 100);
    EXPECT_EQ(cfg.engine.users, 60);
    EXPECT_EQ(cfg.engine.n_enb, 1);
    EXPECT_EQ(cfg.engine.n_gnb, 2);
    EXPECT_DOUBLE_EQ(cfg.engine.area_m, 1000.0);
    EXPECT_DOUBLE_EQ(cfg.engine.max_d2d_distance_m, 80.0);
    EXPECT_DOUBLE_EQ(cfg.select.hysteresis_db, 0.6);
    EXPECT_EQ(cfg.engine.speeds, (std::vector<double>{2, 4, 6, 8, 10}));
    EXPECT_EQ(cfg.engine.selectors.size(), 4u);
    std::filesystem::remove(path);
}

TEST(Config, RangeAndValueErrors)
{
    EXPECT_THROW(build_config({{{"engine.runs", "0"}}}), config_error);
    EXPECT_THROW(build_config({{{"engine.runs", "1"}}}), config_error);
    EXPECT_THROW(build_config({{{"engine.users", "-5"}}}), config_error);
    EXPECT_THROW(build_config({{{"engine.dt_s", "0"}}}), config_error);
    EXPECT_THROW(build_config({{{"engine.runs", "ten"}}}), config_error);
    EXPECT_THROW(build_config({{{"engine.slice", "voice"}}}), config_error);
    EXPECT_THROW(build_config({{{"engine.selectors", "proposed,oracle"}}}), config_error);
    EXPECT_THROW(build_config({{{"engine.sweep", "time"}}}), config_error);
    EXPECT_THROW(build_config({{{"calib.snr_min_db", "10"}, {"calib.snr_max_db", "0"}}}), config_error);
    EXPECT_THROW(build_config({{{"phy.nr.max_modulation", "1024qam"}}}), config_error);
    EXPECT_THROW(build_config({{{"engine.no_such_key", "1"}}}), config_error);
    EXPECT_THROW(load_config("/nonexistent/modesel.conf", {}, {}), config_error);
}

TEST(Config, LayerPrecedence)
{
    const auto path = temp_file("modesel_layers.conf", "engine.runs = 4\nengine.steps = 30\nengine.users = 12\n");
    const kv::Table env{{"engine.steps", "40"}, {"engine.users", "14"}};
    const kv::Table flags{{"engine.users", "16"}};
    const auto cfg = load_config(path, flags, env);
    EXPECT_EQ(cfg.engine.runs, 4);
    EXPECT_EQ(cfg.engine.steps, 40);
    EXPECT_EQ(cfg.engine.users, 16);
    EXPECT_NE(cfg.echo().find("engine.users = 16\n"), std::string::npos);
    std::filesystem::remove(path);
}

TEST(Config, EnvironmentNames)
{
    std::string a = "MODESEL_ENGINE__RUNS=20";
    std::string b = "MODESEL_PHY__NR__TX_POWER_DBM=30";
    std::string c = "MODESEL_UNRELATED=1";
    std::string d = "PATH=/usr/bin";
    char* env[] = {a.data(), b.data(), c.data(), d.data(), nullptr};
    const auto t = environment_overrides(env);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.at("engine.runs"), "20");
    EXPECT_EQ(t.at("phy.nr.tx_power_dbm"), "30");
    EXPECT_EQ(build_config({t}).engine.runs, 20);
}

TEST(Config, HashTracksEffectiveValues)
{
    const auto a = build_config({});
    const auto b = build_config({{{"engine.runs", "10"}}});
    const auto c = build_config({{{"engine.runs", "11"}}});
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), c.hash());
    EXPECT_EQ(a.hash_hex().size(), 16u);
    EXPECT_EQ(a.hash(), kv::fnv1a(a.echo()));
}

TEST(Config, AhpKeysRouted)
{
    const auto cfg = build_config({{{"engine.level1_source", "recomputed"}, {"reference.embb.nr", "0.5"}}});
    EXPECT_EQ(cfg.engine.level1_source, Level1Source::recomputed);
    EXPECT_NE(cfg.echo().find("reference.embb.nr = 0.5\n"), std::string::npos);
    ASSERT_TRUE(cfg.ahp.reference_scores[static_cast<std::size_t>(Slice::embb)]);
    EXPECT_DOUBLE_EQ((*cfg.ahp.reference_scores[static_cast<std::size_t>(Slice::embb)])[1], 0.5);
    EXPECT_NE(cfg.hash(), build_config({}).hash());
    EXPECT_THROW(build_config({{{"slice.embb.priority.bogus", "1"}}}), config_error);
}
