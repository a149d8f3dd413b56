#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ethgnn/blocks.hpp"
#include "ethgnn/cache.hpp"
#include "ethgnn/synth.hpp"

using namespace ethgnn;
namespace fs = std::filesystem;

namespace {

nlohmann::json load_fixture(const std::string& name) {
  std::ifstream in(std::string(ETHGNN_TEST_DATA_DIR) + "/" + name);
  EXPECT_TRUE(in.good()) << "fixture " << name << " missing";
  return nlohmann::json::parse(in);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("ethgnn_test_" + name);
}

}  // namespace

// Field-by-field comparison against values decoded by hand from the fixture:
// 0x10d4f = 68943, 0x55ba467c = 1438271100, 0x7a1200 = 8000000, 0xa410 = 42000,
// 0x4563918244f40000 = 5 ether, 0x1bc16d674ec80000 = 2 ether,
// 0x5208 = 21000, 0x3d090 = 250000, 0x4a817c800 = 20 gwei,
// 0x2540be400 = 10 gwei, 0x3b9aca00 = 1 gwei.
TEST(Ingest, FixtureDecodesToHandDecodedValues) {
  const auto fixture = load_fixture("eth_getBlockByNumber_response.json");
  const BlockRecord b = block_from_json(fixture["result"]);

  EXPECT_EQ(b.number, 68943u);
  EXPECT_EQ(b.timestamp, 1438271100u);
  EXPECT_EQ(b.gas_limit, 8000000u);
  EXPECT_EQ(b.gas_used, 42000u);
  ASSERT_EQ(b.transactions.size(), 3u);

  const TxRecord& t0 = b.transactions[0];
  EXPECT_EQ(t0.hash, "0x88df016429689c079f3b2f6ad39fa052532c56795b733da78a91ebe6a713944b");
  EXPECT_EQ(t0.from, "0xa7d9ddbe1f17865597fbd27ec712455208b6b76d");
  ASSERT_TRUE(t0.to.has_value());
  EXPECT_EQ(*t0.to, "0xf02c1c8e6114b1dbe8937a39260b5b0a374432bb");
  EXPECT_EQ(t0.value, U256::from_u64(5000000000000000000ULL));
  EXPECT_EQ(t0.gas, 21000u);
  EXPECT_EQ(t0.gas_price, 20000000000ULL);

  const TxRecord& t1 = b.transactions[1];
  EXPECT_FALSE(t1.to.has_value());  // contract creation
  EXPECT_TRUE(t1.value.is_zero());
  EXPECT_EQ(t1.gas, 250000u);
  EXPECT_EQ(t1.gas_price, 10000000000ULL);

  const TxRecord& t2 = b.transactions[2];
  EXPECT_EQ(t2.from, "0xde0b295669a9fd93d5f28d9ec85e40f4cb697bae");  // case normalized
  EXPECT_EQ(t2.value, U256::from_u64(2000000000000000000ULL));
  EXPECT_EQ(t2.gas_price, 1000000000ULL);
}

TEST(Ingest, EmptyBlockFixture) {
  const auto fixture = load_fixture("eth_getBlockByNumber_empty.json");
  const BlockRecord b = block_from_json(fixture["result"]);
  EXPECT_EQ(b.number, 2u);
  EXPECT_TRUE(b.transactions.empty());
  EXPECT_EQ(b.gas_used, 0u);
}

TEST(Ingest, RejectsGasUsedAboveLimit) {
  auto fixture = load_fixture("eth_getBlockByNumber_empty.json");
  fixture["result"]["gasUsed"] = "0xffff";  // above the 0x1388 limit
  EXPECT_THROW(block_from_json(fixture["result"]), ParseError);
}

TEST(Ingest, RejectsMalformedHexField) {
  auto fixture = load_fixture("eth_getBlockByNumber_empty.json");
  fixture["result"]["timestamp"] = "55ba4241";  // missing 0x
  EXPECT_THROW(block_from_json(fixture["result"]), ParseError);
}

TEST(Cache, EmptyRoundTrip) {
  const auto path = temp_file("empty.ndjson");
  cache_write(path, {});
  EXPECT_TRUE(cache_read(path).empty());
  EXPECT_EQ(read_file(path), "");
  fs::remove(path);
}

TEST(Cache, SingleBlockRoundTrip) {
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.n_blocks = 1;
  const auto blocks = synth_blocks(cfg);
  const auto path = temp_file("single.ndjson");
  cache_write(path, blocks);

  const std::string contents = read_file(path);
  EXPECT_EQ(std::count(contents.begin(), contents.end(), '\n'), 1);

  EXPECT_EQ(cache_read(path), blocks);
  fs::remove(path);
}

// Serialize, reload, serialize again: the two files must be byte-identical.
TEST(Cache, ReserializationIsByteStable) {
  SynthConfig cfg;
  cfg.seed = 11;
  cfg.n_blocks = 100;
  const auto blocks = synth_blocks(cfg);

  const auto path1 = temp_file("stable1.ndjson");
  const auto path2 = temp_file("stable2.ndjson");
  cache_write(path1, blocks);
  cache_write(path2, cache_read(path1));
  EXPECT_EQ(read_file(path1), read_file(path2));
  fs::remove(path1);
  fs::remove(path2);
}

TEST(Cache, CorruptLineNamesLineNumber) {
  SynthConfig cfg;
  cfg.n_blocks = 3;
  const auto path = temp_file("corrupt.ndjson");
  cache_write(path, synth_blocks(cfg));
  {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out << "{not json\n";
  }
  try {
    cache_read(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  fs::remove(path);
}

TEST(Cache, MissingFileIsAnError) {
  EXPECT_THROW(cache_read(temp_file("does_not_exist.ndjson")), ParseError);
}
