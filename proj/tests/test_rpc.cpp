#include <gtest/gtest.h>

#include <fstream>
#include <memory>
#include <mutex>

#include "ethgnn/rpc.hpp"
#include "ethgnn/synth.hpp"

using namespace ethgnn;

namespace {

RpcOptions fast_opts(int attempts = 5) {
  RpcOptions o;
  o.attempts = attempts;
  o.base_delay = std::chrono::milliseconds(1);
  return o;
}

// In-process JSON-RPC endpoint backed by a synthetic chain. Thread safe; the
// client side may create one transport per worker.
struct FakeChain {
  std::vector<BlockRecord> blocks;  // blocks[i] has number = i
  std::mutex mu;
  int calls = 0;
  int failures_left = 0;    // transport errors injected before serving
  bool serve_rpc_error = false;

  explicit FakeChain(std::size_t n_blocks) {
    SynthConfig cfg;
    cfg.seed = 42;
    cfg.n_blocks = n_blocks;
    cfg.start_number = 0;
    blocks = synth_blocks(cfg);
  }

  std::string handle(const std::string& body) {
    {
      std::lock_guard lock(mu);
      ++calls;
      if (failures_left > 0) {
        --failures_left;
        throw TransportError("injected failure");
      }
    }
    const auto req = nlohmann::json::parse(body);
    const std::string method = req["method"];
    nlohmann::json resp{{"jsonrpc", "2.0"}, {"id", req["id"]}};
    if (serve_rpc_error) {
      resp["error"] = {{"code", -32000}, {"message", "upstream unavailable"}};
    } else if (method == "eth_blockNumber") {
      resp["result"] = to_hex_u64(blocks.size() - 1);
    } else if (method == "eth_getBlockByNumber") {
      const std::uint64_t number = parse_hex_u64(req["params"][0].get<std::string>());
      if (number >= blocks.size()) {
        resp["result"] = nullptr;
      } else {
        resp["result"] = block_to_json(blocks[number]);
      }
    } else {
      resp["error"] = {{"code", -32601}, {"message", "method not found"}};
    }
    return resp.dump();
  }
};

struct FakeTransport : Transport {
  std::shared_ptr<FakeChain> chain;
  explicit FakeTransport(std::shared_ptr<FakeChain> c) : chain(std::move(c)) {}
  std::string post(const std::string& body) override { return chain->handle(body); }
};

RpcClient make_client(std::shared_ptr<FakeChain> chain, RpcOptions opts = fast_opts()) {
  return RpcClient([chain]() { return std::make_unique<FakeTransport>(chain); }, opts);
}

}  // namespace

TEST(Rpc, BlockNumber) {
  auto chain = std::make_shared<FakeChain>(8);
  EXPECT_EQ(make_client(chain).block_number(), 7u);
}

TEST(Rpc, FetchBlockParsesFullRecord) {
  auto chain = std::make_shared<FakeChain>(8);
  EXPECT_EQ(make_client(chain).fetch_block(5), chain->blocks[5]);
}

TEST(Rpc, RetriesTransientFailures) {
  auto chain = std::make_shared<FakeChain>(4);
  chain->failures_left = 2;
  EXPECT_EQ(make_client(chain, fast_opts(3)).fetch_block(1), chain->blocks[1]);
  EXPECT_EQ(chain->calls, 3);
}

TEST(Rpc, GivesUpAfterRetryBudget) {
  auto chain = std::make_shared<FakeChain>(4);
  chain->failures_left = 5;
  EXPECT_THROW(make_client(chain, fast_opts(2)).fetch_block(1), TransportError);
  EXPECT_EQ(chain->calls, 2);
}

TEST(Rpc, ErrorObjectIsProtocolErrorAndNotRetried) {
  auto chain = std::make_shared<FakeChain>(4);
  chain->serve_rpc_error = true;
  EXPECT_THROW(make_client(chain).fetch_block(1), ProtocolError);
  EXPECT_EQ(chain->calls, 1);
}

TEST(Rpc, MissingBlockIsProtocolError) {
  auto chain = std::make_shared<FakeChain>(4);
  EXPECT_THROW(make_client(chain).fetch_block(99), ProtocolError);
  EXPECT_EQ(chain->calls, 1);  // protocol errors are not retried
}

TEST(Rpc, MalformedHexIsParseError) {
  auto chain = std::make_shared<FakeChain>(4);
  chain->blocks[2].transactions.clear();
  auto client = make_client(chain);
  // Corrupt the served encoding through a transport wrapper.
  RpcClient corrupting(
      [chain]() -> std::unique_ptr<Transport> {
        struct Corrupting : Transport {
          std::shared_ptr<FakeChain> chain;
          explicit Corrupting(std::shared_ptr<FakeChain> c) : chain(std::move(c)) {}
          std::string post(const std::string& body) override {
            auto resp = nlohmann::json::parse(chain->handle(body));
            if (resp.contains("result") && resp["result"].is_object()) {
              resp["result"]["timestamp"] = "not-hex";
            }
            return resp.dump();
          }
        };
        return std::make_unique<Corrupting>(chain);
      },
      fast_opts());
  EXPECT_THROW(corrupting.fetch_block(2), ParseError);
}

TEST(Rpc, SingletonRange) {
  auto chain = std::make_shared<FakeChain>(8);
  const auto blocks = make_client(chain).fetch_range({5, 5});
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0].number, 5u);
}

TEST(Rpc, RangeIsAscending) {
  auto chain = std::make_shared<FakeChain>(8);
  const auto blocks = make_client(chain).fetch_range({3, 7});
  ASSERT_EQ(blocks.size(), 5u);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    EXPECT_EQ(blocks[i].number, 3 + i);
  }
}

TEST(Rpc, ParallelFetchEqualsSequential) {
  auto chain = std::make_shared<FakeChain>(20);
  const auto sequential = make_client(chain).fetch_range({0, 19}, 1);
  const auto parallel = make_client(chain).fetch_range({0, 19}, 4);
  EXPECT_EQ(parallel, sequential);
}

TEST(Rpc, RangeFailureNamesOffendingBlock) {
  auto chain = std::make_shared<FakeChain>(8);
  RpcClient client(
      [chain]() -> std::unique_ptr<Transport> {
        struct FailAt : Transport {
          std::shared_ptr<FakeChain> chain;
          explicit FailAt(std::shared_ptr<FakeChain> c) : chain(std::move(c)) {}
          std::string post(const std::string& body) override {
            const auto req = nlohmann::json::parse(body);
            if (req["method"] == "eth_getBlockByNumber" &&
                parse_hex_u64(req["params"][0].get<std::string>()) == 6) {
              throw TransportError("injected");
            }
            return chain->handle(body);
          }
        };
        return std::make_unique<FailAt>(chain);
      },
      fast_opts(2));
  try {
    client.fetch_range({0, 7}, 3);
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("block 6"), std::string::npos) << e.what();
  }
}

// End-to-end over loopback HTTP with the vendored server.
TEST(Rpc, HttpLoopbackEndToEnd) {
  auto chain = std::make_shared<FakeChain>(6);
  httplib::Server server;
  server.Post("/", [&](const httplib::Request& req, httplib::Response& res) {
    res.set_content(chain->handle(req.body), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread server_thread([&]() { server.listen_after_bind(); });
  server.wait_until_ready();

  RpcClient client("http://127.0.0.1:" + std::to_string(port), fast_opts());
  EXPECT_EQ(client.block_number(), 5u);
  const auto blocks = client.fetch_range({1, 4}, 2);
  ASSERT_EQ(blocks.size(), 4u);
  EXPECT_EQ(blocks[2], chain->blocks[3]);

  server.stop();
  server_thread.join();
}
