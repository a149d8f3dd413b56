#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "ethgnn/blocks.hpp"
#include "ethgnn/errors.hpp"

namespace ethgnn {

struct RpcOptions {
  int attempts = 5;                           // total tries per request
  std::chrono::milliseconds base_delay{250};  // doubled after each failure
  std::chrono::seconds timeout{30};
};

// One JSON-RPC round trip. Implementations throw TransportError on network
// failure; anything request-scoped lives in the body.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string post(const std::string& body) = 0;
};

class HttpTransport : public Transport {
 public:
  HttpTransport(const std::string& endpoint, std::chrono::seconds timeout)
      : client_(make_client(endpoint, timeout)), path_(split_path(endpoint)) {}

  std::string post(const std::string& body) override {
    auto res = client_->Post(path_, body, "application/json");
    if (!res) {
      throw TransportError("POST " + path_ + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw TransportError("POST " + path_ + " returned HTTP " + std::to_string(res->status));
    }
    return res->body;
  }

 private:
  static std::string authority(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
      throw ConfigError({"endpoint must be an http(s) URL: " + endpoint});
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    return path_start == std::string::npos ? endpoint : endpoint.substr(0, path_start);
  }

  static std::string split_path(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    const auto path_start = endpoint.find('/', scheme_end + 3);
    return path_start == std::string::npos ? "/" : endpoint.substr(path_start);
  }

  static std::unique_ptr<httplib::Client> make_client(const std::string& endpoint,
                                                      std::chrono::seconds timeout) {
    auto client = std::make_unique<httplib::Client>(authority(endpoint));
    client->set_connection_timeout(timeout.count(), 0);
    client->set_read_timeout(timeout.count(), 0);
    return client;
  }

  std::unique_ptr<httplib::Client> client_;
  std::string path_;
};

using TransportFactory = std::function<std::unique_ptr<Transport>()>;

// Ethereum JSON-RPC 2.0 client: eth_blockNumber and eth_getBlockByNumber with
// the full-transaction flag. Transient transport failures are retried with
// bounded exponential backoff; protocol and parse errors are not retried.
class RpcClient {
 public:
  explicit RpcClient(const std::string& endpoint, RpcOptions opts = {})
      : RpcClient(
            [endpoint, opts]() -> std::unique_ptr<Transport> {
              return std::make_unique<HttpTransport>(endpoint, opts.timeout);
            },
            opts) {}

  RpcClient(TransportFactory factory, RpcOptions opts = {})
      : factory_(std::move(factory)), opts_(opts) {
    if (opts_.attempts < 1) {
      throw ConfigError({"rpc attempts must be >= 1"});
    }
  }

  std::uint64_t block_number() {
    auto transport = factory_();
    const auto result = call(*transport, "eth_blockNumber", nlohmann::json::array());
    if (!result.is_string()) {
      throw ProtocolError("eth_blockNumber result is not a hex string");
    }
    return parse_hex_u64(result.get<std::string>());
  }

  BlockRecord fetch_block(std::uint64_t number) {
    auto transport = factory_();
    return fetch_block_with(*transport, number);
  }

  // Blocks sorted ascending by number regardless of completion order, with at
  // most `parallelism` requests in flight. A block that still fails after the
  // retry budget fails the whole range; the lowest failing number is reported.
  std::vector<BlockRecord> fetch_range(BlockRange range, unsigned parallelism = 1) {
    range.validate();
    const std::size_t count = static_cast<std::size_t>(range.count());
    std::vector<BlockRecord> blocks(count);
    std::vector<std::exception_ptr> failures(count);

    const unsigned workers =
        std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(count)));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};

    auto work = [&]() {
      auto transport = factory_();
      while (!abort.load()) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= count) break;
        try {
          blocks[idx] = fetch_block_with(*transport, range.start_block + idx);
        } catch (...) {
          failures[idx] = std::current_exception();
          abort.store(true);
        }
      }
    };

    if (workers == 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < count; ++i) {
      if (failures[i]) {
        try {
          std::rethrow_exception(failures[i]);
        } catch (const std::exception& e) {
          throw TransportError("block " + std::to_string(range.start_block + i) +
                               " failed: " + e.what());
        }
      }
    }
    return blocks;
  }

 private:
  BlockRecord fetch_block_with(Transport& transport, std::uint64_t number) {
    const auto params = nlohmann::json::array({to_hex_u64(number), true});
    const auto result = call(transport, "eth_getBlockByNumber", params);
    if (result.is_null()) {
      throw ProtocolError("block " + std::to_string(number) + " not found");
    }
    return block_from_json(result);
  }

  nlohmann::json call(Transport& transport, const std::string& method,
                      const nlohmann::json& params) {
    nlohmann::json req{{"jsonrpc", "2.0"}, {"id", 1}, {"method", method}, {"params", params}};
    const std::string body = req.dump();

    std::string response;
    for (int attempt = 0;; ++attempt) {
      try {
        response = transport.post(body);
        break;
      } catch (const TransportError&) {
        if (attempt + 1 >= opts_.attempts) throw;
        std::this_thread::sleep_for(opts_.base_delay * (1LL << attempt));
      }
    }

    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(response);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("response is not valid JSON: ") + e.what());
    }
    if (parsed.contains("error") && !parsed["error"].is_null()) {
      const auto& err = parsed["error"];
      const std::string msg = err.contains("message") && err["message"].is_string()
                                  ? err["message"].get<std::string>()
                                  : err.dump();
      throw ProtocolError(method + " failed: " + msg);
    }
    if (!parsed.contains("result")) {
      throw ProtocolError(method + ": response carries neither result nor error");
    }
    return parsed["result"];
  }

  TransportFactory factory_;
  RpcOptions opts_;
};

}  // namespace ethgnn
