#pragma once

#include <memory>

#include "abstain/verifier/client.hpp"

namespace abstain::verifier {

// Serves a MockVerifier over the wire protocol. Stateless per request, so
// concurrent clients are fine.
class MockVerifierServer {
 public:
  explicit MockVerifierServer(std::shared_ptr<MockVerifier> mock);
  ~MockVerifierServer();

  MockVerifierServer(const MockVerifierServer&) = delete;
  MockVerifierServer& operator=(const MockVerifierServer&) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port.
  int start(const std::string& host, int port);

  // Blocking variant for the mock-serve subcommand.
  void listen(const std::string& host, int port);

  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace abstain::verifier
