#include "abstain/verifier/mock_server.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "abstain/common/error.hpp"

namespace abstain::verifier {

using nlohmann::json;

struct MockVerifierServer::Impl {
  std::shared_ptr<MockVerifier> mock;
  httplib::Server server;
  std::thread thread;

  explicit Impl(std::shared_ptr<MockVerifier> m) : mock(std::move(m)) {
    server.Post("/verify", [this](const httplib::Request& req, httplib::Response& res) {
      json reply;
      try {
        const json request = json::parse(req.body);
        VerificationExample example;
        example.id = request.at("id").get<std::string>();
        example.question_text = request.value("question", std::string());
        example.answer_text = request.value("answer", std::string());
        example.image_ref = request.value("image_ref", std::string());

        const TokenDistribution dist = mock->score(example);
        json tokens = json::array();
        for (const auto& [token, prob] : dist.top_tokens) {
          tokens.push_back({{"token", token}, {"prob", prob}});
        }
        reply = json{{"id", example.id}, {"top_tokens", tokens}};
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        return;
      }
      res.set_content(reply.dump(), "application/json");
    });
  }
};

MockVerifierServer::MockVerifierServer(std::shared_ptr<MockVerifier> mock)
    : impl_(std::make_unique<Impl>(std::move(mock))) {}

MockVerifierServer::~MockVerifierServer() { stop(); }

int MockVerifierServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw IoError("mock server could not bind on " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("mock server could not bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this]() { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void MockVerifierServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port))
    throw IoError("mock server could not listen on " + host + ":" +
                  std::to_string(port));
}

void MockVerifierServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace abstain::verifier
