#include "abstain/verifier/client.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "abstain/common/error.hpp"
#include "abstain/common/hash.hpp"
#include "abstain/common/strings.hpp"

namespace abstain::verifier {

using nlohmann::json;

std::string to_string(TokenMatchMode m) {
  return m == TokenMatchMode::kExact ? "exact" : "case-insensitive-trimmed";
}

TokenMatchMode token_match_mode_from_string(const std::string& s) {
  if (s == "exact") return TokenMatchMode::kExact;
  if (s == "case-insensitive-trimmed") return TokenMatchMode::kCaseInsensitiveTrimmed;
  throw ValidationError("unknown token match mode: " + s);
}

void VerifierClientConfig::validate() const {
  if (timeout_ms <= 0) throw ValidationError("timeout must be positive");
  if (max_in_flight < 1) throw ValidationError("max in-flight requests must be >= 1");
  if (retries < 0) throw ValidationError("retry count must be nonnegative");
}

void TokenDistribution::validate() const {
  if (top_tokens.size() > kMaxTokens)
    throw ValidationError("token distribution exceeds top-" +
                          std::to_string(kMaxTokens));
  double total = 0.0;
  for (const auto& [token, prob] : top_tokens) {
    if (!(prob >= 0.0 && prob <= 1.0))
      throw ValidationError("token probability out of [0,1] for '" + token + "'");
    total += prob;
  }
  if (total > 1.0 + 1e-6)
    throw ValidationError("token probabilities sum to " + fmt_double(total));
}

ConfidenceResult verifier_confidence(const TokenDistribution& distribution,
                                     TokenMatchMode mode) {
  distribution.validate();
  double mass = 0.0;
  bool found = false;
  for (const auto& [token, prob] : distribution.top_tokens) {
    const bool match = mode == TokenMatchMode::kExact
                           ? token == "correct"
                           : to_lower(trim(token)) == "correct";
    if (match) {
      mass += prob;
      found = true;
    }
  }
  return {found ? mass : 0.0, !found};
}

ConfidenceResult verifier_confidence(const VerificationExample& example,
                                     VerdictEndpoint& endpoint,
                                     const VerifierClientConfig& config) {
  config.validate();
  return verifier_confidence(endpoint.score(example), config.token_match_mode);
}

VerifyOutcome verify_batch(const std::vector<VerificationExample>& examples,
                           VerdictEndpoint& endpoint,
                           const VerifierClientConfig& config) {
  config.validate();
  const std::size_t n = examples.size();
  VerifyOutcome outcome;
  outcome.scores.assign(n, 0.0);
  std::vector<unsigned char> absent(n, 0);
  std::vector<std::string> errors(n);

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.max_in_flight),
                            std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  auto run = [&]() {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        const ConfidenceResult res =
            verifier_confidence(endpoint.score(examples[i]), config.token_match_mode);
        outcome.scores[i] = res.confidence;
        absent[i] = res.token_absent ? 1 : 0;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (std::thread& t : pool) t.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty())
      throw IoError("verification failed for id=" + examples[i].id + ": " + errors[i]);
    if (absent[i]) outcome.flagged_ids.push_back(examples[i].id);
  }
  return outcome;
}

HttpVerifierEndpoint::HttpVerifierEndpoint(VerifierClientConfig config)
    : config_(std::move(config)) {
  config_.validate();
  if (config_.endpoint.empty()) throw ValidationError("no verifier endpoint configured");
}

TokenDistribution HttpVerifierEndpoint::score(const VerificationExample& example) {
  const json request{{"id", example.id},
                     {"question", example.question_text},
                     {"answer", example.answer_text},
                     {"image_ref", example.image_ref}};
  const std::string body = request.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(0, config_.timeout_ms * 1000);
    client.set_write_timeout(0, config_.timeout_ms * 1000);

    auto res = client.Post("/verify", body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      throw IoError("malformed verifier response for id=" + example.id + ": " +
                    e.what());
    }
    TokenDistribution dist;
    try {
      for (const json& entry : reply.at("top_tokens")) {
        dist.top_tokens.emplace_back(entry.at("token").get<std::string>(),
                                     entry.at("prob").get<double>());
      }
    } catch (const json::exception& e) {
      throw IoError("malformed verifier response for id=" + example.id + ": " +
                    e.what());
    }
    dist.validate();
    return dist;
  }
  throw IoError("verifier endpoint unreachable for id=" + example.id + " after " +
                std::to_string(config_.retries + 1) + " attempts (" + last_error + ")");
}

void MockVerifier::set_override(const std::string& id, TokenDistribution distribution) {
  distribution.validate();
  overrides_[id] = std::move(distribution);
}

void MockVerifier::set_correct_prob(const std::string& id, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("correct probability out of [0,1]");
  TokenDistribution dist;
  dist.top_tokens = {{"correct", p}, {"wrong", (1.0 - p) * 0.5}, {"uncertain", (1.0 - p) * 0.5}};
  set_override(id, std::move(dist));
}

TokenDistribution MockVerifier::score(const VerificationExample& example) {
  if (auto it = overrides_.find(example.id); it != overrides_.end()) return it->second;
  const double u1 = hash_to_unit(example.id, seed_, 1);
  const double u2 = hash_to_unit(example.id, seed_, 2);
  TokenDistribution dist;
  dist.top_tokens = {{"correct", u1},
                     {"wrong", (1.0 - u1) * u2},
                     {"uncertain", (1.0 - u1) * (1.0 - u2)}};
  return dist;
}

}  // namespace abstain::verifier
