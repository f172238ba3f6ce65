#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "abstain/verifier/verdict.hpp"

namespace abstain::verifier {

enum class TokenMatchMode { kExact, kCaseInsensitiveTrimmed };

std::string to_string(TokenMatchMode m);
TokenMatchMode token_match_mode_from_string(const std::string& s);

struct VerifierClientConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  int timeout_ms = 5000;
  int max_in_flight = 4;
  int retries = 2;
  TokenMatchMode token_match_mode = TokenMatchMode::kCaseInsensitiveTrimmed;

  void validate() const;
};

// Top-k first-output-token probabilities returned by a verifier endpoint.
struct TokenDistribution {
  std::vector<std::pair<std::string, double>> top_tokens;

  static constexpr std::size_t kMaxTokens = 20;
  void validate() const;  // probabilities in [0,1], total <= 1 + 1e-6
};

// Anything that can judge a candidate answer and expose its first-token
// distribution: the HTTP client or the in-process mock.
class VerdictEndpoint {
 public:
  virtual ~VerdictEndpoint() = default;
  // Must be safe to call from several threads at once.
  virtual TokenDistribution score(const VerificationExample& example) = 0;
};

struct ConfidenceResult {
  double confidence = 0.0;
  bool token_absent = false;  // "correct" missing from the returned top-k
};

// Probability mass on the token "correct" under the match mode; 0 with a
// flag when the token is absent (no renormalization over returned tokens).
ConfidenceResult verifier_confidence(const TokenDistribution& distribution,
                                     TokenMatchMode mode);
ConfidenceResult verifier_confidence(const VerificationExample& example,
                                     VerdictEndpoint& endpoint,
                                     const VerifierClientConfig& config);

struct VerifyOutcome {
  std::vector<double> scores;            // aligned to the input examples
  std::vector<std::string> flagged_ids;  // absent-token samples, input order
};

// Scores a batch with up to max_in_flight concurrent requests. Results are
// keyed by slot, so the outcome is independent of scheduling.
VerifyOutcome verify_batch(const std::vector<VerificationExample>& examples,
                           VerdictEndpoint& endpoint,
                           const VerifierClientConfig& config);

// HTTP client for the wire protocol: POST /verify {id, question, answer,
// image_ref} -> {id, top_tokens: [{token, prob}, ...]}.
class HttpVerifierEndpoint : public VerdictEndpoint {
 public:
  explicit HttpVerifierEndpoint(VerifierClientConfig config);
  TokenDistribution score(const VerificationExample& example) override;

 private:
  VerifierClientConfig config_;
};

// Deterministic stand-in for a fine-tuned verifier model. The distribution
// over {correct, wrong, uncertain} derives from a keyed hash of the record
// id; explicit per-id overrides take precedence.
class MockVerifier : public VerdictEndpoint {
 public:
  explicit MockVerifier(std::uint64_t seed) : seed_(seed) {}

  void set_override(const std::string& id, TokenDistribution distribution);
  // Convenience override: puts mass p on "correct", splits the rest.
  void set_correct_prob(const std::string& id, double p);

  TokenDistribution score(const VerificationExample& example) override;

 private:
  std::uint64_t seed_;
  std::map<std::string, TokenDistribution> overrides_;
};

}  // namespace abstain::verifier
