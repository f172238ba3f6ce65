#pragma once

#include <string>
#include <vector>

#include "abstain/core/types.hpp"

namespace abstain::verifier {

enum class Verdict { kCorrect, kUncertain, kWrong };

std::string to_string(Verdict v);

// 0 -> wrong, (0, 0.66] -> uncertain, (0.66, 1] -> correct.
Verdict label_verdict(double accuracy);

struct VerificationExample {
  std::string id;
  std::string question_text;
  std::string answer_text;
  std::string image_ref;  // opaque handle, never dereferenced here
  Verdict verdict = Verdict::kUncertain;
};

struct VerificationDataset {
  std::vector<VerificationExample> examples;
  std::size_t n_correct = 0;
  std::size_t n_uncertain = 0;
  std::size_t n_wrong = 0;
};

// One example per record, labeled by the verdict rule; records must carry
// answer text.
VerificationDataset build_verification_dataset(
    const std::vector<core::FeatureRecord>& records);

// Plurality vote over normalized answers (lowercased, trimmed); ties go to
// the lexicographically smallest normalized answer.
std::string aggregate_tta(const std::vector<std::string>& sampled_answers);

}  // namespace abstain::verifier
