#include "abstain/verifier/verdict.hpp"

#include <map>

#include "abstain/common/error.hpp"
#include "abstain/common/strings.hpp"

namespace abstain::verifier {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kCorrect:
      return "correct";
    case Verdict::kUncertain:
      return "uncertain";
    case Verdict::kWrong:
      return "wrong";
  }
  return "wrong";
}

Verdict label_verdict(double accuracy) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0))
    throw ValidationError("accuracy out of [0,1]: " + fmt_double(accuracy));
  if (accuracy == 0.0) return Verdict::kWrong;
  if (accuracy <= 0.66) return Verdict::kUncertain;
  return Verdict::kCorrect;
}

VerificationDataset build_verification_dataset(
    const std::vector<core::FeatureRecord>& records) {
  VerificationDataset ds;
  ds.examples.reserve(records.size());
  for (const core::FeatureRecord& rec : records) {
    if (rec.answer_text.empty())
      throw ValidationError("record " + rec.id + " has no answer text");
    VerificationExample ex;
    ex.id = rec.id;
    ex.question_text = rec.question_text;
    ex.answer_text = rec.answer_text;
    ex.image_ref = "image://" + rec.id;
    ex.verdict = label_verdict(rec.accuracy);
    switch (ex.verdict) {
      case Verdict::kCorrect:
        ++ds.n_correct;
        break;
      case Verdict::kUncertain:
        ++ds.n_uncertain;
        break;
      case Verdict::kWrong:
        ++ds.n_wrong;
        break;
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

std::string aggregate_tta(const std::vector<std::string>& sampled_answers) {
  if (sampled_answers.empty())
    throw ValidationError("cannot aggregate an empty answer list");
  std::map<std::string, std::size_t> votes;  // ordered: smallest key wins ties
  for (const std::string& answer : sampled_answers) {
    ++votes[to_lower(trim(answer))];
  }
  const std::string* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [answer, count] : votes) {
    if (count > best_count) {
      best = &answer;
      best_count = count;
    }
  }
  return *best;
}

}  // namespace abstain::verifier
