#ifndef PAIRRANK_TYPES_HPP
#define PAIRRANK_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pairrank {

enum class Side { kLeft, kRight };

enum class JudgeKind { kOracle, kNoisyBt, kLlm };

enum class CacheKeyPolicy { kOrdered, kUnordered };

enum class SweepMode { kSequential, kOddEven };

inline Side other_side(Side s) {
  return s == Side::kLeft ? Side::kRight : Side::kLeft;
}

// One candidate as the judge sees it: an id plus the serialized
// annotation block that goes into the prompt.
struct CandidateRef {
  std::string video_id;
  std::string annotation;
};

struct PairQuery {
  std::string query_id;
  std::string query_text;
  CandidateRef left;
  CandidateRef right;
};

struct Judgment {
  Side winner = Side::kLeft;
  std::string reason;
  bool cached = false;
  JudgeKind judge_kind = JudgeKind::kOracle;
};

// Accounting identity: issued_comparisons == unique_calls + cache_hits.
struct JudgeStats {
  std::int64_t issued_comparisons = 0;
  std::int64_t unique_calls = 0;
  std::int64_t cache_hits = 0;
};

// Raised when a judge cannot produce a verdict (transport failure after
// retries, unparseable response). Carries the raw response for audit.
class JudgeError : public std::runtime_error {
 public:
  explicit JudgeError(const std::string& what, std::string raw_response = {})
      : std::runtime_error(what), raw_response_(std::move(raw_response)) {}

  const std::string& raw_response() const { return raw_response_; }

 private:
  std::string raw_response_;
};

// Malformed or inconsistent input data (exit code 2 at the CLI).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pairrank

#endif  // PAIRRANK_TYPES_HPP
