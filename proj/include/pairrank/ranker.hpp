#ifndef PAIRRANK_RANKER_HPP
#define PAIRRANK_RANKER_HPP

#include <string>
#include <vector>

#include "pairrank/judge.hpp"
#include "pairrank/types.hpp"

namespace pairrank {

class LlmClient;

struct SweepConfig {
  int max_passes = 10;  // P
  SweepMode mode = SweepMode::kSequential;
  bool early_stop = true;       // stop after a zero-swap pass
  int max_in_flight = 4;        // concurrent judgments within an odd/even phase
};

struct ComparisonRecord {
  int pass = 0;      // 1-based
  int position = 0;  // 1-based index of the adjacent pair (i, i+1)
  std::string left_id;
  std::string right_id;
  std::string winner_id;
  std::string reason;
  bool cached = false;
};

using ComparisonLog = std::vector<ComparisonRecord>;

struct SweepResult {
  std::vector<std::string> window_order;  // permutation of the input pool
  ComparisonLog log;
  int passes_run = 0;
  int swaps_last_pass = 0;
};

// A judge failure mid-sweep; carries whatever was ranked and logged
// before the abort.
class SweepAbortedError : public JudgeError {
 public:
  SweepAbortedError(const JudgeError& cause, SweepResult partial)
      : JudgeError(cause.what(), cause.raw_response()),
        partial_(std::move(partial)) {}

  const SweepResult& partial() const { return partial_; }

 private:
  SweepResult partial_;
};

// Sliding-window re-ranking: up to cfg.max_passes sweeps over the K-1
// adjacent pairs, swapping whenever the right candidate wins. In odd-even
// mode one pass runs the odd phase (pairs at positions 1-2, 3-4, ...)
// concurrently, applies it, then the even phase (2-3, 4-5, ...) on the
// updated order; results are applied and logged in ascending pair
// position regardless of completion order, so output is independent of
// the parallelism level for deterministic judges.
SweepResult sweep_rerank(const std::string& query_id,
                         const std::string& query_text,
                         const std::vector<CandidateRef>& pool, Judge& judge,
                         const SweepConfig& cfg);

// Ablation: ask the LLM for the whole ranking in one prompt. Ids missing
// from the reply keep their original relative order at the back.
std::vector<std::string> single_shot_rank(const std::string& query_text,
                                          const std::vector<CandidateRef>& pool,
                                          LlmClient& client);

}  // namespace pairrank

#endif  // PAIRRANK_RANKER_HPP
