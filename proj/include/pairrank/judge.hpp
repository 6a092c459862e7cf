#ifndef PAIRRANK_JUDGE_HPP
#define PAIRRANK_JUDGE_HPP

#include <cstdint>
#include <list>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "pairrank/types.hpp"

namespace pairrank {

// Pairwise comparator contract: given (query, left, right), pick a winner
// and optionally explain why. Implementations must be callable from
// multiple threads at once.
class Judge {
 public:
  virtual ~Judge() = default;

  virtual Judgment compare(const PairQuery& pq) = 0;

  // Condenses per-comparison reasons into one explanation. The default is
  // a deterministic numbered join so offline judges need no LLM; the LLM
  // judge overrides this with a single summarization call.
  virtual std::string summarize_reasons(const std::vector<std::string>& reasons);

  virtual JudgeKind kind() const = 0;
};

// Deterministic, transitive judge backed by a fixed total order
// (best candidate first). Used for tests and ground-truth-aware runs.
class OracleJudge : public Judge {
 public:
  explicit OracleJudge(const std::vector<std::string>& total_order);

  Judgment compare(const PairQuery& pq) override;
  JudgeKind kind() const override { return JudgeKind::kOracle; }

 private:
  std::unordered_map<std::string, int> rank_;
};

// Simulated judge drawing winners from the Bradley-Terry model:
// P[left wins] = theta_left / (theta_left + theta_right).
//
// Each call uses a generator derived from (seed, query_id, left, right),
// so identical inputs always produce identical judgments and the output
// is independent of call interleaving. Repeat draws therefore come from
// varying the query id, not from re-asking the same pair.
class NoisyBtJudge : public Judge {
 public:
  NoisyBtJudge(std::unordered_map<std::string, double> theta, std::uint64_t seed);

  Judgment compare(const PairQuery& pq) override;
  JudgeKind kind() const override { return JudgeKind::kNoisyBt; }

 private:
  std::unordered_map<std::string, double> theta_;
  std::uint64_t seed_;
};

// Cache key for one comparison. Under the unordered policy the two video
// ids are stored in lexicographic order and the judgment's orientation
// relative to that canonical order is recorded separately.
struct PairKey {
  std::string query_id;
  std::string first_video_id;
  std::string second_video_id;

  bool operator==(const PairKey&) const = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const;
};

// Memoizing wrapper around a judge with hit/miss accounting.
//
// capacity == 0 means unbounded (the default: a query issues at most
// P*(K-1) comparisons, so per-query caches stay tiny and eviction would
// only re-incur judge cost). A positive capacity enables LRU eviction.
//
// Thread safety: lookups and stores are mutually atomic. The inner call
// runs outside the lock, so two racing misses on the same key may both
// reach the inner judge; both count as unique calls and the accounting
// identity still holds.
class CachedJudge : public Judge {
 public:
  explicit CachedJudge(Judge& inner,
                       CacheKeyPolicy policy = CacheKeyPolicy::kOrdered,
                       std::size_t capacity = 0);

  Judgment compare(const PairQuery& pq) override;
  std::string summarize_reasons(const std::vector<std::string>& reasons) override;
  JudgeKind kind() const override { return inner_.kind(); }

  JudgeStats stats() const;
  std::size_t size() const;
  void clear();  // drops entries and zeroes stats; call between queries

 private:
  struct Entry {
    bool winner_is_first = false;  // relative to the key's stored order
    std::string reason;
    JudgeKind judge_kind = JudgeKind::kOracle;
    std::list<PairKey>::iterator lru_pos;
  };

  PairKey make_key(const PairQuery& pq, bool* flipped) const;

  Judge& inner_;
  CacheKeyPolicy policy_;
  std::size_t capacity_;

  mutable std::mutex mu_;
  std::unordered_map<PairKey, Entry, PairKeyHash> entries_;
  std::list<PairKey> lru_;  // front = most recently used
  JudgeStats stats_;
};

// "1. <reason>\n2. <reason>" ... : the offline explanation summarizer.
std::string join_reasons_numbered(const std::vector<std::string>& reasons);

}  // namespace pairrank

#endif  // PAIRRANK_JUDGE_HPP
