#include "pairrank/judge.hpp"

#include <random>
#include <stdexcept>

#include "pairrank/rng.hpp"

namespace pairrank {

std::string join_reasons_numbered(const std::vector<std::string>& reasons) {
  if (reasons.empty()) {
    throw std::invalid_argument("summarize_reasons: empty reason list");
  }
  std::string out;
  for (std::size_t i = 0; i < reasons.size(); ++i) {
    if (i > 0) out += '\n';
    out += std::to_string(i + 1);
    out += ". ";
    out += reasons[i];
  }
  return out;
}

std::string Judge::summarize_reasons(const std::vector<std::string>& reasons) {
  return join_reasons_numbered(reasons);
}

OracleJudge::OracleJudge(const std::vector<std::string>& total_order) {
  rank_.reserve(total_order.size());
  for (std::size_t i = 0; i < total_order.size(); ++i) {
    rank_.emplace(total_order[i], static_cast<int>(i));
  }
}

Judgment OracleJudge::compare(const PairQuery& pq) {
  auto li = rank_.find(pq.left.video_id);
  auto ri = rank_.find(pq.right.video_id);
  if (li == rank_.end() || ri == rank_.end()) {
    throw JudgeError("oracle judge: candidate not in total order: " +
                     (li == rank_.end() ? pq.left.video_id : pq.right.video_id));
  }
  Judgment j;
  j.winner = li->second < ri->second ? Side::kLeft : Side::kRight;
  j.judge_kind = JudgeKind::kOracle;
  return j;
}

NoisyBtJudge::NoisyBtJudge(std::unordered_map<std::string, double> theta,
                           std::uint64_t seed)
    : theta_(std::move(theta)), seed_(seed) {
  for (const auto& [id, th] : theta_) {
    if (th <= 0.0) {
      throw std::invalid_argument("noisy-bt judge: theta must be positive for " + id);
    }
  }
}

Judgment NoisyBtJudge::compare(const PairQuery& pq) {
  auto li = theta_.find(pq.left.video_id);
  auto ri = theta_.find(pq.right.video_id);
  if (li == theta_.end() || ri == theta_.end()) {
    throw JudgeError("noisy-bt judge: no ability score for " +
                     (li == theta_.end() ? pq.left.video_id : pq.right.video_id));
  }
  std::mt19937_64 gen(derive_stream(
      seed_, {pq.query_id, pq.left.video_id, pq.right.video_id}));
  const double p_left = li->second / (li->second + ri->second);
  Judgment j;
  j.winner = uniform01(gen) < p_left ? Side::kLeft : Side::kRight;
  j.judge_kind = JudgeKind::kNoisyBt;
  return j;
}

std::size_t PairKeyHash::operator()(const PairKey& k) const {
  std::uint64_t h = fnv1a64(k.query_id);
  h = fnv1a64(k.first_video_id, h);
  h = fnv1a64(k.second_video_id, h);
  return static_cast<std::size_t>(h);
}

CachedJudge::CachedJudge(Judge& inner, CacheKeyPolicy policy, std::size_t capacity)
    : inner_(inner), policy_(policy), capacity_(capacity) {}

PairKey CachedJudge::make_key(const PairQuery& pq, bool* flipped) const {
  PairKey key;
  key.query_id = pq.query_id;
  if (policy_ == CacheKeyPolicy::kUnordered &&
      pq.right.video_id < pq.left.video_id) {
    key.first_video_id = pq.right.video_id;
    key.second_video_id = pq.left.video_id;
    *flipped = true;
  } else {
    key.first_video_id = pq.left.video_id;
    key.second_video_id = pq.right.video_id;
    *flipped = false;
  }
  return key;
}

Judgment CachedJudge::compare(const PairQuery& pq) {
  bool flipped = false;
  const PairKey key = make_key(pq, &flipped);

  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      ++stats_.issued_comparisons;
      ++stats_.cache_hits;
      lru_.splice(lru_.begin(), lru_, it->second.lru_pos);
      Judgment j;
      // Winner was stored relative to the key order; map back to the
      // caller's left/right orientation.
      const bool winner_is_left = it->second.winner_is_first != flipped;
      j.winner = winner_is_left ? Side::kLeft : Side::kRight;
      j.reason = it->second.reason;
      j.judge_kind = it->second.judge_kind;
      j.cached = true;
      return j;
    }
  }

  // Miss: delegate outside the lock. A failed inner call stores nothing
  // and counts nothing.
  Judgment j = inner_.compare(pq);
  j.cached = false;

  {
    std::lock_guard<std::mutex> lock(mu_);
    ++stats_.issued_comparisons;
    ++stats_.unique_calls;
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      lru_.push_front(key);
      Entry e;
      e.winner_is_first = (j.winner == Side::kLeft) != flipped;
      e.reason = j.reason;
      e.judge_kind = j.judge_kind;
      e.lru_pos = lru_.begin();
      entries_.emplace(key, std::move(e));
      if (capacity_ > 0 && entries_.size() > capacity_) {
        entries_.erase(lru_.back());
        lru_.pop_back();
      }
    }
    // else: another thread stored this key first; keep its entry.
  }
  return j;
}

std::string CachedJudge::summarize_reasons(const std::vector<std::string>& reasons) {
  return inner_.summarize_reasons(reasons);
}

JudgeStats CachedJudge::stats() const {
  std::lock_guard<std::mutex> lock(mu_);
  return stats_;
}

std::size_t CachedJudge::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

void CachedJudge::clear() {
  std::lock_guard<std::mutex> lock(mu_);
  entries_.clear();
  lru_.clear();
  stats_ = JudgeStats{};
}

}  // namespace pairrank
