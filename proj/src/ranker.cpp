#include "pairrank/ranker.hpp"

#include <algorithm>
#include <future>
#include <optional>
#include <set>
#include <stdexcept>

#include "pairrank/llm.hpp"

namespace pairrank {

namespace {

PairQuery make_pair_query(const std::string& query_id,
                          const std::string& query_text,
                          const CandidateRef& left, const CandidateRef& right) {
  PairQuery pq;
  pq.query_id = query_id;
  pq.query_text = query_text;
  pq.left = left;
  pq.right = right;
  return pq;
}

ComparisonRecord make_record(int pass, int position, const CandidateRef& left,
                             const CandidateRef& right, const Judgment& j) {
  ComparisonRecord rec;
  rec.pass = pass;
  rec.position = position;
  rec.left_id = left.video_id;
  rec.right_id = right.video_id;
  rec.winner_id = j.winner == Side::kLeft ? left.video_id : right.video_id;
  rec.reason = j.reason;
  rec.cached = j.cached;
  return rec;
}

// One sequential left-to-right sweep. Returns the number of swaps.
int sequential_pass(int pass, const std::string& query_id,
                    const std::string& query_text,
                    std::vector<CandidateRef>& order, Judge& judge,
                    ComparisonLog& log) {
  int swaps = 0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const auto pq = make_pair_query(query_id, query_text, order[i], order[i + 1]);
    const Judgment j = judge.compare(pq);
    log.push_back(make_record(pass, static_cast<int>(i) + 1, order[i],
                              order[i + 1], j));
    if (j.winner == Side::kRight) {
      std::swap(order[i], order[i + 1]);
      ++swaps;
    }
  }
  return swaps;
}

// Judges the disjoint pairs starting at `positions` (0-based left index)
// concurrently in bounded batches, then applies swaps and appends log
// entries in ascending position order.
int phased_pass(int pass, const std::string& query_id,
                const std::string& query_text,
                std::vector<CandidateRef>& order, Judge& judge,
                const std::vector<std::size_t>& positions, int max_in_flight,
                ComparisonLog& log) {
  std::vector<std::optional<Judgment>> results(positions.size());
  std::exception_ptr failure;

  const std::size_t batch =
      max_in_flight > 0 ? static_cast<std::size_t>(max_in_flight) : 1;
  for (std::size_t start = 0; start < positions.size() && !failure;
       start += batch) {
    const std::size_t end = std::min(positions.size(), start + batch);
    std::vector<std::future<Judgment>> futures;
    futures.reserve(end - start);
    for (std::size_t k = start; k < end; ++k) {
      const std::size_t i = positions[k];
      futures.push_back(std::async(std::launch::async, [&, i] {
        return judge.compare(
            make_pair_query(query_id, query_text, order[i], order[i + 1]));
      }));
    }
    for (std::size_t k = start; k < end; ++k) {
      try {
        results[k] = futures[k - start].get();
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
  }

  // Log completed judgments in position order, then apply swaps; pairs
  // within a phase are disjoint so application order is immaterial.
  int swaps = 0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (!results[k]) continue;
    const std::size_t i = positions[k];
    log.push_back(make_record(pass, static_cast<int>(i) + 1, order[i],
                              order[i + 1], *results[k]));
  }
  if (failure) std::rethrow_exception(failure);
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const std::size_t i = positions[k];
    if (results[k]->winner == Side::kRight) {
      std::swap(order[i], order[i + 1]);
      ++swaps;
    }
  }
  return swaps;
}

int odd_even_pass(int pass, const std::string& query_id,
                  const std::string& query_text,
                  std::vector<CandidateRef>& order, Judge& judge,
                  int max_in_flight, ComparisonLog& log) {
  std::vector<std::size_t> odd_positions;   // pairs (1,2), (3,4), ...
  std::vector<std::size_t> even_positions;  // pairs (2,3), (4,5), ...
  for (std::size_t i = 0; i + 1 < order.size(); i += 2) odd_positions.push_back(i);
  for (std::size_t i = 1; i + 1 < order.size(); i += 2) even_positions.push_back(i);

  int swaps = phased_pass(pass, query_id, query_text, order, judge,
                          odd_positions, max_in_flight, log);
  swaps += phased_pass(pass, query_id, query_text, order, judge,
                       even_positions, max_in_flight, log);
  return swaps;
}

}  // namespace

SweepResult sweep_rerank(const std::string& query_id,
                         const std::string& query_text,
                         const std::vector<CandidateRef>& pool, Judge& judge,
                         const SweepConfig& cfg) {
  if (pool.size() < 2) {
    throw std::invalid_argument("sweep_rerank: pool needs at least 2 candidates");
  }
  if (cfg.max_passes < 1) {
    throw std::invalid_argument("sweep_rerank: max_passes must be >= 1");
  }
  {
    std::set<std::string> ids;
    for (const auto& c : pool) ids.insert(c.video_id);
    if (ids.size() != pool.size()) {
      throw std::invalid_argument("sweep_rerank: duplicate candidate ids in pool");
    }
  }

  SweepResult result;
  std::vector<CandidateRef> order = pool;

  for (int pass = 1; pass <= cfg.max_passes; ++pass) {
    int swaps = 0;
    try {
      swaps = cfg.mode == SweepMode::kSequential
                  ? sequential_pass(pass, query_id, query_text, order, judge,
                                    result.log)
                  : odd_even_pass(pass, query_id, query_text, order, judge,
                                  cfg.max_in_flight, result.log);
    } catch (const JudgeError& e) {
      for (const auto& c : order) result.window_order.push_back(c.video_id);
      result.passes_run = pass;
      throw SweepAbortedError(e, std::move(result));
    }
    result.passes_run = pass;
    result.swaps_last_pass = swaps;
    if (cfg.early_stop && swaps == 0) break;
  }

  result.window_order.reserve(order.size());
  for (const auto& c : order) result.window_order.push_back(c.video_id);
  return result;
}

std::vector<std::string> single_shot_rank(const std::string& query_text,
                                          const std::vector<CandidateRef>& pool,
                                          LlmClient& client) {
  const std::string reply = client.chat(build_listwise_prompt(query_text, pool));
  std::vector<std::string> ids;
  ids.reserve(pool.size());
  for (const auto& c : pool) ids.push_back(c.video_id);
  return parse_listwise_response(reply, ids);
}

}  // namespace pairrank
