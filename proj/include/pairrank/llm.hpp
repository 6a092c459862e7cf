#ifndef PAIRRANK_LLM_HPP
#define PAIRRANK_LLM_HPP

#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <vector>

#include "pairrank/judge.hpp"
#include "pairrank/types.hpp"

namespace pairrank {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct LlmConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string path = "/v1/chat/completions";
  std::string model = "default";
  std::string api_key;  // optional; sent as a bearer header when set
  double temperature = 0.0;
  int max_retries = 3;  // backoff 0.5s, 1s, 2s
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{60};
  std::string transcript_path;  // optional request/response audit log (jsonl)
};

// Minimal chat-completions client: POST {model, messages, temperature},
// read choices[0].message.content. Retries transport failures and 429/5xx
// with exponential backoff. Safe to share across threads.
class LlmClient {
 public:
  explicit LlmClient(LlmConfig cfg);

  // Returns the first choice's message content; throws JudgeError (with
  // the raw body when available) after retries are exhausted.
  std::string chat(const std::vector<ChatMessage>& messages);

  // Outbound request attempts, including retries.
  std::int64_t requests_sent() const { return requests_sent_.load(); }

  const LlmConfig& config() const { return cfg_; }

 private:
  void log_transcript(const std::string& request_body, int status,
                      const std::string& response_body);

  LlmConfig cfg_;
  std::string host_;
  std::atomic<std::int64_t> requests_sent_{0};
  std::mutex transcript_mu_;
};

// Prompt construction and response parsing. Builders are pure functions:
// identical inputs give byte-identical message sequences.
std::vector<ChatMessage> build_compare_prompt(const std::string& query_text,
                                              const std::string& left_annotation,
                                              const std::string& right_annotation);

std::vector<ChatMessage> build_summary_prompt(const std::vector<std::string>& reasons);

std::vector<ChatMessage> build_listwise_prompt(const std::string& query_text,
                                               const std::vector<CandidateRef>& pool);

// Parses a judge reply. Scans case-insensitively for the LAST line
// carrying "WINNER:" with value A/B/LEFT/RIGHT/1/2; the reason is the
// text after the last "REASON:" marker. If no WINNER line exists, falls
// back to the final sentence: it must mention exactly one of the
// uppercase labels A or B (uppercase so the article "a" never counts).
// Anything else throws JudgeError carrying the raw text.
Judgment parse_compare_response(const std::string& text);

// Orders pool ids by first mention in the reply. Ids never mentioned are
// appended in pool order; repeated mentions keep the first. A reply that
// mentions no id at all throws JudgeError with the raw text.
std::vector<std::string> parse_listwise_response(const std::string& text,
                                                 const std::vector<std::string>& pool_ids);

// Judge backed by a chat-completions endpoint.
class LlmJudge : public Judge {
 public:
  explicit LlmJudge(LlmClient& client) : client_(client) {}

  Judgment compare(const PairQuery& pq) override;
  // One single-shot summarization call.
  std::string summarize_reasons(const std::vector<std::string>& reasons) override;
  JudgeKind kind() const override { return JudgeKind::kLlm; }

 private:
  LlmClient& client_;
};

}  // namespace pairrank

#endif  // PAIRRANK_LLM_HPP
