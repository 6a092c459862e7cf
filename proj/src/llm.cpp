#include "pairrank/llm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace pairrank {

using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return std::string();
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool retryable_status(int status) {
  return status == 408 || status == 409 || status == 429 || status >= 500;
}

}  // namespace

LlmClient::LlmClient(LlmConfig cfg) : cfg_(std::move(cfg)) {}

void LlmClient::log_transcript(const std::string& request_body, int status,
                               const std::string& response_body) {
  if (cfg_.transcript_path.empty()) return;
  json rec;
  rec["endpoint"] = cfg_.base_url + cfg_.path;
  rec["status"] = status;
  rec["request"] = json::parse(request_body);
  rec["response"] = response_body;
  std::lock_guard<std::mutex> lock(transcript_mu_);
  std::ofstream out(cfg_.transcript_path, std::ios::app);
  out << rec.dump() << '\n';
}

std::string LlmClient::chat(const std::vector<ChatMessage>& messages) {
  json body;
  body["model"] = cfg_.model;
  body["messages"] = json::array();
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  body["temperature"] = cfg_.temperature;
  const std::string request_body = body.dump();

  httplib::Headers headers = {{"Content-Type", "application/json"}};
  if (!cfg_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + cfg_.api_key);
  }

  std::string last_body;
  std::string last_error = "no attempt made";
  auto backoff = cfg_.initial_backoff;

  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    // One client per request; httplib clients are not thread-safe.
    httplib::Client cli(cfg_.base_url);
    cli.set_connection_timeout(cfg_.timeout);
    cli.set_read_timeout(cfg_.timeout);
    requests_sent_.fetch_add(1);
    auto res = cli.Post(cfg_.path, headers, request_body, "application/json");

    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      log_transcript(request_body, -1, last_error);
      continue;
    }
    log_transcript(request_body, res->status, res->body);
    last_body = res->body;
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (retryable_status(res->status)) continue;
      throw JudgeError("llm request failed: " + last_error, last_body);
    }

    try {
      json response = json::parse(res->body);
      return response.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const json::exception& e) {
      throw JudgeError(std::string("malformed llm response: ") + e.what(),
                       res->body);
    }
  }
  throw JudgeError("llm request failed after " +
                       std::to_string(cfg_.max_retries + 1) +
                       " attempts: " + last_error,
                   last_body);
}

std::vector<ChatMessage> build_compare_prompt(const std::string& query_text,
                                              const std::string& left_annotation,
                                              const std::string& right_annotation) {
  if (query_text.empty() || left_annotation.empty() || right_annotation.empty()) {
    throw std::invalid_argument("build_compare_prompt: empty input");
  }
  std::vector<ChatMessage> messages;
  messages.push_back(
      {"system",
       "You are a careful judge for text-to-video retrieval. You will see a "
       "text query and two candidate videos, each described by structured "
       "annotations (objects, actions, scenes, summary). Decide which "
       "candidate matches the query better. Reason step by step, then end "
       "your reply with exactly two lines:\n"
       "WINNER: A or WINNER: B\n"
       "REASON: <one concise sentence>"});
  messages.push_back({"user", "Query: " + query_text +
                                  "\n\nCandidate A:\n" + left_annotation +
                                  "\n\nCandidate B:\n" + right_annotation});
  return messages;
}

std::vector<ChatMessage> build_summary_prompt(const std::vector<std::string>& reasons) {
  if (reasons.empty()) {
    throw std::invalid_argument("build_summary_prompt: empty reason list");
  }
  std::vector<ChatMessage> messages;
  messages.push_back(
      {"system",
       "You summarize the reasoning of a video retrieval judge. Given the "
       "individual reasons recorded during pairwise comparisons, write one "
       "short paragraph explaining why the final top result was chosen."});
  messages.push_back({"user", "Pairwise reasons:\n" +
                                  join_reasons_numbered(reasons) +
                                  "\n\nSummarize the overall rationale."});
  return messages;
}

std::vector<ChatMessage> build_listwise_prompt(const std::string& query_text,
                                               const std::vector<CandidateRef>& pool) {
  if (query_text.empty() || pool.empty()) {
    throw std::invalid_argument("build_listwise_prompt: empty input");
  }
  std::string blocks;
  for (const auto& c : pool) {
    blocks += "\n[" + c.video_id + "]\n" + c.annotation + "\n";
  }
  std::vector<ChatMessage> messages;
  messages.push_back(
      {"system",
       "You rank candidate videos for a text query. Each candidate is "
       "labeled by its id in square brackets and described by structured "
       "annotations. Reply with the candidate ids only, best match first, "
       "one per line."});
  messages.push_back({"user", "Query: " + query_text + "\n\nCandidates:\n" + blocks});
  return messages;
}

Judgment parse_compare_response(const std::string& text) {
  // Last line carrying "winner:" (any case) decides.
  bool found = false;
  Side winner = Side::kLeft;
  std::size_t line_start = 0;
  const std::string lower = to_lower(text);
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::size_t marker = lower.find("winner", line_start);
    if (marker != std::string::npos && marker < line_end) {
      std::size_t colon = text.find(':', marker);
      if (colon != std::string::npos && colon < line_end) {
        std::size_t p = colon + 1;
        while (p < line_end && !std::isalnum(static_cast<unsigned char>(text[p]))) ++p;
        std::size_t q = p;
        while (q < line_end && std::isalnum(static_cast<unsigned char>(text[q]))) ++q;
        std::string token = to_lower(text.substr(p, q - p));
        if (token == "a" || token == "left" || token == "1") {
          winner = Side::kLeft;
          found = true;
        } else if (token == "b" || token == "right" || token == "2") {
          winner = Side::kRight;
          found = true;
        }
      }
    }
    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }

  std::string reason;
  std::size_t rpos = lower.rfind("reason");
  if (rpos != std::string::npos) {
    std::size_t colon = text.find(':', rpos);
    if (colon != std::string::npos) reason = trim(text.substr(colon + 1));
  }

  if (!found) {
    // Fallback: the final sentence must mention exactly one uppercase
    // label A or B (uppercase so the article "a" never counts).
    const std::string trimmed = trim(text);
    std::size_t sent_start = trimmed.find_last_of(".!?\n", trimmed.empty()
                                                              ? std::string::npos
                                                              : trimmed.size() - 2);
    std::string sentence = sent_start == std::string::npos
                               ? trimmed
                               : trimmed.substr(sent_start + 1);
    int count_a = 0;
    int count_b = 0;
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      auto alnum = [&](std::size_t k) {
        return k < sentence.size() &&
               std::isalnum(static_cast<unsigned char>(sentence[k]));
      };
      if ((i == 0 || !alnum(i - 1)) && !alnum(i + 1)) {
        if (sentence[i] == 'A') ++count_a;
        if (sentence[i] == 'B') ++count_b;
      }
    }
    if (count_a + count_b != 1) {
      throw JudgeError("unparseable judge response: no WINNER line and no "
                       "unambiguous label in the final sentence",
                       text);
    }
    winner = count_a == 1 ? Side::kLeft : Side::kRight;
  }

  Judgment j;
  j.winner = winner;
  j.reason = reason;
  j.judge_kind = JudgeKind::kLlm;
  return j;
}

std::vector<std::string> parse_listwise_response(const std::string& text,
                                                 const std::vector<std::string>& pool_ids) {
  auto boundary = [&](std::size_t pos, std::size_t len) {
    auto alnum = [&](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    if (pos > 0 && alnum(text[pos - 1])) return false;
    if (pos + len < text.size() && alnum(text[pos + len])) return false;
    return true;
  };

  std::vector<std::pair<std::size_t, std::size_t>> mentions;  // (offset, pool idx)
  for (std::size_t i = 0; i < pool_ids.size(); ++i) {
    const std::string& id = pool_ids[i];
    std::size_t pos = text.find(id);
    while (pos != std::string::npos && !boundary(pos, id.size())) {
      pos = text.find(id, pos + 1);
    }
    if (pos != std::string::npos) mentions.emplace_back(pos, i);
  }
  if (mentions.empty()) {
    throw JudgeError("listwise response mentions no candidate id", text);
  }
  std::sort(mentions.begin(), mentions.end());

  std::vector<std::string> order;
  order.reserve(pool_ids.size());
  std::vector<bool> seen(pool_ids.size(), false);
  for (const auto& [pos, idx] : mentions) {
    order.push_back(pool_ids[idx]);
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < pool_ids.size(); ++i) {
    if (!seen[i]) order.push_back(pool_ids[i]);
  }
  return order;
}

Judgment LlmJudge::compare(const PairQuery& pq) {
  const auto messages = build_compare_prompt(pq.query_text, pq.left.annotation,
                                             pq.right.annotation);
  return parse_compare_response(client_.chat(messages));
}

std::string LlmJudge::summarize_reasons(const std::vector<std::string>& reasons) {
  const std::string summary = client_.chat(build_summary_prompt(reasons));
  if (summary.empty()) {
    throw JudgeError("llm summarizer returned an empty message");
  }
  return summary;
}

}  // namespace pairrank
