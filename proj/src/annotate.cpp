#include "pairrank/annotate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pairrank/rng.hpp"
#include "pairrank/types.hpp"

namespace pairrank {

namespace {

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ' ';
    out += words[i];
  }
  return out;
}

bool is_article(const std::string& w) {
  return w == "a" || w == "an" || w == "the";
}

}  // namespace

std::vector<int> filter_near_duplicates(const std::vector<FrameFeature>& features,
                                        double threshold) {
  if (threshold <= 0.0 || threshold > 1.0) {
    throw std::invalid_argument("filter_near_duplicates: threshold must be in (0, 1]");
  }
  std::vector<int> retained;
  if (features.empty()) return retained;

  const Eigen::Index dim = features.front().vector.size();
  retained.push_back(0);
  for (std::size_t i = 1; i < features.size(); ++i) {
    if (features[i].vector.size() != dim) {
      throw std::invalid_argument("filter_near_duplicates: dimension mismatch at frame " +
                                  std::to_string(i));
    }
    double max_sim = -1.0;
    for (int r : retained) {
      // Features arrive L2-normalized, so the dot product is the cosine.
      max_sim = std::max(max_sim, features[i].vector.dot(features[r].vector));
    }
    if (max_sim < threshold) retained.push_back(static_cast<int>(i));
  }
  return retained;
}

std::string normalize_tag(std::string_view raw) {
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (char c : raw) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::ispunct(uc)) continue;  // deletion, not replacement: "ice-cream" -> "icecream"
    cleaned += static_cast<char>(std::tolower(uc));
  }
  auto words = split_words(cleaned);
  std::size_t first = 0;
  while (first < words.size() && is_article(words[first])) ++first;
  words.erase(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(first));
  return join_words(words);
}

std::vector<std::string> dedup_tags(const std::vector<std::string>& tags) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& tag : tags) {
    std::string norm = normalize_tag(tag);
    if (norm.empty()) continue;
    if (seen.insert(norm).second) out.push_back(std::move(norm));
  }
  return out;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const std::unordered_set<std::string>& stoplist) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (stoplist.count(t) == 0) out.push_back(t);
  }
  return out;
}

std::vector<std::string> pos_filter(const std::vector<std::string>& tags,
                                    const PosLexicon& lexicon, PosKind kind) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (const auto& tag : tags) {
    const auto words = split_words(tag);
    if (words.empty()) continue;
    const std::string& head = kind == PosKind::kNoun ? words.back() : words.front();
    auto it = lexicon.find(head);
    if (it == lexicon.end()) {
      out.push_back(tag);  // unknown words pass through
      continue;
    }
    const bool keep = kind == PosKind::kNoun ? it->second.noun : it->second.verb;
    if (keep) out.push_back(tag);
  }
  return out;
}

StructuredAnnotation perturb_tags(const StructuredAnnotation& ann, double fraction,
                                  std::uint64_t seed,
                                  const std::vector<std::string>& decoys) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw std::invalid_argument("perturb_tags: fraction must be in [0, 1]");
  }
  if (fraction > 0.0 && decoys.empty()) {
    throw std::invalid_argument("perturb_tags: decoy pool is empty");
  }

  StructuredAnnotation out = ann;
  std::vector<std::string*> slots;
  for (auto& t : out.objects) slots.push_back(&t);
  for (auto& t : out.actions) slots.push_back(&t);
  for (auto& t : out.scenes) slots.push_back(&t);

  const auto total = slots.size();
  const auto n_replace = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(total)));
  if (n_replace == 0) return out;

  std::mt19937_64 gen(derive_stream(seed, {ann.video_id, "perturb"}));
  std::vector<std::size_t> indices(total);
  for (std::size_t i = 0; i < total; ++i) indices[i] = i;
  shuffle_deterministic(indices, gen);
  for (std::size_t k = 0; k < n_replace; ++k) {
    *slots[indices[k]] = decoys[uniform_index(gen, decoys.size())];
  }
  return out;
}

std::string render_annotation_block(const StructuredAnnotation& ann) {
  auto section = [](const std::vector<std::string>& tags) {
    if (tags.empty()) return std::string("(none)");
    std::string out;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      if (i > 0) out += ", ";
      out += tags[i];
    }
    return out;
  };
  return "Objects: " + section(ann.objects) + "\nActions: " + section(ann.actions) +
         "\nScenes: " + section(ann.scenes) + "\nSummary: " + ann.summary;
}

StructuredAnnotation normalize_annotation(const StructuredAnnotation& raw,
                                          const std::unordered_set<std::string>& stoplist,
                                          const PosLexicon& lexicon) {
  auto clean_list = [&](const std::vector<std::string>& tags, PosKind kind) {
    std::vector<std::string> cleaned;
    cleaned.reserve(tags.size());
    for (const auto& tag : tags) {
      auto words = split_words(normalize_tag(tag));
      words = remove_stopwords(words, stoplist);
      if (words.empty()) continue;
      cleaned.push_back(join_words(words));
    }
    return dedup_tags(pos_filter(cleaned, lexicon, kind));
  };
  StructuredAnnotation out;
  out.video_id = raw.video_id;
  out.objects = clean_list(raw.objects, PosKind::kNoun);
  out.actions = clean_list(raw.actions, PosKind::kVerb);
  out.scenes = clean_list(raw.scenes, PosKind::kNoun);
  out.summary = raw.summary;
  return out;
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& file) {
  std::unordered_set<std::string> out;
  for (const auto& w : load_word_list(file)) out.insert(w);
  return out;
}

PosLexicon load_pos_lexicon(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open lexicon file: " + file.string());
  PosLexicon lex;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string word, tags;
    if (!(ss >> word)) continue;  // blank line
    if (word[0] == '#') continue;
    if (!(ss >> tags)) {
      throw ValidationError("lexicon line " + std::to_string(line_no) +
                            ": missing part-of-speech tags");
    }
    PosEntry e;
    for (char c : tags) {
      if (c == 'N' || c == 'n') e.noun = true;
      else if (c == 'V' || c == 'v') e.verb = true;
      else throw ValidationError("lexicon line " + std::to_string(line_no) +
                                 ": unknown tag '" + std::string(1, c) + "'");
    }
    lex[word] = e;
  }
  return lex;
}

std::vector<std::string> load_word_list(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open word list: " + file.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

}  // namespace pairrank
