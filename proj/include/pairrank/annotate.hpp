#ifndef PAIRRANK_ANNOTATE_HPP
#define PAIRRANK_ANNOTATE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

namespace pairrank {

struct FrameFeature {
  int frame_index = 0;
  Eigen::VectorXd vector;  // unit L2 norm
};

struct StructuredAnnotation {
  std::string video_id;
  std::vector<std::string> objects;
  std::vector<std::string> actions;
  std::vector<std::string> scenes;
  std::string summary;
};

// Sequential near-duplicate filtering: the first frame is always kept; a
// later frame is kept iff its maximum cosine similarity against all
// previously retained frames stays below the threshold.
std::vector<int> filter_near_duplicates(const std::vector<FrameFeature>& features,
                                        double threshold = 0.95);

// Lowercase, delete punctuation, collapse whitespace, drop leading
// articles (a/an/the). Idempotent; may return the empty string.
std::string normalize_tag(std::string_view raw);

// Normalizes, drops empties, keeps the first occurrence of each form.
std::vector<std::string> dedup_tags(const std::vector<std::string>& tags);

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const std::unordered_set<std::string>& stoplist);

enum class PosKind { kNoun, kVerb };

struct PosEntry {
  bool noun = false;
  bool verb = false;
};
using PosLexicon = std::unordered_map<std::string, PosEntry>;

// Keeps a tag iff its head word (last token for nouns, first for verbs)
// carries the requested part of speech; words missing from the lexicon
// are kept.
std::vector<std::string> pos_filter(const std::vector<std::string>& tags,
                                    const PosLexicon& lexicon, PosKind kind);

// Replaces ceil(fraction * total_tags) uniformly selected tags with
// decoys. Deterministic given the seed; section sizes are preserved.
StructuredAnnotation perturb_tags(const StructuredAnnotation& ann, double fraction,
                                  std::uint64_t seed,
                                  const std::vector<std::string>& decoys);

// "Objects: ...\nActions: ...\nScenes: ...\nSummary: ..." with tags
// comma-joined in input order; empty sections render as "(none)".
std::string render_annotation_block(const StructuredAnnotation& ann);

// The full post-processing chain over a raw annotation: per-tag
// normalization and stop-word removal, then noun filtering for objects
// and scenes, verb filtering for actions, then deduplication.
StructuredAnnotation normalize_annotation(const StructuredAnnotation& raw,
                                          const std::unordered_set<std::string>& stoplist,
                                          const PosLexicon& lexicon);

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& file);
PosLexicon load_pos_lexicon(const std::filesystem::path& file);
std::vector<std::string> load_word_list(const std::filesystem::path& file);

}  // namespace pairrank

#endif  // PAIRRANK_ANNOTATE_HPP
