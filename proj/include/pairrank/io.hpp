#ifndef PAIRRANK_IO_HPP
#define PAIRRANK_IO_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pairrank/annotate.hpp"
#include "pairrank/eval.hpp"

namespace pairrank {

// All corpus files are line-delimited JSON records; any malformed line is
// fatal and reported with its line number.

struct PooledCandidate {
  std::string video_id;
  double coarse_score = 0.0;
  bool has_score = false;
  int coarse_rank = 0;  // 1-based
};

// One query with its coarse top-K pool and the untouched tail ranking.
struct CandidatePool {
  std::string query_id;
  std::string query_text;
  std::vector<PooledCandidate> candidates;  // ascending coarse rank
  std::vector<std::string> tail;            // ids beyond K, coarse order
};

struct Corpus {
  std::vector<CandidatePool> pools;
  std::map<std::string, StructuredAnnotation> annotations;
  Qrels qrels;
};

// Loads and cross-validates the three corpus files. Rejects duplicate
// query ids, pooled candidates without annotations, queries without
// qrels, and relevant ids missing from a query's candidate list.
Corpus ingest(const std::filesystem::path& candidates_file,
              const std::filesystem::path& annotations_file,
              const std::filesystem::path& qrels_file, int pool_size);

// The candidates file alone: coarse rankings split into pool and tail.
std::vector<CandidatePool> load_candidates_file(const std::filesystem::path& file,
                                                int pool_size);

std::vector<StructuredAnnotation> load_annotations_file(const std::filesystem::path& file);
void write_annotations_file(const std::filesystem::path& file,
                            const std::vector<StructuredAnnotation>& annotations);

// {"video_id", "frame_index", "vector"} records, grouped by video in file
// order. Vectors must be unit length to 1e-6.
std::map<std::string, std::vector<FrameFeature>> load_frame_features(
    const std::filesystem::path& file);

// Generic id -> vector file ("id" or "video_id" key); used for the
// faithfulness-proxy embeddings. The norm is not constrained here.
std::map<std::string, Eigen::VectorXd> load_vector_file(const std::filesystem::path& file);

Qrels load_qrels_file(const std::filesystem::path& file);

}  // namespace pairrank

#endif  // PAIRRANK_IO_HPP
