#include "pairrank/io.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "pairrank/types.hpp"

namespace pairrank {

using json = nlohmann::ordered_json;

namespace {

// Applies fn to every non-blank line; rethrows parse problems as
// ValidationError tagged file:line.
template <typename Fn>
void for_each_record(const std::filesystem::path& file, Fn fn) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open file: " + file.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
      fn(rec, line_no);
    } catch (const json::exception& e) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                            ": " + e.what());
    }
  }
}

std::vector<std::string> string_list(const json& j) {
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace

std::vector<StructuredAnnotation> load_annotations_file(const std::filesystem::path& file) {
  std::vector<StructuredAnnotation> out;
  std::set<std::string> seen;
  for_each_record(file, [&](const json& rec, int line_no) {
    StructuredAnnotation ann;
    ann.video_id = rec.at("video_id").get<std::string>();
    ann.objects = string_list(rec.at("objects"));
    ann.actions = string_list(rec.at("actions"));
    ann.scenes = string_list(rec.at("scenes"));
    ann.summary = rec.at("summary").get<std::string>();
    if (ann.summary.empty()) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                            ": empty summary for video " + ann.video_id);
    }
    if (!seen.insert(ann.video_id).second) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                            ": duplicate annotation for video " + ann.video_id);
    }
    out.push_back(std::move(ann));
  });
  return out;
}

void write_annotations_file(const std::filesystem::path& file,
                            const std::vector<StructuredAnnotation>& annotations) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write file: " + file.string());
  for (const auto& ann : annotations) {
    json rec;
    rec["video_id"] = ann.video_id;
    rec["objects"] = ann.objects;
    rec["actions"] = ann.actions;
    rec["scenes"] = ann.scenes;
    rec["summary"] = ann.summary;
    out << rec.dump() << '\n';
  }
}

std::map<std::string, std::vector<FrameFeature>> load_frame_features(
    const std::filesystem::path& file) {
  std::map<std::string, std::vector<FrameFeature>> out;
  for_each_record(file, [&](const json& rec, int line_no) {
    FrameFeature f;
    f.frame_index = rec.at("frame_index").get<int>();
    const auto& vec = rec.at("vector");
    f.vector.resize(static_cast<Eigen::Index>(vec.size()));
    Eigen::Index i = 0;
    for (const auto& v : vec) f.vector(i++) = v.get<double>();
    if (std::abs(f.vector.norm() - 1.0) >= 1e-6) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                            ": frame feature is not unit-normalized");
    }
    out[rec.at("video_id").get<std::string>()].push_back(std::move(f));
  });
  return out;
}

std::map<std::string, Eigen::VectorXd> load_vector_file(const std::filesystem::path& file) {
  std::map<std::string, Eigen::VectorXd> out;
  for_each_record(file, [&](const json& rec, int line_no) {
    const std::string id = rec.contains("id") ? rec.at("id").get<std::string>()
                                              : rec.at("video_id").get<std::string>();
    const auto& vec = rec.at("vector");
    Eigen::VectorXd v(static_cast<Eigen::Index>(vec.size()));
    Eigen::Index i = 0;
    for (const auto& x : vec) v(i++) = x.get<double>();
    if (!out.emplace(id, std::move(v)).second) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                            ": duplicate vector for id " + id);
    }
  });
  return out;
}

Qrels load_qrels_file(const std::filesystem::path& file) {
  Qrels qrels;
  for_each_record(file, [&](const json& rec, int line_no) {
    const std::string qid = rec.at("query_id").get<std::string>();
    std::set<std::string> relevant;
    for (const auto& v : rec.at("relevant")) relevant.insert(v.get<std::string>());
    if (relevant.empty()) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                            ": empty relevant set for query " + qid);
    }
    if (!qrels.emplace(qid, std::move(relevant)).second) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                            ": duplicate qrels for query " + qid);
    }
  });
  return qrels;
}

std::vector<CandidatePool> load_candidates_file(const std::filesystem::path& file,
                                                int pool_size) {
  if (pool_size < 2) {
    throw ValidationError("pool size must be at least 2");
  }
  std::vector<CandidatePool> pools;
  std::set<std::string> seen_queries;
  for_each_record(file, [&](const json& rec, int line_no) {
    CandidatePool pool;
    pool.query_id = rec.at("query_id").get<std::string>();
    pool.query_text = rec.at("query_text").get<std::string>();
    if (!seen_queries.insert(pool.query_id).second) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                            ": duplicate query id " + pool.query_id);
    }

    const auto& list = rec.at("candidates");
    int rank = 0;
    double prev_score = 0.0;
    bool prev_has_score = false;
    std::set<std::string> seen_videos;
    for (const auto& c : list) {
      const std::string video_id = c.at("video_id").get<std::string>();
      if (!seen_videos.insert(video_id).second) {
        throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                              ": duplicate candidate " + video_id + " for query " +
                              pool.query_id);
      }
      if (rank < pool_size) {
        PooledCandidate pc;
        pc.video_id = video_id;
        pc.coarse_rank = ++rank;
        if (c.contains("score") && !c.at("score").is_null()) {
          pc.coarse_score = c.at("score").get<double>();
          pc.has_score = true;
          if (prev_has_score && pc.coarse_score > prev_score) {
            throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                                  ": coarse scores increase with rank at video " +
                                  pc.video_id);
          }
          prev_score = pc.coarse_score;
          prev_has_score = true;
        }
        pool.candidates.push_back(std::move(pc));
      } else {
        ++rank;
        pool.tail.push_back(video_id);
      }
    }
    if (pool.candidates.size() < 2) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                            ": query " + pool.query_id +
                            " needs at least 2 candidates");
    }
    pools.push_back(std::move(pool));
  });
  return pools;
}

Corpus ingest(const std::filesystem::path& candidates_file,
              const std::filesystem::path& annotations_file,
              const std::filesystem::path& qrels_file, int pool_size) {
  Corpus corpus;
  for (auto& ann : load_annotations_file(annotations_file)) {
    corpus.annotations.emplace(ann.video_id, std::move(ann));
  }
  corpus.qrels = load_qrels_file(qrels_file);
  corpus.pools = load_candidates_file(candidates_file, pool_size);

  for (const auto& pool : corpus.pools) {
    for (const auto& c : pool.candidates) {
      if (corpus.annotations.count(c.video_id) == 0) {
        throw ValidationError("missing annotation for pooled candidate " +
                              c.video_id + " (query " + pool.query_id + ")");
      }
    }
    auto qit = corpus.qrels.find(pool.query_id);
    if (qit == corpus.qrels.end()) {
      throw ValidationError("missing qrels for query " + pool.query_id);
    }
    // Metrics need the truth somewhere in the coarse ranking.
    bool truth_present = false;
    for (const auto& c : pool.candidates) {
      if (qit->second.count(c.video_id) > 0) truth_present = true;
    }
    for (const auto& id : pool.tail) {
      if (qit->second.count(id) > 0) truth_present = true;
    }
    if (!truth_present) {
      throw ValidationError("no relevant video appears in the candidate list "
                            "for query " + pool.query_id);
    }
  }
  return corpus;
}

}  // namespace pairrank
