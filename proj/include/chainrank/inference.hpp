#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "chainrank/corpus.hpp"
#include "chainrank/neighbors.hpp"
#include "chainrank/scorer.hpp"

namespace chainrank {

enum class StopReason { StopSample, MaxLength, Exhausted };

std::string to_string(StopReason r);

struct InferConfig {
    int k = 290;
    int max_iterations = 9;      // L
    int min_iterations = 3;      // L_min: stop condition ignored before this
    bool s2 = true;              // rank scored-unselected second
    bool r3 = true;              // rank never-scored rest by tf-idf distance
    void validate() const;
};

struct RankingResult {
    std::vector<std::string> ranking;  // full tier order, uids
    std::vector<std::string> selected;
    std::unordered_map<std::string, double> last_scores;  // scored-unselected
    std::uint64_t forward_passes = 0;
    StopReason stop_reason = StopReason::MaxLength;
};

// Iterative greedy selection with a STOP sample per iteration: stop when
// STOP scores strictly highest (after min_iterations selections), when the
// candidate pool is exhausted, or at max_iterations.
RankingResult infer(const Query& query, const Corpus& corpus, const NeighborhoodIndex& index,
                    const Scorer& scorer, const FeatureContext& ctx, const InferConfig& config);

// Tier assembly: selected first, then scored-unselected by descending last
// score, then (with r3) everything else by ascending tf-idf distance to the
// completed explanation. Ties break toward the lower uid.
void assemble_ranking(const Corpus& corpus, const FeatureContext& ctx, const Query& query,
                      RankingResult& result, const InferConfig& config);

// Scores every fact once with an empty prefix; exactly |facts| passes.
RankingResult infer_single_fact(const Query& query, const Corpus& corpus, const Scorer& scorer);

// Descending cosine similarity between fact and query tf-idf vectors.
RankingResult infer_tfidf_baseline(const Query& query, const Corpus& corpus,
                                   const FeatureContext& ctx);

}  // namespace chainrank
