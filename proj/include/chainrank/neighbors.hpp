#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "chainrank/corpus.hpp"
#include "chainrank/tfidf.hpp"

namespace chainrank {

enum class Metric { Tfidf, Lexical };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

// Documents indexed for idf are the facts plus training-split queries only;
// val/test queries are vectorized with this model (unseen terms drop out).
TfidfModel fit_corpus_tfidf(const Corpus& corpus);

std::vector<SparseVector> compute_fact_vectors(const Corpus& corpus, const TfidfModel& model);

// Exact k-nearest facts to every fact and every query, ascending by
// distance, ties by ascending uid; a fact is never its own neighbor.
class NeighborhoodIndex {
public:
    Metric metric = Metric::Tfidf;
    int k_max = 0;
    std::string fingerprint;

    // Neighbor lists hold fact positions in corpus order.
    std::vector<std::vector<std::uint32_t>> fact_lists;
    std::unordered_map<std::string, std::vector<std::uint32_t>> query_lists;

    std::span<const std::uint32_t> fact_neighbors(std::uint32_t fact_idx, int k) const;
    std::span<const std::uint32_t> query_neighbors(const std::string& qid, int k) const;
};

NeighborhoodIndex build_neighborhood_index(const Corpus& corpus, const TfidfModel& model,
                                           Metric metric, int k_max, bool parallel = true);

void save_index(const NeighborhoodIndex& index, const Corpus& corpus, const std::string& path);
NeighborhoodIndex load_index(const std::string& path, const Corpus& corpus);

// Plain serial scan over all facts; the reference the parallel build and
// the index lookups are tested against.
std::vector<std::uint32_t> nearest_k_bruteforce(const Corpus& corpus,
                                                const std::vector<SparseVector>& fact_vectors,
                                                const SparseVector& anchor_vector,
                                                const std::vector<std::string>& anchor_tokens,
                                                std::ptrdiff_t self_index, Metric metric, int k);

// Union of nearest_k over {query} and prefix facts, minus the prefix facts
// themselves; sorted by fact position.
std::vector<std::uint32_t> visible_set(const NeighborhoodIndex& index, const Corpus& corpus,
                                       const Query& query,
                                       std::span<const std::uint32_t> prefix_facts, int k);

constexpr int kInfiniteHops = std::numeric_limits<int>::max();

enum class HopMetric { Neighborhood, LexicalOverlap };

// BFS depth (starting at the query, expanding only through gold facts) at
// which each gold fact is first reached; kInfiniteHops when unreachable.
std::unordered_map<std::string, int> hop_distances(const Corpus& corpus,
                                                   const NeighborhoodIndex* index, int k,
                                                   const Query& query, HopMetric metric);

// Mean over training queries of (reached gold / G), unlimited hop depth.
double reachable_gold_fraction(const Corpus& corpus, const NeighborhoodIndex& index, int k);

}  // namespace chainrank
