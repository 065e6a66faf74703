#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "chainrank/corpus.hpp"
#include "chainrank/neighbors.hpp"

namespace chainrank {

using RankingMap = std::unordered_map<std::string, std::vector<std::string>>;

// AP of the gold facts within a deduplicated ranking; gold facts absent
// from the ranking contribute zero.
double average_precision(const std::vector<std::string>& ranking,
                         const std::unordered_set<std::string>& gold);

// Unweighted mean of per-query AP over the split.
double map_score(const RankingMap& rankings, const Corpus& corpus, Split split);

// Removal procedure: gold facts failing keep are dropped from both the gold
// set and the ranking before AP; queries with no retained gold are skipped.
using GoldPredicate = std::function<bool(const Query&, const GoldEntry&)>;
double restricted_map(const RankingMap& rankings, const Corpus& corpus, Split split,
                      const GoldPredicate& keep, std::size_t* num_contributing = nullptr);

struct EvalRow {
    std::string slice_type;
    std::string slice_key;
    std::size_t num_queries = 0;
    double value = 0.0;
};

struct EvalReport {
    double overall_map = 0.0;
    std::vector<EvalRow> rows;
};

struct HopBucket {
    int lo, hi;  // inclusive; {kInfiniteHops, kInfiniteHops} is the inf bucket
    std::string label;
};
std::vector<HopBucket> default_hop_buckets();

// All slices: overall, role, difficulty, hop buckets under both metrics,
// MAP per explanation length G, and the G histogram.
EvalReport breakdown_report(const RankingMap& rankings, const Corpus& corpus, Split split,
                            const NeighborhoodIndex& index, int k,
                            const std::vector<HopBucket>& buckets = default_hop_buckets());

void write_report_csv(const EvalReport& report, const std::string& path);

// ranks.tsv: one "qid<TAB>fact uid" line per ranked fact, rank order.
void write_ranks_tsv(const RankingMap& rankings, const std::vector<std::string>& qid_order,
                     const std::string& path);
RankingMap read_ranks_tsv(const std::string& path);

}  // namespace chainrank
