#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "chainrank/corpus.hpp"
#include "chainrank/neighbors.hpp"
#include "chainrank/tfidf.hpp"

namespace chainrank {

// candidate == nullopt is the STOP sample: the bare prefix scored as its
// own candidate.
struct ScorerInput {
    const Query* query = nullptr;
    std::vector<std::uint32_t> prefix;  // fact positions, selection order
    std::optional<std::uint32_t> candidate;

    bool is_stop() const { return !candidate.has_value(); }
};

// "[START] {question} (answer) {answer}. (explanation) {prefix facts}
//  [SEP] {candidate} [SEP]"; the candidate segment is empty for STOP.
std::string encode(const Corpus& corpus, const ScorerInput& input);

class Scorer {
public:
    virtual ~Scorer() = default;

    double score(const ScorerInput& input) const {
        passes_.fetch_add(1, std::memory_order_relaxed);
        return do_score(input);
    }
    virtual std::vector<double> score_batch(std::span<const ScorerInput> inputs) const;

    std::uint64_t forward_passes() const { return passes_.load(std::memory_order_relaxed); }
    void reset_forward_passes() const { passes_.store(0, std::memory_order_relaxed); }

protected:
    Scorer() = default;
    // the pass counter stays with the original instance
    Scorer(const Scorer&) noexcept {}
    Scorer& operator=(const Scorer&) noexcept { return *this; }

    virtual double do_score(const ScorerInput& input) const = 0;
    mutable std::atomic<std::uint64_t> passes_{0};
};

inline constexpr std::size_t kNumFeatures = 8;
extern const std::array<const char*, kNumFeatures> kFeatureNames;

// Precomputed per-corpus state the feature extractor needs; immutable and
// shared between scorer, trainer and ranking assembly.
struct FeatureContext {
    const Corpus* corpus = nullptr;
    TfidfModel model;
    std::vector<SparseVector> fact_vectors;
    std::vector<std::unordered_set<std::string>> fact_token_sets;
    std::unordered_map<std::string, SparseVector> query_vectors;
    // Per query: unique terms with their idf, and total idf mass.
    struct QueryTerms {
        std::vector<std::pair<std::string, double>> terms;
        double total_idf = 0.0;
    };
    std::unordered_map<std::string, QueryTerms> query_terms;

    static FeatureContext build(const Corpus& corpus);
    static FeatureContext build(const Corpus& corpus, TfidfModel model);
};

// f1 cos(cand, q); f2/f3 max/mean cos(cand, prefix); f4 token overlap with
// q over candidate length; f5 idf mass of q-terms newly covered by cand;
// f6 candidate length / 30 capped; f7 STOP flag; f8 idf mass of q-terms
// already covered by the prefix. All in [0, 1]; f1-f6 are zero for STOP.
std::array<double, kNumFeatures> extract_features(const FeatureContext& ctx,
                                                  const ScorerInput& input);

class LinearScorer : public Scorer {
public:
    explicit LinearScorer(std::shared_ptr<const FeatureContext> ctx);

    // theta followed by bias.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> params);
    static constexpr std::size_t parameter_count() { return kNumFeatures + 1; }

    const FeatureContext& context() const { return *ctx_; }

    void save(const std::string& path) const;
    static LinearScorer load(const std::string& path, std::shared_ptr<const FeatureContext> ctx);

protected:
    double do_score(const ScorerInput& input) const override;

private:
    std::shared_ptr<const FeatureContext> ctx_;
    std::array<double, kNumFeatures> theta_{};
    double bias_ = 0.0;
};

// Test scorer that isolates the inference loop from learning: +1 for an
// unselected gold candidate, 0 for non-gold, +2 for STOP when no visible
// gold remains, -1 for STOP otherwise.
class OracleScorer : public Scorer {
public:
    OracleScorer(const Corpus& corpus, const NeighborhoodIndex& index, int k);

protected:
    double do_score(const ScorerInput& input) const override;

private:
    const Corpus* corpus_;
    const NeighborhoodIndex* index_;
    int k_;
};

}  // namespace chainrank
