#include "chainrank/inference.hpp"

#include <algorithm>
#include <stdexcept>

namespace chainrank {

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::StopSample: return "stop_sample";
        case StopReason::MaxLength: return "max_length";
        case StopReason::Exhausted: return "exhausted";
    }
    return "max_length";
}

void InferConfig::validate() const {
    if (k < 1) throw std::runtime_error("infer: k must be positive");
    if (max_iterations < 1) throw std::runtime_error("infer: L must be >= 1");
    if (min_iterations < 0 || min_iterations > max_iterations)
        throw std::runtime_error("infer: need 0 <= L_min <= L");
}

RankingResult infer(const Query& query, const Corpus& corpus, const NeighborhoodIndex& index,
                    const Scorer& scorer, const FeatureContext& ctx, const InferConfig& config) {
    config.validate();
    if (config.k > index.k_max) throw std::runtime_error("infer: k exceeds index k_max");

    RankingResult result;
    std::vector<std::uint32_t> selected;
    auto candidates = visible_set(index, corpus, query, selected, config.k);

    while (static_cast<int>(selected.size()) < config.max_iterations) {
        if (candidates.empty()) {
            result.stop_reason = StopReason::Exhausted;
            break;
        }
        std::vector<ScorerInput> inputs;
        inputs.reserve(candidates.size() + 1);
        inputs.push_back({&query, selected, std::nullopt});  // STOP
        for (auto c : candidates) inputs.push_back({&query, selected, c});
        auto scores = scorer.score_batch(inputs);
        result.forward_passes += inputs.size();

        for (std::size_t i = 0; i < candidates.size(); i++)
            result.last_scores[corpus.facts()[candidates[i]].uid] = scores[i + 1];

        std::size_t best = 0;  // among candidates
        for (std::size_t i = 1; i < candidates.size(); i++) {
            double s = scores[i + 1];
            if (s > scores[best + 1] ||
                (s == scores[best + 1] &&
                 corpus.facts()[candidates[i]].uid < corpus.facts()[candidates[best]].uid))
                best = i;
        }
        bool stop_allowed = static_cast<int>(selected.size()) >= config.min_iterations;
        if (stop_allowed && scores[0] > scores[best + 1]) {
            result.stop_reason = StopReason::StopSample;
            break;
        }
        selected.push_back(candidates[best]);
        result.stop_reason = StopReason::MaxLength;
        candidates = visible_set(index, corpus, query, selected, config.k);
    }

    for (auto f : selected) {
        result.selected.push_back(corpus.facts()[f].uid);
        result.last_scores.erase(corpus.facts()[f].uid);
    }
    assemble_ranking(corpus, ctx, query, result, config);
    return result;
}

void assemble_ranking(const Corpus& corpus, const FeatureContext& ctx, const Query& query,
                      RankingResult& result, const InferConfig& config) {
    result.ranking = result.selected;

    if (config.s2) {
        std::vector<std::pair<std::string, double>> scored(result.last_scores.begin(),
                                                           result.last_scores.end());
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (auto& [uid, s] : scored) result.ranking.push_back(uid);
    }

    if (config.r3) {
        std::unordered_set<std::string> placed(result.ranking.begin(), result.ranking.end());
        // p-hat: query plus selected facts as one concatenated document.
        std::vector<std::string> tokens = query.tokens;
        for (const auto& uid : result.selected) {
            const auto& ft = corpus.fact(uid).tokens;
            tokens.insert(tokens.end(), ft.begin(), ft.end());
        }
        SparseVector phat = ctx.model.vectorize(tokens);
        std::vector<std::pair<double, const std::string*>> rest;
        for (std::size_t i = 0; i < corpus.facts().size(); i++) {
            const auto& uid = corpus.facts()[i].uid;
            if (placed.count(uid)) continue;
            rest.emplace_back(cosine_distance(phat, ctx.fact_vectors[i]), &uid);
        }
        std::sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return *a.second < *b.second;
        });
        for (auto& [d, uid] : rest) result.ranking.push_back(*uid);
    }
}

namespace {

RankingResult rank_all_by_score(const Corpus& corpus, const std::vector<double>& scores) {
    std::vector<std::uint32_t> order(corpus.facts().size());
    for (std::uint32_t i = 0; i < order.size(); i++) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return corpus.facts()[a].uid < corpus.facts()[b].uid;
    });
    RankingResult result;
    result.ranking.reserve(order.size());
    for (auto i : order) {
        result.ranking.push_back(corpus.facts()[i].uid);
        result.last_scores[corpus.facts()[i].uid] = scores[i];
    }
    result.stop_reason = StopReason::Exhausted;
    return result;
}

}  // namespace

RankingResult infer_single_fact(const Query& query, const Corpus& corpus, const Scorer& scorer) {
    std::vector<ScorerInput> inputs;
    inputs.reserve(corpus.facts().size());
    for (std::uint32_t i = 0; i < corpus.facts().size(); i++)
        inputs.push_back({&query, {}, i});
    auto scores = scorer.score_batch(inputs);
    auto result = rank_all_by_score(corpus, scores);
    result.forward_passes = inputs.size();
    return result;
}

RankingResult infer_tfidf_baseline(const Query& query, const Corpus& corpus,
                                   const FeatureContext& ctx) {
    const SparseVector& qv = ctx.query_vectors.at(query.qid);
    std::vector<double> sims(corpus.facts().size());
    for (std::size_t i = 0; i < sims.size(); i++) sims[i] = dot(qv, ctx.fact_vectors[i]);
    return rank_all_by_score(corpus, sims);
}

}  // namespace chainrank
