#include "chainrank/scorer.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

using nlohmann::json;

namespace chainrank {

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "cos_query",      "cos_prefix_max", "cos_prefix_mean", "overlap_query",
    "marginal_cover", "length",         "stop",            "cover_so_far",
};

std::string encode(const Corpus& corpus, const ScorerInput& input) {
    const Query& q = *input.query;
    std::string out = "[START] " + q.question_text + " (answer) " + q.answer_text;
    if (q.answer_text.empty() || q.answer_text.back() != '.') out += '.';
    out += " (explanation)";
    for (auto f : input.prefix) {
        const std::string& text = corpus.facts()[f].text;
        out += ' ';
        out += text;
        if (text.empty() || text.back() != '.') out += '.';
    }
    out += " [SEP] ";
    if (!input.is_stop()) out += corpus.facts()[*input.candidate].text;
    out += " [SEP]";
    return out;
}

std::vector<double> Scorer::score_batch(std::span<const ScorerInput> inputs) const {
    std::vector<double> scores;
    scores.reserve(inputs.size());
    for (const auto& in : inputs) scores.push_back(score(in));
    return scores;
}

FeatureContext FeatureContext::build(const Corpus& corpus) {
    return build(corpus, fit_corpus_tfidf(corpus));
}

FeatureContext FeatureContext::build(const Corpus& corpus, TfidfModel model) {
    FeatureContext ctx;
    ctx.corpus = &corpus;
    ctx.model = std::move(model);
    ctx.fact_vectors = compute_fact_vectors(corpus, ctx.model);
    ctx.fact_token_sets.reserve(corpus.facts().size());
    for (const auto& f : corpus.facts())
        ctx.fact_token_sets.emplace_back(f.tokens.begin(), f.tokens.end());
    for (const auto& q : corpus.queries()) {
        ctx.query_vectors.emplace(q.qid, ctx.model.vectorize(q.tokens));
        QueryTerms qt;
        std::unordered_set<std::string> seen;
        for (const auto& t : q.tokens) {
            if (!seen.insert(t).second) continue;
            double idf = ctx.model.idf(t);
            qt.terms.emplace_back(t, idf);
            qt.total_idf += idf;
        }
        ctx.query_terms.emplace(q.qid, std::move(qt));
    }
    return ctx;
}

std::array<double, kNumFeatures> extract_features(const FeatureContext& ctx,
                                                  const ScorerInput& input) {
    std::array<double, kNumFeatures> f{};
    const Query& q = *input.query;
    const auto& qterms = ctx.query_terms.at(q.qid);

    // f8: idf mass of query terms covered by any prefix fact.
    double covered = 0.0;
    if (!input.prefix.empty() && qterms.total_idf > 0.0) {
        for (const auto& [term, idf] : qterms.terms) {
            for (auto p : input.prefix) {
                if (ctx.fact_token_sets[p].count(term)) {
                    covered += idf;
                    break;
                }
            }
        }
        f[7] = covered / qterms.total_idf;
    }

    if (input.is_stop()) {
        f[6] = 1.0;
        return f;
    }

    std::uint32_t cand = *input.candidate;
    const SparseVector& cand_vec = ctx.fact_vectors[cand];
    const auto& cand_tokens = ctx.fact_token_sets[cand];

    f[0] = std::clamp(dot(cand_vec, ctx.query_vectors.at(q.qid)), 0.0, 1.0);

    if (!input.prefix.empty()) {
        double mx = 0.0, sum = 0.0;
        for (auto p : input.prefix) {
            double s = std::clamp(dot(cand_vec, ctx.fact_vectors[p]), 0.0, 1.0);
            mx = std::max(mx, s);
            sum += s;
        }
        f[1] = mx;
        f[2] = sum / static_cast<double>(input.prefix.size());
    }

    if (!cand_tokens.empty()) {
        std::size_t shared = 0;
        for (const auto& [term, idf] : qterms.terms)
            if (cand_tokens.count(term)) shared++;
        f[3] = static_cast<double>(shared) / static_cast<double>(cand_tokens.size());
    }

    if (qterms.total_idf > 0.0) {
        double marginal = 0.0;
        for (const auto& [term, idf] : qterms.terms) {
            if (!cand_tokens.count(term)) continue;
            bool in_prefix = false;
            for (auto p : input.prefix)
                if (ctx.fact_token_sets[p].count(term)) {
                    in_prefix = true;
                    break;
                }
            if (!in_prefix) marginal += idf;
        }
        f[4] = marginal / qterms.total_idf;
    }

    f[5] = std::min(1.0, static_cast<double>(ctx.corpus->facts()[cand].tokens.size()) / 30.0);
    return f;
}

LinearScorer::LinearScorer(std::shared_ptr<const FeatureContext> ctx) : ctx_(std::move(ctx)) {
    if (!ctx_) throw std::runtime_error("LinearScorer needs a feature context");
}

std::vector<double> LinearScorer::parameters() const {
    std::vector<double> p(theta_.begin(), theta_.end());
    p.push_back(bias_);
    return p;
}

void LinearScorer::set_parameters(std::span<const double> params) {
    if (params.size() != parameter_count())
        throw std::runtime_error("expected " + std::to_string(parameter_count()) +
                                 " parameters");
    std::copy(params.begin(), params.end() - 1, theta_.begin());
    bias_ = params.back();
}

double LinearScorer::do_score(const ScorerInput& input) const {
    auto f = extract_features(*ctx_, input);
    double s = bias_;
    for (std::size_t i = 0; i < kNumFeatures; i++) s += theta_[i] * f[i];
    return s;
}

void LinearScorer::save(const std::string& path) const {
    json j;
    j["version"] = 1;
    j["fingerprint"] = ctx_->corpus->fingerprint();
    json names = json::array();
    for (auto n : kFeatureNames) names.push_back(n);
    j["features"] = std::move(names);
    j["theta"] = std::vector<double>(theta_.begin(), theta_.end());
    j["bias"] = bias_;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump(2) << '\n';
}

LinearScorer LinearScorer::load(const std::string& path,
                                std::shared_ptr<const FeatureContext> ctx) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j = json::parse(in);
    if (j.contains("fingerprint") &&
        j["fingerprint"].get<std::string>() != ctx->corpus->fingerprint())
        throw std::runtime_error("model fingerprint does not match corpus: " + path);
    auto theta = j.at("theta").get<std::vector<double>>();
    if (theta.size() != kNumFeatures)
        throw std::runtime_error("model has wrong feature count: " + path);
    LinearScorer scorer(std::move(ctx));
    theta.push_back(j.at("bias").get<double>());
    scorer.set_parameters(theta);
    return scorer;
}

OracleScorer::OracleScorer(const Corpus& corpus, const NeighborhoodIndex& index, int k)
    : corpus_(&corpus), index_(&index), k_(k) {}

double OracleScorer::do_score(const ScorerInput& input) const {
    const Query& q = *input.query;
    std::unordered_set<std::uint32_t> gold;
    for (const auto& g : q.gold)
        gold.insert(static_cast<std::uint32_t>(corpus_->fact_index(g.uid)));

    if (!input.is_stop()) {
        return gold.count(*input.candidate) ? 1.0 : 0.0;
    }
    auto visible = visible_set(*index_, *corpus_, q, input.prefix, k_);
    std::unordered_set<std::uint32_t> selected(input.prefix.begin(), input.prefix.end());
    for (auto f : visible)
        if (gold.count(f) && !selected.count(f)) return -1.0;
    return 2.0;
}

}  // namespace chainrank
