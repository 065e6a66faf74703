// End-to-end acceptance checks, one pass/fail line each. Dataset-backed
// checks run only when a WorldTree-style release is available (set
// CHAINRANK_WORLDTREE_DIR to a directory containing tables/ and
// questions.{train,dev,test}.tsv); otherwise they are reported as skipped.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_set>

#include "chainrank/evaluation.hpp"
#include "chainrank/inference.hpp"
#include "chainrank/pipeline.hpp"
#include "chainrank/rng.hpp"
#include "chainrank/synth.hpp"
#include "chainrank/training.hpp"

using namespace chainrank;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

// independent AP oracle: enumerate ranking prefixes, average precision at hits
double ap_oracle(const std::vector<std::string>& ranking,
                 const std::unordered_set<std::string>& gold) {
    double sum = 0.0;
    for (std::size_t r = 0; r < ranking.size(); r++) {
        if (!gold.count(ranking[r])) continue;
        std::size_t found = 0;
        for (std::size_t i = 0; i <= r; i++) found += gold.count(ranking[i]);
        sum += static_cast<double>(found) / static_cast<double>(r + 1);
    }
    return sum / static_cast<double>(gold.size());
}

Outcome check_map_oracle() {
    std::mt19937_64 rng(4001);
    std::vector<std::string> pool;
    for (int i = 0; i < 60; i++) pool.push_back("f" + std::to_string(i));
    for (int trial = 0; trial < 10000; trial++) {
        auto ranking = pool;
        std::shuffle(ranking.begin(), ranking.end(), rng);
        std::uniform_int_distribution<std::size_t> cut(1, pool.size());
        ranking.resize(cut(rng));
        std::unordered_set<std::string> gold;
        std::uniform_int_distribution<std::size_t> g(1, 10);
        std::sample(pool.begin(), pool.end(), std::inserter(gold, gold.end()), g(rng), rng);
        double got = average_precision(ranking, gold);
        double want = ap_oracle(ranking, gold);
        if (std::abs(got - want) > 1e-12)
            return {false, "mismatch at trial " + std::to_string(trial)};
    }
    return {};
}

Outcome check_losses_and_gradients() {
    // (a) NCE with uniform noise == softmax cross-entropy
    std::mt19937_64 rng(4003);
    std::uniform_real_distribution<double> s(-4.0, 4.0);
    for (int trial = 0; trial < 500; trial++) {
        std::vector<double> scores(6);
        for (auto& x : scores) x = s(rng);
        std::vector<double> pn(6, -std::log(6.0));
        double m = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (double x : scores) z += std::exp(x - m);
        double softmax_ce = -(scores[1] - m - std::log(z));
        if (std::abs(loss_nce(scores, 1, pn) - softmax_ce) > 1e-12)
            return {false, "NCE != softmax CE"};
    }
    // (b) RankNet at equal scores
    for (double x : {-3.0, 0.0, 1.5, 10.0})
        if (std::abs(loss_ranknet(x, x) - std::log(2.0)) > 1e-12)
            return {false, "RankNet(s,s) != ln 2"};

    // (c) analytic vs central finite differences for all three losses
    SynthSpec spec;
    spec.num_queries = 10;
    Corpus corpus = generate_synthetic(spec, 4005);
    auto model = fit_corpus_tfidf(corpus);
    auto index = build_neighborhood_index(corpus, model, Metric::Tfidf, 40);
    auto ctx = std::make_shared<FeatureContext>(FeatureContext::build(corpus, model));
    std::uniform_real_distribution<double> w(-1.0, 1.0);

    int tested = 0;
    for (Loss loss : {Loss::BXent, Loss::RankNet, Loss::Nce}) {
        TrainConfig cfg;
        cfg.loss = loss;
        cfg.k_train = 40;
        cfg.prefixes_per_query = 6;
        auto srng = make_rng(4007, "acc-grad", static_cast<std::uint64_t>(loss));
        auto samples = build_prefix_samples(corpus, index, cfg, srng);
        auto batches = make_minibatches(corpus, samples, cfg, srng);
        for (std::size_t bi = 0; bi < batches.size() && tested < 100; bi++, tested++) {
            LinearScorer scorer(ctx);
            std::vector<double> params(LinearScorer::parameter_count());
            for (auto& p : params) p = w(rng);
            scorer.set_parameters(params);
            std::vector<double> grad(params.size(), 0.0);
            batch_loss_and_grad(scorer, batches[bi], false, &grad);
            const double h = 1e-6;
            for (std::size_t j = 0; j < params.size(); j++) {
                auto p2 = params;
                p2[j] += h;
                scorer.set_parameters(p2);
                double up = batch_loss_and_grad(scorer, batches[bi], false, nullptr);
                p2[j] -= 2 * h;
                scorer.set_parameters(p2);
                double down = batch_loss_and_grad(scorer, batches[bi], false, nullptr);
                double numeric = (up - down) / (2 * h);
                double denom = std::max({std::abs(grad[j]), std::abs(numeric), 1e-4});
                double diff = std::abs(grad[j] - numeric);
                // diff below ~1e-8 is central-difference cancellation noise
                if (diff / denom >= 1e-5 && diff >= 1e-8)
                    return {false, "gradient mismatch, loss " + to_string(loss)};
            }
        }
    }
    if (tested < 100) return {false, "only " + std::to_string(tested) + " gradient batches"};
    return {};
}

Outcome check_neighborhood_laws() {
    SynthSpec spec;
    spec.num_queries = 24;  // ~430 facts, within the <=500 oracle budget
    spec.distractors_per_query = 12;
    Corpus corpus = generate_synthetic(spec, 4011);
    if (corpus.facts().size() > 500) return {false, "fixture too large"};
    auto model = fit_corpus_tfidf(corpus);
    auto index = build_neighborhood_index(corpus, model, Metric::Tfidf, 60);

    for (const auto& q : corpus.queries()) {
        std::vector<std::uint32_t> prefix;
        for (const auto& g : q.gold)
            prefix.push_back(static_cast<std::uint32_t>(corpus.fact_index(g.uid)));

        std::vector<std::uint32_t> prev;
        for (std::size_t n = 0; n <= prefix.size(); n++) {
            std::vector<std::uint32_t> p(prefix.begin(), prefix.begin() + n);
            auto vis = visible_set(index, corpus, q, p, 20);
            if (vis.size() > (n + 1) * 20) return {false, "cardinality bound violated"};

            // brute-force union oracle
            std::unordered_set<std::uint32_t> expect;
            for (auto f : index.query_neighbors(q.qid, 20)) expect.insert(f);
            for (auto a : p)
                for (auto f : index.fact_neighbors(a, 20)) expect.insert(f);
            for (auto a : p) expect.erase(a);
            if (expect.size() != vis.size()) return {false, "union oracle mismatch"};
            for (auto f : vis)
                if (!expect.count(f)) return {false, "union oracle mismatch"};

            // monotone in k
            for (auto f : visible_set(index, corpus, q, p, 10))
                if (!std::binary_search(vis.begin(), vis.end(), f))
                    return {false, "not monotone in k"};
            // monotone under prefix growth
            if (n > 0) {
                for (auto f : prev)
                    if (f != prefix[n - 1] && !std::binary_search(vis.begin(), vis.end(), f))
                        return {false, "not monotone under prefix growth"};
            }
            prev = vis;
        }
    }
    return {};
}

Outcome check_inference_budget() {
    SynthSpec spec;
    spec.num_queries = 48;  // ~1000 facts
    spec.distractors_per_query = 16;
    Corpus corpus = generate_synthetic(spec, 4013);
    auto model = fit_corpus_tfidf(corpus);
    auto index = build_neighborhood_index(corpus, model, Metric::Tfidf, 90);
    auto ctx = std::make_shared<FeatureContext>(FeatureContext::build(corpus, model));
    LinearScorer zero(ctx);  // all-zero weights: STOP never strictly highest
    std::size_t d_f = corpus.facts().size();

    auto queries = corpus.queries_in_split(Split::Train);
    queries.resize(std::min<std::size_t>(queries.size(), 16));

    std::map<std::pair<int, int>, double> mean_passes;
    for (int L : {2, 4, 6, 8}) {
        for (int k : {10, 30, 90}) {
            InferConfig cfg;
            cfg.k = k;
            cfg.max_iterations = L;
            cfg.min_iterations = 0;
            double total = 0.0;
            for (const auto* q : queries) {
                auto result = infer(*q, corpus, index, zero, *ctx, cfg);
                std::uint64_t budget = static_cast<std::uint64_t>(L);
                for (int l = 1; l <= L; l++)
                    budget += std::min<std::uint64_t>(d_f, static_cast<std::uint64_t>(l) * k);
                if (result.forward_passes > budget)
                    return {false, "budget exceeded at L=" + std::to_string(L) +
                                       " k=" + std::to_string(k)};
                total += static_cast<double>(result.forward_passes);
            }
            mean_passes[{L, k}] = total / static_cast<double>(queries.size());
        }
    }
    for (int k : {10, 30, 90})
        for (int L : {4, 6, 8})
            if (mean_passes[{L, k}] <= mean_passes[{L - 2, k}])
                return {false, "mean passes not increasing in L"};
    for (int L : {2, 4, 6, 8}) {
        if (mean_passes[{L, 30}] <= mean_passes[{L, 10}] ||
            mean_passes[{L, 90}] <= mean_passes[{L, 30}])
            return {false, "mean passes not increasing in k"};
    }
    return {};
}

Outcome check_oracle_end_to_end() {
    SynthSpec spec;
    spec.num_queries = 200;
    spec.chain_min = 3;
    spec.chain_max = 6;
    spec.distractors_per_query = 10;
    Corpus corpus = generate_synthetic(spec, 4017);
    auto model = fit_corpus_tfidf(corpus);
    const int k = 12;  // chain links are built to sit within small-k lexical lists
    auto index = build_neighborhood_index(corpus, model, Metric::Lexical, k);
    auto ctx = std::make_shared<FeatureContext>(FeatureContext::build(corpus, model));
    OracleScorer oracle(corpus, index, k);

    InferConfig cfg;
    cfg.k = k;
    cfg.max_iterations = 9;
    cfg.min_iterations = 0;
    cfg.s2 = false;  // selected tier only: AP reduces to reached/G
    cfg.r3 = false;

    std::size_t stop_sample = 0;
    for (const auto& q : corpus.queries()) {
        // reachability-limited optimum from an independent BFS
        std::unordered_set<std::uint32_t> gold;
        for (const auto& g : q.gold)
            gold.insert(static_cast<std::uint32_t>(corpus.fact_index(g.uid)));
        std::unordered_set<std::uint32_t> reached;
        std::queue<std::uint32_t> frontier;
        for (auto f : index.query_neighbors(q.qid, k))
            if (gold.count(f) && reached.insert(f).second) frontier.push(f);
        while (!frontier.empty()) {
            auto cur = frontier.front();
            frontier.pop();
            for (auto f : index.fact_neighbors(cur, k))
                if (gold.count(f) && reached.insert(f).second) frontier.push(f);
        }
        double optimum =
            static_cast<double>(reached.size()) / static_cast<double>(q.gold.size());

        auto result = infer(q, corpus, index, oracle, *ctx, cfg);
        std::unordered_set<std::string> gold_uids;
        for (const auto& g : q.gold) gold_uids.insert(g.uid);
        double ap = average_precision(result.ranking, gold_uids);
        if (std::abs(ap - optimum) > 1e-12)
            return {false, q.qid + ": AP " + std::to_string(ap) + " vs optimum " +
                               std::to_string(optimum)};
        if (result.stop_reason == StopReason::StopSample) stop_sample++;
    }
    double frac = static_cast<double>(stop_sample) / 200.0;
    if (frac < 0.95)
        return {false, "stop_sample fraction " + std::to_string(frac)};
    return {};
}

struct LearnFixture {
    double untrained, tfidf, ranknet, bxent;
};

LearnFixture run_learning(std::uint64_t seed) {
    SynthSpec spec;
    spec.num_queries = 30;
    spec.distractors_per_query = 10;
    Corpus corpus = generate_synthetic(spec, seed);
    auto model = fit_corpus_tfidf(corpus);
    auto index = build_neighborhood_index(corpus, model, Metric::Tfidf, 40);
    auto ctx = std::make_shared<FeatureContext>(FeatureContext::build(corpus, model));

    InferConfig icfg;
    icfg.k = 40;
    icfg.max_iterations = 9;
    icfg.min_iterations = 3;

    auto val_map = [&](const Scorer& scorer, InferMode mode) {
        auto ranks = run_inference(corpus, index, scorer, *ctx, icfg, Split::Val, mode);
        return map_score(ranks, corpus, Split::Val);
    };

    LearnFixture out{};
    LinearScorer zero(ctx);
    out.untrained = val_map(zero, InferMode::Arcf);
    out.tfidf = val_map(zero, InferMode::Tfidf);

    for (Loss loss : {Loss::RankNet, Loss::BXent}) {
        TrainConfig tcfg;
        tcfg.loss = loss;
        tcfg.k_train = 40;
        tcfg.epochs = 3;
        tcfg.prefixes_per_query = 6;
        tcfg.seed = seed;
        tcfg.eval_val = false;
        LinearScorer scorer(ctx);
        train(corpus, index, scorer, tcfg, nullptr);
        (loss == Loss::RankNet ? out.ranknet : out.bxent) = val_map(scorer, InferMode::Arcf);
    }
    return out;
}

Outcome check_learning_signal() {
    double rn = 0.0, bx = 0.0;
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        auto fx = run_learning(seed);
        if (fx.ranknet <= fx.untrained)
            return {false, "seed " + std::to_string(seed) + ": trained " +
                               std::to_string(fx.ranknet) + " <= untrained " +
                               std::to_string(fx.untrained)};
        if (fx.ranknet <= fx.tfidf)
            return {false, "seed " + std::to_string(seed) + ": trained " +
                               std::to_string(fx.ranknet) + " <= tf-idf " +
                               std::to_string(fx.tfidf)};
        rn += fx.ranknet;
        bx += fx.bxent;
    }
    if (rn < bx)
        return {false, "mean RankNet " + std::to_string(rn / 5) + " < mean bXENT " +
                           std::to_string(bx / 5)};
    return {};
}

Outcome check_ablation_direction() {
    SynthSpec spec;
    spec.num_queries = 30;
    spec.distractors_per_query = 10;
    Corpus corpus = generate_synthetic(spec, 4023);
    auto model = fit_corpus_tfidf(corpus);
    auto index = build_neighborhood_index(corpus, model, Metric::Tfidf, 40);
    auto ctx = std::make_shared<FeatureContext>(FeatureContext::build(corpus, model));

    TrainConfig tcfg;
    tcfg.k_train = 40;
    tcfg.epochs = 3;
    tcfg.prefixes_per_query = 6;
    tcfg.seed = 4025;
    tcfg.eval_val = false;
    LinearScorer scorer(ctx);
    train(corpus, index, scorer, tcfg, nullptr);

    InferConfig full;
    full.k = 40;
    // stop short of the longest chains so the later tiers have gold to recover
    full.max_iterations = 3;
    full.min_iterations = 0;
    auto full_map = map_score(
        run_inference(corpus, index, scorer, *ctx, full, Split::Val, InferMode::Arcf), corpus,
        Split::Val);
    InferConfig bare = full;
    bare.s2 = false;
    bare.r3 = false;
    auto bare_map = map_score(
        run_inference(corpus, index, scorer, *ctx, bare, Split::Val, InferMode::Arcf), corpus,
        Split::Val);
    if (!(bare_map < full_map))
        return {false, "w/o R3,S2 " + std::to_string(bare_map) + " !< full " +
                           std::to_string(full_map)};
    return {};
}

// ---- dataset-conditional checks ----

std::string worldtree_dir() {
    if (const char* env = std::getenv("CHAINRANK_WORLDTREE_DIR")) return env;
    if (fs::exists("data/worldtree")) return "data/worldtree";
    return "";
}

Corpus load_worldtree(const std::string& dir) {
    std::vector<std::pair<std::string, Split>> files;
    for (auto [name, split] : std::initializer_list<std::pair<const char*, Split>>{
             {"questions.train.tsv", Split::Train},
             {"questions.dev.tsv", Split::Val},
             {"questions.test.tsv", Split::Test}}) {
        fs::path p = fs::path(dir) / name;
        if (fs::exists(p)) files.emplace_back(p.string(), split);
    }
    if (files.empty()) throw std::runtime_error("no question TSVs under " + dir);
    return ingest_worldtree_tsv_splits((fs::path(dir) / "tables").string(), files);
}

Outcome check_worldtree_reachability(const Corpus& corpus) {
    auto model = fit_corpus_tfidf(corpus);
    auto index = build_neighborhood_index(corpus, model, Metric::Tfidf, 290);
    const std::pair<int, double> expected[] = {{90, 0.90}, {130, 0.95}, {180, 0.97}, {290, 0.99}};
    std::ostringstream detail;
    for (auto [k, want] : expected) {
        double got = reachable_gold_fraction(corpus, index, k);
        detail << " k=" << k << ":" << got;
        if (std::abs(got - want) > 0.02)
            return {false, "k=" + std::to_string(k) + " fraction " + std::to_string(got) +
                               " vs " + std::to_string(want) + " (" + detail.str() + ")"};
    }
    return {true, detail.str()};
}

Outcome check_worldtree_tfidf_map(const Corpus& corpus) {
    auto ctx = std::make_shared<FeatureContext>(FeatureContext::build(corpus));
    LinearScorer unused(ctx);
    InferConfig cfg;
    // evaluate on whichever labeled non-train split is present
    Split split = corpus.queries_in_split(Split::Val).empty() ? Split::Test : Split::Val;
    NeighborhoodIndex dummy;  // tf-idf mode never consults the index
    dummy.k_max = 1;
    auto ranks = run_inference(corpus, dummy, unused, *ctx, cfg, split, InferMode::Tfidf);
    double got = map_score(ranks, corpus, split);
    if (std::abs(got - 0.3743) > 0.03)
        return {false, "MAP " + std::to_string(got) + " vs 0.3743 +- 0.03"};
    return {true, "MAP " + std::to_string(got)};
}

int g_failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = check();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.ok) {
        std::printf("PASS %-28s (%.1fs)%s%s\n", name, secs, out.detail.empty() ? "" : " ",
                    out.detail.c_str());
    } else {
        std::printf("FAIL %-28s (%.1fs) %s\n", name, secs, out.detail.c_str());
        g_failures++;
    }
    std::fflush(stdout);
}

}  // namespace

int main() {
    report("map_oracle", check_map_oracle);
    report("losses_and_gradients", check_losses_and_gradients);
    report("neighborhood_laws", check_neighborhood_laws);
    report("inference_budget", check_inference_budget);
    report("oracle_end_to_end", check_oracle_end_to_end);
    report("learning_signal", check_learning_signal);
    report("ablation_direction", check_ablation_direction);

    std::string wt = worldtree_dir();
    if (wt.empty()) {
        std::printf("SKIP worldtree_reachability         (dataset not present)\n");
        std::printf("SKIP worldtree_tfidf_map            (dataset not present)\n");
    } else {
        try {
            Corpus corpus = load_worldtree(wt);
            report("worldtree_reachability",
                   [&] { return check_worldtree_reachability(corpus); });
            report("worldtree_tfidf_map", [&] { return check_worldtree_tfidf_map(corpus); });
        } catch (const std::exception& e) {
            std::printf("FAIL worldtree ingestion: %s\n", e.what());
            g_failures++;
        }
    }
    return g_failures == 0 ? 0 : 1;
}
