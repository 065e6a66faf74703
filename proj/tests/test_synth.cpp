#include <algorithm>
#include <queue>
#include <unordered_set>

#include "chainrank/neighbors.hpp"
#include "chainrank/synth.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace chainrank;

namespace {

std::unordered_set<std::string> token_set(const std::vector<std::string>& tokens) {
    return {tokens.begin(), tokens.end()};
}

std::size_t shared(const std::unordered_set<std::string>& a,
                   const std::unordered_set<std::string>& b) {
    std::size_t n = 0;
    for (const auto& t : a) n += b.count(t);
    return n;
}

// Independent BFS over gold facts with lexical-overlap nearest-k neighborhoods.
bool all_gold_reachable(const Corpus& corpus, const NeighborhoodIndex& index, const Query& q,
                        int k) {
    std::unordered_set<std::uint32_t> gold;
    for (const auto& g : q.gold) gold.insert(static_cast<std::uint32_t>(corpus.fact_index(g.uid)));

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
    return reached.size() == gold.size();
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("determinism: identical seed gives byte-identical exports") {
    SynthSpec spec;
    spec.num_queries = 1;
    spec.chain_min = spec.chain_max = 3;
    spec.distractors_per_query = 5;
    Corpus a = generate_synthetic(spec, 7);
    Corpus b = generate_synthetic(spec, 7);

    testutil::TempDir dir("synthdet");
    export_jsonl(a, dir.file("fa"), dir.file("qa"));
    export_jsonl(b, dir.file("fb"), dir.file("qb"));
    CHECK(testutil::read_file(dir.file("fa")) == testutil::read_file(dir.file("fb")));
    CHECK(testutil::read_file(dir.file("qa")) == testutil::read_file(dir.file("qb")));

    Corpus c = generate_synthetic(spec, 8);
    CHECK(a.fingerprint() != c.fingerprint());
}

TEST_CASE("chain structure: links share tokens, deep links avoid the query") {
    SynthSpec spec;
    spec.num_queries = 10;
    spec.chain_min = spec.chain_max = 3;
    Corpus corpus = generate_synthetic(spec, 11);

    for (const auto& q : corpus.queries()) {
        REQUIRE(q.gold.size() == 3);
        auto qtok = token_set(q.tokens);
        std::vector<std::unordered_set<std::string>> chain;
        for (const auto& g : q.gold) chain.push_back(token_set(corpus.fact(g.uid).tokens));

        CHECK(shared(qtok, chain[0]) >= 1);   // first link anchored at the query
        CHECK(shared(chain[0], chain[1]) >= 1);
        CHECK(shared(chain[1], chain[2]) >= 1);
        CHECK(shared(qtok, chain[2]) == 0);   // deepest fact disjoint from the query
    }
}

TEST_CASE("distractors touch the query but not deeper chain links") {
    SynthSpec spec;
    spec.num_queries = 5;
    spec.chain_min = spec.chain_max = 4;
    spec.distractors_per_query = 8;
    Corpus corpus = generate_synthetic(spec, 13);

    for (const auto& q : corpus.queries()) {
        std::unordered_set<std::string> gold_uids;
        for (const auto& g : q.gold) gold_uids.insert(g.uid);
        auto qtok = token_set(q.tokens);

        // deep-chain tokens = everything past the first link
        std::unordered_set<std::string> deep;
        for (std::size_t i = 1; i < q.gold.size(); i++)
            for (const auto& t : corpus.fact(q.gold[i].uid).tokens) deep.insert(t);

        std::size_t distractors = 0;
        for (const auto& f : corpus.facts()) {
            if (f.uid.rfind(q.qid + "-D", 0) != 0) continue;
            distractors++;
            auto ftok = token_set(f.tokens);
            CHECK(shared(ftok, qtok) >= 1);
            CHECK(shared(ftok, deep) == 0);
        }
        CHECK(distractors == spec.distractors_per_query);
    }
}

TEST_CASE("roles and counts") {
    SynthSpec spec;
    spec.num_queries = 12;
    spec.chain_min = 3;
    spec.chain_max = 6;
    spec.distractors_per_query = 4;
    Corpus corpus = generate_synthetic(spec, 5);

    CHECK(corpus.queries().size() == 12);
    CHECK(corpus.facts().size() >= 12 * (3 + 4));
    for (const auto& q : corpus.queries()) {
        CHECK(q.gold.size() >= spec.chain_min);
        CHECK(q.gold.size() <= spec.chain_max);
        CHECK(q.gold.front().role == Role::Grounding);
        CHECK(q.gold.back().role == Role::LexGlue);
    }
    // all three splits populated at these fractions
    CHECK(!corpus.queries_in_split(Split::Train).empty());
    CHECK(!corpus.queries_in_split(Split::Val).empty());
    CHECK(!corpus.queries_in_split(Split::Test).empty());
}

TEST_CASE("every gold fact reachable via gold hops at k=10") {
    SynthSpec spec;
    spec.num_queries = 50;
    spec.chain_min = spec.chain_max = 4;
    spec.distractors_per_query = 20;
    Corpus corpus = generate_synthetic(spec, 17);
    auto model = fit_corpus_tfidf(corpus);
    auto index = build_neighborhood_index(corpus, model, Metric::Lexical, 10);
    for (const auto& q : corpus.queries()) CHECK(all_gold_reachable(corpus, index, q, 10));
}

TEST_CASE("infeasible vocabulary rejected") {
    SynthSpec spec;
    spec.num_queries = 100;
    spec.vocab_size = 50;
    CHECK_THROWS_AS(generate_synthetic(spec, 1), std::runtime_error);
}

}  // TEST_SUITE
