// Compares the parallel neighborhood build against the serial one on a
// synthetic corpus and checks they produce identical lists.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "chainrank/neighbors.hpp"
#include "chainrank/synth.hpp"

using namespace chainrank;
using clk = std::chrono::steady_clock;

static double ms_since(clk::time_point t0) {
    return std::chrono::duration<double, std::milli>(clk::now() - t0).count();
}

int main(int argc, char** argv) {
    std::size_t queries = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 400;
    int k_max = argc > 2 ? std::atoi(argv[2]) : 128;

    SynthSpec spec;
    spec.num_queries = queries;
    spec.distractors_per_query = 20;
    Corpus corpus = generate_synthetic(spec, 7);
    auto model = fit_corpus_tfidf(corpus);
    std::printf("facts=%zu queries=%zu k_max=%d\n", corpus.facts().size(),
                corpus.queries().size(), k_max);

    for (Metric metric : {Metric::Tfidf, Metric::Lexical}) {
        const char* name = metric == Metric::Tfidf ? "tfidf" : "lexical";

        auto t0 = clk::now();
        auto serial = build_neighborhood_index(corpus, model, metric, k_max, false);
        double serial_ms = ms_since(t0);

        t0 = clk::now();
        auto parallel = build_neighborhood_index(corpus, model, metric, k_max, true);
        double parallel_ms = ms_since(t0);

        bool same = serial.fact_lists == parallel.fact_lists &&
                    serial.query_lists == parallel.query_lists;
        std::printf("%-8s serial %8.1f ms  parallel %8.1f ms  speedup %.2fx  identical=%s\n",
                    name, serial_ms, parallel_ms, serial_ms / parallel_ms,
                    same ? "yes" : "NO");
        if (!same) return 1;
    }
    return 0;
}
