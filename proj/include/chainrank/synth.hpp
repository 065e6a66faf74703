#pragma once

#include <cstdint>

#include "chainrank/corpus.hpp"

namespace chainrank {

// Desk-scale stand-in for a real fact corpus: each query gets a lexical
// chain of gold facts (consecutive facts share terms, only the first shares
// terms with the query) plus distractors that share terms with the query
// but with no deeper chain link.
struct SynthSpec {
    std::size_t num_queries = 50;
    std::size_t chain_min = 3;
    std::size_t chain_max = 6;
    std::size_t distractors_per_query = 20;
    std::size_t vocab_size = 20000;
    std::size_t query_own_terms = 4;   // query-only terms distractors can share
    std::size_t link_terms = 3;        // terms shared across one chain link
    std::size_t filler_terms = 2;      // per-fact unique terms
    double train_fraction = 0.7;
    double val_fraction = 0.15;        // remainder is test
};

Corpus generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

}  // namespace chainrank
