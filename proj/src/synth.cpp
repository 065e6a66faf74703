#include "chainrank/synth.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "chainrank/rng.hpp"

namespace chainrank {

namespace {

class WordPool {
public:
    WordPool(std::mt19937_64& rng, std::size_t cap) : rng_(rng), cap_(cap) {}

    // Fresh word whose stem collides with nothing emitted so far and which
    // survives preprocessing as a single token.
    std::string next() {
        static constexpr char kCons[] = "bcdfghjklmnpqrstvwz";
        static constexpr char kVowel[] = "aeiou";
        for (int attempt = 0; attempt < 10000; attempt++) {
            std::size_t pairs = 3 + rng_() % 2;  // 6 or 8 letters
            std::string w;
            for (std::size_t i = 0; i < pairs; i++) {
                w.push_back(kCons[rng_() % (sizeof(kCons) - 1)]);
                w.push_back(kVowel[rng_() % (sizeof(kVowel) - 1)]);
            }
            auto toks = preprocess(w);
            if (toks.size() != 1) continue;
            if (!stems_.insert(toks[0]).second) continue;
            if (++emitted_ > cap_)
                throw std::runtime_error("synthetic spec infeasible: vocabulary too small");
            return w;
        }
        throw std::runtime_error("synthetic spec infeasible: cannot generate fresh vocabulary");
    }

    std::vector<std::string> take(std::size_t n) {
        std::vector<std::string> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; i++) out.push_back(next());
        return out;
    }

private:
    std::mt19937_64& rng_;
    std::size_t cap_;
    std::size_t emitted_ = 0;
    std::unordered_set<std::string> stems_;
};

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

std::string pad4(std::size_t n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04zu", n);
    return buf;
}

}  // namespace

Corpus generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.chain_min < 1 || spec.chain_min > spec.chain_max)
        throw std::runtime_error("synthetic spec infeasible: bad chain length range");
    if (spec.query_own_terms < 1 || spec.link_terms < 1)
        throw std::runtime_error("synthetic spec infeasible: need >=1 query and link term");

    // Worst-case fresh-token demand; pools are disjoint across queries.
    std::size_t per_query = spec.query_own_terms + spec.chain_max * spec.link_terms +
                            spec.chain_max * spec.filler_terms +
                            spec.distractors_per_query * (spec.filler_terms + 1);
    if (per_query * spec.num_queries > spec.vocab_size)
        throw std::runtime_error("synthetic spec infeasible: vocabulary too small");

    auto rng = make_rng(seed, "synth");
    WordPool pool(rng, spec.vocab_size);

    std::vector<Fact> facts;
    std::vector<Query> queries;
    PreprocessConfig cfg;

    std::size_t n_train = static_cast<std::size_t>(spec.train_fraction *
                                                   static_cast<double>(spec.num_queries));
    std::size_t n_val = static_cast<std::size_t>(spec.val_fraction *
                                                 static_cast<double>(spec.num_queries));

    for (std::size_t qi = 0; qi < spec.num_queries; qi++) {
        std::string qtag = "SQ" + pad4(qi);
        std::size_t chain =
            spec.chain_min + (spec.chain_max > spec.chain_min
                                  ? rng() % (spec.chain_max - spec.chain_min + 1)
                                  : 0);

        auto own = pool.take(spec.query_own_terms);
        // links[0] is shared between the query and the first chain fact,
        // links[i>0] between consecutive chain facts.
        std::vector<std::vector<std::string>> links;
        for (std::size_t i = 0; i < chain; i++) links.push_back(pool.take(spec.link_terms));

        std::vector<GoldEntry> gold;
        for (std::size_t i = 0; i < chain; i++) {
            std::vector<std::string> words = links[i];
            if (i + 1 < chain)
                words.insert(words.end(), links[i + 1].begin(), links[i + 1].end());
            auto filler = pool.take(spec.filler_terms);
            words.insert(words.end(), filler.begin(), filler.end());
            std::shuffle(words.begin(), words.end(), rng);

            Fact f;
            f.uid = qtag + "-C" + std::to_string(i);
            f.text = join(words);
            f.tokens = preprocess(f.text, cfg);
            Role role = i == 0 ? Role::Grounding
                               : (i + 1 == chain ? Role::LexGlue : Role::Central);
            gold.push_back({f.uid, role});
            facts.push_back(std::move(f));
        }

        for (std::size_t d = 0; d < spec.distractors_per_query; d++) {
            // Shares 1..min(2, own) query terms, strictly fewer than a link.
            std::size_t shared = 1 + (spec.query_own_terms > 1 ? rng() % 2 : 0);
            std::vector<std::string> words;
            std::vector<std::string> shuffled_own = own;
            std::shuffle(shuffled_own.begin(), shuffled_own.end(), rng);
            words.assign(shuffled_own.begin(),
                         shuffled_own.begin() + static_cast<std::ptrdiff_t>(shared));
            auto filler = pool.take(spec.filler_terms + 1);
            words.insert(words.end(), filler.begin(), filler.end());
            std::shuffle(words.begin(), words.end(), rng);

            Fact f;
            f.uid = qtag + "-D" + pad4(d);
            f.text = join(words);
            f.tokens = preprocess(f.text, cfg);
            facts.push_back(std::move(f));
        }

        std::vector<std::string> qwords = own;
        qwords.insert(qwords.end(), links[0].begin(), links[0].end());
        std::shuffle(qwords.begin(), qwords.end(), rng);
        // Last query word doubles as the answer text.
        std::string answer = qwords.back();
        qwords.pop_back();

        Query q;
        q.qid = qtag;
        q.question_text = join(qwords) + "?";
        q.answer_text = answer;
        q.encoded_text = q.question_text + " (answer) " + q.answer_text;
        q.tokens = preprocess(q.encoded_text, cfg);
        q.gold = std::move(gold);
        q.difficulty = (qi % 3 == 2) ? Difficulty::Challenge : Difficulty::Easy;
        q.split = qi < n_train ? Split::Train : (qi < n_train + n_val ? Split::Val : Split::Test);
        queries.push_back(std::move(q));
    }

    return Corpus(std::move(facts), std::move(queries), cfg);
}

}  // namespace chainrank
