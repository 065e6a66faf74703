#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chainrank {

struct PreprocessConfig {
    bool lowercase = true;
    bool remove_stopwords = true;
    bool stem = true;

    std::string fingerprint() const;
};

// Porter (1980) stemming algorithm. Input must be lowercase.
std::string porter_stem(std::string word);

bool is_stopword(std::string_view word);

// lowercase, split on non-alphanumeric runs, drop stopwords, stem.
// Idempotent: preprocessing an already-preprocessed token stream is a no-op.
std::vector<std::string> preprocess(std::string_view text, const PreprocessConfig& cfg = {});

}  // namespace chainrank
