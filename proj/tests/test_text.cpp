#include <random>
#include <sstream>

#include "chainrank/text.hpp"
#include "doctest.h"

using namespace chainrank;

namespace {
std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}
}  // namespace

TEST_SUITE("text") {

TEST_CASE("stopword removal and stemming on a simple sentence") {
    auto tokens = preprocess("The Moon is closer to Earth");
    CHECK(tokens == std::vector<std::string>{"moon", "closer", "earth"});
}

TEST_CASE("empty input") {
    CHECK(preprocess("").empty());
    CHECK(preprocess("  \t\n ").empty());
    CHECK(preprocess("the is to").empty());  // all stopwords
}

TEST_CASE("splitting on non-alphanumeric runs") {
    auto tokens = preprocess("water(H2O)--boils, at: 100C!");
    CHECK(tokens == std::vector<std::string>{"water", "h2o", "boil", "100c"});
}

TEST_CASE("porter stemmer classics") {
    CHECK(porter_stem("caresses") == "caress");
    CHECK(porter_stem("ponies") == "poni");
    CHECK(porter_stem("cats") == "cat");
    CHECK(porter_stem("feed") == "feed");
    CHECK(porter_stem("agreed") == "agre");
    CHECK(porter_stem("plastered") == "plaster");
    CHECK(porter_stem("motoring") == "motor");
    CHECK(porter_stem("conflated") == "conflat");
    CHECK(porter_stem("troubling") == "troubl");
    CHECK(porter_stem("happy") == "happi");
    CHECK(porter_stem("relational") == "relat");
    CHECK(porter_stem("rational") == "ration");
    CHECK(porter_stem("triplicate") == "triplic");
    CHECK(porter_stem("hopeful") == "hope");
    CHECK(porter_stem("electrical") == "electr");
    CHECK(porter_stem("adoption") == "adopt");
    CHECK(porter_stem("probate") == "probat");
    CHECK(porter_stem("controll") == "control");
    CHECK(porter_stem("a") == "a");   // length <= 2 untouched
    CHECK(porter_stem("is") == "is");
}

TEST_CASE("stopword membership") {
    CHECK(is_stopword("the"));
    CHECK(is_stopword("is"));
    CHECK(is_stopword("to"));
    CHECK_FALSE(is_stopword("moon"));
    CHECK_FALSE(is_stopword(""));
}

TEST_CASE("idempotence on fixed sentences") {
    for (const char* s : {"The Moon is closer to Earth than the Sun",
                          "When does water start boiling?",
                          "George is rubbing his hands because friction produces heat",
                          "doing having mightily generalizations"}) {
        auto once = preprocess(s);
        CHECK(preprocess(join(once)) == once);
    }
}

TEST_CASE("idempotence on random token soup") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> len(1, 12), nwords(1, 20), ch('a', 'z');
    for (int trial = 0; trial < 200; trial++) {
        std::ostringstream text;
        int n = nwords(rng);
        for (int w = 0; w < n; w++) {
            int l = len(rng);
            for (int i = 0; i < l; i++) text << static_cast<char>(ch(rng));
            text << ' ';
        }
        auto once = preprocess(text.str());
        CHECK(preprocess(join(once)) == once);
    }
}

TEST_CASE("config toggles") {
    PreprocessConfig raw;
    raw.remove_stopwords = false;
    raw.stem = false;
    auto tokens = preprocess("The Moon is closer", raw);
    CHECK(tokens == std::vector<std::string>{"the", "moon", "is", "closer"});

    PreprocessConfig nostem;
    nostem.stem = false;
    CHECK(preprocess("boiling waters", nostem) ==
          std::vector<std::string>{"boiling", "waters"});
}

TEST_CASE("fingerprint tracks the configuration") {
    PreprocessConfig a, b;
    b.stem = false;
    CHECK(a.fingerprint() != b.fingerprint());
    CHECK(a.fingerprint() == PreprocessConfig{}.fingerprint());
}

}  // TEST_SUITE
