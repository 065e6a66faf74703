#include <filesystem>

#include "chainrank/corpus.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace chainrank;
using namespace testutil;

TEST_SUITE("corpus") {

TEST_CASE("jsonl ingestion of a tiny corpus") {
    TempDir dir("jsonl");
    write_file(dir.file("facts.jsonl"),
               R"({"uid": "F1", "text": "water boils at 100 C"})"
               "\n"
               R"({"uid": "F2", "text": "boiling is a phase change"})"
               "\n");
    write_file(dir.file("questions.jsonl"),
               R"({"qid": "Q1", "question": "When does water boil?", "answer": "100 C",)"
               R"( "gold": [{"uid": "F1", "role": "central"}, {"uid": "F2", "role": "lexglue"}],)"
               R"( "difficulty": "Challenge", "split": "train"})"
               "\n");
    Corpus corpus = ingest_jsonl(dir.file("facts.jsonl"), dir.file("questions.jsonl"));
    CHECK(corpus.facts().size() == 2);
    REQUIRE(corpus.queries().size() == 1);
    const Query& q = corpus.query("Q1");
    CHECK(q.gold_count() == 2);
    CHECK(q.encoded_text == "When does water boil? (answer) 100 C");
    CHECK(q.gold[0] == GoldEntry{"F1", Role::Central});
    CHECK(q.gold[1] == GoldEntry{"F2", Role::LexGlue});
    CHECK(q.difficulty == Difficulty::Challenge);
    CHECK(q.split == Split::Train);
}

TEST_CASE("dangling gold uid names the uid") {
    TempDir dir("dangling");
    write_file(dir.file("f.jsonl"), R"({"uid": "F1", "text": "x"})" "\n");
    write_file(dir.file("q.jsonl"),
               R"({"qid": "Q1", "question": "?", "answer": "a",)"
               R"( "gold": [{"uid": "MISSING-99", "role": "central"}], "split": "train"})" "\n");
    CHECK_THROWS_WITH_AS(ingest_jsonl(dir.file("f.jsonl"), dir.file("q.jsonl")),
                         doctest::Contains("MISSING-99"), std::runtime_error);
}

TEST_CASE("duplicate fact uid rejected") {
    TempDir dir("dup");
    write_file(dir.file("f.jsonl"),
               R"({"uid": "F1", "text": "x"})" "\n" R"({"uid": "F1", "text": "y"})" "\n");
    write_file(dir.file("q.jsonl"), "");
    CHECK_THROWS_WITH_AS(ingest_jsonl(dir.file("f.jsonl"), dir.file("q.jsonl")),
                         doctest::Contains("F1"), std::runtime_error);
}

TEST_CASE("malformed line reports its number") {
    TempDir dir("badline");
    write_file(dir.file("f.jsonl"),
               R"({"uid": "F1", "text": "x"})" "\nnot json at all\n");
    write_file(dir.file("q.jsonl"), "");
    CHECK_THROWS_WITH_AS(ingest_jsonl(dir.file("f.jsonl"), dir.file("q.jsonl")),
                         doctest::Contains(":2"), std::runtime_error);
}

TEST_CASE("export/ingest round trip") {
    Corpus original({fact("F1", "water boils at 100 C"), fact("F2", "steam is water vapor")},
                    {query("Q1", "When does water boil?", "100 C",
                           {{"F1", Role::Central}, {"F2", Role::Grounding}}, Split::Val),
                     query("Q2", "What is steam?", "vapor", {{"F2", Role::Central}},
                           Split::Test)});
    TempDir dir("roundtrip");
    export_jsonl(original, dir.file("f.jsonl"), dir.file("q.jsonl"));
    Corpus back = ingest_jsonl(dir.file("f.jsonl"), dir.file("q.jsonl"));

    REQUIRE(back.facts().size() == original.facts().size());
    for (std::size_t i = 0; i < back.facts().size(); i++) {
        CHECK(back.facts()[i].uid == original.facts()[i].uid);
        CHECK(back.facts()[i].text == original.facts()[i].text);
        CHECK(back.facts()[i].tokens == original.facts()[i].tokens);
    }
    REQUIRE(back.queries().size() == original.queries().size());
    for (std::size_t i = 0; i < back.queries().size(); i++) {
        const Query &a = back.queries()[i], &b = original.queries()[i];
        CHECK(a.qid == b.qid);
        CHECK(a.question_text == b.question_text);
        CHECK(a.answer_text == b.answer_text);
        CHECK(a.encoded_text == b.encoded_text);
        CHECK(a.tokens == b.tokens);
        CHECK(a.gold == b.gold);
        CHECK(a.difficulty == b.difficulty);
        CHECK(a.split == b.split);
    }
    CHECK(back.fingerprint() == original.fingerprint());
}

TEST_CASE("non-test query without gold is rejected") {
    CHECK_THROWS_AS(Corpus({fact("F1", "x")}, {query("Q1", "?", "a", {}, Split::Train)}),
                    std::runtime_error);
    // test-split queries may lack gold (hidden labels)
    CHECK_NOTHROW(Corpus({fact("F1", "x")}, {query("Q1", "?", "a", {}, Split::Test)}));
}

TEST_CASE("fingerprint changes with fact content") {
    Corpus a({fact("F1", "water boils")}, {});
    Corpus b({fact("F1", "water freezes")}, {});
    CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("worldtree tsv adapter") {
    TempDir dir("wt");
    std::filesystem::create_directories(dir.path / "tables");
    write_file((dir.path / "tables" / "t1.tsv").string(),
               "BOILING\t[SKIP] COMMENTS\t[SKIP] UID\n"
               "water boils at 100 C\tsome note\tF1\n"
               "heat increases temperature\t\tF9\n");
    write_file(dir.file("questions.tsv"),
               "QuestionID\tquestion\tAnswerKey\texplanation\n"
               "Q1\tWhen does water boil? (A) 100C (B) 50C\tA\tF1|CENTRAL F9|LEXGLUE\n");
    Corpus corpus = ingest_worldtree_tsv((dir.path / "tables").string(),
                                         dir.file("questions.tsv"));
    CHECK(corpus.facts().size() == 2);
    CHECK(corpus.fact("F1").text == "water boils at 100 C");
    const Query& q = corpus.query("Q1");
    CHECK(q.encoded_text == "When does water boil? (answer) 100C");
    REQUIRE(q.gold.size() == 2);
    CHECK(q.gold[0] == GoldEntry{"F1", Role::Central});
    CHECK(q.gold[1] == GoldEntry{"F9", Role::LexGlue});
}

TEST_CASE("worldtree skip-marker columns are excluded from fact text") {
    TempDir dir("wtskip");
    std::filesystem::create_directories(dir.path / "tables");
    write_file((dir.path / "tables" / "t.tsv").string(),
               "PART1\t[SKIP] DEP\tPART2\tUID\n"
               "the sun\tignored\tis a star\tF1\n");
    write_file(dir.file("q.tsv"),
               "QuestionID\tquestion\tAnswerKey\texplanation\n"
               "Q1\tWhat is the sun? (A) star (B) planet\tA\tF1|CENTRAL\n");
    Corpus corpus = ingest_worldtree_tsv((dir.path / "tables").string(), dir.file("q.tsv"));
    CHECK(corpus.fact("F1").text == "the sun is a star");
}

TEST_CASE("worldtree error cases") {
    TempDir dir("wterr");
    std::filesystem::create_directories(dir.path / "tables");
    write_file((dir.path / "tables" / "t.tsv").string(), "TEXT\tUID\nwater\tF1\n");

    SUBCASE("unknown answer key") {
        write_file(dir.file("q.tsv"),
                   "QuestionID\tquestion\tAnswerKey\texplanation\n"
                   "Q1\tPick one (A) x (B) y\tC\tF1|CENTRAL\n");
        CHECK_THROWS_WITH_AS(
            ingest_worldtree_tsv((dir.path / "tables").string(), dir.file("q.tsv")),
            doctest::Contains("answer key"), std::runtime_error);
    }
    SUBCASE("unparseable explanation entry") {
        write_file(dir.file("q.tsv"),
                   "QuestionID\tquestion\tAnswerKey\texplanation\n"
                   "Q1\tPick one (A) x (B) y\tA\tnopipe\n");
        CHECK_THROWS_WITH_AS(
            ingest_worldtree_tsv((dir.path / "tables").string(), dir.file("q.tsv")),
            doctest::Contains("explanation"), std::runtime_error);
    }
    SUBCASE("missing uid column") {
        std::filesystem::create_directories(dir.path / "nouid");
        write_file((dir.path / "nouid" / "t.tsv").string(), "TEXT\tOTHER\nwater\tx\n");
        write_file(dir.file("q.tsv"),
                   "QuestionID\tquestion\tAnswerKey\texplanation\n"
                   "Q1\tPick one (A) x (B) y\tA\t\n");
        CHECK_THROWS_WITH_AS(
            ingest_worldtree_tsv((dir.path / "nouid").string(), dir.file("q.tsv")),
            doctest::Contains("UID"), std::runtime_error);
    }
}

TEST_CASE("worldtree multi-split ingestion") {
    TempDir dir("wtsplit");
    std::filesystem::create_directories(dir.path / "tables");
    write_file((dir.path / "tables" / "t.tsv").string(), "TEXT\tUID\nwater boils\tF1\n");
    std::string header = "QuestionID\tquestion\tAnswerKey\texplanation\n";
    write_file(dir.file("train.tsv"), header + "Q1\tQ? (A) x (B) y\tA\tF1|CENTRAL\n");
    write_file(dir.file("dev.tsv"), header + "Q2\tQ? (A) x (B) y\tB\tF1|GROUNDING\n");
    Corpus corpus = ingest_worldtree_tsv_splits(
        (dir.path / "tables").string(),
        {{dir.file("train.tsv"), Split::Train}, {dir.file("dev.tsv"), Split::Val}});
    CHECK(corpus.query("Q1").split == Split::Train);
    CHECK(corpus.query("Q2").split == Split::Val);
    CHECK(corpus.query("Q2").answer_text == "y");
    CHECK(corpus.query("Q2").gold[0].role == Role::Grounding);
}

TEST_CASE("enum round trips") {
    for (Role r : {Role::Central, Role::Grounding, Role::LexGlue})
        CHECK(role_from_string(to_string(r)) == r);
    for (Split s : {Split::Train, Split::Val, Split::Test})
        CHECK(split_from_string(to_string(s)) == s);
    for (Difficulty d : {Difficulty::Easy, Difficulty::Challenge})
        CHECK(difficulty_from_string(to_string(d)) == d);
    CHECK(split_from_string("dev") == Split::Val);
}

}  // TEST_SUITE
