#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "chainrank/text.hpp"

namespace chainrank {

enum class Role { Central, Grounding, LexGlue };
enum class Difficulty { Easy, Challenge };
enum class Split { Train, Val, Test };

std::string to_string(Role r);
std::string to_string(Difficulty d);
std::string to_string(Split s);
Role role_from_string(const std::string& s);
Difficulty difficulty_from_string(const std::string& s);
Split split_from_string(const std::string& s);

struct Fact {
    std::string uid;
    std::string text;
    std::vector<std::string> tokens;
};

struct GoldEntry {
    std::string uid;
    Role role = Role::Central;

    bool operator==(const GoldEntry&) const = default;
};

struct Query {
    std::string qid;
    std::string question_text;
    std::string answer_text;
    std::string encoded_text;  // question + " (answer) " + answer
    std::vector<std::string> tokens;
    std::vector<GoldEntry> gold;
    Difficulty difficulty = Difficulty::Easy;
    Split split = Split::Train;

    std::size_t gold_count() const { return gold.size(); }
};

// Immutable after construction; safe to share across threads.
class Corpus {
public:
    Corpus(std::vector<Fact> facts, std::vector<Query> queries, PreprocessConfig cfg = {});

    const std::vector<Fact>& facts() const { return facts_; }
    const std::vector<Query>& queries() const { return queries_; }
    const PreprocessConfig& preprocessing() const { return preprocess_config_; }

    const Fact& fact(const std::string& uid) const;
    const Query& query(const std::string& qid) const;
    bool has_fact(const std::string& uid) const { return fact_index_.count(uid) > 0; }
    std::size_t fact_index(const std::string& uid) const;

    std::vector<const Query*> queries_in_split(Split s) const;

    // Hash over fact uids/texts and the preprocessing config; persisted
    // artifacts carry it so mismatched pipeline stages fail fast.
    std::string fingerprint() const { return fingerprint_; }

private:
    std::vector<Fact> facts_;
    std::vector<Query> queries_;
    std::unordered_map<std::string, std::size_t> fact_index_;
    std::unordered_map<std::string, std::size_t> query_index_;
    PreprocessConfig preprocess_config_;
    std::string fingerprint_;
};

// Canonical JSONL format: facts {"uid","text"}, questions
// {"qid","question","answer","gold":[{"uid","role"}],"difficulty","split"}.
Corpus ingest_jsonl(const std::string& facts_path, const std::string& questions_path,
                    const PreprocessConfig& cfg = {});
void export_jsonl(const Corpus& corpus, const std::string& facts_path,
                  const std::string& questions_path);

struct WorldTreeOptions {
    std::string skip_marker = "[SKIP]";
    Split default_split = Split::Train;
};

// Best-effort adapter for WorldTree-style TSV releases: fact tables with a
// UID column, questions with lettered options, an answer key, and an
// explanation column of "uid|ROLE" pairs.
Corpus ingest_worldtree_tsv(const std::string& tables_dir, const std::string& questions_tsv,
                            const WorldTreeOptions& opts = {}, const PreprocessConfig& cfg = {});

// Multi-split variant: (path, split) pairs share one fact corpus.
Corpus ingest_worldtree_tsv_splits(const std::string& tables_dir,
                                   const std::vector<std::pair<std::string, Split>>& question_files,
                                   const WorldTreeOptions& opts = {},
                                   const PreprocessConfig& cfg = {});

}  // namespace chainrank
