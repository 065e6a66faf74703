#include "chainrank/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace chainrank {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> split_tsv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(Role r) {
    switch (r) {
        case Role::Central: return "central";
        case Role::Grounding: return "grounding";
        case Role::LexGlue: return "lexglue";
    }
    return "central";
}

std::string to_string(Difficulty d) { return d == Difficulty::Easy ? "Easy" : "Challenge"; }

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "train";
}

Role role_from_string(const std::string& s) {
    std::string l = lower(s);
    if (l == "central") return Role::Central;
    if (l == "grounding") return Role::Grounding;
    if (l == "lexglue" || l == "lexical glue" || l == "lex_glue") return Role::LexGlue;
    // WorldTree tables also carry auxiliary role labels (e.g. BACKGROUND,
    // NEG, ROLE); map anything unrecognized to central rather than failing.
    return Role::Central;
}

Difficulty difficulty_from_string(const std::string& s) {
    return lower(s) == "challenge" ? Difficulty::Challenge : Difficulty::Easy;
}

Split split_from_string(const std::string& s) {
    std::string l = lower(s);
    if (l == "train") return Split::Train;
    if (l == "val" || l == "dev" || l == "validation") return Split::Val;
    if (l == "test") return Split::Test;
    throw std::runtime_error("unknown split: " + s);
}

Corpus::Corpus(std::vector<Fact> facts, std::vector<Query> queries, PreprocessConfig cfg)
    : facts_(std::move(facts)), queries_(std::move(queries)), preprocess_config_(cfg) {
    for (std::size_t i = 0; i < facts_.size(); i++) {
        auto [it, fresh] = fact_index_.emplace(facts_[i].uid, i);
        if (!fresh) throw std::runtime_error("duplicate fact uid: " + facts_[i].uid);
    }
    for (std::size_t i = 0; i < queries_.size(); i++) {
        auto [it, fresh] = query_index_.emplace(queries_[i].qid, i);
        if (!fresh) throw std::runtime_error("duplicate qid: " + queries_[i].qid);
        for (const auto& g : queries_[i].gold) {
            if (!fact_index_.count(g.uid))
                throw std::runtime_error("query " + queries_[i].qid +
                                         " references unknown fact uid: " + g.uid);
        }
        if (queries_[i].gold.empty() && queries_[i].split != Split::Test)
            throw std::runtime_error("query " + queries_[i].qid +
                                     " has no gold facts but is not in the test split");
    }
    std::string blob = preprocess_config_.fingerprint();
    for (const auto& f : facts_) {
        blob += '\x1f';
        blob += f.uid;
        blob += '\x1e';
        blob += f.text;
    }
    fingerprint_ = fnv1a_hex(blob);
}

const Fact& Corpus::fact(const std::string& uid) const {
    auto it = fact_index_.find(uid);
    if (it == fact_index_.end()) throw std::runtime_error("unknown fact uid: " + uid);
    return facts_[it->second];
}

const Query& Corpus::query(const std::string& qid) const {
    auto it = query_index_.find(qid);
    if (it == query_index_.end()) throw std::runtime_error("unknown qid: " + qid);
    return queries_[it->second];
}

std::size_t Corpus::fact_index(const std::string& uid) const {
    auto it = fact_index_.find(uid);
    if (it == fact_index_.end()) throw std::runtime_error("unknown fact uid: " + uid);
    return it->second;
}

std::vector<const Query*> Corpus::queries_in_split(Split s) const {
    std::vector<const Query*> out;
    for (const auto& q : queries_)
        if (q.split == s) out.push_back(&q);
    return out;
}

namespace {

Query make_query(std::string qid, std::string question, std::string answer,
                 std::vector<GoldEntry> gold, Difficulty diff, Split split,
                 const PreprocessConfig& cfg) {
    Query q;
    q.qid = std::move(qid);
    q.question_text = std::move(question);
    q.answer_text = std::move(answer);
    q.encoded_text = q.question_text + " (answer) " + q.answer_text;
    q.tokens = preprocess(q.encoded_text, cfg);
    q.gold = std::move(gold);
    q.difficulty = diff;
    q.split = split;
    return q;
}

}  // namespace

Corpus ingest_jsonl(const std::string& facts_path, const std::string& questions_path,
                    const PreprocessConfig& cfg) {
    std::ifstream ff(facts_path);
    if (!ff) throw std::runtime_error("cannot open facts file: " + facts_path);
    std::ifstream qf(questions_path);
    if (!qf) throw std::runtime_error("cannot open questions file: " + questions_path);

    std::vector<Fact> facts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ff, line)) {
        lineno++;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(facts_path + ":" + std::to_string(lineno) +
                                     ": malformed JSON: " + e.what());
        }
        if (!j.contains("uid") || !j.contains("text"))
            throw std::runtime_error(facts_path + ":" + std::to_string(lineno) +
                                     ": fact record needs uid and text");
        Fact f;
        f.uid = j["uid"].get<std::string>();
        f.text = j["text"].get<std::string>();
        f.tokens = preprocess(f.text, cfg);
        facts.push_back(std::move(f));
    }

    std::vector<Query> queries;
    lineno = 0;
    while (std::getline(qf, line)) {
        lineno++;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(questions_path + ":" + std::to_string(lineno) +
                                     ": malformed JSON: " + e.what());
        }
        if (!j.contains("qid") || !j.contains("question") || !j.contains("answer"))
            throw std::runtime_error(questions_path + ":" + std::to_string(lineno) +
                                     ": question record needs qid, question, answer");
        std::vector<GoldEntry> gold;
        for (const auto& g : j.value("gold", json::array()))
            gold.push_back({g.at("uid").get<std::string>(),
                            role_from_string(g.at("role").get<std::string>())});
        queries.push_back(make_query(
            j["qid"].get<std::string>(), j["question"].get<std::string>(),
            j["answer"].get<std::string>(), std::move(gold),
            difficulty_from_string(j.value("difficulty", "Easy")),
            split_from_string(j.value("split", "train")), cfg));
    }
    return Corpus(std::move(facts), std::move(queries), cfg);
}

void export_jsonl(const Corpus& corpus, const std::string& facts_path,
                  const std::string& questions_path) {
    std::ofstream ff(facts_path);
    if (!ff) throw std::runtime_error("cannot write facts file: " + facts_path);
    for (const auto& f : corpus.facts()) {
        json j{{"uid", f.uid}, {"text", f.text}};
        ff << j.dump() << '\n';
    }
    std::ofstream qf(questions_path);
    if (!qf) throw std::runtime_error("cannot write questions file: " + questions_path);
    for (const auto& q : corpus.queries()) {
        json gold = json::array();
        for (const auto& g : q.gold) gold.push_back({{"uid", g.uid}, {"role", to_string(g.role)}});
        json j{{"qid", q.qid},
               {"question", q.question_text},
               {"answer", q.answer_text},
               {"gold", gold},
               {"difficulty", to_string(q.difficulty)},
               {"split", to_string(q.split)}};
        qf << j.dump() << '\n';
    }
}

namespace {

std::vector<Fact> read_fact_tables(const std::string& tables_dir, const WorldTreeOptions& opts,
                                   const PreprocessConfig& cfg) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(tables_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".tsv")
            paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw std::runtime_error("no .tsv tables found in " + tables_dir);

    std::vector<Fact> facts;
    for (const auto& path : paths) {
        std::ifstream in(path);
        std::string header;
        if (!std::getline(in, header)) continue;
        auto cols = split_tsv_line(header);
        // The UID column header carries the skip marker too; match on name.
        std::ptrdiff_t uid_col = -1;
        std::vector<bool> content(cols.size(), true);
        for (std::size_t i = 0; i < cols.size(); i++) {
            std::string name = trim(cols[i]);
            bool skip = name.find(opts.skip_marker) != std::string::npos;
            if (skip) content[i] = false;
            std::string bare = name;
            if (auto pos = bare.find(opts.skip_marker); pos != std::string::npos)
                bare = trim(bare.substr(pos + opts.skip_marker.size()));
            if (lower(bare) == "uid") uid_col = static_cast<std::ptrdiff_t>(i);
        }
        if (uid_col < 0)
            throw std::runtime_error("table " + path.string() + " has no UID column");

        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto cells = split_tsv_line(line);
            if (static_cast<std::size_t>(uid_col) >= cells.size()) continue;
            Fact f;
            f.uid = trim(cells[static_cast<std::size_t>(uid_col)]);
            if (f.uid.empty()) continue;
            std::string text;
            for (std::size_t i = 0; i < cells.size() && i < cols.size(); i++) {
                if (!content[i] || static_cast<std::ptrdiff_t>(i) == uid_col) continue;
                std::string cell = trim(cells[i]);
                if (cell.empty()) continue;
                if (!text.empty()) text += ' ';
                text += cell;
            }
            f.text = text;
            f.tokens = preprocess(f.text, cfg);
            facts.push_back(std::move(f));
        }
    }
    return facts;
}

// "Q text? (A) opt1 (B) opt2 ..." -> question stem plus the keyed option.
std::pair<std::string, std::string> split_options(const std::string& question,
                                                  const std::string& answer_key) {
    struct Option {
        std::string key;
        std::size_t start;  // of the marker
        std::size_t text_start;
    };
    std::vector<Option> options;
    for (std::size_t i = 0; i + 2 < question.size(); i++) {
        if (question[i] != '(') continue;
        std::size_t close = question.find(')', i);
        if (close == std::string::npos || close - i > 3) continue;
        std::string key = question.substr(i + 1, close - i - 1);
        if (key.size() != 1) continue;
        char c = key[0];
        bool is_key = (c >= 'A' && c <= 'F') || (c >= '1' && c <= '6');
        if (!is_key) continue;
        options.push_back({key, i, close + 1});
    }
    if (options.empty())
        throw std::runtime_error("question has no answer options: " + question);

    std::string stem = trim(question.substr(0, options.front().start));
    std::string key = trim(answer_key);
    for (std::size_t i = 0; i < options.size(); i++) {
        if (options[i].key != key) continue;
        std::size_t end = (i + 1 < options.size()) ? options[i + 1].start : question.size();
        std::string answer = trim(question.substr(options[i].text_start,
                                                  end - options[i].text_start));
        return {stem, answer};
    }
    throw std::runtime_error("answer key '" + answer_key + "' not found in: " + question);
}

std::vector<GoldEntry> parse_explanation(const std::string& cell) {
    std::vector<GoldEntry> gold;
    std::istringstream in(cell);
    std::string entry;
    while (in >> entry) {
        std::size_t bar = entry.find('|');
        if (bar == std::string::npos || bar == 0)
            throw std::runtime_error("unparseable explanation entry: " + entry);
        gold.push_back({entry.substr(0, bar), role_from_string(entry.substr(bar + 1))});
    }
    return gold;
}

void read_questions_tsv(const std::string& path, Split split, const PreprocessConfig& cfg,
                        std::vector<Query>& out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open questions file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty questions file: " + path);
    auto cols = split_tsv_line(header);

    auto find_col = [&](std::initializer_list<std::string_view> names) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < cols.size(); i++) {
            std::string l = lower(trim(cols[i]));
            for (auto n : names)
                if (l == n) return static_cast<std::ptrdiff_t>(i);
        }
        return -1;
    };
    std::ptrdiff_t qid_col = find_col({"questionid", "qid", "id"});
    std::ptrdiff_t q_col = find_col({"question"});
    std::ptrdiff_t key_col = find_col({"answerkey", "answer_key", "key"});
    std::ptrdiff_t expl_col = find_col({"explanation"});
    std::ptrdiff_t diff_col = find_col({"arcset", "category", "difficulty", "subset"});
    if (qid_col < 0 || q_col < 0 || key_col < 0)
        throw std::runtime_error(path + ": need QuestionID, question and AnswerKey columns");

    auto cell = [&](const std::vector<std::string>& cells, std::ptrdiff_t c) -> std::string {
        if (c < 0 || static_cast<std::size_t>(c) >= cells.size()) return "";
        return trim(cells[static_cast<std::size_t>(c)]);
    };

    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        lineno++;
        if (trim(line).empty()) continue;
        auto cells = split_tsv_line(line);
        try {
            auto [stem, answer] = split_options(cell(cells, q_col), cell(cells, key_col));
            Query q;
            q.qid = cell(cells, qid_col);
            q.question_text = stem;
            q.answer_text = answer;
            q.encoded_text = stem + " (answer) " + answer;
            q.tokens = preprocess(q.encoded_text, cfg);
            q.gold = parse_explanation(cell(cells, expl_col));
            q.difficulty = difficulty_from_string(cell(cells, diff_col));
            q.split = split;
            out.push_back(std::move(q));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

}  // namespace

Corpus ingest_worldtree_tsv(const std::string& tables_dir, const std::string& questions_tsv,
                            const WorldTreeOptions& opts, const PreprocessConfig& cfg) {
    return ingest_worldtree_tsv_splits(tables_dir, {{questions_tsv, opts.default_split}}, opts,
                                       cfg);
}

Corpus ingest_worldtree_tsv_splits(const std::string& tables_dir,
                                   const std::vector<std::pair<std::string, Split>>& question_files,
                                   const WorldTreeOptions& opts, const PreprocessConfig& cfg) {
    auto facts = read_fact_tables(tables_dir, opts, cfg);
    std::vector<Query> queries;
    for (const auto& [path, split] : question_files)
        read_questions_tsv(path, split, cfg, queries);
    return Corpus(std::move(facts), std::move(queries), cfg);
}

}  // namespace chainrank
