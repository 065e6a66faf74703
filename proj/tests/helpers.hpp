#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "chainrank/corpus.hpp"

namespace testutil {

inline chainrank::Fact fact(std::string uid, std::string text) {
    chainrank::Fact f;
    f.uid = std::move(uid);
    f.text = std::move(text);
    f.tokens = chainrank::preprocess(f.text);
    return f;
}

inline chainrank::Query query(std::string qid, std::string question, std::string answer,
                              std::vector<chainrank::GoldEntry> gold,
                              chainrank::Split split = chainrank::Split::Train) {
    chainrank::Query q;
    q.qid = std::move(qid);
    q.question_text = std::move(question);
    q.answer_text = std::move(answer);
    q.encoded_text = q.question_text + " (answer) " + q.answer_text;
    q.tokens = chainrank::preprocess(q.encoded_text);
    q.gold = std::move(gold);
    q.split = split;
    return q;
}

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("chainrank_test_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    f << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace testutil
