#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace chainrank {

// Term-id/weight pairs with strictly increasing ids; tf-idf vectors are
// L2-normalized unless empty.
struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries;

    bool empty() const { return entries.empty(); }
    double norm() const;
    void l2_normalize();
};

double dot(const SparseVector& a, const SparseVector& b);

// 1 - dot for unit vectors; distance to the zero vector is defined as 1.
double cosine_distance(const SparseVector& a, const SparseVector& b);

// Reciprocal number of unique words in common; +inf when disjoint.
double lexical_overlap_distance(const std::vector<std::string>& a,
                                const std::vector<std::string>& b);

class TfidfModel {
public:
    // idf(t) = ln((1 + D) / (1 + df(t))) + 1 over the indexed documents.
    static TfidfModel fit(const std::vector<std::vector<std::string>>& documents);

    // Unknown terms get zero weight; result L2-normalized when nonzero.
    SparseVector vectorize(const std::vector<std::string>& tokens) const;

    std::size_t vocabulary_size() const { return vocabulary_.size(); }
    std::size_t document_count() const { return document_count_; }
    double idf(const std::string& term) const;  // 0 when unknown

private:
    std::unordered_map<std::string, std::uint32_t> vocabulary_;
    std::vector<double> idf_;
    std::size_t document_count_ = 0;
};

}  // namespace chainrank
