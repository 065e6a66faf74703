#include "chainrank/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_set>

namespace chainrank {

double SparseVector::norm() const {
    double s = 0.0;
    for (const auto& [id, w] : entries) s += w * w;
    return std::sqrt(s);
}

void SparseVector::l2_normalize() {
    double n = norm();
    if (n <= 0.0) return;
    for (auto& [id, w] : entries) w /= n;
}

double dot(const SparseVector& a, const SparseVector& b) {
    double s = 0.0;
    auto ia = a.entries.begin(), ib = b.entries.begin();
    while (ia != a.entries.end() && ib != b.entries.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else { s += ia->second * ib->second; ++ia; ++ib; }
    }
    return s;
}

double cosine_distance(const SparseVector& a, const SparseVector& b) {
    if (a.empty() || b.empty()) return 1.0;
    return 1.0 - dot(a, b);
}

double lexical_overlap_distance(const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
    std::unordered_set<std::string> sa(a.begin(), a.end());
    std::unordered_set<std::string> seen;
    std::size_t common = 0;
    for (const auto& t : b) {
        if (sa.count(t) && seen.insert(t).second) common++;
    }
    if (common == 0) return std::numeric_limits<double>::infinity();
    return 1.0 / static_cast<double>(common);
}

TfidfModel TfidfModel::fit(const std::vector<std::vector<std::string>>& documents) {
    TfidfModel model;
    model.document_count_ = documents.size();

    // Sorted term map keeps term-id assignment independent of hash order.
    std::map<std::string, std::size_t> df;
    for (const auto& doc : documents) {
        std::unordered_set<std::string> uniq(doc.begin(), doc.end());
        for (const auto& t : uniq) df[t]++;
    }

    model.idf_.reserve(df.size());
    std::uint32_t next_id = 0;
    double d = static_cast<double>(model.document_count_);
    for (const auto& [term, freq] : df) {
        model.vocabulary_.emplace(term, next_id++);
        model.idf_.push_back(std::log((1.0 + d) / (1.0 + static_cast<double>(freq))) + 1.0);
    }
    return model;
}

SparseVector TfidfModel::vectorize(const std::vector<std::string>& tokens) const {
    std::unordered_map<std::uint32_t, double> counts;
    for (const auto& t : tokens) {
        auto it = vocabulary_.find(t);
        if (it != vocabulary_.end()) counts[it->second] += 1.0;
    }
    SparseVector v;
    v.entries.reserve(counts.size());
    for (const auto& [id, tf] : counts) v.entries.emplace_back(id, tf * idf_[id]);
    std::sort(v.entries.begin(), v.entries.end());
    v.l2_normalize();
    return v;
}

double TfidfModel::idf(const std::string& term) const {
    auto it = vocabulary_.find(term);
    return it == vocabulary_.end() ? 0.0 : idf_[it->second];
}

}  // namespace chainrank
