#include "chainrank/evaluation.hpp"

#include <map>

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace chainrank {

double average_precision(const std::vector<std::string>& ranking,
                         const std::unordered_set<std::string>& gold) {
    if (gold.empty()) throw std::runtime_error("average_precision: empty gold set");
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < ranking.size(); r++) {
        if (gold.count(ranking[r])) {
            hits++;
            sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    return sum / static_cast<double>(gold.size());
}

namespace {

const std::vector<std::string>& ranking_for(const RankingMap& rankings, const std::string& qid) {
    auto it = rankings.find(qid);
    if (it == rankings.end()) throw std::runtime_error("no ranking for qid: " + qid);
    return it->second;
}

}  // namespace

double map_score(const RankingMap& rankings, const Corpus& corpus, Split split) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& q : corpus.queries()) {
        if (q.split != split || q.gold.empty()) continue;
        std::unordered_set<std::string> gold;
        for (const auto& g : q.gold) gold.insert(g.uid);
        sum += average_precision(ranking_for(rankings, q.qid), gold);
        n++;
    }
    if (n == 0) throw std::runtime_error("map_score: no scored queries in split");
    return sum / static_cast<double>(n);
}

double restricted_map(const RankingMap& rankings, const Corpus& corpus, Split split,
                      const GoldPredicate& keep, std::size_t* num_contributing) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& q : corpus.queries()) {
        if (q.split != split || q.gold.empty()) continue;
        std::unordered_set<std::string> retained, dropped;
        for (const auto& g : q.gold)
            (keep(q, g) ? retained : dropped).insert(g.uid);
        if (retained.empty()) continue;
        std::vector<std::string> filtered;
        const auto& ranking = ranking_for(rankings, q.qid);
        filtered.reserve(ranking.size());
        for (const auto& uid : ranking)
            if (!dropped.count(uid)) filtered.push_back(uid);
        sum += average_precision(filtered, retained);
        n++;
    }
    if (num_contributing) *num_contributing = n;
    if (n == 0) throw std::runtime_error("restricted_map: predicate retains no gold anywhere");
    return sum / static_cast<double>(n);
}

std::vector<HopBucket> default_hop_buckets() {
    return {{1, 1, "1"},
            {2, 2, "2"},
            {3, 4, "3-4"},
            {5, kInfiniteHops - 1, ">=5"},
            {kInfiniteHops, kInfiniteHops, "inf"}};
}

EvalReport breakdown_report(const RankingMap& rankings, const Corpus& corpus, Split split,
                            const NeighborhoodIndex& index, int k,
                            const std::vector<HopBucket>& buckets) {
    EvalReport report;
    report.overall_map = map_score(rankings, corpus, split);

    std::size_t n_split = 0;
    for (const auto& q : corpus.queries())
        if (q.split == split && !q.gold.empty()) n_split++;
    report.rows.push_back({"overall", "all", n_split, report.overall_map});

    auto add_restricted = [&](const std::string& type, const std::string& key,
                              const GoldPredicate& keep) {
        std::size_t n = 0;
        try {
            double v = restricted_map(rankings, corpus, split, keep, &n);
            report.rows.push_back({type, key, n, v});
        } catch (const std::runtime_error&) {
            // Slice retained nothing anywhere; reported as absent.
        }
    };

    for (Role role : {Role::Central, Role::Grounding, Role::LexGlue})
        add_restricted("role", to_string(role),
                       [role](const Query&, const GoldEntry& g) { return g.role == role; });

    for (Difficulty d : {Difficulty::Easy, Difficulty::Challenge}) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& q : corpus.queries()) {
            if (q.split != split || q.gold.empty() || q.difficulty != d) continue;
            std::unordered_set<std::string> gold;
            for (const auto& g : q.gold) gold.insert(g.uid);
            sum += average_precision(ranking_for(rankings, q.qid), gold);
            n++;
        }
        if (n > 0)
            report.rows.push_back({"difficulty", to_string(d), n, sum / static_cast<double>(n)});
    }

    // Hop-distance slices under both hop metrics.
    for (HopMetric metric : {HopMetric::Neighborhood, HopMetric::LexicalOverlap}) {
        std::string type = metric == HopMetric::Neighborhood ? "hops_neighborhood" : "hops_lexical";
        // Hops per (qid, gold uid), computed once per query.
        std::unordered_map<std::string, std::unordered_map<std::string, int>> hops;
        for (const auto& q : corpus.queries()) {
            if (q.split != split || q.gold.empty()) continue;
            hops[q.qid] = hop_distances(corpus, &index, k, q, metric);
        }
        for (const auto& bucket : buckets) {
            add_restricted(type, bucket.label, [&hops, bucket](const Query& q, const GoldEntry& g) {
                int h = hops.at(q.qid).at(g.uid);
                return h >= bucket.lo && h <= bucket.hi;
            });
        }
    }

    // MAP by explanation length, plus the length histogram.
    std::map<std::size_t, std::pair<double, std::size_t>> by_g;
    for (const auto& q : corpus.queries()) {
        if (q.split != split || q.gold.empty()) continue;
        std::unordered_set<std::string> gold;
        for (const auto& g : q.gold) gold.insert(g.uid);
        auto& [sum, n] = by_g[q.gold.size()];
        sum += average_precision(ranking_for(rankings, q.qid), gold);
        n++;
    }
    for (const auto& [g, entry] : by_g)
        report.rows.push_back({"map_by_g", std::to_string(g), entry.second,
                               entry.first / static_cast<double>(entry.second)});
    for (const auto& [g, entry] : by_g)
        report.rows.push_back({"g_histogram", std::to_string(g), entry.second,
                               static_cast<double>(entry.second)});

    return report;
}

void write_report_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report file: " + path);
    out << "slice_type,slice_key,num_queries,map\n";
    for (const auto& row : report.rows)
        out << row.slice_type << ',' << row.slice_key << ',' << row.num_queries << ','
            << row.value << '\n';
}

void write_ranks_tsv(const RankingMap& rankings, const std::vector<std::string>& qid_order,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ranks file: " + path);
    for (const auto& qid : qid_order) {
        auto it = rankings.find(qid);
        if (it == rankings.end()) throw std::runtime_error("no ranking for qid: " + qid);
        for (const auto& uid : it->second) out << qid << '\t' << uid << '\n';
    }
}

RankingMap read_ranks_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ranks file: " + path);
    RankingMap out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected qid<TAB>uid");
        out[line.substr(0, tab)].push_back(line.substr(tab + 1));
    }
    return out;
}

}  // namespace chainrank
