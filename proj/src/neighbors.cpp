#include "chainrank/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

using nlohmann::json;

namespace chainrank {

std::string to_string(Metric m) { return m == Metric::Tfidf ? "tfidf" : "lexical"; }

Metric metric_from_string(const std::string& s) {
    if (s == "tfidf") return Metric::Tfidf;
    if (s == "lexical") return Metric::Lexical;
    throw std::runtime_error("unknown metric: " + s);
}

TfidfModel fit_corpus_tfidf(const Corpus& corpus) {
    std::vector<std::vector<std::string>> docs;
    docs.reserve(corpus.facts().size());
    for (const auto& f : corpus.facts()) docs.push_back(f.tokens);
    for (const auto& q : corpus.queries())
        if (q.split == Split::Train) docs.push_back(q.tokens);
    return TfidfModel::fit(docs);
}

std::vector<SparseVector> compute_fact_vectors(const Corpus& corpus, const TfidfModel& model) {
    std::vector<SparseVector> vecs(corpus.facts().size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(corpus.facts().size()); i++)
        vecs[static_cast<std::size_t>(i)] =
            model.vectorize(corpus.facts()[static_cast<std::size_t>(i)].tokens);
    return vecs;
}

namespace {

// Ascending (distance, uid) order, expressed through precomputed uid ranks.
std::vector<std::uint32_t> select_k(const std::vector<double>& dist,
                                    const std::vector<std::uint32_t>& uid_rank,
                                    std::ptrdiff_t self, int k) {
    std::vector<std::uint32_t> ids;
    ids.reserve(dist.size());
    for (std::uint32_t i = 0; i < dist.size(); i++)
        if (static_cast<std::ptrdiff_t>(i) != self) ids.push_back(i);
    auto cmp = [&](std::uint32_t a, std::uint32_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return uid_rank[a] < uid_rank[b];
    };
    std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(kk), ids.end(), cmp);
    ids.resize(kk);
    return ids;
}

std::vector<std::uint32_t> uid_ranks(const Corpus& corpus) {
    std::vector<std::uint32_t> order(corpus.facts().size());
    for (std::uint32_t i = 0; i < order.size(); i++) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return corpus.facts()[a].uid < corpus.facts()[b].uid;
    });
    std::vector<std::uint32_t> rank(order.size());
    for (std::uint32_t pos = 0; pos < order.size(); pos++) rank[order[pos]] = pos;
    return rank;
}

std::vector<double> distances_to_facts(const Corpus& corpus,
                                       const std::vector<SparseVector>& fact_vecs,
                                       const SparseVector& anchor_vec,
                                       const std::vector<std::string>& anchor_tokens,
                                       Metric metric) {
    std::vector<double> dist(corpus.facts().size());
    if (metric == Metric::Tfidf) {
        for (std::size_t i = 0; i < fact_vecs.size(); i++)
            dist[i] = cosine_distance(anchor_vec, fact_vecs[i]);
    } else {
        for (std::size_t i = 0; i < dist.size(); i++)
            dist[i] = lexical_overlap_distance(anchor_tokens, corpus.facts()[i].tokens);
    }
    return dist;
}

}  // namespace

std::vector<std::uint32_t> nearest_k_bruteforce(const Corpus& corpus,
                                                const std::vector<SparseVector>& fact_vectors,
                                                const SparseVector& anchor_vector,
                                                const std::vector<std::string>& anchor_tokens,
                                                std::ptrdiff_t self_index, Metric metric, int k) {
    auto dist = distances_to_facts(corpus, fact_vectors, anchor_vector, anchor_tokens, metric);
    auto rank = uid_ranks(corpus);
    return select_k(dist, rank, self_index, k);
}

NeighborhoodIndex build_neighborhood_index(const Corpus& corpus, const TfidfModel& model,
                                           Metric metric, int k_max, bool parallel) {
    if (k_max < 1) throw std::runtime_error("k_max must be positive");
    NeighborhoodIndex index;
    index.metric = metric;
    index.k_max = k_max;
    index.fingerprint = corpus.fingerprint();

    auto fact_vecs = compute_fact_vectors(corpus, model);
    auto rank = uid_ranks(corpus);
    std::size_t n_facts = corpus.facts().size();
    std::size_t n_queries = corpus.queries().size();

    index.fact_lists.resize(n_facts);
    std::vector<std::vector<std::uint32_t>> qlists(n_queries);

    auto anchor_list = [&](std::size_t a) {
        if (a < n_facts) {
            auto dist = distances_to_facts(corpus, fact_vecs, fact_vecs[a],
                                           corpus.facts()[a].tokens, metric);
            index.fact_lists[a] = select_k(dist, rank, static_cast<std::ptrdiff_t>(a), k_max);
        } else {
            const Query& q = corpus.queries()[a - n_facts];
            SparseVector qv;
            if (metric == Metric::Tfidf) qv = model.vectorize(q.tokens);
            auto dist = distances_to_facts(corpus, fact_vecs, qv, q.tokens, metric);
            qlists[a - n_facts] = select_k(dist, rank, -1, k_max);
        }
    };

    std::ptrdiff_t total = static_cast<std::ptrdiff_t>(n_facts + n_queries);
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t a = 0; a < total; a++) anchor_list(static_cast<std::size_t>(a));
    } else {
        for (std::ptrdiff_t a = 0; a < total; a++) anchor_list(static_cast<std::size_t>(a));
    }

    for (std::size_t i = 0; i < n_queries; i++)
        index.query_lists.emplace(corpus.queries()[i].qid, std::move(qlists[i]));
    return index;
}

std::span<const std::uint32_t> NeighborhoodIndex::fact_neighbors(std::uint32_t fact_idx,
                                                                 int k) const {
    if (k < 1 || k > k_max) throw std::runtime_error("k out of range for this index");
    const auto& list = fact_lists.at(fact_idx);
    return {list.data(), std::min<std::size_t>(static_cast<std::size_t>(k), list.size())};
}

std::span<const std::uint32_t> NeighborhoodIndex::query_neighbors(const std::string& qid,
                                                                  int k) const {
    if (k < 1 || k > k_max) throw std::runtime_error("k out of range for this index");
    auto it = query_lists.find(qid);
    if (it == query_lists.end()) throw std::runtime_error("unknown anchor qid: " + qid);
    return {it->second.data(), std::min<std::size_t>(static_cast<std::size_t>(k), it->second.size())};
}

void save_index(const NeighborhoodIndex& index, const Corpus& corpus, const std::string& path) {
    json j;
    j["version"] = 1;
    j["fingerprint"] = index.fingerprint;
    j["metric"] = to_string(index.metric);
    j["k_max"] = index.k_max;
    json uids = json::array();
    for (const auto& f : corpus.facts()) uids.push_back(f.uid);
    j["fact_uids"] = std::move(uids);
    j["fact_lists"] = index.fact_lists;
    json ql = json::object();
    for (const auto& [qid, list] : index.query_lists) ql[qid] = list;
    j["query_lists"] = std::move(ql);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write index file: " + path);
    out << j.dump() << '\n';
}

NeighborhoodIndex load_index(const std::string& path, const Corpus& corpus) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    json j = json::parse(in);
    NeighborhoodIndex index;
    index.fingerprint = j.at("fingerprint").get<std::string>();
    if (index.fingerprint != corpus.fingerprint())
        throw std::runtime_error("index fingerprint does not match corpus: " + path);
    index.metric = metric_from_string(j.at("metric").get<std::string>());
    index.k_max = j.at("k_max").get<int>();
    auto uids = j.at("fact_uids").get<std::vector<std::string>>();
    if (uids.size() != corpus.facts().size())
        throw std::runtime_error("index fact count does not match corpus: " + path);
    for (std::size_t i = 0; i < uids.size(); i++)
        if (uids[i] != corpus.facts()[i].uid)
            throw std::runtime_error("index fact order does not match corpus: " + path);
    index.fact_lists = j.at("fact_lists").get<std::vector<std::vector<std::uint32_t>>>();
    for (auto& [qid, list] : j.at("query_lists").items())
        index.query_lists.emplace(qid, list.get<std::vector<std::uint32_t>>());
    return index;
}

std::vector<std::uint32_t> visible_set(const NeighborhoodIndex& index, const Corpus& corpus,
                                       const Query& query,
                                       std::span<const std::uint32_t> prefix_facts, int k) {
    std::vector<bool> in_prefix(corpus.facts().size(), false);
    for (auto f : prefix_facts) in_prefix[f] = true;
    std::vector<bool> seen(corpus.facts().size(), false);
    std::vector<std::uint32_t> out;
    auto add = [&](std::span<const std::uint32_t> list) {
        for (auto f : list) {
            if (in_prefix[f] || seen[f]) continue;
            seen[f] = true;
            out.push_back(f);
        }
    };
    add(index.query_neighbors(query.qid, k));
    for (auto f : prefix_facts) add(index.fact_neighbors(f, k));
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// BFS through gold facts only; returns hop at which each gold fact index is
// first reached.
std::unordered_map<std::uint32_t, int> gold_bfs(const Corpus& corpus,
                                                const NeighborhoodIndex* index, int k,
                                                const Query& query, HopMetric metric) {
    std::unordered_set<std::uint32_t> gold;
    for (const auto& g : query.gold) gold.insert(static_cast<std::uint32_t>(corpus.fact_index(g.uid)));

    auto lexically_adjacent = [&](const std::vector<std::string>& anchor_tokens,
                                  std::uint32_t fact) {
        return std::isfinite(
            lexical_overlap_distance(anchor_tokens, corpus.facts()[fact].tokens));
    };

    std::unordered_map<std::uint32_t, int> hops;
    // Frontier at hop h-1: the query (h=1) plus all gold facts reached so far.
    std::vector<std::uint32_t> frontier;  // gold fact indices reached last round
    bool query_frontier = true;
    int hop = 0;
    while (query_frontier || !frontier.empty()) {
        hop++;
        std::vector<std::uint32_t> next;
        auto expand_to = [&](std::uint32_t f) {
            if (!gold.count(f) || hops.count(f)) return;
            hops.emplace(f, hop);
            next.push_back(f);
        };
        if (query_frontier) {
            if (metric == HopMetric::Neighborhood) {
                for (auto f : index->query_neighbors(query.qid, k)) expand_to(f);
            } else {
                for (auto f : gold)
                    if (lexically_adjacent(query.tokens, f)) expand_to(f);
            }
            query_frontier = false;
        }
        for (auto a : frontier) {
            if (metric == HopMetric::Neighborhood) {
                for (auto f : index->fact_neighbors(a, k)) expand_to(f);
            } else {
                for (auto f : gold)
                    if (lexically_adjacent(corpus.facts()[a].tokens, f)) expand_to(f);
            }
        }
        frontier = std::move(next);
    }
    return hops;
}

}  // namespace

std::unordered_map<std::string, int> hop_distances(const Corpus& corpus,
                                                   const NeighborhoodIndex* index, int k,
                                                   const Query& query, HopMetric metric) {
    if (metric == HopMetric::Neighborhood && index == nullptr)
        throw std::runtime_error("neighborhood hop metric needs an index");
    auto hops = gold_bfs(corpus, index, k, query, metric);
    std::unordered_map<std::string, int> out;
    for (const auto& g : query.gold) {
        auto it = hops.find(static_cast<std::uint32_t>(corpus.fact_index(g.uid)));
        out[g.uid] = it == hops.end() ? kInfiniteHops : it->second;
    }
    return out;
}

double reachable_gold_fraction(const Corpus& corpus, const NeighborhoodIndex& index, int k) {
    auto train = corpus.queries_in_split(Split::Train);
    if (train.empty()) return 0.0;
    double total = 0.0;
    std::ptrdiff_t n = static_cast<std::ptrdiff_t>(train.size());
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : total)
    for (std::ptrdiff_t i = 0; i < n; i++) {
        const Query& q = *train[static_cast<std::size_t>(i)];
        if (q.gold.empty()) continue;
        auto hops = gold_bfs(corpus, &index, k, q, HopMetric::Neighborhood);
        total += static_cast<double>(hops.size()) / static_cast<double>(q.gold.size());
    }
    return total / static_cast<double>(train.size());
}

}  // namespace chainrank
