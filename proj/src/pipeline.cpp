#include "chainrank/pipeline.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

namespace chainrank {

std::string to_string(InferMode m) {
    switch (m) {
        case InferMode::Arcf: return "arcf";
        case InferMode::SingleFact: return "single-fact";
        case InferMode::Tfidf: return "tfidf";
    }
    return "arcf";
}

InferMode infer_mode_from_string(const std::string& s) {
    if (s == "arcf") return InferMode::Arcf;
    if (s == "single-fact" || s == "sf") return InferMode::SingleFact;
    if (s == "tfidf") return InferMode::Tfidf;
    throw std::runtime_error("unknown inference mode: " + s);
}

std::vector<std::string> split_qids(const Corpus& corpus, Split split) {
    std::vector<std::string> qids;
    for (const auto& q : corpus.queries())
        if (q.split == split) qids.push_back(q.qid);
    return qids;
}

RankingMap run_inference(const Corpus& corpus, const NeighborhoodIndex& index,
                         const Scorer& scorer, const FeatureContext& ctx,
                         const InferConfig& config, Split split, InferMode mode) {
    auto queries = corpus.queries_in_split(split);
    std::vector<std::vector<std::string>> rankings(queries.size());
    std::ptrdiff_t n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; i++) {
        const Query& q = *queries[static_cast<std::size_t>(i)];
        RankingResult r;
        switch (mode) {
            case InferMode::Arcf: r = infer(q, corpus, index, scorer, ctx, config); break;
            case InferMode::SingleFact: r = infer_single_fact(q, corpus, scorer); break;
            case InferMode::Tfidf: r = infer_tfidf_baseline(q, corpus, ctx); break;
        }
        rankings[static_cast<std::size_t>(i)] = std::move(r.ranking);
    }
    RankingMap out;
    for (std::size_t i = 0; i < queries.size(); i++)
        out.emplace(queries[i]->qid, std::move(rankings[i]));
    return out;
}

std::vector<AblationRow> run_ablation_grid(const Corpus& corpus, const NeighborhoodIndex& index,
                                           std::shared_ptr<const FeatureContext> ctx,
                                           const TrainConfig& base_train,
                                           const InferConfig& base_infer, Split eval_split) {
    std::vector<AblationRow> rows = {
        {"arcf_ranknet", Loss::RankNet, false, TrainMode::Arcf, InferMode::Arcf, true, true},
        {"arcf_ranknet_cn", Loss::RankNet, true, TrainMode::Arcf, InferMode::Arcf, true, true},
        {"arcf_nce", Loss::Nce, false, TrainMode::Arcf, InferMode::Arcf, true, true},
        {"arcf_nce_cn", Loss::Nce, true, TrainMode::Arcf, InferMode::Arcf, true, true},
        {"w_bxent", Loss::BXent, false, TrainMode::Arcf, InferMode::Arcf, true, true},
        {"w_sf_train", Loss::BXent, false, TrainMode::SingleFact, InferMode::Arcf, true, true},
        {"w_sf_inf", Loss::RankNet, false, TrainMode::Arcf, InferMode::SingleFact, true, true},
        {"wo_prefix_neighb", Loss::RankNet, false, TrainMode::SingleFact, InferMode::SingleFact,
         true, true},
        {"wo_r3", Loss::RankNet, false, TrainMode::Arcf, InferMode::Arcf, true, false},
        {"wo_r3_s2", Loss::RankNet, false, TrainMode::Arcf, InferMode::Arcf, false, false},
    };

    // One trained model per distinct (loss, cn, train mode) cell.
    std::map<std::tuple<int, bool, int>, std::vector<double>> trained;
    for (auto& row : rows) {
        auto key = std::make_tuple(static_cast<int>(row.loss), row.cn,
                                   static_cast<int>(row.train_mode));
        auto it = trained.find(key);
        if (it == trained.end()) {
            TrainConfig tc = base_train;
            tc.loss = row.loss;
            tc.cn_enabled = row.cn;
            tc.mode = row.train_mode;
            tc.eval_val = false;
            LinearScorer scorer(ctx);
            train(corpus, index, scorer, tc, nullptr);
            it = trained.emplace(key, scorer.parameters()).first;
        }
        LinearScorer scorer(ctx);
        scorer.set_parameters(it->second);
        InferConfig ic = base_infer;
        ic.s2 = row.s2;
        ic.r3 = row.r3;
        auto rankings = run_inference(corpus, index, scorer, *ctx, ic, eval_split, row.infer_mode);
        row.val_map = map_score(rankings, corpus, eval_split);
    }
    return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ablation file: " + path);
    out << "name,loss,cn,train_mode,infer_mode,s2,r3,map\n";
    for (const auto& r : rows)
        out << r.name << ',' << to_string(r.loss) << ',' << (r.cn ? 1 : 0) << ','
            << (r.train_mode == TrainMode::Arcf ? "arcf" : "single-fact") << ','
            << to_string(r.infer_mode) << ',' << (r.s2 ? 1 : 0) << ',' << (r.r3 ? 1 : 0) << ','
            << r.val_map << '\n';
}

}  // namespace chainrank
