#pragma once

#include <string>
#include <vector>

#include "chainrank/evaluation.hpp"
#include "chainrank/inference.hpp"
#include "chainrank/training.hpp"

namespace chainrank {

enum class InferMode { Arcf, SingleFact, Tfidf };

std::string to_string(InferMode m);
InferMode infer_mode_from_string(const std::string& s);

// Rankings for every query in the split; queries fan out across threads.
RankingMap run_inference(const Corpus& corpus, const NeighborhoodIndex& index,
                         const Scorer& scorer, const FeatureContext& ctx,
                         const InferConfig& config, Split split, InferMode mode);

std::vector<std::string> split_qids(const Corpus& corpus, Split split);

struct AblationRow {
    std::string name;
    Loss loss;
    bool cn;
    TrainMode train_mode;
    InferMode infer_mode;
    bool s2, r3;
    double val_map = 0.0;
};

// Table of ablation cells relative to the full configuration: loss swap,
// CN, single-fact training/inference, and the S2/R3 ranking tiers.
std::vector<AblationRow> run_ablation_grid(const Corpus& corpus, const NeighborhoodIndex& index,
                                           std::shared_ptr<const FeatureContext> ctx,
                                           const TrainConfig& base_train,
                                           const InferConfig& base_infer, Split eval_split);

void write_ablation_csv(const std::vector<AblationRow>& rows, const std::string& path);

}  // namespace chainrank
