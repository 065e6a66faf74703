#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "chainrank/corpus.hpp"
#include "chainrank/inference.hpp"
#include "chainrank/neighbors.hpp"
#include "chainrank/scorer.hpp"

namespace chainrank {

enum class Loss { BXent, RankNet, Nce };
enum class TrainMode { Arcf, SingleFact };

std::string to_string(Loss l);
Loss loss_from_string(const std::string& s);

struct TrainConfig {
    Loss loss = Loss::RankNet;
    TrainMode mode = TrainMode::Arcf;
    int k_train = 180;
    int epochs = 4;
    double learning_rate = 1e-2;  // linear-scorer scale; 2e-5 is for neural scorers
    double weight_decay = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_samples = 64;
    std::size_t prefixes_per_query = 8;
    bool cn_enabled = false;
    int cn_start_epoch = 2;  // CN kicks in from this 0-based epoch
    double cn_max_fraction = 0.3;
    bool ranknet_literal = false;  // log-of-sigmoid-difference form, clamped
    std::uint64_t seed = 0;
    bool eval_val = true;

    void validate() const;
};

// prefix holds gold facts (before CN replacement); positives are the
// remaining gold facts visible from the prefix, negatives the visible
// non-gold. STOP is the positive when no visible gold remains.
struct PrefixSample {
    const Query* query = nullptr;
    std::vector<std::uint32_t> prefix;
    std::vector<std::uint32_t> positives;
    std::vector<std::uint32_t> negatives;
    bool stop_is_positive = false;
    bool global_negatives = false;  // single-fact mode: negatives drawn corpus-wide
};

std::vector<PrefixSample> build_prefix_samples(const Corpus& corpus,
                                               const NeighborhoodIndex& index,
                                               const TrainConfig& config, std::mt19937_64& rng);

// Exposure-bias mitigation: replace round(rho * N) prefix gold facts, with
// rho ~ U(0, max_fraction), by uniform non-gold draws from the visible set
// of the unmodified prefix, then recompute positives/negatives.
PrefixSample apply_cn(const Corpus& corpus, const NeighborhoodIndex& index,
                      const PrefixSample& sample, int k, double max_fraction,
                      std::mt19937_64& rng);

double loss_bxent(double score, int label);
double loss_ranknet(double s_pos, double s_neg, bool literal = false);
// log_pn is the noise distribution's log-probability per candidate; with a
// uniform P_n this reduces to softmax cross-entropy.
double loss_nce(std::span<const double> scores, std::size_t positive_index,
                std::span<const double> log_pn);

// For RankNet/NCE: inputs with one positive at positive_index, candidate
// order shuffled. For bXENT: pointwise inputs with labels, prefixes mixed.
struct Minibatch {
    Loss loss = Loss::RankNet;
    std::vector<ScorerInput> inputs;
    std::size_t positive_index = 0;
    std::vector<int> labels;
    std::vector<double> log_pn;
};

struct BatchStats {
    std::size_t skipped_no_negatives = 0;
};

std::vector<Minibatch> make_minibatches(const Corpus& corpus,
                                        const std::vector<PrefixSample>& samples,
                                        const TrainConfig& config, std::mt19937_64& rng,
                                        BatchStats* stats = nullptr);

// Loss and analytic gradient w.r.t. the linear scorer's parameters
// (theta..., bias). Gradients accumulate into grad when non-null.
double batch_loss_and_grad(const LinearScorer& scorer, const Minibatch& batch,
                           bool ranknet_literal, std::vector<double>* grad);

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
};

struct AdamConfig {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled
    long total_steps = 0;       // linear LR decay to 0; 0 disables decay
};

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const AdamConfig& config);

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double val_map = -1.0;  // negative when not evaluated
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::size_t skipped_batches = 0;
    long steps = 0;
};

// Deterministic under config.seed. eval_cfg drives the per-epoch
// validation-MAP runs when config.eval_val is set.
TrainReport train(const Corpus& corpus, const NeighborhoodIndex& index, LinearScorer& scorer,
                  const TrainConfig& config, const InferConfig* eval_cfg = nullptr);

}  // namespace chainrank
