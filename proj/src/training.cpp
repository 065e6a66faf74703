#include "chainrank/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "chainrank/evaluation.hpp"
#include "chainrank/rng.hpp"

namespace chainrank {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

template <typename T>
std::vector<T> sample_without_replacement(const std::vector<T>& pool, std::size_t n,
                                          std::mt19937_64& rng) {
    std::vector<T> copy = pool;
    std::shuffle(copy.begin(), copy.end(), rng);
    copy.resize(std::min(n, copy.size()));
    return copy;
}

}  // namespace

std::string to_string(Loss l) {
    switch (l) {
        case Loss::BXent: return "bxent";
        case Loss::RankNet: return "ranknet";
        case Loss::Nce: return "nce";
    }
    return "ranknet";
}

Loss loss_from_string(const std::string& s) {
    if (s == "bxent") return Loss::BXent;
    if (s == "ranknet") return Loss::RankNet;
    if (s == "nce") return Loss::Nce;
    throw std::runtime_error("unknown loss: " + s);
}

void TrainConfig::validate() const {
    if (k_train < 1) throw std::runtime_error("train: k must be positive");
    if (epochs < 1) throw std::runtime_error("train: epochs must be positive");
    if (learning_rate <= 0) throw std::runtime_error("train: learning rate must be positive");
    if (batch_samples < 2) throw std::runtime_error("train: batch must hold >= 2 samples");
    if (prefixes_per_query < 1) throw std::runtime_error("train: need >= 1 prefix per query");
    if (cn_max_fraction < 0 || cn_max_fraction > 1)
        throw std::runtime_error("train: cn_max_fraction must be in [0, 1]");
}

std::vector<PrefixSample> build_prefix_samples(const Corpus& corpus,
                                               const NeighborhoodIndex& index,
                                               const TrainConfig& config, std::mt19937_64& rng) {
    std::vector<PrefixSample> samples;
    for (const auto& q : corpus.queries()) {
        if (q.split != Split::Train || q.gold.empty()) continue;
        std::vector<std::uint32_t> gold;
        for (const auto& g : q.gold)
            gold.push_back(static_cast<std::uint32_t>(corpus.fact_index(g.uid)));
        std::unordered_set<std::uint32_t> gold_set(gold.begin(), gold.end());

        for (std::size_t p = 0; p < config.prefixes_per_query; p++) {
            PrefixSample s;
            s.query = &q;
            if (config.mode == TrainMode::SingleFact) {
                // No prefixes, no neighborhoods: positives are all gold,
                // negatives drawn uniformly corpus-wide at batch time.
                s.positives = gold;
                s.global_negatives = true;
                samples.push_back(std::move(s));
                continue;
            }
            std::uniform_int_distribution<std::size_t> n_dist(0, gold.size());
            std::size_t n = n_dist(rng);
            s.prefix = sample_without_replacement(gold, n, rng);
            std::unordered_set<std::uint32_t> in_prefix(s.prefix.begin(), s.prefix.end());
            for (auto f : visible_set(index, corpus, q, s.prefix, config.k_train)) {
                if (gold_set.count(f)) {
                    if (!in_prefix.count(f)) s.positives.push_back(f);
                } else {
                    s.negatives.push_back(f);
                }
            }
            s.stop_is_positive = s.positives.empty();
            samples.push_back(std::move(s));
        }
    }
    return samples;
}

PrefixSample apply_cn(const Corpus& corpus, const NeighborhoodIndex& index,
                      const PrefixSample& sample, int k, double max_fraction,
                      std::mt19937_64& rng) {
    PrefixSample out = sample;
    std::size_t n = sample.prefix.size();
    if (n == 0) return out;
    std::uniform_real_distribution<double> rho_dist(0.0, max_fraction);
    auto n_replace = static_cast<std::size_t>(std::llround(rho_dist(rng) * static_cast<double>(n)));
    if (n_replace == 0) return out;

    std::unordered_set<std::uint32_t> gold_set;
    for (const auto& g : sample.query->gold)
        gold_set.insert(static_cast<std::uint32_t>(corpus.fact_index(g.uid)));

    // Replacements come from the visible set of the prefix as it was
    // before the replacement.
    std::vector<std::uint32_t> pool;
    for (auto f : visible_set(index, corpus, *sample.query, sample.prefix, k))
        if (!gold_set.count(f)) pool.push_back(f);
    if (pool.empty()) return out;

    std::vector<std::size_t> positions(n);
    for (std::size_t i = 0; i < n; i++) positions[i] = i;
    auto chosen = sample_without_replacement(positions, n_replace, rng);
    auto replacements = sample_without_replacement(pool, chosen.size(), rng);
    for (std::size_t i = 0; i < replacements.size(); i++)
        out.prefix[chosen[i]] = replacements[i];

    // Recompute candidates against the modified prefix.
    out.positives.clear();
    out.negatives.clear();
    std::unordered_set<std::uint32_t> in_prefix(out.prefix.begin(), out.prefix.end());
    for (auto f : visible_set(index, corpus, *sample.query, out.prefix, k)) {
        if (gold_set.count(f)) {
            if (!in_prefix.count(f)) out.positives.push_back(f);
        } else {
            out.negatives.push_back(f);
        }
    }
    out.stop_is_positive = out.positives.empty();
    return out;
}

double loss_bxent(double score, int label) {
    // -[y ln s(x) + (1-y) ln(1-s(x))] = softplus(x) - y*x
    return softplus(score) - static_cast<double>(label) * score;
}

double loss_ranknet(double s_pos, double s_neg, bool literal) {
    if (!literal) return softplus(-(s_pos - s_neg));
    double diff = sigmoid(s_pos) - sigmoid(s_neg);
    return -std::log(std::max(diff, 1e-12));
}

double loss_nce(std::span<const double> scores, std::size_t positive_index,
                std::span<const double> log_pn) {
    if (scores.size() != log_pn.size() || scores.size() < 2)
        throw std::runtime_error("nce: need >= 2 candidates with matching log_pn");
    if (positive_index >= scores.size()) throw std::runtime_error("nce: bad positive index");
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scores.size(); i++) mx = std::max(mx, scores[i] - log_pn[i]);
    double denom = 0.0;
    for (std::size_t i = 0; i < scores.size(); i++)
        denom += std::exp(scores[i] - log_pn[i] - mx);
    return -(scores[positive_index] - log_pn[positive_index] - mx) + std::log(denom);
}

std::vector<Minibatch> make_minibatches(const Corpus& corpus,
                                        const std::vector<PrefixSample>& samples,
                                        const TrainConfig& config, std::mt19937_64& rng,
                                        BatchStats* stats) {
    std::vector<Minibatch> batches;
    std::optional<std::uint32_t> kStop = std::nullopt;

    auto global_negative_pool = [&](const PrefixSample& s) {
        std::unordered_set<std::uint32_t> gold(s.positives.begin(), s.positives.end());
        std::vector<std::uint32_t> pool;
        for (std::uint32_t i = 0; i < corpus.facts().size(); i++)
            if (!gold.count(i)) pool.push_back(i);
        return pool;
    };

    if (config.loss == Loss::BXent) {
        std::vector<std::pair<ScorerInput, int>> items;
        for (const auto& s : samples) {
            auto negatives = s.global_negatives
                                 ? sample_without_replacement(global_negative_pool(s),
                                                              s.positives.size() *
                                                                  (config.batch_samples - 1),
                                                              rng)
                                 : s.negatives;
            for (auto f : s.positives) items.push_back({{s.query, s.prefix, f}, 1});
            for (auto f : negatives) items.push_back({{s.query, s.prefix, f}, 0});
            if (!s.global_negatives)
                items.push_back({{s.query, s.prefix, kStop}, s.stop_is_positive ? 1 : 0});
        }
        std::shuffle(items.begin(), items.end(), rng);
        for (std::size_t i = 0; i < items.size(); i += config.batch_samples) {
            Minibatch b;
            b.loss = Loss::BXent;
            for (std::size_t j = i; j < std::min(items.size(), i + config.batch_samples); j++) {
                b.inputs.push_back(std::move(items[j].first));
                b.labels.push_back(items[j].second);
            }
            batches.push_back(std::move(b));
        }
        return batches;
    }

    // RankNet / NCE: one batch per positive, all candidates share the prefix.
    for (const auto& s : samples) {
        std::vector<std::optional<std::uint32_t>> positives;
        if (s.stop_is_positive) positives.push_back(kStop);
        for (auto f : s.positives) positives.push_back(f);

        std::vector<std::optional<std::uint32_t>> negative_pool;
        if (s.global_negatives) {
            for (auto f :
                 sample_without_replacement(global_negative_pool(s),
                                            (config.batch_samples - 1) * positives.size(), rng))
                negative_pool.push_back(f);
        } else {
            for (auto f : s.negatives) negative_pool.push_back(f);
            if (!s.stop_is_positive) negative_pool.push_back(kStop);
        }
        double vis_size = static_cast<double>(s.positives.size() + s.negatives.size());
        double log_pn = -std::log(std::max(1.0, vis_size));

        for (const auto& pos : positives) {
            auto negatives = negative_pool.size() > config.batch_samples - 1
                                 ? sample_without_replacement(negative_pool,
                                                              config.batch_samples - 1, rng)
                                 : negative_pool;
            if (negatives.empty()) {
                if (stats) stats->skipped_no_negatives++;
                continue;
            }
            Minibatch b;
            b.loss = config.loss;
            b.inputs.push_back({s.query, s.prefix, pos});
            for (const auto& n : negatives) b.inputs.push_back({s.query, s.prefix, n});
            std::vector<std::size_t> order(b.inputs.size());
            for (std::size_t i = 0; i < order.size(); i++) order[i] = i;
            std::shuffle(order.begin(), order.end(), rng);
            std::vector<ScorerInput> shuffled;
            shuffled.reserve(order.size());
            for (std::size_t i = 0; i < order.size(); i++) {
                if (order[i] == 0) b.positive_index = i;
                shuffled.push_back(std::move(b.inputs[order[i]]));
            }
            b.inputs = std::move(shuffled);
            b.log_pn.assign(b.inputs.size(), log_pn);
            batches.push_back(std::move(b));
        }
    }
    return batches;
}

double batch_loss_and_grad(const LinearScorer& scorer, const Minibatch& batch,
                           bool ranknet_literal, std::vector<double>* grad) {
    const FeatureContext& ctx = scorer.context();
    auto params = scorer.parameters();
    std::size_t n = batch.inputs.size();

    std::vector<std::array<double, kNumFeatures>> feats(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; i++) {
        feats[i] = extract_features(ctx, batch.inputs[i]);
        double s = params.back();
        for (std::size_t f = 0; f < kNumFeatures; f++) s += params[f] * feats[i][f];
        scores[i] = s;
    }

    std::vector<double> dscore(n, 0.0);
    double loss = 0.0;

    switch (batch.loss) {
        case Loss::BXent: {
            for (std::size_t i = 0; i < n; i++) {
                loss += loss_bxent(scores[i], batch.labels[i]);
                dscore[i] = sigmoid(scores[i]) - static_cast<double>(batch.labels[i]);
            }
            loss /= static_cast<double>(n);
            for (auto& d : dscore) d /= static_cast<double>(n);
            break;
        }
        case Loss::RankNet: {
            std::size_t p = batch.positive_index;
            std::size_t pairs = n - 1;
            for (std::size_t i = 0; i < n; i++) {
                if (i == p) continue;
                loss += loss_ranknet(scores[p], scores[i], ranknet_literal);
                if (!ranknet_literal) {
                    double g = -sigmoid(-(scores[p] - scores[i]));
                    dscore[p] += g;
                    dscore[i] -= g;
                } else {
                    double sp = sigmoid(scores[p]), sn = sigmoid(scores[i]);
                    double diff = std::max(sp - sn, 1e-12);
                    dscore[p] += -(sp * (1 - sp)) / diff;
                    dscore[i] += (sn * (1 - sn)) / diff;
                }
            }
            loss /= static_cast<double>(pairs);
            for (auto& d : dscore) d /= static_cast<double>(pairs);
            break;
        }
        case Loss::Nce: {
            loss = loss_nce(scores, batch.positive_index, batch.log_pn);
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; i++)
                mx = std::max(mx, scores[i] - batch.log_pn[i]);
            double denom = 0.0;
            std::vector<double> expv(n);
            for (std::size_t i = 0; i < n; i++) {
                expv[i] = std::exp(scores[i] - batch.log_pn[i] - mx);
                denom += expv[i];
            }
            for (std::size_t i = 0; i < n; i++) {
                dscore[i] = expv[i] / denom;
                if (i == batch.positive_index) dscore[i] -= 1.0;
            }
            break;
        }
    }

    if (grad) {
        grad->assign(LinearScorer::parameter_count(), 0.0);
        for (std::size_t i = 0; i < n; i++) {
            if (dscore[i] == 0.0) continue;
            for (std::size_t f = 0; f < kNumFeatures; f++)
                (*grad)[f] += dscore[i] * feats[i][f];
            (*grad)[kNumFeatures] += dscore[i];
        }
    }
    return loss;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const AdamConfig& config) {
    if (params.size() != grads.size()) throw std::runtime_error("adam: size mismatch");
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    for (double g : grads)
        if (!std::isfinite(g))
            throw std::runtime_error("adam: non-finite gradient at step " +
                                     std::to_string(state.t + 1));
    double decay = 1.0;
    if (config.total_steps > 0)
        decay = std::max(0.0, 1.0 - static_cast<double>(state.t) /
                                        static_cast<double>(config.total_steps));
    state.t++;
    double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
    double lr = config.learning_rate * decay;
    for (std::size_t i = 0; i < params.size(); i++) {
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        params[i] -= lr * (mhat / (std::sqrt(vhat) + config.eps) +
                           config.weight_decay * params[i]);
    }
}

TrainReport train(const Corpus& corpus, const NeighborhoodIndex& index, LinearScorer& scorer,
                  const TrainConfig& config, const InferConfig* eval_cfg) {
    config.validate();
    if (config.k_train > index.k_max)
        throw std::runtime_error("train: k exceeds index k_max");

    TrainReport report;
    BatchStats stats;

    // All epochs' batches are drawn up front so the LR schedule knows the
    // total step count.
    std::vector<std::vector<Minibatch>> epoch_batches;
    for (int e = 0; e < config.epochs; e++) {
        auto rng = make_rng(config.seed, "samples", static_cast<std::uint64_t>(e));
        auto samples = build_prefix_samples(corpus, index, config, rng);
        if (config.cn_enabled && config.mode == TrainMode::Arcf && e >= config.cn_start_epoch) {
            for (auto& s : samples)
                s = apply_cn(corpus, index, s, config.k_train, config.cn_max_fraction, rng);
        }
        epoch_batches.push_back(make_minibatches(corpus, samples, config, rng, &stats));
    }
    long total_steps = 0;
    for (const auto& b : epoch_batches) total_steps += static_cast<long>(b.size());

    AdamConfig adam;
    adam.learning_rate = config.learning_rate;
    adam.beta1 = config.adam_beta1;
    adam.beta2 = config.adam_beta2;
    adam.eps = config.adam_eps;
    adam.weight_decay = config.weight_decay;
    adam.total_steps = total_steps;
    AdamState state;

    auto params = scorer.parameters();
    std::vector<double> grad;

    for (int e = 0; e < config.epochs; e++) {
        double loss_sum = 0.0;
        for (const auto& batch : epoch_batches[static_cast<std::size_t>(e)]) {
            loss_sum += batch_loss_and_grad(scorer, batch, config.ranknet_literal, &grad);
            adam_step(params, grad, state, adam);
            scorer.set_parameters(params);
        }
        EpochStats es;
        es.epoch = e;
        std::size_t nb = epoch_batches[static_cast<std::size_t>(e)].size();
        es.mean_loss = nb > 0 ? loss_sum / static_cast<double>(nb) : 0.0;
        if (config.eval_val && eval_cfg != nullptr) {
            std::unordered_map<std::string, std::vector<std::string>> rankings;
            auto val = corpus.queries_in_split(Split::Val);
            for (const auto* q : val)
                rankings[q->qid] =
                    infer(*q, corpus, index, scorer, scorer.context(), *eval_cfg).ranking;
            es.val_map = map_score(rankings, corpus, Split::Val);
        }
        report.epochs.push_back(es);
    }
    report.skipped_batches = stats.skipped_no_negatives;
    report.steps = state.t;
    return report;
}

}  // namespace chainrank
