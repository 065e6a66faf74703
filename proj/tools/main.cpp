#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "chainrank/corpus.hpp"
#include "chainrank/evaluation.hpp"
#include "chainrank/inference.hpp"
#include "chainrank/neighbors.hpp"
#include "chainrank/pipeline.hpp"
#include "chainrank/remote_scorer.hpp"
#include "chainrank/scorer.hpp"
#include "chainrank/synth.hpp"
#include "chainrank/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace chainrank;

namespace {

struct CorpusArgs {
    std::string facts_path;
    std::string questions_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--facts", facts_path, "facts.jsonl path")
            ->envname("CHAINRANK_FACTS")
            ->required();
        cmd->add_option("--questions", questions_path, "questions.jsonl path")
            ->envname("CHAINRANK_QUESTIONS")
            ->required();
    }
    Corpus load() const { return ingest_jsonl(facts_path, questions_path); }
};

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

// Every run leaves its resolved configuration next to its outputs.
void write_run_config(const std::string& out_path, const json& resolved) {
    std::ofstream f(out_path + ".run.json");
    if (f) f << resolved.dump(2) << '\n';
}

void write_ranks_meta(const std::string& ranks_path, const Corpus& corpus, const json& config) {
    json meta{{"fingerprint", corpus.fingerprint()}, {"config", config}};
    std::ofstream f(ranks_path + ".meta.json");
    if (f) f << meta.dump(2) << '\n';
}

void check_ranks_meta(const std::string& ranks_path, const Corpus& corpus) {
    std::ifstream f(ranks_path + ".meta.json");
    if (!f) return;  // meta is optional for externally produced runs
    json meta = json::parse(f);
    if (meta.value("fingerprint", "") != corpus.fingerprint())
        throw std::runtime_error("ranks file fingerprint does not match corpus: " + ranks_path);
}

std::unique_ptr<Scorer> load_scorer(const std::string& model_path, const std::string& external,
                                    const Corpus& corpus,
                                    std::shared_ptr<const FeatureContext> ctx,
                                    std::unique_ptr<LinearScorer>& linear_holder) {
    if (!external.empty()) {
        auto colon = external.rfind(':');
        if (external.rfind("tcp:", 0) == 0 && colon != 3) {
            std::string host = external.substr(4, colon - 4);
            int port = std::stoi(external.substr(colon + 1));
            return RemoteScorer::connect_tcp(corpus, host, port);
        }
        return RemoteScorer::spawn(corpus, external);
    }
    linear_holder = std::make_unique<LinearScorer>(LinearScorer::load(model_path, std::move(ctx)));
    return nullptr;  // caller uses linear_holder
}

int cmd_ingest(const std::string& tables_dir, const std::string& questions_tsv,
               const std::string& skip_marker, const CorpusArgs& in_jsonl,
               const std::string& out_facts, const std::string& out_questions) {
    Corpus corpus = [&] {
        if (!tables_dir.empty()) {
            WorldTreeOptions opts;
            opts.skip_marker = skip_marker;
            std::vector<std::pair<std::string, Split>> files;
            std::stringstream ss(questions_tsv);
            std::string item;
            while (std::getline(ss, item, ',')) {
                // split inferred from filename, e.g. questions.train.tsv
                Split split = Split::Train;
                if (item.find("dev") != std::string::npos ||
                    item.find("val") != std::string::npos)
                    split = Split::Val;
                else if (item.find("test") != std::string::npos)
                    split = Split::Test;
                files.emplace_back(item, split);
            }
            return ingest_worldtree_tsv_splits(tables_dir, files, opts);
        }
        return in_jsonl.load();
    }();
    export_jsonl(corpus, out_facts, out_questions);
    std::size_t n_train = corpus.queries_in_split(Split::Train).size();
    std::size_t n_val = corpus.queries_in_split(Split::Val).size();
    std::size_t n_test = corpus.queries_in_split(Split::Test).size();
    std::cout << "facts: " << corpus.facts().size() << "\nqueries: " << n_train << " train, "
              << n_val << " val, " << n_test << " test\nfingerprint: " << corpus.fingerprint()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fact-chain retrieval and learning-to-rank toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; flags win over file values");
    app.allow_config_extras(CLI::config_extras_mode::ignore_all);

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "global seed")->envname("CHAINRANK_SEED");

    int exit_code = 0;
    std::string stage;

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "convert a dataset to canonical JSONL");
    std::string tables_dir, questions_tsv, skip_marker = "[SKIP]";
    CorpusArgs ingest_in;
    std::string out_facts = "facts.jsonl", out_questions = "questions.jsonl";
    ingest->add_option("--tables-dir", tables_dir, "WorldTree fact tables directory");
    ingest->add_option("--questions-tsv", questions_tsv,
                       "comma-separated question TSVs (split from filename)");
    ingest->add_option("--skip-marker", skip_marker, "non-content column marker");
    ingest->add_option("--facts", ingest_in.facts_path, "JSONL facts input");
    ingest->add_option("--questions", ingest_in.questions_path, "JSONL questions input");
    ingest->add_option("--out-facts", out_facts, "canonical facts output");
    ingest->add_option("--out-questions", out_questions, "canonical questions output");
    ingest->callback([&] {
        stage = "ingest";
        exit_code = cmd_ingest(tables_dir, questions_tsv, skip_marker, ingest_in, out_facts,
                               out_questions);
    });

    // ---- gen-synth ----
    auto* gen = app.add_subcommand("gen-synth", "generate a synthetic corpus");
    SynthSpec synth;
    gen->add_option("--queries", synth.num_queries);
    gen->add_option("--chain-min", synth.chain_min);
    gen->add_option("--chain-max", synth.chain_max);
    gen->add_option("--distractors", synth.distractors_per_query);
    gen->add_option("--vocab", synth.vocab_size);
    gen->add_option("--out-facts", out_facts);
    gen->add_option("--out-questions", out_questions);
    gen->callback([&] {
        stage = "gen-synth";
        Corpus corpus = generate_synthetic(synth, seed);
        export_jsonl(corpus, out_facts, out_questions);
        std::cout << "facts: " << corpus.facts().size()
                  << "\nqueries: " << corpus.queries().size()
                  << "\nfingerprint: " << corpus.fingerprint() << "\n";
    });

    // ---- index ----
    auto* index_cmd = app.add_subcommand("index", "build the nearest-k neighborhood index");
    CorpusArgs index_in;
    index_in.attach(index_cmd);
    std::string metric_name = "tfidf", index_out = "index.json";
    int k_max = 290;
    bool serial = false;
    index_cmd->add_option("--metric", metric_name, "tfidf|lexical");
    index_cmd->add_option("--k-max", k_max, "neighbors stored per anchor");
    index_cmd->add_option("--out", index_out);
    index_cmd->add_flag("--serial", serial, "disable the parallel build");
    index_cmd->callback([&] {
        stage = "index";
        Corpus corpus = index_in.load();
        auto model = fit_corpus_tfidf(corpus);
        auto index = build_neighborhood_index(corpus, model, metric_from_string(metric_name),
                                              k_max, !serial);
        save_index(index, corpus, index_out);
        write_run_config(index_out, json{{"metric", metric_name},
                                         {"k_max", k_max},
                                         {"fingerprint", corpus.fingerprint()}});
        std::cout << "index written: " << index_out << "\n";
    });

    // ---- reach ----
    auto* reach = app.add_subcommand("reach", "gold-fact reachability per k");
    CorpusArgs reach_in;
    reach_in.attach(reach);
    std::string reach_index_path, reach_ks = "90,130,180,290", reach_out;
    std::string reach_split = "train";
    reach->add_option("--index", reach_index_path, "index.json (built if omitted)");
    reach->add_option("--k", reach_ks, "comma-separated k values");
    reach->add_option("--split", reach_split);
    reach->add_option("--out", reach_out, "CSV output (stdout if omitted)");
    reach->callback([&] {
        stage = "reach";
        Corpus corpus = reach_in.load();
        auto ks = parse_int_list(reach_ks);
        int kmax = *std::max_element(ks.begin(), ks.end());
        NeighborhoodIndex index =
            reach_index_path.empty()
                ? build_neighborhood_index(corpus, fit_corpus_tfidf(corpus), Metric::Tfidf, kmax)
                : load_index(reach_index_path, corpus);
        std::ostringstream csv;
        csv << "k,fraction\n";
        for (int k : ks)
            csv << k << ',' << reachable_gold_fraction(corpus, index, k) << '\n';
        if (reach_out.empty()) {
            std::cout << csv.str();
        } else {
            std::ofstream f(reach_out);
            f << csv.str();
        }
    });

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train the linear scorer");
    CorpusArgs train_in;
    train_in.attach(train_cmd);
    std::string train_index_path, train_loss = "ranknet", model_out = "model.json";
    std::string train_report_path;
    TrainConfig tc;
    InferConfig train_eval_cfg;
    train_cmd->add_option("--index", train_index_path)->required();
    train_cmd->add_option("--loss", train_loss, "ranknet|nce|bxent");
    train_cmd->add_option("--k", tc.k_train);
    train_cmd->add_option("--epochs", tc.epochs);
    train_cmd->add_option("--lr", tc.learning_rate);
    train_cmd->add_option("--batch", tc.batch_samples);
    train_cmd->add_option("--prefixes-per-query", tc.prefixes_per_query);
    bool cn = false, sf_train = false, no_val = false;
    train_cmd->add_flag("--cn", cn, "condition on negatives from epoch 2");
    train_cmd->add_flag("--sf-train", sf_train, "single-fact training mode");
    train_cmd->add_flag("--no-val", no_val, "skip per-epoch validation MAP");
    train_cmd->add_option("--out", model_out);
    train_cmd->add_option("--report", train_report_path, "per-epoch CSV report");
    train_cmd->callback([&] {
        stage = "train";
        Corpus corpus = train_in.load();
        auto index = load_index(train_index_path, corpus);
        tc.loss = loss_from_string(train_loss);
        tc.cn_enabled = cn;
        tc.mode = sf_train ? TrainMode::SingleFact : TrainMode::Arcf;
        tc.seed = seed;
        tc.eval_val = !no_val;
        train_eval_cfg.k = std::min(index.k_max, train_eval_cfg.k);
        auto ctx = std::make_shared<FeatureContext>(FeatureContext::build(corpus));
        LinearScorer scorer(ctx);
        auto report = train(corpus, index, scorer, tc, &train_eval_cfg);
        scorer.save(model_out);
        write_run_config(model_out, json{{"loss", train_loss},
                                         {"k", tc.k_train},
                                         {"epochs", tc.epochs},
                                         {"lr", tc.learning_rate},
                                         {"cn", cn},
                                         {"mode", sf_train ? "single-fact" : "arcf"},
                                         {"seed", seed},
                                         {"fingerprint", corpus.fingerprint()}});
        std::ostringstream csv;
        csv << "epoch,mean_loss,val_map\n";
        for (const auto& e : report.epochs)
            csv << e.epoch << ',' << e.mean_loss << ',' << e.val_map << '\n';
        if (!train_report_path.empty()) {
            std::ofstream f(train_report_path);
            f << csv.str();
        }
        std::cout << csv.str() << "model written: " << model_out << "\n";
    });

    // ---- infer ----
    auto* infer_cmd = app.add_subcommand("infer", "produce rankings for a split");
    CorpusArgs infer_in;
    infer_in.attach(infer_cmd);
    std::string infer_index_path, model_path = "model.json", infer_mode_name = "arcf";
    std::string infer_split = "val", ranks_out = "ranks.tsv", external_scorer;
    InferConfig ic;
    bool no_s2 = false, no_r3 = false;
    infer_cmd->add_option("--index", infer_index_path)->required();
    infer_cmd->add_option("--model", model_path);
    infer_cmd->add_option("--external-scorer", external_scorer,
                          "command, or tcp:HOST:PORT, speaking the line-JSON protocol");
    infer_cmd->add_option("--k", ic.k);
    infer_cmd->add_option("--L", ic.max_iterations);
    infer_cmd->add_option("--Lmin", ic.min_iterations);
    infer_cmd->add_flag("--no-s2", no_s2);
    infer_cmd->add_flag("--no-r3", no_r3);
    infer_cmd->add_option("--mode", infer_mode_name, "arcf|single-fact|tfidf");
    infer_cmd->add_option("--split", infer_split);
    infer_cmd->add_option("--out", ranks_out);
    infer_cmd->callback([&] {
        stage = "infer";
        Corpus corpus = infer_in.load();
        auto index = load_index(infer_index_path, corpus);
        ic.s2 = !no_s2;
        ic.r3 = !no_r3;
        auto ctx = std::make_shared<FeatureContext>(FeatureContext::build(corpus));
        InferMode mode = infer_mode_from_string(infer_mode_name);
        std::unique_ptr<LinearScorer> linear;
        std::unique_ptr<Scorer> remote;
        const Scorer* scorer = nullptr;
        if (mode != InferMode::Tfidf) {
            remote = load_scorer(model_path, external_scorer, corpus, ctx, linear);
            scorer = remote ? remote.get() : static_cast<const Scorer*>(linear.get());
        } else {
            linear = std::make_unique<LinearScorer>(ctx);  // unused placeholder
            scorer = linear.get();
        }
        Split split = split_from_string(infer_split);
        auto rankings = run_inference(corpus, index, *scorer, *ctx, ic, split, mode);
        write_ranks_tsv(rankings, split_qids(corpus, split), ranks_out);
        json cfg{{"mode", infer_mode_name}, {"k", ic.k},          {"L", ic.max_iterations},
                 {"Lmin", ic.min_iterations}, {"s2", ic.s2},      {"r3", ic.r3},
                 {"split", infer_split},      {"model", model_path}};
        write_ranks_meta(ranks_out, corpus, cfg);
        write_run_config(ranks_out, cfg);
        std::cout << "ranks written: " << ranks_out << "\n";
    });

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "score rankings and emit breakdowns");
    CorpusArgs eval_in;
    eval_in.attach(eval_cmd);
    std::string eval_index_path, ranks_path = "ranks.tsv", eval_split = "val";
    std::string report_out = "report.csv";
    int eval_k = 0;
    eval_cmd->add_option("--index", eval_index_path)->required();
    eval_cmd->add_option("--ranks", ranks_path);
    eval_cmd->add_option("--split", eval_split);
    eval_cmd->add_option("--k", eval_k, "k for hop breakdowns (default: index k_max)");
    eval_cmd->add_option("--report", report_out);
    eval_cmd->callback([&] {
        stage = "eval";
        Corpus corpus = eval_in.load();
        auto index = load_index(eval_index_path, corpus);
        check_ranks_meta(ranks_path, corpus);
        auto rankings = read_ranks_tsv(ranks_path);
        int k = eval_k > 0 ? eval_k : index.k_max;
        auto report =
            breakdown_report(rankings, corpus, split_from_string(eval_split), index, k);
        write_report_csv(report, report_out);
        write_run_config(report_out, json{{"ranks", ranks_path},
                                          {"split", eval_split},
                                          {"k", k},
                                          {"fingerprint", corpus.fingerprint()}});
        std::cout << "MAP: " << report.overall_map << "\nreport written: " << report_out << "\n";
    });

    // ---- ablate ----
    auto* ablate_cmd = app.add_subcommand("ablate", "run the ablation grid");
    CorpusArgs ablate_in;
    ablate_in.attach(ablate_cmd);
    std::string ablate_index_path, ablate_out = "ablation.csv", ablate_split = "val";
    TrainConfig abl_train;
    InferConfig abl_infer;
    ablate_cmd->add_option("--index", ablate_index_path)->required();
    ablate_cmd->add_option("--k-train", abl_train.k_train);
    ablate_cmd->add_option("--k", abl_infer.k);
    ablate_cmd->add_option("--epochs", abl_train.epochs);
    ablate_cmd->add_option("--lr", abl_train.learning_rate);
    ablate_cmd->add_option("--split", ablate_split);
    ablate_cmd->add_option("--out", ablate_out);
    ablate_cmd->callback([&] {
        stage = "ablate";
        Corpus corpus = ablate_in.load();
        auto index = load_index(ablate_index_path, corpus);
        abl_train.seed = seed;
        abl_train.k_train = std::min(abl_train.k_train, index.k_max);
        abl_infer.k = std::min(abl_infer.k, index.k_max);
        auto ctx = std::make_shared<FeatureContext>(FeatureContext::build(corpus));
        auto rows = run_ablation_grid(corpus, index, ctx, abl_train, abl_infer,
                                      split_from_string(ablate_split));
        write_ablation_csv(rows, ablate_out);
        for (const auto& r : rows) std::cout << r.name << ": " << r.val_map << "\n";
        write_run_config(ablate_out, json{{"seed", seed}, {"fingerprint", corpus.fingerprint()}});
    });

    // ---- pipeline ----
    auto* pipe = app.add_subcommand("pipeline", "gen-synth/ingest -> index -> train -> infer -> eval");
    std::string pipe_facts, pipe_questions, pipe_dir = "run";
    SynthSpec pipe_synth;
    TrainConfig pipe_train;
    InferConfig pipe_infer;
    std::string pipe_loss = "ranknet";
    int pipe_kmax = 0;
    pipe->add_option("--facts", pipe_facts, "existing facts.jsonl (else synthetic)");
    pipe->add_option("--questions", pipe_questions);
    pipe->add_option("--out-dir", pipe_dir)->envname("CHAINRANK_OUT_DIR");
    pipe->add_option("--queries", pipe_synth.num_queries);
    pipe->add_option("--distractors", pipe_synth.distractors_per_query);
    pipe->add_option("--loss", pipe_loss);
    pipe->add_option("--epochs", pipe_train.epochs);
    pipe->add_option("--k-train", pipe_train.k_train);
    pipe->add_option("--k", pipe_infer.k);
    pipe->add_option("--L", pipe_infer.max_iterations);
    pipe->add_option("--k-max", pipe_kmax, "index k_max (default max of k, k-train)");
    pipe->callback([&] {
        stage = "pipeline";
        fs::create_directories(pipe_dir);
        auto path = [&](const std::string& name) { return (fs::path(pipe_dir) / name).string(); };

        stage = "pipeline/corpus";
        Corpus corpus = pipe_facts.empty() ? generate_synthetic(pipe_synth, seed)
                                           : ingest_jsonl(pipe_facts, pipe_questions);
        export_jsonl(corpus, path("facts.jsonl"), path("questions.jsonl"));

        stage = "pipeline/index";
        int kmax = pipe_kmax > 0 ? pipe_kmax
                                 : std::max(pipe_infer.k, pipe_train.k_train);
        kmax = std::min<int>(kmax, static_cast<int>(corpus.facts().size()) - 1);
        pipe_train.k_train = std::min(pipe_train.k_train, kmax);
        pipe_infer.k = std::min(pipe_infer.k, kmax);
        auto index = build_neighborhood_index(corpus, fit_corpus_tfidf(corpus), Metric::Tfidf,
                                              kmax);
        save_index(index, corpus, path("index.json"));

        stage = "pipeline/train";
        pipe_train.loss = loss_from_string(pipe_loss);
        pipe_train.seed = seed;
        auto ctx = std::make_shared<FeatureContext>(FeatureContext::build(corpus));
        LinearScorer scorer(ctx);
        auto report = train(corpus, index, scorer, pipe_train, &pipe_infer);
        scorer.save(path("model.json"));
        {
            std::ofstream f(path("train_report.csv"));
            f << "epoch,mean_loss,val_map\n";
            for (const auto& e : report.epochs)
                f << e.epoch << ',' << e.mean_loss << ',' << e.val_map << '\n';
        }

        stage = "pipeline/infer";
        auto rankings =
            run_inference(corpus, index, scorer, *ctx, pipe_infer, Split::Val, InferMode::Arcf);
        write_ranks_tsv(rankings, split_qids(corpus, Split::Val), path("ranks.tsv"));
        write_ranks_meta(path("ranks.tsv"), corpus, json{{"mode", "arcf"}});

        stage = "pipeline/eval";
        auto eval_report =
            breakdown_report(rankings, corpus, Split::Val, index, pipe_infer.k);
        write_report_csv(eval_report, path("report.csv"));
        write_run_config(path("report.csv"),
                         json{{"seed", seed},
                              {"loss", pipe_loss},
                              {"fingerprint", corpus.fingerprint()}});
        std::cout << "val MAP: " << eval_report.overall_map << "\nartifacts in: " << pipe_dir
                  << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "[" << (stage.empty() ? "cli" : stage) << "] error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
