// weaklab: zero-shot text triage pipeline driver.
//
//   weaklab expand        --config cfg.json
//   weaklab pseudo-label  --config cfg.json [--epsilon X]
//   weaklab train         --config cfg.json
//   weaklab selftrain     --config cfg.json [--passes N]
//   weaklab predict       --config cfg.json [--model M] [--input D]
//   weaklab evaluate      --config cfg.json [--predictions P] [--gold D]
//   weaklab merge         A.jsonl B.jsonl ... --output merged.jsonl
//   weaklab run           --config cfg.json
//   weaklab gen-synthetic --out DIR --seed S
//
// Exit codes: 0 ok, 2 input error, 3 embedding service error, 4 invariant
// violation.

#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "weaklab/errors.hpp"
#include "weaklab/io_util.hpp"
#include "weaklab/pipeline.hpp"
#include "weaklab/synthetic.hpp"

namespace fs = std::filesystem;
using namespace weaklab;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string corpus, labels, test, mode;
    std::optional<std::uint64_t> seed;
    std::string provider;
    std::string out;
    std::optional<double> epsilon, tau, lambda;
    std::string strategy_it, strategy_pri;
    std::optional<std::size_t> passes;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Pipeline config JSON (or a stage manifest)");
    cmd->add_option("--corpus", o.corpus, "Unlabelled corpus (JSONL or TSV)");
    cmd->add_option("--labels", o.labels, "Label file, one surface name per line");
    cmd->add_option("--test", o.test, "Gold-labelled test set");
    cmd->add_option("--mode", o.mode, "single-label | multi-label");
    cmd->add_option("--seed", o.seed, "Random seed (required unless in config)");
    cmd->add_option("--provider", o.provider, "builtin | sidecar base URL");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--epsilon", o.epsilon, "Override the pseudo-label threshold");
    cmd->add_option("--tau", o.tau, "Label expansion similarity threshold");
    cmd->add_option("--lambda", o.lambda, "Priority combination weight");
    cmd->add_option("--strategy-it", o.strategy_it, "union | intersection");
    cmd->add_option("--strategy-pri", o.strategy_pri, "highest | average | lowest");
    cmd->add_option("--passes", o.passes, "Self-training passes");
}

PipelineConfig build_config(const CommonOptions& o) {
    PipelineConfig config;
    bool provider_in_config = false;
    if (!o.config_path.empty()) {
        config = PipelineConfig::load(o.config_path);
        const auto raw = nlohmann::json::parse(read_file(o.config_path));
        const auto& body = raw.contains("config") ? raw.at("config") : raw;
        provider_in_config = body.contains("provider");
    }
    if (!o.corpus.empty()) config.corpus = o.corpus;
    if (!o.labels.empty()) config.labels = o.labels;
    if (!o.test.empty()) config.test = o.test;
    if (!o.mode.empty()) config.mode = parse_task_mode(o.mode);
    if (o.seed) config.seed = o.seed;
    if (!o.provider.empty()) {
        config.provider = o.provider;
    } else if (!provider_in_config) {
        if (const char* env = std::getenv("WEAKLAB_EMBED_URL"); env && *env) config.provider = env;
    }
    if (!o.out.empty()) config.output_dir = o.out;
    if (o.epsilon) config.epsilon = o.epsilon;
    if (o.tau) config.expansion.threshold = *o.tau;
    if (o.lambda) {
        if (!(*o.lambda >= 0.0 && *o.lambda <= 1.0)) throw InputError("--lambda must lie in [0, 1]");
        config.ensemble.lambda = *o.lambda;
    }
    if (!o.strategy_it.empty()) config.ensemble.info_types = parse_info_type_strategy(o.strategy_it);
    if (!o.strategy_pri.empty()) config.ensemble.priority = parse_priority_strategy(o.strategy_pri);
    if (o.passes) config.self_train.passes = *o.passes;
    config.require_seed();
    return config;
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ServiceError& e) {
        std::cerr << "embedding service error: " << e.what() << '\n';
        return 3;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weaklab: label-name-only text classification and crisis triage ensembles"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string model_path, input_path, predictions_path, gold_path, output_path;
    std::vector<std::string> merge_inputs;
    std::uint64_t synth_seed = 1;

    auto* expand = app.add_subcommand("expand", "Expand label names into scored vocabularies");
    auto* pseudo = app.add_subcommand("pseudo-label", "Assign pseudo labels to the corpus");
    auto* train_cmd = app.add_subcommand("train", "Train the classifier on pseudo labels");
    auto* selftrain = app.add_subcommand("selftrain", "Refine the classifier by soft-label self-training");
    auto* predict = app.add_subcommand("predict", "Predict labels for a dataset");
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold labels");
    auto* merge = app.add_subcommand("merge", "Merge triage predictions from several predictors");
    auto* run = app.add_subcommand("run", "Run every stage end to end");
    auto* gen = app.add_subcommand("gen-synthetic", "Write the synthetic benchmark fixture");

    for (auto* cmd : {expand, pseudo, train_cmd, selftrain, predict, evaluate_cmd, run}) add_common(cmd, opts);
    predict->add_option("--model", model_path, "Model file (default: <out>/model_selftrained.json)");
    predict->add_option("--input", input_path, "Dataset to predict (default: test set)");
    evaluate_cmd->add_option("--predictions", predictions_path, "Predictions JSONL (default: <out>/predictions.jsonl)");
    evaluate_cmd->add_option("--gold", gold_path, "Gold dataset (default: test set)");
    merge->add_option("inputs", merge_inputs, "Prediction exchange files")->required();
    merge->add_option("--output,-o", output_path, "Merged output file")->required();
    merge->add_option("--strategy-it", opts.strategy_it, "union | intersection");
    merge->add_option("--strategy-pri", opts.strategy_pri, "highest | average | lowest");
    gen->add_option("--out", opts.out, "Output directory")->required();
    gen->add_option("--seed", synth_seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    return run_guarded([&] {
        if (gen->parsed()) {
            write_synthetic_fixture(opts.out, SyntheticSpec::crisis_default(), synth_seed);
            std::cout << "wrote synthetic fixture to " << opts.out << '\n';
            return;
        }
        if (merge->parsed()) {
            EnsembleConfig ensemble;
            if (!opts.strategy_it.empty()) ensemble.info_types = parse_info_type_strategy(opts.strategy_it);
            if (!opts.strategy_pri.empty()) ensemble.priority = parse_priority_strategy(opts.strategy_pri);
            std::vector<fs::path> inputs(merge_inputs.begin(), merge_inputs.end());
            const auto merged = stage_merge(inputs, ensemble, output_path);
            std::cout << "merged " << inputs.size() << " predictors over " << merged.size() << " documents\n";
            return;
        }

        const auto config = build_config(opts);
        if (expand->parsed()) {
            auto provider = make_provider(config);
            const auto vocab = stage_expand(config, *provider);
            for (const auto& v : vocab) std::cout << v.name << ": " << v.size() << " phrases\n";
        } else if (pseudo->parsed()) {
            const auto result = stage_pseudo_label(config);
            std::cout << "epsilon " << result.epsilon << ", pseudo-labelled " << result.labelled.size()
                      << ", residual " << result.residual.size() << '\n';
        } else if (train_cmd->parsed()) {
            auto provider = make_provider(config);
            const auto model = stage_train(config, *provider);
            std::cout << "trained " << model.label_count() << "-label model over " << model.feature_dimension()
                      << " features\n";
        } else if (selftrain->parsed()) {
            auto provider = make_provider(config);
            const auto [model, trace] = stage_selftrain(config, *provider);
            std::cout << "self-trained over " << trace.trace.size() << " portions\n";
        } else if (predict->parsed()) {
            auto provider = make_provider(config);
            const fs::path model = model_path.empty() ? config.output_dir / files::kSelfTrainedModel : fs::path(model_path);
            const fs::path input = input_path.empty() ? config.test : fs::path(input_path);
            const auto predictions = stage_predict(config, *provider, model, input);
            std::cout << "predicted " << predictions.size() << " documents\n";
        } else if (evaluate_cmd->parsed()) {
            const fs::path preds =
                predictions_path.empty() ? config.output_dir / files::kPredictions : fs::path(predictions_path);
            const fs::path gold = gold_path.empty() ? config.test : fs::path(gold_path);
            std::cout << stage_evaluate(config, preds, gold).to_text();
        } else if (run->parsed()) {
            auto provider = make_provider(config);
            const auto summary = run_pipeline(config, *provider);
            std::cout << "epsilon " << summary.epsilon << "\npseudo-label precision " << summary.pseudo.precision
                      << "\npseudo-label coverage " << summary.pseudo.coverage << "\naccuracy before self-training "
                      << summary.accuracy_pretrained << "\n\n"
                      << summary.report.to_text();
        }
    });
}
