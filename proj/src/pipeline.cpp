#include "weaklab/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "weaklab/errors.hpp"
#include "weaklab/io_util.hpp"
#include "weaklab/random.hpp"

namespace weaklab {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& value) {
    fs::path p(value);
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

void require_file(const fs::path& path, const char* what) {
    if (path.empty()) throw InputError(std::string(what) + " path not configured");
    if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " not found: " + path.string());
}

nlohmann::json manifest(const PipelineConfig& config, std::string_view stage,
                        const std::vector<std::pair<std::string, fs::path>>& inputs, const std::string& provider) {
    const auto cfg = config.to_json();
    nlohmann::json digests = nlohmann::json::object();
    for (const auto& [name, path] : inputs) digests[name] = file_sha256(path);
    return {{"stage", std::string(stage)},
            {"version", kVersion},
            {"seed", config.require_seed()},
            {"provider", provider},
            {"config_sha256", sha256_hex(cfg.dump())},
            {"config", cfg},
            {"input_sha256", digests}};
}

void write_manifest(const PipelineConfig& config, std::string_view stage, const nlohmann::json& m) {
    write_file_atomic(config.output_dir / (std::string(stage) + ".manifest.json"), m.dump(2) + "\n");
}

std::vector<Vector> targets_for(const std::vector<PseudoLabeledExample>& examples, std::size_t n, OutputMode mode) {
    std::vector<Vector> targets;
    targets.reserve(examples.size());
    for (const auto& ex : examples) {
        targets.push_back(mode == OutputMode::Softmax ? one_hot(ex.labels.front(), n) : multi_hot(ex.labels, n));
    }
    return targets;
}

template <typename Writer>
std::string render(Writer&& writer) {
    std::ostringstream out;
    writer(out);
    return out.str();
}

}  // namespace

std::uint64_t PipelineConfig::require_seed() const {
    if (!seed) throw InputError("a seed is required (config \"seed\" or --seed)");
    return *seed;
}

TrainingConfig PipelineConfig::training_config() const {
    TrainingConfig c = classifier;
    c.seed = mix64(require_seed() ^ 0x7472616e);
    return c;
}

SelfTrainConfig PipelineConfig::self_train_config() const {
    SelfTrainConfig c = self_train;
    c.seed = mix64(require_seed() ^ 0x73656c66);
    return c;
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j = {
        {"corpus", corpus.string()},
        {"labels", labels.string()},
        {"test", test.string()},
        {"output_dir", output_dir.string()},
        {"mode", std::string(to_string(mode))},
        {"provider", provider},
        {"dimension", dimension},
        {"expansion",
         {{"tau", expansion.threshold},
          {"min_k", expansion.min_k},
          {"max_k", expansion.max_k},
          {"rare_filter_min_docs", expansion.rare_filter_min_docs}}},
        {"classifier",
         {{"learning_rate", classifier.learning_rate},
          {"epochs", classifier.epochs},
          {"batch_size", classifier.batch_size}}},
        {"self_train",
         {{"batch_size", self_train.batch_size},
          {"update_interval", self_train.update_interval},
          {"passes", self_train.passes},
          {"learning_rate", self_train.learning_rate},
          {"on_residual", self_train_on_residual}}},
        {"ensemble",
         {{"info_types", std::string(to_string(ensemble.info_types))},
          {"priority", std::string(to_string(ensemble.priority))},
          {"lambda", ensemble.lambda}}},
    };
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    j["epsilon"] = epsilon ? nlohmann::json(*epsilon) : nlohmann::json(nullptr);
    return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& raw, const fs::path& base_dir) {
    const nlohmann::json& j = raw.contains("config") && raw.at("config").is_object() ? raw.at("config") : raw;
    PipelineConfig c;
    try {
        if (j.contains("corpus")) c.corpus = resolve(base_dir, j.at("corpus").get<std::string>());
        if (j.contains("labels")) c.labels = resolve(base_dir, j.at("labels").get<std::string>());
        if (j.contains("test")) c.test = resolve(base_dir, j.at("test").get<std::string>());
        if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        if (j.contains("mode")) c.mode = parse_task_mode(j.at("mode").get<std::string>());
        if (j.contains("provider")) c.provider = j.at("provider").get<std::string>();
        if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("dimension")) c.dimension = j.at("dimension").get<std::size_t>();
        if (j.contains("epsilon") && !j.at("epsilon").is_null()) c.epsilon = j.at("epsilon").get<double>();
        if (j.contains("expansion")) {
            const auto& e = j.at("expansion");
            c.expansion.threshold = e.value("tau", c.expansion.threshold);
            c.expansion.min_k = e.value("min_k", c.expansion.min_k);
            c.expansion.max_k = e.value("max_k", c.expansion.max_k);
            c.expansion.rare_filter_min_docs = e.value("rare_filter_min_docs", c.expansion.rare_filter_min_docs);
        }
        if (j.contains("classifier")) {
            const auto& t = j.at("classifier");
            c.classifier.learning_rate = t.value("learning_rate", c.classifier.learning_rate);
            c.classifier.epochs = t.value("epochs", c.classifier.epochs);
            c.classifier.batch_size = t.value("batch_size", c.classifier.batch_size);
        }
        if (j.contains("self_train")) {
            const auto& s = j.at("self_train");
            c.self_train.batch_size = s.value("batch_size", c.self_train.batch_size);
            c.self_train.update_interval = s.value("update_interval", c.self_train.update_interval);
            c.self_train.passes = s.value("passes", c.self_train.passes);
            c.self_train.learning_rate = s.value("learning_rate", c.self_train.learning_rate);
            c.self_train_on_residual = s.value("on_residual", c.self_train_on_residual);
        }
        if (j.contains("ensemble")) {
            const auto& e = j.at("ensemble");
            if (e.contains("info_types")) c.ensemble.info_types = parse_info_type_strategy(e.at("info_types").get<std::string>());
            if (e.contains("priority")) c.ensemble.priority = parse_priority_strategy(e.at("priority").get<std::string>());
            c.ensemble.lambda = e.value("lambda", c.ensemble.lambda);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    if (!(c.ensemble.lambda >= 0.0 && c.ensemble.lambda <= 1.0)) throw InputError("config: lambda must lie in [0, 1]");
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    require_file(path, "config file");
    try {
        return from_json(nlohmann::json::parse(read_file(path)), path.parent_path());
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("config " + path.string() + ": " + e.what());
    }
}

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineConfig& config) {
    return make_provider(config.provider, config.require_seed(), config.dimension);
}

LabelSet load_labels(const PipelineConfig& config) {
    require_file(config.labels, "label file");
    return LabelSet::load(config.labels);
}

Dataset load_dataset(const PipelineConfig& config, const fs::path& path) {
    require_file(path, "dataset");
    return load_corpus(path, format_from_path(path), load_labels(config), config.mode);
}

std::vector<LabelVocabulary> stage_expand(const PipelineConfig& config, EmbeddingProvider& provider) {
    config.require_seed();
    require_file(config.corpus, "corpus");
    const auto labels = load_labels(config);
    const auto corpus = load_corpus(config.corpus, format_from_path(config.corpus), labels, config.mode);
    const auto index = extract_ngrams(corpus);
    auto result = expand_labels(labels, index, corpus.size(), provider, config.expansion);

    const auto body = render([&](std::ostream& out) { write_vocabularies(out, result.vocabularies, provider.name()); });
    const auto m = manifest(config, "expand", {{"corpus", config.corpus}, {"labels", config.labels}}, provider.name());
    write_file_atomic(config.output_dir / files::kVocabulary, body);
    write_manifest(config, "expand", m);
    return std::move(result.vocabularies);
}

PseudoLabelResult stage_pseudo_label(const PipelineConfig& config) {
    config.require_seed();
    require_file(config.corpus, "corpus");
    const fs::path vocab_path = config.output_dir / files::kVocabulary;
    require_file(vocab_path, "vocabulary file (run expand first)");
    const auto corpus = load_dataset(config, config.corpus);
    std::ifstream vin(vocab_path);
    const auto vocabularies = read_vocabularies(vin);
    if (vocabularies.size() != corpus.labels.size()) {
        throw InputError("vocabulary file covers " + std::to_string(vocabularies.size()) + " labels, label file has " +
                         std::to_string(corpus.labels.size()));
    }
    const auto index = extract_ngrams(corpus);
    auto result = pseudo_label_corpus(corpus, index, vocabularies, config.mode, config.epsilon);

    const auto labelled = render([&](std::ostream& out) { write_pseudo_labels(out, result.labelled); });
    const auto residual = render([&](std::ostream& out) { write_residual(out, result.residual); });
    auto m = manifest(config, "pseudo_label", {{"corpus", config.corpus}, {"vocabulary", vocab_path}}, "");
    m["epsilon"] = result.epsilon;
    m["epsilon_overridden"] = config.epsilon.has_value();
    m["pseudo_labelled"] = result.labelled.size();
    m["residual"] = result.residual.size();
    write_file_atomic(config.output_dir / files::kPseudoLabels, labelled);
    write_file_atomic(config.output_dir / files::kResidual, residual);
    write_manifest(config, "pseudo_label", m);
    return result;
}

LinearClassifier stage_train(const PipelineConfig& config, EmbeddingProvider& provider) {
    config.require_seed();
    const fs::path pl_path = config.output_dir / files::kPseudoLabels;
    require_file(pl_path, "pseudo-label file (run pseudo-label first)");
    const auto corpus = load_dataset(config, config.corpus);
    std::ifstream pin(pl_path);
    const auto examples = read_pseudo_labels(pin);
    if (examples.empty()) throw InputError("no pseudo-labelled documents to train on");

    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : corpus.documents) by_id.emplace(d.id, &d);
    std::vector<std::string> texts;
    texts.reserve(examples.size());
    for (const auto& ex : examples) {
        auto it = by_id.find(ex.document_id);
        if (it == by_id.end()) throw InputError("pseudo-labelled id '" + ex.document_id + "' not in corpus");
        for (auto l : ex.labels) {
            if (l >= corpus.labels.size()) throw InputError("pseudo label out of range for '" + ex.document_id + "'");
        }
        texts.push_back(it->second->text);
    }
    const auto features = provider.embed_batch(texts);
    const auto mode = output_mode_for(config.mode);
    const auto targets = targets_for(examples, corpus.labels.size(), mode);
    const auto training = config.training_config();
    auto result = train(features, targets, corpus.labels.size(), mode, training);

    // Embedded manifest is path-free so identical runs produce identical model files.
    const nlohmann::json model_manifest = {
        {"stage", "train"},
        {"seed", config.require_seed()},
        {"examples", examples.size()},
        {"learning_rate", training.learning_rate},
        {"epochs", training.epochs},
        {"batch_size", training.batch_size},
        {"final_loss", result.epoch_losses.empty() ? 0.0 : result.epoch_losses.back()},
        {"pseudo_labels_sha256", file_sha256(pl_path)},
    };
    const auto body = render([&](std::ostream& out) { write_model(out, result.model, provider.name(), model_manifest); });
    const auto m = manifest(config, "train", {{"corpus", config.corpus}, {"pseudo_labels", pl_path}}, provider.name());
    write_file_atomic(config.output_dir / files::kModel, body);
    write_manifest(config, "train", m);
    return std::move(result.model);
}

std::pair<LinearClassifier, SelfTrainResult> stage_selftrain(const PipelineConfig& config,
                                                             EmbeddingProvider& provider) {
    config.require_seed();
    const fs::path model_path = config.output_dir / files::kModel;
    require_file(model_path, "model file (run train first)");
    const auto corpus = load_dataset(config, config.corpus);
    std::ifstream min(model_path);
    auto model_file = read_model(min);
    auto& model = model_file.model;
    if (model.label_count() != corpus.labels.size()) throw InputError("model label count differs from label file");

    Dataset pool = corpus;
    if (config.self_train_on_residual) {
        const fs::path residual_path = config.output_dir / files::kResidual;
        require_file(residual_path, "residual pool");
        std::ifstream rin(residual_path);
        std::unordered_set<std::string> keep;
        std::string line;
        while (std::getline(rin, line)) {
            if (!line.empty()) keep.insert(nlohmann::json::parse(line).at("id").get<std::string>());
        }
        std::erase_if(pool.documents, [&](const Document& d) { return !keep.contains(d.id); });
    }
    const auto st_config = config.self_train_config();
    auto trace = pool.documents.empty() ? SelfTrainResult{} : self_train(model, pool, provider, st_config);

    const nlohmann::json model_manifest = {
        {"stage", "selftrain"},
        {"seed", config.require_seed()},
        {"documents", pool.size()},
        {"batch_size", st_config.batch_size},
        {"update_interval", st_config.update_interval},
        {"passes", st_config.passes},
        {"learning_rate", st_config.learning_rate},
        {"base_model_sha256", file_sha256(model_path)},
    };
    const auto body = render([&](std::ostream& out) { write_model(out, model, provider.name(), model_manifest); });
    const auto csv = render([&](std::ostream& out) { write_loss_trace(out, trace.trace); });
    const auto m = manifest(config, "selftrain", {{"corpus", config.corpus}, {"model", model_path}}, provider.name());
    write_file_atomic(config.output_dir / files::kSelfTrainedModel, body);
    write_file_atomic(config.output_dir / files::kLossTrace, csv);
    write_manifest(config, "selftrain", m);
    return {std::move(model), std::move(trace)};
}

std::vector<ClassPrediction> predict_dataset(const TrainableClassifier& model, const Dataset& dataset,
                                             EmbeddingProvider& provider) {
    const auto features = featurize_all(dataset, provider);
    std::vector<ClassPrediction> out;
    out.reserve(dataset.size());
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        out.push_back({dataset.documents[k].id, predict_labels(model, features[k]),
                       model.predict_proba(features[k]).values});
    }
    return out;
}

std::vector<ClassPrediction> stage_predict(const PipelineConfig& config, EmbeddingProvider& provider,
                                           const fs::path& model_path, const fs::path& dataset_path) {
    config.require_seed();
    require_file(model_path, "model file");
    const auto dataset = load_dataset(config, dataset_path);
    std::ifstream min(model_path);
    const auto model_file = read_model(min);
    if (model_file.model.label_count() != dataset.labels.size()) {
        throw InputError("model label count differs from label file");
    }
    auto predictions = predict_dataset(model_file.model, dataset, provider);
    const auto body = render([&](std::ostream& out) { write_class_predictions(out, predictions); });
    const auto m = manifest(config, "predict", {{"model", model_path}, {"dataset", dataset_path}}, provider.name());
    write_file_atomic(config.output_dir / files::kPredictions, body);
    write_manifest(config, "predict", m);
    return predictions;
}

std::vector<ClassPrediction> read_class_predictions(std::istream& in) {
    std::vector<ClassPrediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.push_back({j.at("id").get<std::string>(), j.at("labels").get<std::vector<LabelId>>(),
                           j.value("probabilities", std::vector<double>{})});
        } catch (const nlohmann::json::exception& e) {
            throw InputError("predictions line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_class_predictions(std::ostream& out, const std::vector<ClassPrediction>& predictions) {
    for (const auto& p : predictions) {
        const nlohmann::json j = {{"id", p.document_id}, {"labels", p.labels}, {"probabilities", p.probabilities}};
        out << j.dump() << '\n';
    }
}

EvalReport evaluate_predictions(const std::vector<ClassPrediction>& predictions, const Dataset& gold) {
    std::unordered_map<std::string, const ClassPrediction*> by_id;
    for (const auto& p : predictions) by_id.emplace(p.document_id, &p);
    const std::size_t n = gold.labels.size();
    if (gold.mode == TaskMode::SingleLabel) {
        std::vector<LabelId> pred, truth;
        for (const auto& doc : gold.documents) {
            if (!doc.gold_labels) continue;
            auto it = by_id.find(doc.id);
            if (it == by_id.end() || it->second->labels.size() != 1) {
                throw InputError("no single-label prediction for gold document '" + doc.id + "'");
            }
            if (it->second->labels.front() >= n) throw InputError("predicted label out of range for '" + doc.id + "'");
            pred.push_back(it->second->labels.front());
            truth.push_back(doc.gold_labels->front());
        }
        if (truth.empty()) throw InputError("gold dataset carries no labels");
        return evaluate(pred, truth, gold.labels);
    }
    LabelSetList pred, truth;
    for (const auto& doc : gold.documents) {
        if (!doc.gold_labels) continue;
        auto it = by_id.find(doc.id);
        if (it == by_id.end()) throw InputError("no prediction for gold document '" + doc.id + "'");
        pred.push_back(it->second->labels);
        truth.push_back(*doc.gold_labels);
    }
    if (truth.empty()) throw InputError("gold dataset carries no labels");
    return evaluate(pred, truth, gold.labels);
}

EvalReport stage_evaluate(const PipelineConfig& config, const fs::path& predictions_path, const fs::path& gold_path) {
    config.require_seed();
    require_file(predictions_path, "predictions file");
    const auto gold = load_dataset(config, gold_path);
    std::ifstream pin(predictions_path);
    const auto report = evaluate_predictions(read_class_predictions(pin), gold);
    const auto m = manifest(config, "evaluate", {{"predictions", predictions_path}, {"gold", gold_path}}, "");
    write_file_atomic(config.output_dir / files::kReportJson, report.to_json().dump(2) + "\n");
    write_file_atomic(config.output_dir / files::kReportText, report.to_text());
    write_manifest(config, "evaluate", m);
    return report;
}

std::vector<TriagePrediction> stage_merge(const std::vector<fs::path>& inputs, const EnsembleConfig& ensemble,
                                          const fs::path& output) {
    if (inputs.empty()) throw InputError("merge: no input files");
    std::vector<std::vector<TriagePrediction>> predictors;
    for (const auto& path : inputs) {
        require_file(path, "prediction file");
        std::ifstream in(path);
        predictors.push_back(read_triage_predictions(in));
    }
    auto merged = merge_predictions(predictors, ensemble);
    write_file_atomic(output, render([&](std::ostream& out) { write_triage_predictions(out, merged); }));
    return merged;
}

PseudoLabelQuality pseudo_label_quality(const PseudoLabelResult& result, const Dataset& corpus) {
    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : corpus.documents) by_id.emplace(d.id, &d);
    std::size_t correct = 0, judged = 0;
    for (const auto& ex : result.labelled) {
        const auto* doc = by_id.at(ex.document_id);
        if (!doc->gold_labels) continue;
        ++judged;
        correct += ex.labels == *doc->gold_labels;
    }
    PseudoLabelQuality q;
    q.precision = judged == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(judged);
    q.coverage = corpus.size() == 0 ? 0.0 : static_cast<double>(result.labelled.size()) / static_cast<double>(corpus.size());
    return q;
}

std::vector<LabelId> surface_name_predictions(const Dataset& dataset, EmbeddingProvider& provider) {
    const auto label_vecs = provider.embed_batch(dataset.labels.names());
    std::vector<LabelId> out;
    out.reserve(dataset.size());
    for (const auto& doc : dataset.documents) {
        const auto grams_set = document_ngrams(tokenize(doc.text), 3);
        std::vector<std::string> grams(grams_set.begin(), grams_set.end());
        std::sort(grams.begin(), grams.end());
        const auto gram_vecs = provider.embed_batch(grams);
        std::vector<double> best(label_vecs.size(), -1.0);
        for (std::size_t i = 0; i < label_vecs.size(); ++i) {
            for (const auto& g : gram_vecs) best[i] = std::max(best[i], cosine(label_vecs[i], g));
        }
        out.push_back(static_cast<LabelId>(std::max_element(best.begin(), best.end()) - best.begin()));
    }
    return out;
}

RunSummary run_pipeline(const PipelineConfig& config, EmbeddingProvider& provider) {
    if (config.test.empty()) throw InputError("run: a test set is required");
    require_file(config.test, "test set");
    RunSummary summary;
    stage_expand(config, provider);
    const auto pl = stage_pseudo_label(config);
    summary.epsilon = pl.epsilon;
    summary.pseudo = pseudo_label_quality(pl, load_dataset(config, config.corpus));

    const auto pretrained = stage_train(config, provider);
    const auto test = load_dataset(config, config.test);
    summary.accuracy_pretrained = evaluate_predictions(predict_dataset(pretrained, test, provider), test).accuracy;

    stage_selftrain(config, provider);
    stage_predict(config, provider, config.output_dir / files::kSelfTrainedModel, config.test);
    summary.report = stage_evaluate(config, config.output_dir / files::kPredictions, config.test);
    summary.accuracy_final = summary.report.accuracy;
    return summary;
}

}  // namespace weaklab
