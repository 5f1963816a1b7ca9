#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weaklab/classifier.hpp"
#include "weaklab/corpus_io.hpp"
#include "weaklab/embedding.hpp"
#include "weaklab/label_expansion.hpp"
#include "weaklab/metrics.hpp"
#include "weaklab/pseudo_label.hpp"
#include "weaklab/self_training.hpp"
#include "weaklab/triage_ensemble.hpp"

namespace weaklab {

inline constexpr const char* kVersion = "0.1.0";

namespace files {
inline constexpr const char* kVocabulary = "vocabulary.json";
inline constexpr const char* kPseudoLabels = "pseudo_labels.jsonl";
inline constexpr const char* kResidual = "residual.jsonl";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kSelfTrainedModel = "model_selftrained.json";
inline constexpr const char* kLossTrace = "selftrain_loss.csv";
inline constexpr const char* kPredictions = "predictions.jsonl";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";
}  // namespace files

struct PipelineConfig {
    std::filesystem::path corpus;
    std::filesystem::path labels;
    std::filesystem::path test;  // optional; gold-labelled evaluation set
    std::filesystem::path output_dir = "out";
    TaskMode mode = TaskMode::SingleLabel;
    std::string provider = "builtin";
    std::optional<std::uint64_t> seed;
    std::size_t dimension = kDefaultBuiltinDimension;
    ExpansionParams expansion;
    std::optional<double> epsilon;
    TrainingConfig classifier;
    SelfTrainConfig self_train;
    bool self_train_on_residual = false;  // default: the full corpus
    EnsembleConfig ensemble;

    /// Throws InputError when no seed was given.
    std::uint64_t require_seed() const;

    nlohmann::json to_json() const;
    /// Relative paths are resolved against `base_dir`. A manifest (object
    /// with a "config" member) is accepted in place of a config.
    static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static PipelineConfig load(const std::filesystem::path& path);

    /// Stage-specific seeds derived from the global seed.
    TrainingConfig training_config() const;
    SelfTrainConfig self_train_config() const;
};

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineConfig& config);

/// Loads the corpus with labels from config. The test set when `test` is set.
LabelSet load_labels(const PipelineConfig& config);
Dataset load_dataset(const PipelineConfig& config, const std::filesystem::path& path);

/// Every stage validates inputs first, computes everything in memory, and
/// only then writes its outputs (atomically) plus a <stage>.manifest.json.
std::vector<LabelVocabulary> stage_expand(const PipelineConfig& config, EmbeddingProvider& provider);
PseudoLabelResult stage_pseudo_label(const PipelineConfig& config);
LinearClassifier stage_train(const PipelineConfig& config, EmbeddingProvider& provider);
std::pair<LinearClassifier, SelfTrainResult> stage_selftrain(const PipelineConfig& config,
                                                             EmbeddingProvider& provider);

struct ClassPrediction {
    std::string document_id;
    std::vector<LabelId> labels;
    std::vector<double> probabilities;
};

std::vector<ClassPrediction> predict_dataset(const TrainableClassifier& model, const Dataset& dataset,
                                             EmbeddingProvider& provider);

/// Writes predictions.jsonl: {"id","labels":[int],"probabilities":[number]}.
std::vector<ClassPrediction> stage_predict(const PipelineConfig& config, EmbeddingProvider& provider,
                                           const std::filesystem::path& model_path,
                                           const std::filesystem::path& dataset_path);

std::vector<ClassPrediction> read_class_predictions(std::istream& in);
void write_class_predictions(std::ostream& out, const std::vector<ClassPrediction>& predictions);

/// Scores predictions against the gold labels of `gold`. Every gold
/// document must have a prediction.
EvalReport evaluate_predictions(const std::vector<ClassPrediction>& predictions, const Dataset& gold);
EvalReport stage_evaluate(const PipelineConfig& config, const std::filesystem::path& predictions_path,
                          const std::filesystem::path& gold_path);

/// Merges prediction-exchange files and writes the result to `output`.
std::vector<TriagePrediction> stage_merge(const std::vector<std::filesystem::path>& inputs,
                                          const EnsembleConfig& ensemble, const std::filesystem::path& output);

/// Fraction of pseudo-labelled documents whose assigned labels match gold,
/// and the fraction of the corpus that received pseudo labels.
struct PseudoLabelQuality {
    double precision = 0.0;
    double coverage = 0.0;
};
PseudoLabelQuality pseudo_label_quality(const PseudoLabelResult& result, const Dataset& corpus);

/// Classification by direct matching of label names against document
/// n-grams: each label scores the best cosine between its name and any
/// 1-3 gram of the document. No expansion, no pseudo labels, no training.
std::vector<LabelId> surface_name_predictions(const Dataset& dataset, EmbeddingProvider& provider);

struct RunSummary {
    double epsilon = 0.0;
    PseudoLabelQuality pseudo;
    double accuracy_pretrained = 0.0;
    double accuracy_final = 0.0;
    EvalReport report;  // final model on the test set
};

/// expand → pseudo-label → train → self-train → predict → evaluate.
/// Requires config.test.
RunSummary run_pipeline(const PipelineConfig& config, EmbeddingProvider& provider);

}  // namespace weaklab
