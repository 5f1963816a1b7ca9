#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace weaklab {

enum class PriorityLevel { Low = 0, Medium = 1, High = 2, Critical = 3 };

std::string_view to_string(PriorityLevel level);
PriorityLevel parse_priority_level(std::string_view text);

/// Critical 1.0, High 0.75, Medium 0.5, Low 0.25.
double level_score(PriorityLevel level);

/// Inverse bands, upper endpoint belongs to the higher level:
/// [0.75,1] Critical, [0.5,0.75) High, [0.25,0.5) Medium, [0,0.25) Low.
/// Throws InputError outside [0,1]. Note level_score(High) maps back to
/// Critical.
PriorityLevel map_score_to_level(double score);

using InfoTypeId = std::size_t;
using InfoTypeSet = std::set<InfoTypeId>;

/// A predictor's priority: a level or a raw score (clamped to [0,1]).
class Priority {
public:
    Priority(PriorityLevel level) : value_(level) {}  // NOLINT(google-explicit-constructor)
    static Priority from_score(double score);

    bool is_level() const noexcept { return std::holds_alternative<PriorityLevel>(value_); }
    double score() const;
    PriorityLevel level() const;

    friend bool operator==(const Priority&, const Priority&) = default;

private:
    explicit Priority(double score) : value_(score) {}
    std::variant<PriorityLevel, double> value_;
};

struct TriagePrediction {
    std::string document_id;
    InfoTypeSet info_types;
    Priority priority = PriorityLevel::Low;

    friend bool operator==(const TriagePrediction&, const TriagePrediction&) = default;
};

enum class InfoTypeStrategy { Union, Intersection };
enum class PriorityStrategy { Highest, Average, Lowest };

InfoTypeStrategy parse_info_type_strategy(std::string_view text);
PriorityStrategy parse_priority_strategy(std::string_view text);
std::string_view to_string(InfoTypeStrategy s);
std::string_view to_string(PriorityStrategy s);

struct EnsembleConfig {
    InfoTypeStrategy info_types = InfoTypeStrategy::Union;
    PriorityStrategy priority = PriorityStrategy::Highest;
    double lambda = 0.5;
};

inline constexpr double kUnseenInfoTypeWeight = 0.25;

class InfoTypeWeightTable {
public:
    explicit InfoTypeWeightTable(double default_weight = kUnseenInfoTypeWeight) : default_(default_weight) {}

    void set(InfoTypeId type, double weight) { weights_[type] = weight; }
    double weight(InfoTypeId type) const;
    double default_weight() const noexcept { return default_; }
    const std::map<InfoTypeId, double>& weights() const noexcept { return weights_; }

private:
    std::map<InfoTypeId, double> weights_;
    double default_;
};

struct LabelledTriageExample {
    InfoTypeSet info_types;
    PriorityLevel priority = PriorityLevel::Low;
};

/// w_i = mean level score over training examples carrying type i.
InfoTypeWeightTable build_weight_table(std::span<const LabelledTriageExample> training,
                                       double default_weight = kUnseenInfoTypeWeight);

/// (1 - lambda) * w + lambda * score(model_priority), with w the mean table
/// weight over the predicted types (the table default when none).
double combine_priority(const InfoTypeSet& predicted_types, const InfoTypeWeightTable& table,
                        PriorityLevel model_priority, double lambda);

InfoTypeSet merge_info_types(std::span<const TriagePrediction> predictions, InfoTypeStrategy strategy);
/// Average maps the mean score back through the bands, then clamps to the
/// range [Lowest, Highest] of the inputs.
PriorityLevel merge_priorities(std::span<const TriagePrediction> predictions, PriorityStrategy strategy);

/// Per-document merge across predictors. Every input list must cover the
/// same document ids; output follows the first list's order. A single
/// predictor passes through unchanged.
std::vector<TriagePrediction> merge_predictions(const std::vector<std::vector<TriagePrediction>>& predictors,
                                                const EnsembleConfig& config);

/// JSONL {"id","types":[int],"priority":"Critical"|"High"|"Medium"|"Low"|number}.
std::vector<TriagePrediction> read_triage_predictions(std::istream& in);
void write_triage_predictions(std::ostream& out, std::span<const TriagePrediction> predictions);

}  // namespace weaklab
