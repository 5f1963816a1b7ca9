#include "weaklab/triage_ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "weaklab/errors.hpp"

namespace weaklab {

std::string_view to_string(PriorityLevel level) {
    switch (level) {
        case PriorityLevel::Critical: return "Critical";
        case PriorityLevel::High: return "High";
        case PriorityLevel::Medium: return "Medium";
        case PriorityLevel::Low: return "Low";
    }
    return "Low";
}

PriorityLevel parse_priority_level(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "critical") return PriorityLevel::Critical;
    if (lower == "high") return PriorityLevel::High;
    if (lower == "medium") return PriorityLevel::Medium;
    if (lower == "low") return PriorityLevel::Low;
    throw InputError("unknown priority level '" + std::string(text) + "'");
}

double level_score(PriorityLevel level) {
    switch (level) {
        case PriorityLevel::Critical: return 1.0;
        case PriorityLevel::High: return 0.75;
        case PriorityLevel::Medium: return 0.5;
        case PriorityLevel::Low: return 0.25;
    }
    return 0.25;
}

PriorityLevel map_score_to_level(double score) {
    if (!(score >= 0.0 && score <= 1.0)) throw InputError("priority score " + std::to_string(score) + " outside [0, 1]");
    if (score >= 0.75) return PriorityLevel::Critical;
    if (score >= 0.5) return PriorityLevel::High;
    if (score >= 0.25) return PriorityLevel::Medium;
    return PriorityLevel::Low;
}

Priority Priority::from_score(double score) {
    if (std::isnan(score)) throw InputError("priority score is NaN");
    return Priority(std::clamp(score, 0.0, 1.0));
}

double Priority::score() const {
    if (auto* level = std::get_if<PriorityLevel>(&value_)) return level_score(*level);
    return std::get<double>(value_);
}

PriorityLevel Priority::level() const {
    if (auto* level = std::get_if<PriorityLevel>(&value_)) return *level;
    return map_score_to_level(std::get<double>(value_));
}

InfoTypeStrategy parse_info_type_strategy(std::string_view text) {
    if (text == "union" || text == "Union") return InfoTypeStrategy::Union;
    if (text == "intersection" || text == "Intersection") return InfoTypeStrategy::Intersection;
    throw InputError("unknown info-type strategy '" + std::string(text) + "'");
}

PriorityStrategy parse_priority_strategy(std::string_view text) {
    if (text == "highest" || text == "Highest") return PriorityStrategy::Highest;
    if (text == "average" || text == "Average") return PriorityStrategy::Average;
    if (text == "lowest" || text == "Lowest") return PriorityStrategy::Lowest;
    throw InputError("unknown priority strategy '" + std::string(text) + "'");
}

std::string_view to_string(InfoTypeStrategy s) { return s == InfoTypeStrategy::Union ? "union" : "intersection"; }

std::string_view to_string(PriorityStrategy s) {
    switch (s) {
        case PriorityStrategy::Highest: return "highest";
        case PriorityStrategy::Average: return "average";
        case PriorityStrategy::Lowest: return "lowest";
    }
    return "highest";
}

double InfoTypeWeightTable::weight(InfoTypeId type) const {
    auto it = weights_.find(type);
    return it == weights_.end() ? default_ : it->second;
}

InfoTypeWeightTable build_weight_table(std::span<const LabelledTriageExample> training, double default_weight) {
    if (training.empty()) throw InputError("build_weight_table: no training examples");
    std::map<InfoTypeId, std::pair<double, std::size_t>> sums;
    for (const auto& ex : training) {
        for (auto type : ex.info_types) {
            auto& [sum, count] = sums[type];
            sum += level_score(ex.priority);
            ++count;
        }
    }
    InfoTypeWeightTable table(default_weight);
    for (const auto& [type, acc] : sums) table.set(type, acc.first / static_cast<double>(acc.second));
    return table;
}

double combine_priority(const InfoTypeSet& predicted_types, const InfoTypeWeightTable& table,
                        PriorityLevel model_priority, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in [0, 1]");
    double w = table.default_weight();
    if (!predicted_types.empty()) {
        double sum = 0.0;
        for (auto type : predicted_types) sum += table.weight(type);
        w = sum / static_cast<double>(predicted_types.size());
    }
    if (lambda == 0.0) return w;
    if (lambda == 1.0) return level_score(model_priority);
    return (1.0 - lambda) * w + lambda * level_score(model_priority);
}

InfoTypeSet merge_info_types(std::span<const TriagePrediction> predictions, InfoTypeStrategy strategy) {
    if (predictions.empty()) throw InputError("merge_info_types: no predictions");
    InfoTypeSet merged = predictions.front().info_types;
    for (const auto& p : predictions.subspan(1)) {
        if (strategy == InfoTypeStrategy::Union) {
            merged.insert(p.info_types.begin(), p.info_types.end());
        } else {
            InfoTypeSet kept;
            std::set_intersection(merged.begin(), merged.end(), p.info_types.begin(), p.info_types.end(),
                                  std::inserter(kept, kept.end()));
            merged = std::move(kept);
        }
    }
    return merged;
}

PriorityLevel merge_priorities(std::span<const TriagePrediction> predictions, PriorityStrategy strategy) {
    if (predictions.empty()) throw InputError("merge_priorities: no predictions");
    switch (strategy) {
        case PriorityStrategy::Highest: {
            auto best = predictions.front().priority.level();
            for (const auto& p : predictions) best = std::max(best, p.priority.level());
            return best;
        }
        case PriorityStrategy::Lowest: {
            auto worst = predictions.front().priority.level();
            for (const auto& p : predictions) worst = std::min(worst, p.priority.level());
            return worst;
        }
        case PriorityStrategy::Average: {
            // Clamped to the inputs' level range: a mean of exactly 0.75
            // from all-High inputs would otherwise band up to Critical.
            double sum = 0.0;
            for (const auto& p : predictions) sum += p.priority.score();
            const auto level = map_score_to_level(sum / static_cast<double>(predictions.size()));
            return std::clamp(level, merge_priorities(predictions, PriorityStrategy::Lowest),
                              merge_priorities(predictions, PriorityStrategy::Highest));
        }
    }
    throw InvariantError("merge_priorities: unknown strategy");
}

std::vector<TriagePrediction> merge_predictions(const std::vector<std::vector<TriagePrediction>>& predictors,
                                                const EnsembleConfig& config) {
    if (predictors.empty()) throw InputError("merge: no predictors");
    if (predictors.size() == 1) return predictors.front();

    std::vector<std::unordered_map<std::string, const TriagePrediction*>> by_id(predictors.size());
    for (std::size_t k = 0; k < predictors.size(); ++k) {
        for (const auto& p : predictors[k]) {
            if (!by_id[k].emplace(p.document_id, &p).second) {
                throw InputError("merge: predictor " + std::to_string(k) + " repeats id '" + p.document_id + "'");
            }
        }
        if (by_id[k].size() != predictors.front().size()) {
            throw InputError("merge: predictor " + std::to_string(k) + " covers a different number of documents");
        }
    }

    std::vector<TriagePrediction> merged;
    merged.reserve(predictors.front().size());
    std::vector<TriagePrediction> group;
    for (const auto& first : predictors.front()) {
        group.clear();
        for (std::size_t k = 0; k < predictors.size(); ++k) {
            auto it = by_id[k].find(first.document_id);
            if (it == by_id[k].end()) {
                throw InputError("merge: predictor " + std::to_string(k) + " lacks id '" + first.document_id + "'");
            }
            group.push_back(*it->second);
        }
        merged.push_back({first.document_id, merge_info_types(group, config.info_types),
                          merge_priorities(group, config.priority)});
    }
    return merged;
}

std::vector<TriagePrediction> read_triage_predictions(std::istream& in) {
    std::vector<TriagePrediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "prediction line " + std::to_string(line_no);
        try {
            const auto j = nlohmann::json::parse(line);
            TriagePrediction p;
            p.document_id = j.at("id").get<std::string>();
            for (const auto& t : j.at("types")) p.info_types.insert(t.get<InfoTypeId>());
            const auto& pri = j.at("priority");
            if (pri.is_string()) {
                p.priority = parse_priority_level(pri.get<std::string>());
            } else if (pri.is_number()) {
                p.priority = Priority::from_score(pri.get<double>());
            } else {
                throw InputError(where + ": priority must be a level name or a number");
            }
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(where + ": " + e.what());
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
    }
    return out;
}

void write_triage_predictions(std::ostream& out, std::span<const TriagePrediction> predictions) {
    for (const auto& p : predictions) {
        nlohmann::json j = {{"id", p.document_id}, {"types", p.info_types}};
        if (p.priority.is_level()) {
            j["priority"] = std::string(to_string(p.priority.level()));
        } else {
            j["priority"] = p.priority.score();
        }
        out << j.dump() << '\n';
    }
}

}  // namespace weaklab
