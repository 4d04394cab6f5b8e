#include "semsoft/metrics.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "semsoft/errors.hpp"

namespace semsoft {

namespace {

// Rank of `target` under descending score with ties broken by lowest index:
// the number of entries that would be listed before it.
size_t rank_of(std::span<const double> scores, size_t target) {
    size_t rank = 0;
    const double pivot = scores[target];
    for (size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > pivot || (scores[i] == pivot && i < target)) ++rank;
    }
    return rank;
}

int32_t argmax_lowest_index(std::span<const double> values) {
    int32_t best = 0;
    for (size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[static_cast<size_t>(best)]) best = static_cast<int32_t>(i);
    }
    return best;
}

}  // namespace

double top_k_accuracy(const std::vector<std::vector<double>>& logits, std::span<const int32_t> targets, int32_t k) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    if (logits.size() != targets.size()) {
        throw Error(ErrorCode::DimensionMismatch, "got " + std::to_string(logits.size()) + " logit rows and " +
                                                      std::to_string(targets.size()) + " targets");
    }
    if (logits.empty()) return 0.0;
    int64_t hits = 0;
    for (size_t i = 0; i < logits.size(); ++i) {
        const auto& row = logits[i];
        const int32_t target = targets[i];
        if (target < 0 || target >= static_cast<int32_t>(row.size())) {
            throw Error(ErrorCode::InvalidTarget, "target " + std::to_string(target) + " out of range");
        }
        if (rank_of(row, static_cast<size_t>(target)) < static_cast<size_t>(k)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(logits.size());
}

SemanticAccuracyReport semantic_accuracy(const std::vector<std::vector<double>>& logits,
                                         const std::vector<SemanticLabel>& labels, const Taxonomy& t) {
    if (logits.size() != labels.size()) {
        throw Error(ErrorCode::DimensionMismatch, "got " + std::to_string(logits.size()) + " logit rows and " +
                                                      std::to_string(labels.size()) + " labels");
    }
    const int32_t K = t.num_hierarchies();
    std::vector<int64_t> support(static_cast<size_t>(K), 0);
    std::vector<int64_t> correct(static_cast<size_t>(K), 0);

    for (size_t i = 0; i < logits.size(); ++i) {
        const auto& row = logits[i];
        if (row.size() != t.num_classes()) {
            throw Error(ErrorCode::DimensionMismatch, "logit row " + std::to_string(i) + " has wrong length");
        }
        const SemanticLabel& label = labels[i];
        if (static_cast<int32_t>(label.per_hierarchy.size()) != K) {
            throw Error(ErrorCode::InconsistentLabel, "label " + std::to_string(i) + " has wrong hierarchy count");
        }
        for (int32_t k = 0; k <= label.max_hierarchy; ++k) {
            const int32_t truth = label.per_hierarchy[static_cast<size_t>(k)];
            if (truth < 0 || truth >= static_cast<int32_t>(t.hierarchy_size(k))) {
                throw Error(ErrorCode::InconsistentLabel, "label " + std::to_string(i) + " entry out of range");
            }
            const std::span<const double> group(row.data() + t.hierarchy_offset(k),
                                                static_cast<size_t>(t.hierarchy_size(k)));
            ++support[static_cast<size_t>(k)];
            if (argmax_lowest_index(group) == truth) ++correct[static_cast<size_t>(k)];
        }
    }

    SemanticAccuracyReport report;
    report.per_hierarchy_top1.resize(static_cast<size_t>(K));
    double weighted_sum = 0.0;
    int64_t weight_total = 0;
    for (int32_t k = 0; k < K; ++k) {
        const int64_t s = support[static_cast<size_t>(k)];
        const double acc = s > 0 ? static_cast<double>(correct[static_cast<size_t>(k)]) / static_cast<double>(s) : 0.0;
        report.per_hierarchy_top1[static_cast<size_t>(k)] = {acc, s};
        if (s > 0) {
            weighted_sum += static_cast<double>(t.hierarchy_size(k)) * acc;
            weight_total += t.hierarchy_size(k);
        }
    }
    report.weighted_total = weight_total > 0 ? weighted_sum / static_cast<double>(weight_total) : 0.0;
    return report;
}

std::string semantic_report_to_json(const SemanticAccuracyReport& report) {
    nlohmann::ordered_json j;
    auto& rows = j["per_hierarchy_top1"] = nlohmann::ordered_json::array();
    for (const auto& [accuracy, support] : report.per_hierarchy_top1) {
        rows.push_back({accuracy, support});
    }
    j["weighted_total"] = report.weighted_total;
    return j.dump();
}

double average_precision(std::span<const double> scores, std::span<const int32_t> relevance) {
    if (scores.size() != relevance.size()) {
        throw Error(ErrorCode::DimensionMismatch, "got " + std::to_string(scores.size()) + " scores and " +
                                                      std::to_string(relevance.size()) + " relevance flags");
    }
    int64_t num_positive = 0;
    for (int32_t r : relevance) {
        if (r != 0 && r != 1) throw Error(ErrorCode::InvalidArgument, "relevance must be 0/1");
        num_positive += r;
    }
    if (num_positive == 0) throw Error(ErrorCode::NoPositives, "average precision needs at least one positive");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    double ap = 0.0;
    int64_t hits = 0;
    for (size_t rank = 0; rank < order.size(); ++rank) {
        if (relevance[order[rank]] == 1) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return ap / static_cast<double>(num_positive);
}

MapScores map_scores(const std::vector<std::vector<double>>& scores,
                     const std::vector<std::vector<int32_t>>& relevance) {
    if (scores.size() != relevance.size() || scores.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "score and relevance batches must be non-empty and equal length");
    }
    const size_t num_classes = scores[0].size();
    for (size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].size() != num_classes || relevance[i].size() != num_classes) {
            throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " has inconsistent length");
        }
    }

    // Macro: per-class AP over the sample axis, skipping classes without positives.
    double macro_sum = 0.0;
    int64_t macro_classes = 0;
    std::vector<double> column_scores(scores.size());
    std::vector<int32_t> column_relevance(scores.size());
    for (size_t c = 0; c < num_classes; ++c) {
        int64_t positives = 0;
        for (size_t i = 0; i < scores.size(); ++i) {
            column_scores[i] = scores[i][c];
            column_relevance[i] = relevance[i][c];
            positives += relevance[i][c];
        }
        if (positives == 0) continue;
        macro_sum += average_precision(column_scores, column_relevance);
        ++macro_classes;
    }
    if (macro_classes == 0) throw Error(ErrorCode::NoPositives, "no class has a positive sample");

    // Micro: one ranking over the flattened (sample, class) pairs.
    std::vector<double> flat_scores;
    std::vector<int32_t> flat_relevance;
    flat_scores.reserve(scores.size() * num_classes);
    flat_relevance.reserve(scores.size() * num_classes);
    for (size_t i = 0; i < scores.size(); ++i) {
        flat_scores.insert(flat_scores.end(), scores[i].begin(), scores[i].end());
        flat_relevance.insert(flat_relevance.end(), relevance[i].begin(), relevance[i].end());
    }

    MapScores out;
    out.micro = average_precision(flat_scores, flat_relevance);
    out.macro = macro_sum / static_cast<double>(macro_classes);
    return out;
}

}  // namespace semsoft
