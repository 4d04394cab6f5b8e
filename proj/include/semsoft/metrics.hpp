#ifndef SEMSOFT_METRICS_HPP
#define SEMSOFT_METRICS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semsoft/taxonomy.hpp"

namespace semsoft {

// Fraction of samples whose true class is among the k highest logits; equal
// logits rank by lowest class index so results are reproducible bit-for-bit.
double top_k_accuracy(const std::vector<std::vector<double>>& logits, std::span<const int32_t> targets, int32_t k);

struct SemanticAccuracyReport {
    // (accuracy, support) per hierarchy; hierarchies a sample's label does
    // not reach are excluded from that hierarchy's support.
    std::vector<std::pair<double, int64_t>> per_hierarchy_top1;
    // Accuracies combined with weights proportional to each hierarchy's
    // class count, over hierarchies with support > 0.
    double weighted_total = 0.0;
};

SemanticAccuracyReport semantic_accuracy(const std::vector<std::vector<double>>& logits,
                                         const std::vector<SemanticLabel>& labels, const Taxonomy& t);

std::string semantic_report_to_json(const SemanticAccuracyReport& report);

// All-points average precision: items sorted by descending score (ties by
// lowest index), AP = mean precision at each positive's rank.
double average_precision(std::span<const double> scores, std::span<const int32_t> relevance);

struct MapScores {
    double micro = 0.0;  // AP over the flattened (sample, class) pairs
    double macro = 0.0;  // mean per-class AP over classes with >= 1 positive
};

MapScores map_scores(const std::vector<std::vector<double>>& scores,
                     const std::vector<std::vector<int32_t>>& relevance);

}  // namespace semsoft

#endif  // SEMSOFT_METRICS_HPP
