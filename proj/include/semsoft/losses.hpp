#ifndef SEMSOFT_LOSSES_HPP
#define SEMSOFT_LOSSES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semsoft/taxonomy.hpp"

namespace semsoft {

struct DatasetManifest;

// Value, per-hierarchy breakdown, and the analytic gradient with respect to
// the input logits. `per_hierarchy` holds the unweighted per-softmax losses
// (a single entry for the schemes that ignore hierarchy); logits of inactive
// hierarchies receive a gradient of exactly zero.
struct LossResult {
    double total = 0.0;
    std::vector<double> per_hierarchy;
    std::vector<double> grad;
};

// Max-subtracted exponentiation; the output sums to 1 and stays finite for
// inputs of any magnitude that fit in a double.
std::vector<double> stable_softmax(std::span<const double> values);

// Softmax cross-entropy over all classes with uniform label smoothing:
// t = (1 - eps) * onehot(target) + eps / N.
LossResult single_label_ce(std::span<const double> logits, int32_t target, double smoothing = 0.2);

// Focusing exponents for the binary reduction: (0, 0) is plain binary
// cross-entropy, (2, 2) focal, and (gamma_minus=4, gamma_plus=0) the
// asymmetric variant.
struct BinaryLossConfig {
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
};

// Reduces multi-label classification to independent sigmoid tasks:
//   positive terms (1-p)^g+ * (-log p), negative terms p^g- * (-log(1-p)),
// summed over classes.
LossResult multi_label_binary_loss(std::span<const double> logits, std::span<const int32_t> targets,
                                   const BinaryLossConfig& cfg);

enum class WeightMode {
    empirical,   // O_k = training samples whose label depth reaches hierarchy k
    class_mass,  // O_k = number of classes at hierarchy k or deeper
    as_printed,  // O_k = number of classes strictly below hierarchy k (O_0 = 0 is rejected)
    uniform,     // W_k = 1
};

WeightMode parse_weight_mode(std::string_view name);
const char* to_string(WeightMode mode);

// Per-hierarchy aggregation weights W_k = 1 / O_k plus the occurrence
// statistics O they derive from.
struct HierarchyWeights {
    WeightMode mode = WeightMode::uniform;
    std::vector<double> W;
    std::vector<int64_t> O;
};

// `empirical` counts activations over the manifest's non-val records and
// requires a manifest; the other modes derive from the taxonomy alone.
HierarchyWeights compute_hierarchy_weights(const Taxonomy& t, const DatasetManifest* manifest, WeightMode mode);

std::string hierarchy_weights_to_json(const HierarchyWeights& w);

// Views of the logit vector grouped per hierarchy; group k has length N_k and
// concatenating the groups in order reconstructs the input.
std::vector<std::span<const double>> split_logits(std::span<const double> logits, const Taxonomy& t);

// One smoothed softmax cross-entropy per active hierarchy, aggregated as
// total = sum_k W_k * L_k. Hierarchies above the label's depth contribute
// zero loss and exactly zero gradient.
LossResult semantic_softmax_loss(std::span<const double> logits, const SemanticLabel& label,
                                 const HierarchyWeights& weights, const Taxonomy& t, double smoothing = 0.2);

// Teacher confidence for one hierarchy: 1 when the ground truth supervises
// hierarchy k (>= comparison by default, strict > when `strict_greater`),
// otherwise the probability mass of the ceil(N_k / 20) largest entries.
double estimate_teacher_confidence(std::span<const double> probs, int32_t gt_max_hierarchy, int32_t k,
                                   bool strict_greater = false);

struct TeacherOutput {
    std::vector<double> logits;
    std::vector<double> confidences;  // P_i per hierarchy
};

TeacherOutput make_teacher_output(std::span<const double> teacher_logits, const SemanticLabel& label,
                                  const Taxonomy& t, bool strict_greater = false);

enum class KdNormalization { mean, sum };

// Per-hierarchy MSE between teacher and student softmax distributions,
// aggregated as sum_i P_i * L_i (or the unweighted sum when
// `confidence_weighted` is off). The teacher is a constant; the gradient is
// with respect to the student logits only.
LossResult semantic_kd_loss(std::span<const double> student_logits, const TeacherOutput& teacher,
                            const SemanticLabel& label, const Taxonomy& t, bool confidence_weighted = true,
                            KdNormalization normalization = KdNormalization::mean);

}  // namespace semsoft

#endif  // SEMSOFT_LOSSES_HPP
