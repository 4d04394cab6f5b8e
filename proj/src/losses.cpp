#include "semsoft/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "semsoft/dataset_prep.hpp"
#include "semsoft/errors.hpp"

namespace semsoft {

namespace {

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be finite");
    }
}

void check_smoothing(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "smoothing must lie in [0, 1)");
}

// Smoothed cross-entropy of one softmax group. Writes p - t into `grad` and
// returns -sum_n t_n * log p_n, evaluated through the log-sum-exp identity so
// extreme logits stay finite.
double smoothed_ce_group(std::span<const double> logits, int32_t target, double eps, std::span<double> grad) {
    const size_t n = logits.size();
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum_exp = 0.0;
    for (double z : logits) sum_exp += std::exp(z - max_logit);
    const double log_sum = std::log(sum_exp);

    const double base_t = eps / static_cast<double>(n);
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double log_p = (logits[i] - max_logit) - log_sum;
        const double t = base_t + (static_cast<int32_t>(i) == target ? 1.0 - eps : 0.0);
        loss -= t * log_p;
        grad[i] = std::exp(log_p) - t;
    }
    return loss;
}

double log_sigmoid(double z) {
    // log(1 / (1 + e^-z)) without overflow on either tail.
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void validate_label(const SemanticLabel& label, const Taxonomy& t) {
    const int32_t K = t.num_hierarchies();
    if (static_cast<int32_t>(label.per_hierarchy.size()) != K) {
        throw Error(ErrorCode::InconsistentLabel, "label has " + std::to_string(label.per_hierarchy.size()) +
                                                      " hierarchy slots, taxonomy has " + std::to_string(K));
    }
    if (label.max_hierarchy < 0 || label.max_hierarchy >= K) {
        throw Error(ErrorCode::InconsistentLabel, "label max_hierarchy out of range");
    }
    for (int32_t k = 0; k < K; ++k) {
        const int32_t entry = label.per_hierarchy[static_cast<size_t>(k)];
        if (k <= label.max_hierarchy) {
            if (entry < 0 || entry >= static_cast<int32_t>(t.hierarchy_size(k))) {
                throw Error(ErrorCode::InconsistentLabel,
                            "hierarchy " + std::to_string(k) + " entry out of range");
            }
        } else if (entry != kInactive) {
            throw Error(ErrorCode::InconsistentLabel,
                        "hierarchy " + std::to_string(k) + " above max_hierarchy must be inactive");
        }
    }
}

void check_logit_size(std::span<const double> logits, const Taxonomy& t) {
    if (logits.size() != t.num_classes()) {
        throw Error(ErrorCode::DimensionMismatch, "got " + std::to_string(logits.size()) + " logits, taxonomy has " +
                                                      std::to_string(t.num_classes()) + " classes");
    }
}

}  // namespace

std::vector<double> stable_softmax(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "softmax of an empty vector");
    check_finite(values, "softmax inputs");
    const double max_value = *std::max_element(values.begin(), values.end());
    std::vector<double> out(values.size());
    double sum = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        out[i] = std::exp(values[i] - max_value);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

LossResult single_label_ce(std::span<const double> logits, int32_t target, double smoothing) {
    if (logits.empty()) throw Error(ErrorCode::EmptyInput, "empty logit vector");
    check_finite(logits, "logits");
    check_smoothing(smoothing);
    if (target < 0 || target >= static_cast<int32_t>(logits.size())) {
        throw Error(ErrorCode::InvalidTarget, "target " + std::to_string(target) + " out of range");
    }
    LossResult r;
    r.grad.resize(logits.size());
    r.total = smoothed_ce_group(logits, target, smoothing, r.grad);
    r.per_hierarchy = {r.total};
    return r;
}

LossResult multi_label_binary_loss(std::span<const double> logits, std::span<const int32_t> targets,
                                   const BinaryLossConfig& cfg) {
    if (logits.size() != targets.size()) {
        throw Error(ErrorCode::DimensionMismatch, "got " + std::to_string(logits.size()) + " logits and " +
                                                      std::to_string(targets.size()) + " targets");
    }
    if (logits.empty()) throw Error(ErrorCode::EmptyInput, "empty logit vector");
    check_finite(logits, "logits");
    if (cfg.gamma_plus < 0.0 || cfg.gamma_minus < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "focusing exponents must be >= 0");
    }

    LossResult r;
    r.grad.resize(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) {
        const int32_t y = targets[i];
        if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "targets must be 0/1");
        const double z = logits[i];
        const double p = sigmoid(z);
        const double q = sigmoid(-z);
        if (y == 1) {
            const double log_p = log_sigmoid(z);
            if (cfg.gamma_plus == 0.0) {
                r.total -= log_p;
                r.grad[i] = p - 1.0;
            } else {
                const double focus = std::pow(q, cfg.gamma_plus);
                r.total += focus * (-log_p);
                r.grad[i] = cfg.gamma_plus * focus * p * log_p - focus * q;
            }
        } else {
            const double log_q = log_sigmoid(-z);
            if (cfg.gamma_minus == 0.0) {
                r.total -= log_q;
                r.grad[i] = p;
            } else {
                const double focus = std::pow(p, cfg.gamma_minus);
                r.total += focus * (-log_q);
                r.grad[i] = -cfg.gamma_minus * focus * q * log_q + focus * p;
            }
        }
    }
    r.per_hierarchy = {r.total};
    return r;
}

WeightMode parse_weight_mode(std::string_view name) {
    if (name == "empirical") return WeightMode::empirical;
    if (name == "class_mass") return WeightMode::class_mass;
    if (name == "as_printed") return WeightMode::as_printed;
    if (name == "uniform") return WeightMode::uniform;
    throw Error(ErrorCode::InvalidArgument, "unknown weight mode '" + std::string(name) + "'");
}

const char* to_string(WeightMode mode) {
    switch (mode) {
        case WeightMode::empirical: return "empirical";
        case WeightMode::class_mass: return "class_mass";
        case WeightMode::as_printed: return "as_printed";
        case WeightMode::uniform: return "uniform";
    }
    return "unknown";
}

HierarchyWeights compute_hierarchy_weights(const Taxonomy& t, const DatasetManifest* manifest, WeightMode mode) {
    const int32_t K = t.num_hierarchies();
    if (K == 0) throw Error(ErrorCode::EmptyHierarchy, "taxonomy has no hierarchies");
    const std::vector<int64_t> sizes = taxonomy_stats(t);
    for (int32_t k = 0; k < K; ++k) {
        if (sizes[static_cast<size_t>(k)] == 0) {
            throw Error(ErrorCode::EmptyHierarchy, "hierarchy " + std::to_string(k) + " has no classes");
        }
    }

    HierarchyWeights w;
    w.mode = mode;
    w.O.assign(static_cast<size_t>(K), 0);

    switch (mode) {
        case WeightMode::empirical: {
            if (manifest == nullptr) {
                throw Error(ErrorCode::InvalidArgument, "empirical weights require a manifest");
            }
            // Val records are held out; activation counts cover the samples
            // the loss will actually see.
            for (const SampleRecord& record : manifest->records) {
                if (record.split == Split::val) continue;
                const int32_t depth = t.node(t.require(record.class_id)).hierarchy;
                for (int32_t k = 0; k <= depth; ++k) ++w.O[static_cast<size_t>(k)];
            }
            break;
        }
        case WeightMode::class_mass:
            for (int32_t k = K - 1; k >= 0; --k) {
                w.O[static_cast<size_t>(k)] =
                    sizes[static_cast<size_t>(k)] + (k + 1 < K ? w.O[static_cast<size_t>(k) + 1] : 0);
            }
            break;
        case WeightMode::as_printed: {
            int64_t below = 0;
            for (int32_t k = 0; k < K; ++k) {
                w.O[static_cast<size_t>(k)] = below;
                below += sizes[static_cast<size_t>(k)];
            }
            break;
        }
        case WeightMode::uniform:
            w.O.assign(static_cast<size_t>(K), 1);
            break;
    }

    w.W.resize(static_cast<size_t>(K));
    for (int32_t k = 0; k < K; ++k) {
        const int64_t o = w.O[static_cast<size_t>(k)];
        if (o <= 0) {
            throw Error(ErrorCode::DegenerateWeight,
                        "hierarchy " + std::to_string(k) + " has occurrence count 0 under mode " +
                            to_string(mode));
        }
        w.W[static_cast<size_t>(k)] = 1.0 / static_cast<double>(o);
    }
    return w;
}

std::string hierarchy_weights_to_json(const HierarchyWeights& w) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(w.mode);
    j["O"] = w.O;
    j["W"] = w.W;
    return j.dump();
}

std::vector<std::span<const double>> split_logits(std::span<const double> logits, const Taxonomy& t) {
    check_logit_size(logits, t);
    std::vector<std::span<const double>> groups;
    groups.reserve(static_cast<size_t>(t.num_hierarchies()));
    for (int32_t k = 0; k < t.num_hierarchies(); ++k) {
        groups.push_back(logits.subspan(static_cast<size_t>(t.hierarchy_offset(k)),
                                        static_cast<size_t>(t.hierarchy_size(k))));
    }
    return groups;
}

LossResult semantic_softmax_loss(std::span<const double> logits, const SemanticLabel& label,
                                 const HierarchyWeights& weights, const Taxonomy& t, double smoothing) {
    check_logit_size(logits, t);
    check_finite(logits, "logits");
    check_smoothing(smoothing);
    validate_label(label, t);
    const int32_t K = t.num_hierarchies();
    if (static_cast<int32_t>(weights.W.size()) != K) {
        throw Error(ErrorCode::DimensionMismatch, "weights cover " + std::to_string(weights.W.size()) +
                                                      " hierarchies, taxonomy has " + std::to_string(K));
    }

    LossResult r;
    r.per_hierarchy.assign(static_cast<size_t>(K), 0.0);
    r.grad.assign(logits.size(), 0.0);
    for (int32_t k = 0; k <= label.max_hierarchy; ++k) {
        const size_t offset = static_cast<size_t>(t.hierarchy_offset(k));
        const size_t size = static_cast<size_t>(t.hierarchy_size(k));
        std::span<double> grad_group(r.grad.data() + offset, size);
        const double loss_k =
            smoothed_ce_group(logits.subspan(offset, size), label.per_hierarchy[static_cast<size_t>(k)],
                              smoothing, grad_group);
        const double w_k = weights.W[static_cast<size_t>(k)];
        for (double& g : grad_group) g *= w_k;
        r.per_hierarchy[static_cast<size_t>(k)] = loss_k;
        r.total += w_k * loss_k;
    }
    return r;
}

double estimate_teacher_confidence(std::span<const double> probs, int32_t gt_max_hierarchy, int32_t k,
                                   bool strict_greater) {
    if (probs.empty()) throw Error(ErrorCode::EmptyInput, "empty probability vector");
    const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (!(std::abs(sum - 1.0) <= 1e-6)) {
        throw Error(ErrorCode::NotNormalized, "probabilities sum to " + std::to_string(sum));
    }
    const bool supervised = strict_greater ? gt_max_hierarchy > k : gt_max_hierarchy >= k;
    if (supervised) return 1.0;

    const size_t top_count = (probs.size() + 19) / 20;  // ceil(N / 20)
    std::vector<double> sorted(probs.begin(), probs.end());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(top_count) - 1, sorted.end(),
                     std::greater<double>());
    double mass = 0.0;
    for (size_t i = 0; i < top_count; ++i) mass += sorted[i];
    return std::clamp(mass, 0.0, 1.0);
}

TeacherOutput make_teacher_output(std::span<const double> teacher_logits, const SemanticLabel& label,
                                  const Taxonomy& t, bool strict_greater) {
    check_logit_size(teacher_logits, t);
    validate_label(label, t);
    TeacherOutput out;
    out.logits.assign(teacher_logits.begin(), teacher_logits.end());
    out.confidences.resize(static_cast<size_t>(t.num_hierarchies()));
    for (int32_t k = 0; k < t.num_hierarchies(); ++k) {
        const std::vector<double> probs = stable_softmax(teacher_logits.subspan(
            static_cast<size_t>(t.hierarchy_offset(k)), static_cast<size_t>(t.hierarchy_size(k))));
        out.confidences[static_cast<size_t>(k)] =
            estimate_teacher_confidence(probs, label.max_hierarchy, k, strict_greater);
    }
    return out;
}

LossResult semantic_kd_loss(std::span<const double> student_logits, const TeacherOutput& teacher,
                            const SemanticLabel& label, const Taxonomy& t, bool confidence_weighted,
                            KdNormalization normalization) {
    check_logit_size(student_logits, t);
    check_finite(student_logits, "student logits");
    if (teacher.logits.size() != student_logits.size()) {
        throw Error(ErrorCode::DimensionMismatch, "teacher has " + std::to_string(teacher.logits.size()) +
                                                      " logits, student has " + std::to_string(student_logits.size()));
    }
    const int32_t K = t.num_hierarchies();
    if (static_cast<int32_t>(teacher.confidences.size()) != K) {
        throw Error(ErrorCode::DimensionMismatch, "teacher confidences cover " +
                                                      std::to_string(teacher.confidences.size()) +
                                                      " hierarchies, taxonomy has " + std::to_string(K));
    }
    validate_label(label, t);
    for (int32_t k = 0; k <= label.max_hierarchy; ++k) {
        if (teacher.confidences[static_cast<size_t>(k)] != 1.0) {
            throw Error(ErrorCode::InconsistentLabel,
                        "supervised hierarchy " + std::to_string(k) + " must carry confidence 1");
        }
    }

    LossResult r;
    r.per_hierarchy.assign(static_cast<size_t>(K), 0.0);
    r.grad.assign(student_logits.size(), 0.0);
    for (int32_t k = 0; k < K; ++k) {
        const size_t offset = static_cast<size_t>(t.hierarchy_offset(k));
        const size_t size = static_cast<size_t>(t.hierarchy_size(k));
        const std::vector<double> s = stable_softmax(student_logits.subspan(offset, size));
        const std::vector<double> tc = stable_softmax(std::span<const double>(teacher.logits).subspan(offset, size));

        const double scale = normalization == KdNormalization::mean ? 1.0 / static_cast<double>(size) : 1.0;
        double loss_k = 0.0;
        double inner = 0.0;
        std::vector<double> dprob(size);
        for (size_t i = 0; i < size; ++i) {
            const double diff = s[i] - tc[i];
            loss_k += scale * diff * diff;
            dprob[i] = 2.0 * scale * diff;
            inner += dprob[i] * s[i];
        }
        const double weight = confidence_weighted ? teacher.confidences[static_cast<size_t>(k)] : 1.0;
        r.per_hierarchy[static_cast<size_t>(k)] = loss_k;
        r.total += weight * loss_k;
        if (weight != 0.0) {
            for (size_t i = 0; i < size; ++i) {
                r.grad[offset + i] = weight * s[i] * (dprob[i] - inner);
            }
        }
    }
    return r;
}

}  // namespace semsoft
