#ifndef SEMSOFT_TAXONOMY_HPP
#define SEMSOFT_TAXONOMY_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semsoft {

// One row of the hypernym edge list: `parent_id` empty marks a root. The same
// class_id may appear on several rows with different parents; that encodes a
// multi-parent (DAG) input which parse_taxonomy resolves per DagPolicy.
struct RawEdge {
    std::string class_id;
    std::string parent_id;
    std::string name;
};

struct RawEdgeList {
    std::vector<RawEdge> entries;
};

enum class DagPolicy {
    reject,            // any class with more than one distinct parent fails
    min_depth_parent,  // keep the parent giving minimal hierarchy, ties by smallest parent_id
};

struct LogitIndex {
    int32_t hierarchy = 0;
    int32_t within_index = 0;
};

// Marks hierarchies above a label's depth in SemanticLabel::per_hierarchy.
inline constexpr int32_t kInactive = -1;

// Ground truth expanded over hierarchies: entry k is the within-hierarchy
// index of the label's ancestor at hierarchy k, kInactive above max_hierarchy.
struct SemanticLabel {
    std::vector<int32_t> per_hierarchy;
    int32_t max_hierarchy = 0;
};

// Immutable forest of classes. Classes are laid out hierarchy-major and
// lexicographically by class_id within each hierarchy, so the global index of
// (hierarchy k, within index i) is hierarchy_offset(k) + i. Safe to share
// across threads once constructed.
class Taxonomy {
public:
    struct ClassNode {
        std::string class_id;
        std::string name;
        int32_t parent = -1;  // global index, -1 for roots
        int32_t hierarchy = 0;
        int32_t within_index = 0;
    };

    const std::vector<ClassNode>& classes() const { return classes_; }
    const ClassNode& node(int32_t global_index) const { return classes_[static_cast<size_t>(global_index)]; }
    size_t num_classes() const { return classes_.size(); }
    int32_t num_hierarchies() const { return static_cast<int32_t>(partitions_.size()); }

    // Per-hierarchy ordered lists of global class indices.
    const std::vector<std::vector<int32_t>>& partitions() const { return partitions_; }

    int64_t hierarchy_size(int32_t k) const { return static_cast<int64_t>(partitions_[static_cast<size_t>(k)].size()); }
    int32_t hierarchy_offset(int32_t k) const { return offsets_[static_cast<size_t>(k)]; }
    int32_t global_index(int32_t hierarchy, int32_t within) const { return hierarchy_offset(hierarchy) + within; }

    LogitIndex logit_index(int32_t global_index) const {
        const ClassNode& n = node(global_index);
        return LogitIndex{n.hierarchy, n.within_index};
    }

    // Global index for a class_id, -1 when absent.
    int32_t find(std::string_view class_id) const;
    // Global index for a class_id, throws UnknownClass when absent.
    int32_t require(std::string_view class_id) const;

private:
    friend Taxonomy parse_taxonomy(const RawEdgeList&, DagPolicy);

    std::vector<ClassNode> classes_;
    std::vector<std::vector<int32_t>> partitions_;
    std::vector<int32_t> offsets_;
    std::unordered_map<std::string, int32_t> by_id_;
};

// TSV edge list: `class_id<TAB>parent_id<TAB>name`, one class per line,
// empty parent_id marks a root, '#'-prefixed lines are comments.
RawEdgeList parse_edge_tsv(std::string_view text);
RawEdgeList load_edge_tsv(const std::filesystem::path& path);

Taxonomy parse_taxonomy(const RawEdgeList& raw, DagPolicy policy = DagPolicy::min_depth_parent);
Taxonomy load_taxonomy(const std::filesystem::path& path, DagPolicy policy = DagPolicy::min_depth_parent);

// Chain root -> ... -> class, sorted by ascending hierarchy.
std::vector<std::string> ancestor_chain(const Taxonomy& t, std::string_view class_id);

SemanticLabel expand_label(const Taxonomy& t, std::string_view class_id);
SemanticLabel expand_label(const Taxonomy& t, int32_t global_index);

// Per-hierarchy class counts N_0..N_{K-1}.
std::vector<int64_t> taxonomy_stats(const Taxonomy& t);

}  // namespace semsoft

#endif  // SEMSOFT_TAXONOMY_HPP
