#include "semsoft/taxonomy.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "semsoft/errors.hpp"

namespace semsoft {

namespace {

struct ClassInfo {
    std::string name;
    std::set<std::string> parents;  // distinct parent ids, "" for root rows
};

}  // namespace

int32_t Taxonomy::find(std::string_view class_id) const {
    auto it = by_id_.find(std::string(class_id));
    return it == by_id_.end() ? -1 : it->second;
}

int32_t Taxonomy::require(std::string_view class_id) const {
    const int32_t idx = find(class_id);
    if (idx < 0) throw Error(ErrorCode::UnknownClass, "class '" + std::string(class_id) + "' not in taxonomy");
    return idx;
}

RawEdgeList parse_edge_tsv(std::string_view text) {
    RawEdgeList raw;
    size_t pos = 0;
    int64_t line_no = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') {
            if (pos > text.size()) break;
            continue;
        }
        const size_t tab1 = line.find('\t');
        const size_t tab2 = tab1 == std::string_view::npos ? std::string_view::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string_view::npos || tab2 == std::string_view::npos ||
            line.find('\t', tab2 + 1) != std::string_view::npos) {
            throw Error(ErrorCode::MalformedRecord,
                        "taxonomy line " + std::to_string(line_no) + " must have exactly 3 tab-separated fields",
                        line_no);
        }
        RawEdge edge;
        edge.class_id = std::string(line.substr(0, tab1));
        edge.parent_id = std::string(line.substr(tab1 + 1, tab2 - tab1 - 1));
        edge.name = std::string(line.substr(tab2 + 1));
        if (edge.class_id.empty()) {
            throw Error(ErrorCode::MalformedRecord, "taxonomy line " + std::to_string(line_no) + " has empty class_id",
                        line_no);
        }
        raw.entries.push_back(std::move(edge));
        if (pos > text.size()) break;
    }
    return raw;
}

RawEdgeList load_edge_tsv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open taxonomy file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_edge_tsv(buffer.str());
}

Taxonomy parse_taxonomy(const RawEdgeList& raw, DagPolicy policy) {
    if (raw.entries.empty()) throw Error(ErrorCode::EmptyInput, "taxonomy edge list is empty");

    // std::map keeps every step independent of input row order.
    std::map<std::string, ClassInfo> info;
    for (const RawEdge& edge : raw.entries) {
        if (edge.class_id.empty()) throw Error(ErrorCode::MalformedRecord, "empty class_id in edge list");
        auto [it, inserted] = info.try_emplace(edge.class_id);
        if (inserted) {
            it->second.name = edge.name;
        } else if (it->second.name != edge.name) {
            throw Error(ErrorCode::DuplicateClassId,
                        "class '" + edge.class_id + "' listed with conflicting names");
        }
        if (!it->second.parents.insert(edge.parent_id).second) {
            throw Error(ErrorCode::DuplicateClassId,
                        "class '" + edge.class_id + "' listed twice with the same parent");
        }
    }

    for (const auto& [id, ci] : info) {
        for (const std::string& parent : ci.parents) {
            if (!parent.empty() && !info.count(parent)) {
                throw Error(ErrorCode::DanglingParent,
                            "class '" + id + "' references unknown parent '" + parent + "'");
            }
        }
    }

    if (policy == DagPolicy::reject) {
        for (const auto& [id, ci] : info) {
            if (ci.parents.size() > 1) {
                throw Error(ErrorCode::MultiParentRejected,
                            "class '" + id + "' has " + std::to_string(ci.parents.size()) + " parents");
            }
        }
    }

    // Minimal hierarchy via BFS from the roots; the first level at which a
    // class becomes reachable is its minimal depth over candidate parents.
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& [id, ci] : info) {
        for (const std::string& parent : ci.parents) {
            if (!parent.empty()) children[parent].push_back(id);
        }
    }
    std::map<std::string, int32_t> depth;
    std::deque<std::string> queue;
    for (const auto& [id, ci] : info) {
        if (ci.parents.count("")) {
            depth[id] = 0;
            queue.push_back(id);
        }
    }
    while (!queue.empty()) {
        const std::string current = queue.front();
        queue.pop_front();
        auto kids = children.find(current);
        if (kids == children.end()) continue;
        const int32_t next_depth = depth[current] + 1;
        for (const std::string& child : kids->second) {
            if (!depth.count(child)) {
                depth[child] = next_depth;
                queue.push_back(child);
            }
        }
    }
    if (depth.size() != info.size()) {
        for (const auto& [id, ci] : info) {
            if (!depth.count(id)) {
                throw Error(ErrorCode::CycleDetected, "class '" + id + "' is its own ancestor or depends on a cycle");
            }
        }
    }

    // Resolve the chosen parent: roots win outright (depth 0 beats any edge),
    // otherwise the lexicographically smallest parent at depth - 1.
    std::map<std::string, std::string> chosen_parent;
    for (const auto& [id, ci] : info) {
        if (ci.parents.count("")) {
            chosen_parent[id] = "";
            continue;
        }
        const int32_t want = depth[id] - 1;
        std::string best;
        for (const std::string& parent : ci.parents) {
            if (depth[parent] != want) continue;
            if (best.empty() || parent < best) best = parent;
        }
        chosen_parent[id] = best;
    }

    std::vector<std::string> order;
    order.reserve(info.size());
    for (const auto& [id, ci] : info) order.push_back(id);
    std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        if (depth[a] != depth[b]) return depth[a] < depth[b];
        return a < b;
    });

    Taxonomy t;
    t.classes_.reserve(order.size());
    int32_t max_depth = 0;
    for (const std::string& id : order) max_depth = std::max(max_depth, depth[id]);
    t.partitions_.resize(static_cast<size_t>(max_depth) + 1);
    for (size_t i = 0; i < order.size(); ++i) {
        const std::string& id = order[i];
        Taxonomy::ClassNode n;
        n.class_id = id;
        n.name = info[id].name;
        n.hierarchy = depth[id];
        n.within_index = static_cast<int32_t>(t.partitions_[static_cast<size_t>(n.hierarchy)].size());
        t.partitions_[static_cast<size_t>(n.hierarchy)].push_back(static_cast<int32_t>(i));
        t.by_id_[id] = static_cast<int32_t>(i);
        t.classes_.push_back(std::move(n));
    }
    for (auto& n : t.classes_) {
        const std::string& parent = chosen_parent[n.class_id];
        n.parent = parent.empty() ? -1 : t.by_id_[parent];
    }
    t.offsets_.resize(t.partitions_.size());
    int32_t offset = 0;
    for (size_t k = 0; k < t.partitions_.size(); ++k) {
        t.offsets_[k] = offset;
        offset += static_cast<int32_t>(t.partitions_[k].size());
    }
    return t;
}

Taxonomy load_taxonomy(const std::filesystem::path& path, DagPolicy policy) {
    return parse_taxonomy(load_edge_tsv(path), policy);
}

std::vector<std::string> ancestor_chain(const Taxonomy& t, std::string_view class_id) {
    int32_t idx = t.require(class_id);
    std::vector<std::string> chain;
    while (idx >= 0) {
        chain.push_back(t.node(idx).class_id);
        idx = t.node(idx).parent;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

SemanticLabel expand_label(const Taxonomy& t, int32_t global_index) {
    SemanticLabel label;
    label.per_hierarchy.assign(static_cast<size_t>(t.num_hierarchies()), kInactive);
    label.max_hierarchy = t.node(global_index).hierarchy;
    int32_t idx = global_index;
    while (idx >= 0) {
        const Taxonomy::ClassNode& n = t.node(idx);
        label.per_hierarchy[static_cast<size_t>(n.hierarchy)] = n.within_index;
        idx = n.parent;
    }
    return label;
}

SemanticLabel expand_label(const Taxonomy& t, std::string_view class_id) {
    return expand_label(t, t.require(class_id));
}

std::vector<int64_t> taxonomy_stats(const Taxonomy& t) {
    std::vector<int64_t> counts;
    counts.reserve(t.partitions().size());
    for (const auto& partition : t.partitions()) counts.push_back(static_cast<int64_t>(partition.size()));
    return counts;
}

}  // namespace semsoft
