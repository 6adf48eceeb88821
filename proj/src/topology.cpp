#include "rwce/topology.hpp"

#include <algorithm>

namespace rwce {

Topology Topology::rooted_tree(std::vector<std::vector<Vertex>> children) {
    auto data = std::make_shared<TreeData>();
    const size_t n = children.size();
    data->children = std::move(children);
    data->parent.assign(n, -1);
    data->depth.assign(n, 0);
    for (size_t v = 0; v < n; ++v) {
        for (Vertex c : data->children[v]) {
            if (c <= static_cast<Vertex>(v) || c >= static_cast<Vertex>(n))
                throw ConfigError("rooted_tree: child indices must follow BFS numbering");
            data->parent[static_cast<size_t>(c)] = static_cast<Vertex>(v);
            data->depth[static_cast<size_t>(c)] = data->depth[v] + 1;
        }
    }
    Topology t(TopologyKind::RootedTree);
    t.tree_ = std::move(data);
    return t;
}

Topology Topology::regular_tree(int branching, int depth) {
    std::int64_t count = 1, level = 1;
    for (int d = 0; d < depth; ++d) {
        level *= branching;
        count += level;
    }
    std::vector<std::vector<Vertex>> children(static_cast<size_t>(count));
    Vertex next = 1;
    std::int64_t level_start = 0, level_size = 1;
    for (int d = 0; d < depth; ++d) {
        for (std::int64_t i = 0; i < level_size; ++i) {
            auto& ch = children[static_cast<size_t>(level_start + i)];
            ch.reserve(static_cast<size_t>(branching));
            for (int b = 0; b < branching; ++b) ch.push_back(next++);
        }
        level_start += level_size;
        level_size *= branching;
    }
    return rooted_tree(std::move(children));
}

void Topology::neighbors(Vertex v, std::vector<Vertex>& out) const {
    out.clear();
    switch (kind_) {
        case TopologyKind::LineN:
            if (v > 0) out.push_back(v - 1);
            out.push_back(v + 1);
            break;
        case TopologyKind::LineZ:
            out.push_back(v - 1);
            out.push_back(v + 1);
            break;
        case TopologyKind::Lattice2D: {
            const std::int32_t x = lattice_x(v), y = lattice_y(v);
            out.push_back(lattice_vertex(x - 1, y));  // left
            out.push_back(lattice_vertex(x, y + 1));  // up
            out.push_back(lattice_vertex(x + 1, y));  // right
            out.push_back(lattice_vertex(x, y - 1));  // down
            break;
        }
        case TopologyKind::RootedTree: {
            if (v != 0) out.push_back(tree_parent(v));
            const auto& ch = tree_children(v);
            out.insert(out.end(), ch.begin(), ch.end());
            break;
        }
    }
}

bool Topology::has_vertex(Vertex v) const {
    switch (kind_) {
        case TopologyKind::LineN: return v >= 0;
        case TopologyKind::LineZ: return true;
        case TopologyKind::Lattice2D: return true;
        case TopologyKind::RootedTree:
            return v >= 0 && v < tree_vertex_count();
    }
    return false;
}

std::int64_t Topology::distance(Vertex a, Vertex b) const {
    switch (kind_) {
        case TopologyKind::LineN:
        case TopologyKind::LineZ:
            return std::abs(a - b);
        case TopologyKind::Lattice2D:
            return std::abs(static_cast<std::int64_t>(lattice_x(a)) - lattice_x(b)) +
                   std::abs(static_cast<std::int64_t>(lattice_y(a)) - lattice_y(b));
        case TopologyKind::RootedTree: {
            std::int64_t d = 0;
            Vertex x = a, y = b;
            while (tree_depth(x) > tree_depth(y)) { x = tree_parent(x); ++d; }
            while (tree_depth(y) > tree_depth(x)) { y = tree_parent(y); ++d; }
            while (x != y) { x = tree_parent(x); y = tree_parent(y); d += 2; }
            return d;
        }
    }
    return 0;
}

}  // namespace rwce
