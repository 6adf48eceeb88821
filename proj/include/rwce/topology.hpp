#ifndef RWCE_TOPOLOGY_HPP
#define RWCE_TOPOLOGY_HPP

#include <memory>
#include <vector>

#include "rwce/common.hpp"

namespace rwce {

enum class TopologyKind { LineN, LineZ, RootedTree, Lattice2D };

inline const char* to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::LineN: return "line_n";
        case TopologyKind::LineZ: return "line_z";
        case TopologyKind::RootedTree: return "rooted_tree";
        case TopologyKind::Lattice2D: return "lattice2d";
    }
    return "?";
}

// Line, rooted tree, or 2D lattice. Copies are cheap (tree data is shared).
//
// Canonical neighbor order (fixed, used for inverse-CDF sampling):
//   LineN/LineZ:  left, right
//   Lattice2D:    left, up, right, down
//   RootedTree:   parent first, then children by index
class Topology {
public:
    static Topology line_n() { return Topology(TopologyKind::LineN); }
    static Topology line_z() { return Topology(TopologyKind::LineZ); }
    static Topology lattice2d() { return Topology(TopologyKind::Lattice2D); }

    // children[v] lists the children of vertex v; vertex 0 is the root.
    // Child indices must be larger than the parent's (BFS numbering).
    static Topology rooted_tree(std::vector<std::vector<Vertex>> children);

    // Complete rooted tree with `branching` children per vertex, `depth` levels.
    static Topology regular_tree(int branching, int depth);

    TopologyKind kind() const { return kind_; }

    void neighbors(Vertex v, std::vector<Vertex>& out) const;

    bool has_vertex(Vertex v) const;

    // Tree accessors; only valid for RootedTree.
    Vertex tree_parent(Vertex v) const { return tree_->parent[static_cast<size_t>(v)]; }
    const std::vector<Vertex>& tree_children(Vertex v) const {
        return tree_->children[static_cast<size_t>(v)];
    }
    int tree_depth(Vertex v) const { return tree_->depth[static_cast<size_t>(v)]; }
    std::int64_t tree_vertex_count() const {
        return static_cast<std::int64_t>(tree_->children.size());
    }
    // Depth of the child endpoint of an edge (tree edges connect levels k-1, k).
    int tree_edge_depth(const Edge& e) const {
        return std::max(tree_depth(e.u), tree_depth(e.v));
    }

    // Graph distance between two vertices (L1 on the lattice, path length
    // through lowest common ancestor on trees).
    std::int64_t distance(Vertex a, Vertex b) const;

private:
    struct TreeData {
        std::vector<std::vector<Vertex>> children;
        std::vector<Vertex> parent;  // -1 for the root
        std::vector<int> depth;
    };

    explicit Topology(TopologyKind k) : kind_(k) {}

    TopologyKind kind_;
    std::shared_ptr<const TreeData> tree_;
};

}  // namespace rwce

#endif
