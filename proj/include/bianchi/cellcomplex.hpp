#pragma once

#include "bianchi/isom.hpp"
#include "bianchi/swan.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace bianchi {

// Fundamental patch: one full polygon per listed hemisphere, with shared
// vertices; the wall cells of the translation prism are never built (the
// retraction removes every cell touching the cusp at infinity).
struct Patch {
    struct Vertex {
        PointH p;
        bool singular = false;
    };
    struct Edge {
        int v = -1, w = -1; // patch vertex ids, v < w
        int poly = -1;      // one incident polygon (supplies the arc's sphere)
    };
    struct Polygon {
        int hemi = -1;          // index into the hemisphere list
        std::vector<int> cycle; // vertex ids, counterclockwise
    };

    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    std::vector<Polygon> polys;
    // per polygon: (edge id, +1 if traversed v->w) per boundary slot
    std::vector<std::vector<std::pair<int, int>>> poly_edges;

    int edge_between(int v, int w) const; // -1 if absent
};

Patch build_patch(const Polyhedron& poly, const FieldCtx& ctx);

// Gamma-orbit structure of the patch cells with gluing witnesses.
struct Orbits {
    // vertices
    std::vector<int> vertex_orbit;          // patch vid -> orbit id
    std::vector<int> vertex_rep;            // orbit id -> patch vid
    std::vector<Matrix2> vertex_to_rep;     // patch vid -> matrix g: g(v) = rep
    std::vector<bool> vertex_has_matrix;    // singular chains may lack one
    // edges
    std::vector<int> edge_orbit;
    std::vector<int> edge_rep;
    std::vector<Matrix2> edge_to_rep;
    std::vector<int> edge_parity;           // +1: endpoints map in order, -1 swapped
    std::vector<bool> edge_flipped;         // orbit flag
    std::vector<Matrix2> edge_flip;         // per orbit, valid when flipped
    // polygons
    std::vector<int> poly_orbit;
    std::vector<int> poly_rep;
    std::vector<Matrix2> poly_to_rep;
    std::vector<FiniteGroup> poly_setwise;  // per orbit, at the rep
};

Orbits identify_cells(const Patch& patch, const Polyhedron& poly, const FieldCtx& ctx);

// Quotient CW complex after equivariant subdivision (abstract midpoints on
// flipped edges, abstract cone points on polygons with nontrivial setwise
// stabilizer). Cells are fixed pointwise by their stabilizers.
struct QuotientComplex {
    struct VertexCell {
        bool singular = false;
        FiniteGroup stab;       // trivial placeholder for singular cusps
        Abelianization ab;
        std::string label;
    };
    struct EdgeCell {
        int tail = -1, head = -1; // vertex cell ids
        FiniteGroup stab;
        Abelianization ab;
        // conjugators carrying stab into the endpoint stabilizers
        Matrix2 conj_tail, conj_head;
        std::string label;
    };
    struct FaceCell {
        std::vector<std::pair<int, Int>> boundary; // (edge cell, coefficient)
        std::string label;
    };

    std::vector<VertexCell> vertices;
    std::vector<EdgeCell> edges;
    std::vector<FaceCell> faces;

    IntMatrix d1() const;
    IntMatrix d2() const;
    long singular_vertex_orbits() const;
};

QuotientComplex quotient_complex(const Patch& patch, const Orbits& orbits,
                                 const Polyhedron& poly, const FieldCtx& ctx);

} // namespace bianchi
