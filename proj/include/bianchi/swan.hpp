#pragma once

#include "bianchi/hemis.hpp"

#include <vector>

namespace bianchi {

enum class PruneRule { ThreeVertex, Nonempty };

struct SwanConfig {
    PruneRule prune_rule = PruneRule::ThreeVertex;
};

// A surviving intersection point on the boundary of the candidate set,
// lifted onto its supporting hemispheres.
struct SwanVertex {
    FieldElem z;
    Rat sq_height;                                  // 0 marks singular points
    std::vector<std::pair<int, AlgInt>> supports;   // (list index, translate)
    bool singular() const { return sq_height == 0; }
};

struct VertexSet {
    std::vector<SwanVertex> vertices;
    // Per hemisphere: indices into `vertices`, in convex cyclic order
    // (counterclockwise in the plane coordinates).
    std::vector<std::vector<int>> polygon;
};

struct HemisphereList {
    std::vector<Hemisphere> hemis; // ascending norm(mu), then lex center
    Int max_mu_norm(const FieldCtx& ctx) const;
};

// Unit hemispheres centred at the O-points of the closed rectangle.
HemisphereList initial_step(const FieldCtx& ctx);

// Loop horizon extrapolation for the largest |mu| (a hint, not a bound).
Rat estimate_E(const FieldCtx& ctx, long class_number);

// Adds the non-redundant unimodular hemispheres of squared radius 1/N_sq.
void record_hemispheres(const Int& N_sq, HemisphereList& list, const FieldCtx& ctx);

struct VertexComputation {
    Rat min_sq_height;      // minimal positive squared vertex height
    bool has_proper_vertex = false;
    bool coverage_failure = false; // witnessed z not strictly below anything
    VertexSet vertices;
};

// Computes agree lines, intersection points and the vertex structure for
// the current list; erases hemispheres per the prune rule (recomputing to a
// fixpoint) and returns the minimal proper vertex height.
VertexComputation minimal_vertex_height(HemisphereList& list, const FieldCtx& ctx,
                                        const SwanConfig& cfg = {});

struct Polyhedron {
    HemisphereList list;
    VertexSet vertices;
    Rat min_sq_height;
    Int horizon; // largest processed squared-norm value
};

// Swan's algorithm end-to-end: records hemispheres by ascending norm until
// the termination criterion holds.
Polyhedron compute_polyhedron(const FieldCtx& ctx, const SwanConfig& cfg = {});

// Independent re-verification of the termination criterion: enumerates all
// unimodular pairs with norm(mu) <= 1/min_sq_height afresh and checks that
// no vertex lies strictly below any of their hemispheres.
bool verify_termination(const Polyhedron& poly, const FieldCtx& ctx);

} // namespace bianchi
