#include "bianchi/cellcomplex.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace bianchi {

namespace {

// Union-find with group-valued edge weights: weight_of(x) maps x onto the
// representative of its class.
struct WeightedDSU {
    const FieldCtx& ctx;
    std::vector<int> parent;
    std::vector<Matrix2> to_parent; // g with g(node) = parent-object
    std::vector<int> parity;        // +-1, for edge orientation tracking
    std::vector<bool> has_matrix;

    explicit WeightedDSU(const FieldCtx& c, size_t n) : ctx(c) {
        parent.resize(n);
        to_parent.assign(n, Matrix2::identity());
        parity.assign(n, 1);
        has_matrix.assign(n, true);
        for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }

    struct Find {
        int root;
        Matrix2 g; // maps node onto root
        int parity;
        bool has_matrix;
    };

    Find find(int x) {
        Matrix2 g = Matrix2::identity();
        int p = 1;
        bool hm = true;
        int cur = x;
        while (parent[cur] != cur) {
            g = to_parent[cur].mul(g, ctx);
            p *= parity[cur];
            hm = hm && has_matrix[cur];
            cur = parent[cur];
        }
        return {cur, g, p, hm};
    }

    // g_ab maps object a onto object b (with given parity). Returns the
    // self-map (root -> root) when a and b were already equivalent.
    struct UnionResult {
        bool merged;
        bool cycle_conflict; // parity mismatch on an existing class
        Matrix2 self_map;
        bool self_map_valid;
    };

    UnionResult unite(int a, int b, const Matrix2& g_ab, int par, bool with_matrix = true) {
        Find fa = find(a), fb = find(b);
        if (fa.root != fb.root) {
            // attach fa.root under fb.root:  root_a -> a -> b -> root_b
            Matrix2 w = Matrix2::identity();
            bool hm = with_matrix && fa.has_matrix && fb.has_matrix;
            if (hm) w = fb.g.mul(g_ab.mul(fa.g.inverse(ctx), ctx), ctx);
            parent[fa.root] = fb.root;
            to_parent[fa.root] = w;
            parity[fa.root] = fb.parity * par * fa.parity;
            has_matrix[fa.root] = hm;
            return {true, false, Matrix2::identity(), false};
        }
        bool conflict = (fa.parity * par) != fb.parity;
        Matrix2 self = Matrix2::identity();
        bool valid = with_matrix && fa.has_matrix && fb.has_matrix;
        if (valid) self = fb.g.mul(g_ab.mul(fa.g.inverse(ctx), ctx), ctx);
        return {false, conflict, self, valid};
    }
};

PointH vertex_point(const Patch& patch, int vid) { return patch.vertices[vid].p; }

// Chord-midpoint lift of a patch edge on its supporting hemisphere; always
// an interior point of the arc.
PointH edge_midpoint(const Patch& patch, const Polyhedron& poly, int eid, const FieldCtx& ctx) {
    const Patch::Edge& e = patch.edges[eid];
    const FieldElem& zv = patch.vertices[e.v].p.z;
    const FieldElem& zw = patch.vertices[e.w].p.z;
    FieldElem mid{(zv.x + zw.x) / 2, (zv.y + zw.y) / 2};
    const Hemisphere& h = poly.list.hemis[patch.polys[e.poly].hemi];
    auto lifted = lift(mid, h, ctx);
    BIANCHI_CHECK(lifted && lifted->sq_height > 0, "edge midpoint off the sphere");
    return *lifted;
}

} // namespace

int Patch::edge_between(int v, int w) const {
    if (v > w) std::swap(v, w);
    for (size_t i = 0; i < edges.size(); ++i)
        if (edges[i].v == v && edges[i].w == w) return static_cast<int>(i);
    return -1;
}

Patch build_patch(const Polyhedron& poly, const FieldCtx& ctx) {
    (void)ctx;
    Patch patch;
    for (const SwanVertex& sv : poly.vertices.vertices)
        patch.vertices.push_back({PointH{sv.z, sv.sq_height}, sv.singular()});

    std::map<std::pair<int, int>, int> edge_index;
    for (size_t hi = 0; hi < poly.vertices.polygon.size(); ++hi) {
        const auto& cyc = poly.vertices.polygon[hi];
        if (cyc.size() < 3) continue;
        Patch::Polygon pg;
        pg.hemi = static_cast<int>(hi);
        pg.cycle = cyc;
        int pid = static_cast<int>(patch.polys.size());
        patch.polys.push_back(pg);
        patch.poly_edges.emplace_back();
        for (size_t k = 0; k < cyc.size(); ++k) {
            int a = cyc[k], b = cyc[(k + 1) % cyc.size()];
            int v = std::min(a, b), w = std::max(a, b);
            auto it = edge_index.find({v, w});
            int eid;
            if (it == edge_index.end()) {
                eid = static_cast<int>(patch.edges.size());
                patch.edges.push_back({v, w, pid});
                edge_index[{v, w}] = eid;
            } else {
                eid = it->second;
            }
            patch.poly_edges.back().push_back({eid, a == v ? 1 : -1});
        }
    }
    return patch;
}

namespace {

// All gamma in PSL2(O) with gamma(P) = Q as vertex sets, with the induced
// cycle permutation.
struct PolyMap {
    Matrix2 g;
    std::vector<int> perm; // P.cycle[i] maps to Q.cycle[perm[i]]
};

std::optional<std::vector<int>> match_vertices(const Patch& patch, const Patch::Polygon& P,
                                               const Patch::Polygon& Q, const Matrix2& g,
                                               const FieldCtx& ctx) {
    if (P.cycle.size() != Q.cycle.size()) return std::nullopt;
    std::vector<int> perm(P.cycle.size(), -1);
    for (size_t i = 0; i < P.cycle.size(); ++i) {
        PointH img = apply(g, vertex_point(patch, P.cycle[i]), ctx);
        int found = -1;
        for (size_t j = 0; j < Q.cycle.size(); ++j)
            if (vertex_point(patch, Q.cycle[j]) == img) {
                found = static_cast<int>(j);
                break;
            }
        if (found < 0) return std::nullopt;
        perm[i] = found;
    }
    // bijectivity
    std::vector<int> seen(Q.cycle.size(), 0);
    for (int p : perm) {
        if (seen[p]) return std::nullopt;
        seen[p] = 1;
    }
    return perm;
}

std::vector<PolyMap> poly_maps(const Patch& patch, int pi, int qi, const FieldCtx& ctx) {
    const Patch::Polygon& P = patch.polys[pi];
    const Patch::Polygon& Q = patch.polys[qi];
    std::vector<PolyMap> out;
    if (P.cycle.size() != Q.cycle.size()) return out;
    int v1 = -1;
    for (int v : P.cycle)
        if (!patch.vertices[v].singular) {
            v1 = v;
            break;
        }
    BIANCHI_CHECK(v1 >= 0, "polygon with only singular corners");
    std::vector<Matrix2> seen;
    for (int w : Q.cycle) {
        if (patch.vertices[w].singular) continue;
        for (const Matrix2& g :
             identify_with_translations(vertex_point(patch, v1), vertex_point(patch, w), ctx)) {
            if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
            seen.push_back(g);
            auto perm = match_vertices(patch, P, Q, g, ctx);
            if (perm) out.push_back({g, *perm});
        }
    }
    return out;
}

// The facet-pairing candidate built from the hemisphere's unimodular pair:
// it preserves heights along the hemisphere and usually maps the polygon
// onto another patch polygon directly.
std::vector<PolyMap> iso_pairing(const Patch& patch, int pi, const Polyhedron& poly,
                                 const FieldCtx& ctx, int& target_out) {
    target_out = -1;
    const Patch::Polygon& P = patch.polys[pi];
    const Hemisphere& H = poly.list.hemis[P.hemi];
    auto bez = unimodular_bezout(H.mu, H.lam, ctx);
    if (!bez) return {};
    auto [x, y] = *bez; // x*mu + y*lam = 1
    Matrix2 g0 = Matrix2::make(-y, -x, H.mu, -H.lam, ctx);
    // Image sphere centre: a/c for the inverse isometric sphere.
    FieldElem img_center = div(FieldElem(g0.a), FieldElem(g0.c), ctx);
    for (size_t qi = 0; qi < patch.polys.size(); ++qi) {
        const Patch::Polygon& Q = patch.polys[qi];
        if (Q.cycle.size() != P.cycle.size()) continue;
        const Hemisphere& HQ = poly.list.hemis[Q.hemi];
        if (HQ.sq_radius != H.sq_radius) continue;
        FieldElem t = HQ.center - img_center;
        if (!is_integral(t)) continue;
        Matrix2 g = Matrix2::translation(to_algint(t), ctx).mul(g0, ctx);
        auto perm = match_vertices(patch, P, Q, g, ctx);
        if (perm) {
            target_out = static_cast<int>(qi);
            return {{g, *perm}};
        }
    }
    return {};
}

} // namespace

Orbits identify_cells(const Patch& patch, const Polyhedron& poly, const FieldCtx& ctx) {
    const size_t NV = patch.vertices.size(), NE = patch.edges.size(), NP = patch.polys.size();
    WeightedDSU vdsu(ctx, NV), edsu(ctx, NE), pdsu(ctx, NP);

    struct FlipWitness {
        int edge;  // any member of the class
        Matrix2 g; // maps that edge to itself, endpoints swapped
        bool valid;
    };
    std::vector<FlipWitness> flips;

    auto record_map = [&](int pi, int qi, const PolyMap& pm) {
        pdsu.unite(pi, qi, pm.g, 1);
        const auto& Pc = patch.polys[pi].cycle;
        const auto& Qc = patch.polys[qi].cycle;
        size_t n = Pc.size();
        for (size_t i = 0; i < n; ++i) vdsu.unite(Pc[i], Qc[pm.perm[i]], pm.g, 1);
        for (size_t i = 0; i < n; ++i) {
            int a = Pc[i], b = Pc[(i + 1) % n];
            int ia = pm.perm[i], ib = pm.perm[(i + 1) % n];
            int a2 = Qc[ia], b2 = Qc[ib];
            int e1 = patch.edge_between(a, b);
            int e2 = patch.edge_between(a2, b2);
            BIANCHI_CHECK(e1 >= 0, "record_map: slot without edge");
            if (e2 < 0) continue; // image slot not an edge of Q (cannot happen
                                  // for genuine polygon maps)
            // parity: does min endpoint go to min endpoint?
            int mn1 = patch.edges[e1].v;
            int img_of_mn1 = (a == mn1) ? a2 : b2;
            int par = (img_of_mn1 == patch.edges[e2].v) ? 1 : -1;
            auto r = edsu.unite(e1, e2, pm.g, par);
            if (!r.merged && r.cycle_conflict)
                flips.push_back({e1, r.self_map, r.self_map_valid});
        }
    };

    // 1. Facet pairings (with completeness fallback).
    for (size_t pi = 0; pi < NP; ++pi) {
        int target = -1;
        auto pms = iso_pairing(patch, static_cast<int>(pi), poly, ctx, target);
        if (!pms.empty()) {
            record_map(static_cast<int>(pi), target, pms[0]);
            continue;
        }
        bool found = false;
        for (size_t qi = 0; qi < NP && !found; ++qi) {
            for (const PolyMap& pm : poly_maps(patch, static_cast<int>(pi), static_cast<int>(qi), ctx)) {
                record_map(static_cast<int>(pi), static_cast<int>(qi), pm);
                found = true;
                break;
            }
        }
        BIANCHI_CHECK(found, "identify_cells: unmatched boundary cell");
    }

    // 2. Translation gluings between patch cells.
    for (size_t i = 0; i < NV; ++i)
        for (size_t j = i + 1; j < NV; ++j) {
            const auto& a = patch.vertices[i];
            const auto& b = patch.vertices[j];
            if (a.p.sq_height != b.p.sq_height) continue;
            FieldElem t = b.p.z - a.p.z;
            if (!is_integral(t)) continue;
            vdsu.unite(static_cast<int>(i), static_cast<int>(j),
                       Matrix2::translation(to_algint(t), ctx), 1);
        }
    for (size_t i = 0; i < NE; ++i)
        for (size_t j = i + 1; j < NE; ++j) {
            const auto& e = patch.edges[i];
            const auto& f = patch.edges[j];
            const auto &ev = patch.vertices[e.v].p, &ew = patch.vertices[e.w].p;
            const auto &fv = patch.vertices[f.v].p, &fw = patch.vertices[f.w].p;
            // direct: e.v -> f.v
            if (ev.sq_height == fv.sq_height && ew.sq_height == fw.sq_height) {
                FieldElem t = fv.z - ev.z;
                if (is_integral(t) && fw.z - ew.z == t)
                    edsu.unite(static_cast<int>(i), static_cast<int>(j),
                               Matrix2::translation(to_algint(t), ctx), 1);
            }
            // swapped: e.v -> f.w
            if (ev.sq_height == fw.sq_height && ew.sq_height == fv.sq_height) {
                FieldElem t = fw.z - ev.z;
                if (is_integral(t) && fv.z - ew.z == t)
                    edsu.unite(static_cast<int>(i), static_cast<int>(j),
                               Matrix2::translation(to_algint(t), ctx), -1);
            }
        }

    // 3. Merge pass on polygon orbit representatives (completeness).
    auto poly_reps = [&]() {
        std::vector<int> reps;
        for (size_t i = 0; i < NP; ++i)
            if (pdsu.find(static_cast<int>(i)).root == static_cast<int>(i))
                reps.push_back(static_cast<int>(i));
        return reps;
    };
    {
        auto reps = poly_reps();
        for (size_t x = 0; x < reps.size(); ++x)
            for (size_t y = x + 1; y < reps.size(); ++y) {
                if (pdsu.find(reps[x]).root == pdsu.find(reps[y]).root) continue;
                auto pms = poly_maps(patch, reps[x], reps[y], ctx);
                if (!pms.empty()) record_map(reps[x], reps[y], pms[0]);
            }
    }

    // 4. Setwise stabilizers at polygon representatives; their cell action
    // feeds the vertex/edge gluing graphs too.
    std::map<int, FiniteGroup> setwise;
    for (int rep : poly_reps()) {
        std::vector<Matrix2> gens;
        for (const PolyMap& pm : poly_maps(patch, rep, rep, ctx)) {
            gens.push_back(pm.g);
            record_map(rep, rep, pm);
        }
        setwise[rep] = FiniteGroup::closure(std::move(gens), ctx);
    }

    // 5. Merge pass on edge representatives via arc midpoints; also catches
    // same-orbit flips whose witness fixes the chord midpoint.
    auto edge_reps = [&]() {
        std::vector<int> reps;
        for (size_t i = 0; i < NE; ++i)
            if (edsu.find(static_cast<int>(i)).root == static_cast<int>(i))
                reps.push_back(static_cast<int>(i));
        return reps;
    };
    {
        auto reps = edge_reps();
        for (size_t x = 0; x < reps.size(); ++x) {
            PointH mx = edge_midpoint(patch, poly, reps[x], ctx);
            const auto& ex = patch.edges[reps[x]];
            PointH xv = vertex_point(patch, ex.v), xw = vertex_point(patch, ex.w);
            for (size_t y = x; y < reps.size(); ++y) {
                if (y > x && edsu.find(reps[x]).root == edsu.find(reps[y]).root) continue;
                PointH my = edge_midpoint(patch, poly, reps[y], ctx);
                const auto& ey = patch.edges[reps[y]];
                PointH yv = vertex_point(patch, ey.v), yw = vertex_point(patch, ey.w);
                for (const Matrix2& g : identify_with_translations(mx, my, ctx)) {
                    PointH iv = apply(g, xv, ctx), iw = apply(g, xw, ctx);
                    int par = 0;
                    if (iv == yv && iw == yw) par = 1;
                    if (iv == yw && iw == yv) par = -1;
                    if (par == 0) continue;
                    auto r = edsu.unite(reps[x], reps[y], g, par);
                    if (!r.merged && r.cycle_conflict)
                        flips.push_back({reps[x], r.self_map, r.self_map_valid});
                }
            }
        }
    }

    // 6. Merge pass on vertex representatives.
    {
        std::vector<int> reps;
        for (size_t i = 0; i < NV; ++i)
            if (vdsu.find(static_cast<int>(i)).root == static_cast<int>(i))
                reps.push_back(static_cast<int>(i));
        for (size_t x = 0; x < reps.size(); ++x)
            for (size_t y = x + 1; y < reps.size(); ++y) {
                if (vdsu.find(reps[x]).root == vdsu.find(reps[y]).root) continue;
                const auto& a = patch.vertices[reps[x]];
                const auto& b = patch.vertices[reps[y]];
                if (a.singular != b.singular) continue;
                if (!a.singular) {
                    auto gs = identify_with_translations(a.p, b.p, ctx);
                    if (!gs.empty()) vdsu.unite(reps[x], reps[y], gs[0], 1);
                } else {
                    // Singular cusps are equivalent iff their ideal classes agree.
                    auto cusp_ideal = [&](const FieldElem& z) {
                        Int den = z.x.get_den();
                        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), z.y.get_den().get_mpz_t());
                        AlgInt lam(z.x.get_num() * (den / z.x.get_den()),
                                   z.y.get_num() * (den / z.y.get_den()));
                        return ideal_from_generators({lam, AlgInt(den, 0)}, ctx);
                    };
                    if (same_ideal_class(cusp_ideal(a.p.z), cusp_ideal(b.p.z), ctx))
                        vdsu.unite(reps[x], reps[y], Matrix2::identity(), 1,
                                   /*with_matrix=*/false);
                }
            }
    }

    // Assemble the result.
    Orbits orb;
    orb.vertex_orbit.resize(NV);
    orb.vertex_to_rep.assign(NV, Matrix2::identity());
    orb.vertex_has_matrix.assign(NV, true);
    std::map<int, int> vroot_to_orbit;
    for (size_t i = 0; i < NV; ++i) {
        auto f = vdsu.find(static_cast<int>(i));
        auto it = vroot_to_orbit.find(f.root);
        if (it == vroot_to_orbit.end()) {
            it = vroot_to_orbit.emplace(f.root, static_cast<int>(orb.vertex_rep.size())).first;
            orb.vertex_rep.push_back(f.root);
        }
        orb.vertex_orbit[i] = it->second;
        orb.vertex_to_rep[i] = f.g;
        orb.vertex_has_matrix[i] = f.has_matrix;
    }
    orb.edge_orbit.resize(NE);
    orb.edge_to_rep.assign(NE, Matrix2::identity());
    orb.edge_parity.assign(NE, 1);
    std::map<int, int> eroot_to_orbit;
    for (size_t i = 0; i < NE; ++i) {
        auto f = edsu.find(static_cast<int>(i));
        auto it = eroot_to_orbit.find(f.root);
        if (it == eroot_to_orbit.end()) {
            it = eroot_to_orbit.emplace(f.root, static_cast<int>(orb.edge_rep.size())).first;
            orb.edge_rep.push_back(f.root);
        }
        orb.edge_orbit[i] = it->second;
        orb.edge_to_rep[i] = f.g;
        orb.edge_parity[i] = f.parity;
    }
    orb.edge_flipped.assign(orb.edge_rep.size(), false);
    orb.edge_flip.assign(orb.edge_rep.size(), Matrix2::identity());
    std::map<int, Matrix2> flip_raw; // patch edge -> self map, endpoints swapped
    for (const FlipWitness& fw : flips) {
        int eo = orb.edge_orbit[fw.edge];
        orb.edge_flipped[eo] = true;
        if (fw.valid && !flip_raw.count(fw.edge)) flip_raw.emplace(fw.edge, fw.g);
    }
    // Express each flip at the orbit representative.
    for (size_t eo = 0; eo < orb.edge_rep.size(); ++eo) {
        if (!orb.edge_flipped[eo]) continue;
        int re = orb.edge_rep[eo];
        const auto& e = patch.edges[re];
        PointH pv = vertex_point(patch, e.v), pw = vertex_point(patch, e.w);
        auto is_flip = [&](const Matrix2& g) {
            return apply(g, pv, ctx) == pw && apply(g, pw, ctx) == pv;
        };
        bool found = false;
        for (auto& [pe, g] : flip_raw) {
            if (orb.edge_orbit[pe] != static_cast<int>(eo)) continue;
            Matrix2 gam = orb.edge_to_rep[pe];
            Matrix2 cand = gam.mul(g.mul(gam.inverse(ctx), ctx), ctx);
            if (is_flip(cand)) {
                orb.edge_flip[eo] = cand;
                found = true;
                break;
            }
        }
        if (!found) {
            // search afresh: flips fixing the chord midpoint, then generic
            PointH mv = edge_midpoint(patch, poly, re, ctx);
            for (const Matrix2& g : identify_with_translations(mv, mv, ctx))
                if (is_flip(g)) {
                    orb.edge_flip[eo] = g;
                    found = true;
                    break;
                }
        }
        if (!found && !patch.vertices[e.v].singular && !patch.vertices[e.w].singular) {
            for (const Matrix2& g : identify_with_translations(pv, pw, ctx))
                if (is_flip(g)) {
                    orb.edge_flip[eo] = g;
                    found = true;
                    break;
                }
        }
        BIANCHI_CHECK(found, "flip witness lost");
    }
    // Flips found directly by endpoint swap (not via parity conflicts):
    for (size_t eo = 0; eo < orb.edge_rep.size(); ++eo) {
        if (orb.edge_flipped[eo]) continue;
        int re = orb.edge_rep[eo];
        const auto& e = patch.edges[re];
        PointH pv = vertex_point(patch, e.v), pw = vertex_point(patch, e.w);
        if (patch.vertices[e.v].singular || patch.vertices[e.w].singular) continue;
        for (const Matrix2& g : identify_with_translations(pv, pw, ctx))
            if (apply(g, pw, ctx) == pv) {
                orb.edge_flipped[eo] = true;
                orb.edge_flip[eo] = g;
                break;
            }
    }

    orb.poly_orbit.resize(NP);
    orb.poly_to_rep.assign(NP, Matrix2::identity());
    std::map<int, int> proot_to_orbit;
    for (size_t i = 0; i < NP; ++i) {
        auto f = pdsu.find(static_cast<int>(i));
        auto it = proot_to_orbit.find(f.root);
        if (it == proot_to_orbit.end()) {
            it = proot_to_orbit.emplace(f.root, static_cast<int>(orb.poly_rep.size())).first;
            orb.poly_rep.push_back(f.root);
        }
        orb.poly_orbit[i] = it->second;
        orb.poly_to_rep[i] = f.g;
    }
    orb.poly_setwise.resize(orb.poly_rep.size());
    for (size_t po = 0; po < orb.poly_rep.size(); ++po) {
        int rep = orb.poly_rep[po];
        auto it = setwise.find(rep);
        if (it != setwise.end()) {
            orb.poly_setwise[po] = it->second;
        } else {
            std::vector<Matrix2> gens;
            for (const PolyMap& pm : poly_maps(patch, rep, rep, ctx)) gens.push_back(pm.g);
            orb.poly_setwise[po] = FiniteGroup::closure(std::move(gens), ctx);
        }
    }
    return orb;
}

IntMatrix QuotientComplex::d1() const {
    IntMatrix m(static_cast<long>(vertices.size()), static_cast<long>(edges.size()));
    for (size_t e = 0; e < edges.size(); ++e) {
        m.at(edges[e].head, static_cast<long>(e)) += 1;
        m.at(edges[e].tail, static_cast<long>(e)) -= 1;
    }
    return m;
}

IntMatrix QuotientComplex::d2() const {
    IntMatrix m(static_cast<long>(edges.size()), static_cast<long>(faces.size()));
    for (size_t f = 0; f < faces.size(); ++f)
        for (const auto& [e, c] : faces[f].boundary) m.at(e, static_cast<long>(f)) += c;
    return m;
}

long QuotientComplex::singular_vertex_orbits() const {
    long n = 0;
    for (const auto& v : vertices)
        if (v.singular) ++n;
    return n;
}

namespace {

FiniteGroup pointwise_edge_stab(const Patch& patch, const Polyhedron& poly, int eid,
                                const FieldCtx& ctx) {
    const Patch::Edge& e = patch.edges[eid];
    const PointH pv = vertex_point(patch, e.v), pw = vertex_point(patch, e.w);
    std::vector<Matrix2> fix;
    if (!patch.vertices[e.v].singular) {
        for (const Matrix2& g : identify_with_translations(pv, pv, ctx))
            if (apply(g, pw, ctx) == pw) fix.push_back(g);
    } else if (!patch.vertices[e.w].singular) {
        for (const Matrix2& g : identify_with_translations(pw, pw, ctx))
            if (apply(g, pv, ctx) == pv) fix.push_back(g);
    } else {
        PointH mid = edge_midpoint(patch, poly, eid, ctx);
        for (const Matrix2& g : identify_with_translations(mid, mid, ctx))
            if (apply(g, pv, ctx) == pv && apply(g, pw, ctx) == pw) fix.push_back(g);
    }
    return FiniteGroup::closure(std::move(fix), ctx);
}

} // namespace

QuotientComplex quotient_complex(const Patch& patch, const Orbits& orb, const Polyhedron& poly,
                                 const FieldCtx& ctx) {
    QuotientComplex qc;
    const size_t NVO = orb.vertex_rep.size();
    const size_t NEO = orb.edge_rep.size();
    const size_t NPO = orb.poly_rep.size();

    // --- vertex cells from vertex orbits
    std::vector<int> vo_cell(NVO, -1);
    for (size_t vo = 0; vo < NVO; ++vo) {
        QuotientComplex::VertexCell vc;
        const auto& pv = patch.vertices[orb.vertex_rep[vo]];
        vc.singular = pv.singular;
        if (pv.singular) {
            vc.stab = FiniteGroup::trivial();
            vc.label = "cusp(" + pv.p.z.str() + ")";
        } else {
            vc.stab = stabilizer(pv.p, ctx);
            vc.label = "v(" + pv.p.z.str() + "; h2=" + render_rat(pv.p.sq_height) + ")";
        }
        vc.ab = abelianization(vc.stab, ctx);
        vo_cell[vo] = static_cast<int>(qc.vertices.size());
        qc.vertices.push_back(std::move(vc));
    }

    // --- edge orbit data
    std::vector<FiniteGroup> eo_pointwise(NEO);
    for (size_t eo = 0; eo < NEO; ++eo)
        eo_pointwise[eo] = pointwise_edge_stab(patch, poly, orb.edge_rep[eo], ctx);

    // midpoint cells for flipped edge orbits
    std::vector<int> eo_mid_cell(NEO, -1);
    std::vector<FiniteGroup> eo_setwise(NEO);
    for (size_t eo = 0; eo < NEO; ++eo) {
        if (!orb.edge_flipped[eo]) continue;
        std::vector<Matrix2> gens = eo_pointwise[eo].elems;
        gens.push_back(orb.edge_flip[eo]);
        eo_setwise[eo] = FiniteGroup::closure(std::move(gens), ctx);
        QuotientComplex::VertexCell vc;
        vc.singular = false;
        vc.stab = eo_setwise[eo];
        vc.ab = abelianization(vc.stab, ctx);
        vc.label = "mid(eo" + std::to_string(eo) + ")";
        eo_mid_cell[eo] = static_cast<int>(qc.vertices.size());
        qc.vertices.push_back(std::move(vc));
    }

    // cone cells for polygon orbits with nontrivial setwise stabilizer
    std::vector<int> po_cone_cell(NPO, -1);
    for (size_t po = 0; po < NPO; ++po) {
        if (orb.poly_setwise[po].is_trivial()) continue;
        QuotientComplex::VertexCell vc;
        vc.singular = false;
        vc.stab = orb.poly_setwise[po];
        vc.ab = abelianization(vc.stab, ctx);
        vc.label = "cone(po" + std::to_string(po) + ")";
        po_cone_cell[po] = static_cast<int>(qc.vertices.size());
        qc.vertices.push_back(std::move(vc));
    }

    // --- edge cells
    // full edges for unflipped orbits, halves for flipped ones
    std::vector<int> eo_edge_cell(NEO, -1); // full edge or half edge id
    for (size_t eo = 0; eo < NEO; ++eo) {
        const auto& re = patch.edges[orb.edge_rep[eo]];
        QuotientComplex::EdgeCell ec;
        ec.stab = eo_pointwise[eo];
        ec.ab = abelianization(ec.stab, ctx);
        if (!orb.edge_flipped[eo]) {
            ec.tail = vo_cell[orb.vertex_orbit[re.v]];
            ec.head = vo_cell[orb.vertex_orbit[re.w]];
            ec.conj_tail = orb.vertex_to_rep[re.v];
            ec.conj_head = orb.vertex_to_rep[re.w];
            ec.label = "e(eo" + std::to_string(eo) + ")";
        } else {
            ec.tail = vo_cell[orb.vertex_orbit[re.v]];
            ec.head = eo_mid_cell[eo];
            ec.conj_tail = orb.vertex_to_rep[re.v];
            ec.conj_head = Matrix2::identity();
            ec.label = "half(eo" + std::to_string(eo) + ")";
        }
        eo_edge_cell[eo] = static_cast<int>(qc.edges.size());
        qc.edges.push_back(std::move(ec));
    }

    // cone edges and faces
    for (size_t po = 0; po < NPO; ++po) {
        int rep = orb.poly_rep[po];
        const Patch::Polygon& P = patch.polys[rep];
        const auto& slots = patch.poly_edges[rep];
        size_t n = P.cycle.size();
        const FiniteGroup& G = orb.poly_setwise[po];

        // slot-level helpers against the edge orbits
        auto slot_edge = [&](size_t i) { return slots[i].first; };
        auto slot_eo = [&](size_t i) { return orb.edge_orbit[slot_edge(i)]; };
        auto slot_coeff = [&](size_t i) {
            // coefficient of the full edge cell when traversing the slot
            int eid = slot_edge(i);
            return slots[i].second * orb.edge_parity[eid];
        };

        if (G.is_trivial()) {
            QuotientComplex::FaceCell fc;
            std::map<int, Int> acc;
            for (size_t i = 0; i < n; ++i) {
                int eo = slot_eo(i);
                if (orb.edge_flipped[eo]) continue; // +half - half = 0
                acc[eo_edge_cell[eo]] += slot_coeff(i);
            }
            for (auto& [e, c] : acc)
                if (c != 0) fc.boundary.push_back({e, c});
            fc.label = "f(po" + std::to_string(po) + ")";
            qc.faces.push_back(std::move(fc));
            continue;
        }

        // Nontrivial setwise stabilizer: cone over the subdivided boundary.
        // Vertex permutations induced by each stabilizer element.
        std::vector<std::vector<int>> perms;
        for (const Matrix2& g : G.elems) {
            auto perm = match_vertices(patch, P, P, g, ctx);
            BIANCHI_CHECK(perm, "setwise stabilizer does not preserve polygon");
            perms.push_back(*perm);
        }
        // Nodes of the subdivided cycle: (0, i) = corner i; (1, i) = midpoint
        // of slot i when that orbit is flipped.
        struct Node {
            int kind, i;
        };
        std::vector<Node> nodes;
        std::map<std::pair<int, int>, int> node_id;
        for (size_t i = 0; i < n; ++i) {
            node_id[{0, static_cast<int>(i)}] = static_cast<int>(nodes.size());
            nodes.push_back({0, static_cast<int>(i)});
            if (orb.edge_flipped[slot_eo(i)]) {
                node_id[{1, static_cast<int>(i)}] = static_cast<int>(nodes.size());
                nodes.push_back({1, static_cast<int>(i)});
            }
        }
        auto act_node = [&](size_t gi, const Node& nd) -> Node {
            const auto& pm = perms[gi];
            if (nd.kind == 0) return {0, pm[nd.i]};
            // midpoint of slot i spans corners {i, i+1}
            int a = pm[nd.i], b = pm[(nd.i + 1) % n];
            int slot;
            if ((a + 1) % static_cast<int>(n) == b) slot = a;
            else {
                BIANCHI_CHECK((b + 1) % static_cast<int>(n) == a,
                              "stabilizer image of a slot is not a slot");
                slot = b;
            }
            return {1, slot};
        };
        // node orbits under G
        std::vector<int> node_root(nodes.size());
        for (size_t i = 0; i < nodes.size(); ++i) node_root[i] = static_cast<int>(i);
        std::function<int(int)> nfind = [&](int x) {
            while (node_root[x] != x) x = node_root[x];
            return x;
        };
        for (size_t gi = 0; gi < G.elems.size(); ++gi)
            for (size_t ni = 0; ni < nodes.size(); ++ni) {
                Node img = act_node(gi, nodes[ni]);
                int a = nfind(static_cast<int>(ni));
                int b = nfind(node_id.at({img.kind, img.i}));
                if (a != b) node_root[std::max(a, b)] = std::min(a, b);
            }
        // cone edges: one per node orbit
        std::map<int, int> node_cone_edge; // node root -> edge cell id
        auto node_vertex_cell = [&](const Node& nd) {
            if (nd.kind == 0) return vo_cell[orb.vertex_orbit[P.cycle[nd.i]]];
            return eo_mid_cell[slot_eo(nd.i)];
        };
        auto node_conj = [&](const Node& nd) {
            if (nd.kind == 0) return orb.vertex_to_rep[P.cycle[nd.i]];
            return orb.edge_to_rep[slot_edge(nd.i)];
        };
        for (size_t ni = 0; ni < nodes.size(); ++ni) {
            int root = nfind(static_cast<int>(ni));
            if (node_cone_edge.count(root)) continue;
            const Node& nd = nodes[root];
            QuotientComplex::EdgeCell ec;
            // stabilizer: elements of G fixing this node
            std::vector<Matrix2> fix;
            for (size_t gi = 0; gi < G.elems.size(); ++gi) {
                Node img = act_node(gi, nd);
                if (img.kind == nd.kind && img.i == nd.i) fix.push_back(G.elems[gi]);
            }
            ec.stab = FiniteGroup::closure(std::move(fix), ctx);
            ec.ab = abelianization(ec.stab, ctx);
            ec.tail = node_vertex_cell(nd);
            ec.head = po_cone_cell[po];
            ec.conj_tail = node_conj(nd);
            ec.conj_head = Matrix2::identity();
            ec.label = "coneedge(po" + std::to_string(po) + "," + std::to_string(root) + ")";
            node_cone_edge[root] = static_cast<int>(qc.edges.size());
            qc.edges.push_back(std::move(ec));
        }
        // subdivided boundary edges -> triangle faces, one per orbit
        struct SEdge {
            int a, b;     // node ids (directed a -> b along the cycle)
            int base_eo;  // underlying edge orbit
            int base_kind; // 0: full edge, 1: first half (v->M), 2: second half (M->v')
            size_t slot;
        };
        std::vector<SEdge> sedges;
        for (size_t i = 0; i < n; ++i) {
            int eo = slot_eo(i);
            int c0 = node_id.at({0, static_cast<int>(i)});
            int c1 = node_id.at({0, static_cast<int>((i + 1) % n)});
            if (!orb.edge_flipped[eo]) {
                sedges.push_back({c0, c1, eo, 0, i});
            } else {
                int mid = node_id.at({1, static_cast<int>(i)});
                sedges.push_back({c0, mid, eo, 1, i});
                sedges.push_back({mid, c1, eo, 2, i});
            }
        }
        // orbits of subdivided edges under G (as unordered node pairs)
        auto sedge_key = [&](const SEdge& s) {
            return std::make_pair(std::min(s.a, s.b), std::max(s.a, s.b));
        };
        std::map<std::pair<int, int>, int> skey_to_idx;
        for (size_t si = 0; si < sedges.size(); ++si) skey_to_idx[sedge_key(sedges[si])] = static_cast<int>(si);
        std::vector<int> sroot(sedges.size());
        for (size_t i = 0; i < sedges.size(); ++i) sroot[i] = static_cast<int>(i);
        std::function<int(int)> sfind = [&](int x) {
            while (sroot[x] != x) x = sroot[x];
            return x;
        };
        for (size_t gi = 0; gi < G.elems.size(); ++gi)
            for (size_t si = 0; si < sedges.size(); ++si) {
                Node na = act_node(gi, nodes[sedges[si].a]);
                Node nb = act_node(gi, nodes[sedges[si].b]);
                int ia = node_id.at({na.kind, na.i});
                int ib = node_id.at({nb.kind, nb.i});
                auto it = skey_to_idx.find({std::min(ia, ib), std::max(ia, ib)});
                BIANCHI_CHECK(it != skey_to_idx.end(), "stabilizer breaks the subdivided cycle");
                int a = sfind(static_cast<int>(si)), b = sfind(it->second);
                if (a != b) sroot[std::max(a, b)] = std::min(a, b);
            }
        std::set<int> done;
        for (size_t si = 0; si < sedges.size(); ++si) {
            int root = sfind(static_cast<int>(si));
            if (done.count(root)) continue;
            done.insert(root);
            const SEdge& s = sedges[root];
            QuotientComplex::FaceCell fc;
            std::map<int, Int> acc;
            // base contribution
            if (s.base_kind == 0) {
                acc[eo_edge_cell[s.base_eo]] += slot_coeff(s.slot);
            } else if (s.base_kind == 1) {
                acc[eo_edge_cell[s.base_eo]] += 1; // (corner -> mid) = +half
            } else {
                acc[eo_edge_cell[s.base_eo]] -= 1; // (mid -> corner) = -half
            }
            // cone sides
            acc[node_cone_edge.at(nfind(s.b))] += 1;
            acc[node_cone_edge.at(nfind(s.a))] -= 1;
            for (auto& [e, c] : acc)
                if (c != 0) fc.boundary.push_back({e, c});
            fc.label = "tri(po" + std::to_string(po) + "," + std::to_string(root) + ")";
            qc.faces.push_back(std::move(fc));
        }
    }

    // Verify the chain complex property.
    IntMatrix dd = qc.d1().mul(qc.d2());
    for (const Int& v : dd.a) BIANCHI_CHECK(v == 0, "quotient complex: d1*d2 != 0");
    return qc;
}

} // namespace bianchi
