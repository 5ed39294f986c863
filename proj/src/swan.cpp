#include "bianchi/swan.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace bianchi {

namespace {

bool hemi_order(const Hemisphere& a, const Hemisphere& b, const FieldCtx& ctx) {
    if (a.sq_radius != b.sq_radius) return a.sq_radius > b.sq_radius; // big radius first
    Coords ca = coords(a.center, ctx), cb = coords(b.center, ctx);
    if (!(ca == cb)) return lex_less(ca, cb);
    if (!(a.mu == b.mu)) return lex_less(a.mu, b.mu);
    return lex_less(a.lam, b.lam);
}

void sort_list(HemisphereList& list, const FieldCtx& ctx) {
    std::sort(list.hemis.begin(), list.hemis.end(),
              [&](const Hemisphere& a, const Hemisphere& b) { return hemi_order(a, b, ctx); });
}

// All integer translates t such that (h2 + t) could touch h1:
// |c1 - (c2 + t)| <= r1 + r2.
std::vector<AlgInt> touching_translates(const Hemisphere& h1, const Hemisphere& h2,
                                        const FieldCtx& ctx) {
    FieldElem d = h1.center - h2.center; // want t near d
    // (r1 + r2)^2 <= 2(r1^2 + r2^2) <= 4 max; use bound^2 = (r1+r2)^2 expanded
    // conservatively: sqrt bounds via integer ceilings on coordinates.
    Rat reach_sq = 2 * (h1.sq_radius + h2.sq_radius); // >= (r1+r2)^2
    std::vector<AlgInt> out;
    // y-range: m*(dy - tb*s)^2 <= reach_sq with s the w-step in y.
    Coords dc = coords(d, ctx);
    Rat ystep = ctx.three_mod_four ? make_rat(1, 2) : Rat(1);
    Rat mm(ctx.m);
    // |dc.y - tb*ystep| <= sqrt(reach_sq/m)
    Rat ybound_sq = reach_sq / mm;
    Int tb_lo, tb_hi;
    {
        // tb in [ (dc.y - sqrt(ybound_sq))/ystep , (dc.y + sqrt(ybound_sq))/ystep ]
        Rat rad = Rat(isqrt(ceil_rat(ybound_sq))) + 1;
        tb_lo = floor_rat((dc.y - rad) / ystep);
        tb_hi = ceil_rat((dc.y + rad) / ystep);
    }
    for (Int tb = tb_lo; tb <= tb_hi; ++tb) {
        Rat xoff = ctx.three_mod_four ? Rat(tb) / 2 : Rat(0); // x shift of tb*w
        Rat rad = Rat(isqrt(ceil_rat(reach_sq))) + 1;
        Int ta_lo = floor_rat(dc.x + xoff - rad);
        Int ta_hi = ceil_rat(dc.x + xoff + rad);
        for (Int ta = ta_lo; ta <= ta_hi; ++ta) {
            AlgInt t(ta, tb);
            if (touches(h1, h2.translated(t, ctx), ctx)) out.push_back(t);
        }
    }
    return out;
}

// Is any translate of any list member strictly below h_i at z?  Also
// reports whether some list hemisphere covers z at all (defect < 0).
struct BelowScan {
    bool strictly_below_something = false;
    bool covered = false;
};

BelowScan scan_below(const FieldElem& z, const Rat& defect_i, const HemisphereList& list,
                     const FieldCtx& ctx) {
    BelowScan r;
    for (const Hemisphere& h : list.hemis) {
        Rat d = min_defect_over_translates(z, h, ctx).first;
        if (d < 0) r.covered = true;
        if (d < defect_i) {
            r.strictly_below_something = true;
            return r;
        }
    }
    return r;
}

// Visits every lam in O with lam/mu inside the closed rectangle.
template <typename Fn>
void for_each_center_in_rectangle(const AlgInt& mu, const FieldCtx& ctx, Fn&& fn) {
    FieldElem mue(mu);
    std::vector<FieldElem> corners;
    if (!ctx.three_mod_four)
        corners = {FieldElem(0, 0), FieldElem(1, 0), FieldElem(0, 1), FieldElem(1, 1)};
    else
        corners = {from_coords({make_rat(-1, 2), Rat(0)}, ctx),
                   from_coords({make_rat(1, 2), Rat(0)}, ctx),
                   from_coords({make_rat(-1, 2), make_rat(1, 2)}, ctx),
                   from_coords({make_rat(1, 2), make_rat(1, 2)}, ctx)};
    Rat alo, ahi, blo, bhi;
    bool first = true;
    for (const FieldElem& c : corners) {
        FieldElem lc = mul(mue, c, ctx);
        if (first) {
            alo = ahi = lc.x;
            blo = bhi = lc.y;
            first = false;
        } else {
            alo = std::min(alo, lc.x);
            ahi = std::max(ahi, lc.x);
            blo = std::min(blo, lc.y);
            bhi = std::max(bhi, lc.y);
        }
    }
    for (Int a = floor_rat(alo); a <= ceil_rat(ahi); ++a)
        for (Int b = floor_rat(blo); b <= ceil_rat(bhi); ++b) {
            AlgInt lam(a, b);
            FieldElem center = div(FieldElem(lam), mue, ctx);
            if (!in_rectangle(center, ctx)) continue;
            fn(lam, center);
        }
}

} // namespace

Int HemisphereList::max_mu_norm(const FieldCtx& ctx) const {
    Int mx(0);
    for (const Hemisphere& h : hemis) mx = std::max(mx, norm(h.mu, ctx));
    return mx;
}

HemisphereList initial_step(const FieldCtx& ctx) {
    HemisphereList list;
    for (Int b = 0; b <= 1; ++b)
        for (Int a = 0; a <= 1; ++a) {
            AlgInt lam(a, b);
            if (!in_rectangle(FieldElem(lam), ctx)) continue;
            list.hemis.push_back(Hemisphere::from_pair(AlgInt(1, 0), lam, ctx));
        }
    sort_list(list, ctx);
    return list;
}

Rat estimate_E(const FieldCtx& ctx, long h) {
    BIANCHI_CHECK(h >= 1, "estimate_E: class number < 1");
    Rat m(ctx.m);
    if (ctx.three_mod_four) return make_rat(5, 2) * m * h - 2 * m + make_rat(1, 2);
    return 21 * m * h - 19 * m;
}

void record_hemispheres(const Int& N_sq, HemisphereList& list, const FieldCtx& ctx) {
    for (const AlgInt& mu : elements_of_norm(N_sq, ctx)) {
        for_each_center_in_rectangle(mu, ctx, [&](const AlgInt& lam, const FieldElem&) {
            if (!is_unimodular(mu, lam, ctx)) return;
            Hemisphere cand = Hemisphere::from_pair(mu, lam, ctx);
            for (const Hemisphere& h : list.hemis) {
                if (h.same_sphere(cand)) return;
                // everywhere below some translate of a member
                if (h.sq_radius < cand.sq_radius) continue;
                Rat A = min_defect_over_translates(cand.center, h, ctx).first + h.sq_radius;
                Rat s = h.sq_radius - A - cand.sq_radius;
                if (s >= 0 && s * s >= 4 * A * cand.sq_radius) return;
            }
            list.hemis.push_back(cand);
        });
    }
    sort_list(list, ctx);
}

namespace {

struct CandidatePoint {
    Coords c;
    bool operator<(const CandidatePoint& o) const { return lex_less(c, o.c); }
};

// One extraction pass: per-hemisphere surviving intersection points.
struct PassResult {
    std::vector<std::vector<FieldElem>> surviving; // per hemisphere
    std::vector<std::vector<Rat>> defects;         // matching defects of h_i
    bool coverage_failure = false;
};

PassResult extraction_pass(const HemisphereList& list, const FieldCtx& ctx) {
    PassResult res;
    size_t n = list.hemis.size();
    res.surviving.resize(n);
    res.defects.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const Hemisphere& hi = list.hemis[i];
        std::vector<PlaneLine> lines;
        for (size_t j = 0; j < n; ++j) {
            const Hemisphere& hj = list.hemis[j];
            for (const AlgInt& t : touching_translates(hi, hj, ctx)) {
                Hemisphere ht = hj.translated(t, ctx);
                if (ht.same_sphere(hi)) continue;
                if (ht.center == hi.center) continue; // concentric: no line
                lines.push_back(agree_line(hi, ht, ctx));
            }
        }
        std::sort(lines.begin(), lines.end());
        lines.erase(std::unique(lines.begin(), lines.end()), lines.end());

        std::set<CandidatePoint> pts;
        for (size_t p = 0; p < lines.size(); ++p)
            for (size_t q = p + 1; q < lines.size(); ++q) {
                auto xy = intersect_lines(lines[p], lines[q]);
                if (!xy) continue;
                pts.insert({Coords{xy->first, xy->second}});
            }
        for (const CandidatePoint& cp : pts) {
            FieldElem z = from_coords(cp.c, ctx);
            Rat di = hi.defect_at(z, ctx);
            BelowScan scan = scan_below(z, di, list, ctx);
            if (scan.strictly_below_something) continue;
            if (di > 0) {
                // Nothing strictly below h_i here, yet z is not under h_i:
                // the list does not cover z (non-collection witness).
                res.coverage_failure = true;
                continue;
            }
            res.surviving[i].push_back(z);
            res.defects[i].push_back(di);
        }
    }
    return res;
}

} // namespace

VertexComputation minimal_vertex_height(HemisphereList& list, const FieldCtx& ctx,
                                        const SwanConfig& cfg) {
    PassResult pass;
    while (true) {
        pass = extraction_pass(list, ctx);
        if (pass.coverage_failure) break; // caller must extend the horizon
        std::vector<Hemisphere> kept;
        for (size_t i = 0; i < list.hemis.size(); ++i) {
            size_t min_pts = cfg.prune_rule == PruneRule::ThreeVertex ? 3 : 1;
            if (pass.surviving[i].size() >= min_pts) kept.push_back(list.hemis[i]);
        }
        if (kept.size() == list.hemis.size()) break;
        list.hemis = std::move(kept);
        BIANCHI_CHECK(!list.hemis.empty(), "minimal_vertex_height: list emptied");
    }

    VertexComputation out;
    out.coverage_failure = pass.coverage_failure;
    if (pass.coverage_failure) return out;

    // Merge per-hemisphere survivors into a global vertex set.
    std::map<std::pair<std::string, std::string>, int> index; // by exact coords
    auto key = [&](const FieldElem& z) {
        Coords c = coords(z, ctx);
        return std::make_pair(render_rat(c.x), render_rat(c.y));
    };
    VertexSet& vs = out.vertices;
    vs.polygon.resize(list.hemis.size());
    // Deterministic order: collect all, sort by coords.
    std::vector<FieldElem> all;
    for (size_t i = 0; i < list.hemis.size(); ++i)
        for (const FieldElem& z : pass.surviving[i]) all.push_back(z);
    std::sort(all.begin(), all.end(), [&](const FieldElem& a, const FieldElem& b) {
        return lex_less(coords(a, ctx), coords(b, ctx));
    });
    for (const FieldElem& z : all) {
        auto k = key(z);
        if (index.count(k)) continue;
        index[k] = static_cast<int>(vs.vertices.size());
        vs.vertices.push_back({z, Rat(0), {}});
    }
    // Heights and supports.
    for (size_t i = 0; i < list.hemis.size(); ++i) {
        for (size_t j = 0; j < pass.surviving[i].size(); ++j) {
            const FieldElem& z = pass.surviving[i][j];
            int vid = index.at(key(z));
            SwanVertex& v = vs.vertices[vid];
            Rat h = -pass.defects[i][j];
            if (v.supports.empty()) {
                v.sq_height = h;
            } else {
                BIANCHI_CHECK(v.sq_height == h, "vertex height mismatch across supports");
            }
            vs.polygon[i].push_back(vid);
        }
    }
    // Record full support sets (all translates of members with minimal
    // defect); a member can support through several nearby translates.
    for (SwanVertex& v : vs.vertices) {
        Rat dmin = -v.sq_height;
        for (size_t k = 0; k < list.hemis.size(); ++k) {
            auto [d, t] = min_defect_over_translates(v.z, list.hemis[k], ctx);
            if (d != dmin) continue;
            for (Int da = -2; da <= 2; ++da)
                for (Int db = -1; db <= 1; ++db) {
                    AlgInt t2(t.a + da, t.b + db);
                    if (list.hemis[k].translated(t2, ctx).defect_at(v.z, ctx) == dmin)
                        v.supports.push_back({static_cast<int>(k), t2});
                }
        }
        BIANCHI_CHECK(v.supports.size() >= 2, "vertex with fewer than two supports");
    }
    // Minimal proper (positive) height.
    out.has_proper_vertex = false;
    for (const SwanVertex& v : vs.vertices) {
        if (v.sq_height <= 0) continue;
        if (!out.has_proper_vertex || v.sq_height < out.min_sq_height) {
            out.min_sq_height = v.sq_height;
            out.has_proper_vertex = true;
        }
    }
    if (!out.has_proper_vertex)
        throw internal_error("minimal_vertex_height: no vertex of positive height");

    // Convex cyclic order per polygon (counterclockwise in (x, y*sqrt(m))).
    for (size_t i = 0; i < list.hemis.size(); ++i) {
        auto& poly = vs.polygon[i];
        std::sort(poly.begin(), poly.end());
        poly.erase(std::unique(poly.begin(), poly.end()), poly.end());
        if (poly.size() < 3) continue; // pruned rule Nonempty keeps these
        Coords cen{Rat(0), Rat(0)};
        for (int vid : poly) {
            Coords c = coords(vs.vertices[vid].z, ctx);
            cen.x += c.x;
            cen.y += c.y;
        }
        cen.x /= static_cast<long>(poly.size());
        cen.y /= static_cast<long>(poly.size());
        auto half = [&](const Coords& c) {
            // 0: upper half (y > 0, or y == 0 and x > 0); 1: lower
            if (c.y > 0 || (c.y == 0 && c.x > 0)) return 0;
            return 1;
        };
        auto angle_less = [&](int va, int vb) {
            Coords a = coords(vs.vertices[va].z, ctx), b = coords(vs.vertices[vb].z, ctx);
            Coords da{a.x - cen.x, a.y - cen.y}, db{b.x - cen.x, b.y - cen.y};
            int ha = half(da), hb = half(db);
            if (ha != hb) return ha < hb;
            Rat cross = da.x * db.y - db.x * da.y; // sign matches physical cross
            BIANCHI_CHECK(cross != 0, "polygon sort: collinear directions");
            return cross > 0;
        };
        std::sort(poly.begin(), poly.end(), angle_less);
    }
    return out;
}

Polyhedron compute_polyhedron(const FieldCtx& ctx, const SwanConfig& cfg) {
    long h = class_group(ctx).h();
    Rat E = estimate_E(ctx, h);
    Int E_sq = ceil_rat(E * E);
    Int cap = 8 * (Int(-ctx.discriminant) + 1);
    Int horizon = std::min(E_sq, cap);
    horizon = std::max(horizon, Int(8)); // always past the unit sphere

    HemisphereList list = initial_step(ctx);
    Int processed(1);
    NormValueStream stream(ctx);
    Int next_value = stream.next(); // 1
    BIANCHI_CHECK(next_value == 1, "norm value stream must start at 1");
    next_value = stream.next();

    while (true) {
        while (next_value <= horizon) {
            record_hemispheres(next_value, list, ctx);
            processed = next_value;
            next_value = stream.next();
        }
        HemisphereList pruned = list;
        VertexComputation vc = minimal_vertex_height(pruned, ctx, cfg);
        if (vc.coverage_failure) {
            horizon = 2 * horizon;
            continue;
        }
        // Criterion: every unexamined hemisphere has squared radius
        // 1/next_value <= min height^2.
        if (vc.min_sq_height * next_value >= 1) {
            Polyhedron poly;
            poly.list = std::move(pruned);
            poly.vertices = std::move(vc.vertices);
            poly.min_sq_height = vc.min_sq_height;
            poly.horizon = processed;
            return poly;
        }
        Int needed = ceil_rat(1 / vc.min_sq_height);
        horizon = std::max(needed, horizon + 1);
    }
}

bool verify_termination(const Polyhedron& poly, const FieldCtx& ctx) {
    Int bound = ceil_rat(1 / poly.min_sq_height);
    bool ok = true;
    for (const Int& N : norm_values_upto(ctx, bound)) {
        for (const AlgInt& mu : elements_of_norm(N, ctx)) {
            for_each_center_in_rectangle(mu, ctx, [&](const AlgInt& lam, const FieldElem&) {
                if (!ok) return;
                if (!is_unimodular(mu, lam, ctx)) return;
                Hemisphere hs = Hemisphere::from_pair(mu, lam, ctx);
                for (const SwanVertex& v : poly.vertices.vertices) {
                    Rat d = min_defect_over_translates(v.z, hs, ctx).first;
                    // strictly below: |z - c|^2 + zeta^2 < r^2
                    if (d + v.sq_height < 0) {
                        ok = false;
                        return;
                    }
                }
            });
            if (!ok) return false;
        }
    }
    return ok;
}

} // namespace bianchi
