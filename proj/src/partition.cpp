#include "ctbp/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ctbp {

namespace {

using P2 = std::array<double, 2>;

struct Seg {
    P2 a, b;
    int curve;  // source curve id (diagnostics)
};

double cross(const P2& o, const P2& a, const P2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double dist(const P2& a, const P2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

// intersection parameters of segment pq with uv, inclusive of endpoints
bool seg_params(const P2& p, const P2& q, const P2& u, const P2& v, double& s, double& t) {
    double rx = q[0] - p[0], ry = q[1] - p[1];
    double wx = v[0] - u[0], wy = v[1] - u[1];
    double den = rx * wy - ry * wx;
    if (std::abs(den) < 1e-300) return false;
    double dx = u[0] - p[0], dy = u[1] - p[1];
    s = (dx * wy - dy * wx) / den;
    t = (dx * ry - dy * rx) / den;
    return s > -1e-12 && s < 1 + 1e-12 && t > -1e-12 && t < 1 + 1e-12;
}

bool point_in_polygon(const std::vector<P2>& poly, double x, double y) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if (((poly[i][1] > y) != (poly[j][1] > y)) &&
            (x < (poly[j][0] - poly[i][0]) * (y - poly[i][1]) / (poly[j][1] - poly[i][1]) +
                     poly[i][0]))
            in = !in;
    }
    return in;
}

double polygon_area(const std::vector<P2>& poly) {
    double a = 0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        a += (poly[j][0] * poly[i][1] - poly[i][0] * poly[j][1]);
    return 0.5 * a;
}

// planar subdivision of one side
struct Arrangement {
    std::vector<P2> nodes;
    std::vector<std::vector<int>> adj;  // node -> neighbor nodes
    double snap;

    int node_of(const P2& p) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (dist(nodes[i], p) < snap) return (int)i;
        nodes.push_back(p);
        adj.emplace_back();
        return (int)nodes.size() - 1;
    }
    void add_edge_nodes(int a, int b) {
        if (a == b) return;
        if (std::find(adj[a].begin(), adj[a].end(), b) == adj[a].end()) adj[a].push_back(b);
        if (std::find(adj[b].begin(), adj[b].end(), a) == adj[b].end()) adj[b].push_back(a);
    }
};

std::vector<std::vector<int>> extract_faces(Arrangement& ar) {
    // directed edge (a,b); next edge at b = the CW-next neighbor after (b,a)
    struct DEdge {
        int a, b;
    };
    std::vector<DEdge> dedges;
    std::map<std::pair<int, int>, int> id_of;
    for (std::size_t a = 0; a < ar.adj.size(); ++a)
        for (int b : ar.adj[a]) {
            id_of[{(int)a, b}] = (int)dedges.size();
            dedges.push_back({(int)a, b});
        }
    // sort neighbors by angle per node
    std::vector<std::vector<int>> order(ar.nodes.size());
    for (std::size_t n = 0; n < ar.nodes.size(); ++n) {
        order[n] = ar.adj[n];
        std::sort(order[n].begin(), order[n].end(), [&](int x, int y) {
            double ax = std::atan2(ar.nodes[x][1] - ar.nodes[n][1], ar.nodes[x][0] - ar.nodes[n][0]);
            double ay = std::atan2(ar.nodes[y][1] - ar.nodes[n][1], ar.nodes[y][0] - ar.nodes[n][0]);
            return ax < ay;
        });
    }
    auto next_dedge = [&](int a, int b) {
        // arriving along a->b; reverse direction is b->a; take the neighbor
        // of b that precedes a in the CCW order (interior-on-the-left walk)
        const auto& nb = order[b];
        int pos = -1;
        for (std::size_t i = 0; i < nb.size(); ++i)
            if (nb[i] == a) pos = (int)i;
        int prev = nb[(pos + (int)nb.size() - 1) % (int)nb.size()];
        return id_of[{b, prev}];
    };

    std::vector<char> used(dedges.size(), 0);
    std::vector<std::vector<int>> faces;
    for (std::size_t e0 = 0; e0 < dedges.size(); ++e0) {
        if (used[e0]) continue;
        std::vector<int> cycle;
        int e = (int)e0;
        int guard = 0;
        while (!used[e] && guard++ < (int)dedges.size() + 4) {
            used[e] = 1;
            cycle.push_back(dedges[e].a);
            e = next_dedge(dedges[e].a, dedges[e].b);
        }
        if (cycle.size() >= 3) faces.push_back(std::move(cycle));
    }
    return faces;
}

void add_polyline(std::vector<Seg>& segs, const std::vector<P2>& pts, int curve) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        if (dist(pts[i], pts[i + 1]) > 1e-12) segs.push_back({pts[i], pts[i + 1], curve});
}

std::vector<P2> arc_points(const Arc& a) {
    std::vector<P2> out;
    out.reserve(a.pts.size());
    for (auto& p : a.pts) out.push_back({p.p.r, p.p.v});
    return out;
}

// split all segments at mutual intersections, then build the arrangement
std::vector<Region> build_side(Side side, const std::vector<std::vector<P2>>& curves,
                               const std::vector<P2>& eclosure, double snap) {
    std::vector<Seg> segs;
    int cid = 0;
    for (auto& c : curves) add_polyline(segs, c, cid++);

    // gather split parameters per segment
    std::vector<std::vector<double>> cuts(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            double s, t;
            if (std::max(segs[i].a[0], segs[i].b[0]) <
                    std::min(segs[j].a[0], segs[j].b[0]) - snap ||
                std::max(segs[j].a[0], segs[j].b[0]) <
                    std::min(segs[i].a[0], segs[i].b[0]) - snap ||
                std::max(segs[i].a[1], segs[i].b[1]) <
                    std::min(segs[j].a[1], segs[j].b[1]) - snap ||
                std::max(segs[j].a[1], segs[j].b[1]) <
                    std::min(segs[i].a[1], segs[i].b[1]) - snap)
                continue;
            if (seg_params(segs[i].a, segs[i].b, segs[j].a, segs[j].b, s, t)) {
                if (s > 1e-9 && s < 1 - 1e-9) cuts[i].push_back(s);
                if (t > 1e-9 && t < 1 - 1e-9) cuts[j].push_back(t);
            }
        }
    }

    Arrangement ar;
    ar.snap = snap;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        std::vector<double> cs = cuts[i];
        cs.push_back(0.0);
        cs.push_back(1.0);
        std::sort(cs.begin(), cs.end());
        P2 prev{segs[i].a[0], segs[i].a[1]};
        int prev_node = ar.node_of(prev);
        for (double c : cs) {
            if (c <= 0.0) continue;
            P2 pt{segs[i].a[0] + c * (segs[i].b[0] - segs[i].a[0]),
                  segs[i].a[1] + c * (segs[i].b[1] - segs[i].a[1])};
            int node = ar.node_of(pt);
            ar.add_edge_nodes(prev_node, node);
            prev_node = node;
        }
    }

    auto faces = extract_faces(ar);
    std::vector<Region> regions;
    int counter = 0;
    for (auto& f : faces) {
        std::vector<P2> poly;
        poly.reserve(f.size());
        for (int n : f) poly.push_back(ar.nodes[n]);
        double area = polygon_area(poly);
        if (area <= snap) continue;  // outer walk or degenerate
        Region reg;
        reg.side = side;
        reg.polygon = std::move(poly);
        reg.area = area;
        reg.name = std::string(1, side_char(side)) + ".f" + std::to_string(counter++);
        regions.push_back(std::move(reg));
    }
    // classification against the ejection closure
    for (auto& reg : regions) {
        // representative point: average of a fan triangle that lies inside
        P2 rep{0, 0};
        bool found = false;
        for (std::size_t i = 0; i + 2 < reg.polygon.size() && !found; ++i) {
            P2 cand{(reg.polygon[0][0] + reg.polygon[i + 1][0] + reg.polygon[i + 2][0]) / 3.0,
                    (reg.polygon[0][1] + reg.polygon[i + 1][1] + reg.polygon[i + 2][1]) / 3.0};
            if (point_in_polygon(reg.polygon, cand[0], cand[1])) {
                rep = cand;
                found = true;
            }
        }
        if (!found) rep = reg.polygon[0];
        reg.inside_ejection = point_in_polygon(eclosure, rep[0], rep[1]);
    }
    return regions;
}

}  // namespace

int RegionPartition::locate(Side side, double r, double v) const {
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (regions[i].side != side) continue;
        if (point_in_polygon(regions[i].polygon, r, v)) return (int)i;
    }
    return -1;
}

RegionPartition build_partition(const GeometryResult& g, const PartitionOptions& opts) {
    RegionPartition part;

    // frame extents from the ejection arcs plus padding
    double rmax = 0, vmin = 0, vmax = 0;
    for (const Arc* a : {&g.el_arc, &g.er_arc, &g.lc_arc, &g.rc_arc}) {
        for (auto& p : a->pts) {
            rmax = std::max(rmax, p.p.r);
            vmin = std::min(vmin, p.p.v);
            vmax = std::max(vmax, p.p.v);
        }
    }
    double pad = opts.frame_pad;
    part.r_max = rmax * (1 + pad) + 0.1;
    part.v_min = vmin - (vmax - vmin) * pad - 0.1;
    part.v_max = vmax + (vmax - vmin) * pad + 0.1;

    for (Side side : {Side::L, Side::R}) {
        const Arc& earc = (side == Side::L) ? g.el_arc : g.er_arc;
        std::vector<std::vector<P2>> curves;
        // frame rectangle (closed)
        curves.push_back({{0, part.v_min},
                          {part.r_max, part.v_min},
                          {part.r_max, part.v_max},
                          {0, part.v_max},
                          {0, part.v_min}});
        curves.push_back(arc_points(earc));
        // inside chain arcs of both families on this side (theorem boundary set)
        auto add_family = [&](const PullbackFamily& fam) {
            int kmax = fam.first_crossing < 0 ? (int)fam.arcs.size() - 1
                                              : fam.first_crossing - 1;
            for (int k = 0; k <= kmax && k < (int)fam.arcs.size(); ++k)
                if (fam.arcs[k].side == side) curves.push_back(arc_points(fam.arcs[k]));
        };
        add_family(g.family_l);
        add_family(g.family_r);

        // closed ejection region: the arc plus the M segment between its ends
        std::vector<P2> eclosure = arc_points(earc);
        eclosure.push_back({0, eclosure.front()[1]});

        auto regions = build_side(side, curves, eclosure, opts.snap_tol);
        for (auto& r : regions) {
            r.touches_frame = false;
            for (auto& p : r.polygon)
                if (p[0] > part.r_max - 10 * opts.snap_tol ||
                    p[1] > part.v_max - 10 * opts.snap_tol ||
                    p[1] < part.v_min + 10 * opts.snap_tol)
                    r.touches_frame = true;
            part.regions.push_back(std::move(r));
        }
    }
    return part;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double unit_double(std::uint64_t& s) { return (splitmix64(s) >> 11) * 0x1.0p-53; }

}  // namespace

PartitionGraphResult graph_from_partition(const Dynamics& dyn, const GeometryResult& g,
                                          PartitionMode mode, const PartitionOptions& opts) {
    PartitionGraphResult out;

    if (mode == PartitionMode::lower) {
        // the never-crossing lower-bound device is a purely combinatorial
        // truncation: regions bounded by the window arcs only
        out.graph = region_engine_graph(g.q.lc, g.q.rc, INT32_MAX / 4, INT32_MAX / 4);
        return out;
    }

    out.partition = build_partition(g, opts);
    const RegionPartition& part = out.partition;
    std::size_t n = part.regions.size();

    SoficGraph pinv;  // P^{-1}-direction transitions
    for (auto& r : part.regions) pinv.add_vertex(r.side, r.name);

    for (std::size_t i = 0; i < n; ++i) {
        const Region& reg = part.regions[i];
        // deterministic interior samples
        double rlo = 1e18, rhi = -1e18, vlo = 1e18, vhi = -1e18;
        for (auto& p : reg.polygon) {
            rlo = std::min(rlo, p[0]);
            rhi = std::max(rhi, p[0]);
            vlo = std::min(vlo, p[1]);
            vhi = std::max(vhi, p[1]);
        }
        std::uint64_t seed = opts.sample_seed + 0x51ed2701u * (std::uint64_t)(i + 1);
        int kept = 0;
        for (int trial = 0; trial < 60 * opts.samples_per_region &&
                            kept < opts.samples_per_region; ++trial) {
            double r = rlo + (rhi - rlo) * unit_double(seed);
            double v = vlo + (vhi - vlo) * unit_double(seed);
            if (!point_in_polygon(reg.polygon, r, v)) continue;
            if (r <= 1e-7) continue;  // stay off M
            ++kept;
            ++out.total_samples;
            auto res = poincare_backward(dyn, SectionPoint{reg.side, r, v}, opts.flow);
            if (res.outcome != FlowOutcome::crossed) {
                ++out.unmapped_samples;
                continue;
            }
            SectionPoint q = project_to_section(res.state);
            int tgt = part.locate(q.side, q.r, q.v);
            if (tgt < 0) {
                ++out.unmapped_samples;
                continue;
            }
            pinv.add_edge((int)i, tgt);
        }
    }

    // reverse arrows and relabel by half-plane (names already carry sides)
    SoficGraph rev;
    for (auto& v : pinv.vertices) rev.add_vertex(v.label, v.name);
    for (std::size_t i = 0; i < pinv.size(); ++i)
        for (int j : pinv.succ[i]) rev.add_edge(j, (int)i);
    out.graph = trim(rev);

    if (mode == PartitionMode::exact) {
        Quantities q = g.q;
        if (classify(q) != TheoremCase::Main1)
            throw UndeterminedTransition("exact mode requires a Main1 configuration");
        GraphBundle tpl = graph_template(q);
        int len = 2 * (int)std::max(out.graph.size(), tpl.exact->size());
        len = std::min(len, 14);
        if (!language_equal(out.graph, *tpl.exact, len))
            throw UndeterminedTransition(
                "partition transitions disagree with the Main1 template language");
    }
    return out;
}

}  // namespace ctbp
