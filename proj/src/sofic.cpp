#include "ctbp/sofic.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace ctbp {

void SoficGraph::add_edge(int a, int b) {
    if (!has_edge(a, b)) succ[a].push_back(b);
}

bool SoficGraph::has_edge(int a, int b) const {
    for (int t : succ[a])
        if (t == b) return true;
    return false;
}

std::size_t SoficGraph::edge_count() const {
    std::size_t n = 0;
    for (auto& s : succ) n += s.size();
    return n;
}

std::string SoficGraph::to_dot() const {
    std::ostringstream os;
    os << "digraph itineraries {\n  rankdir=LR;\n";
    for (std::size_t i = 0; i < vertices.size(); ++i)
        os << "  v" << i << " [label=\"" << side_char(vertices[i].label) << "\", xlabel=\""
           << vertices[i].name << "\"];\n";
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (int j : succ[i]) os << "  v" << i << " -> v" << j << ";\n";
    os << "}\n";
    return os.str();
}

bool accepts(const SoficGraph& g, const std::vector<Side>& word) {
    if (g.size() == 0) return word.empty();
    if (word.empty()) return true;  // length-0 path convention
    std::vector<char> cur(g.size(), 0), nxt;
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        cur[i] = (g.vertices[i].label == word[0]);
        any |= (cur[i] != 0);
    }
    if (!any) return false;
    for (std::size_t k = 1; k < word.size(); ++k) {
        nxt.assign(g.size(), 0);
        any = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!cur[i]) continue;
            for (int j : g.succ[i]) {
                if (g.vertices[j].label == word[k] && !nxt[j]) {
                    nxt[j] = 1;
                    any = true;
                }
            }
        }
        if (!any) return false;
        cur.swap(nxt);
    }
    return true;
}

bool accepts(const SoficGraph& g, const std::string& word) {
    std::vector<Side> w;
    w.reserve(word.size());
    for (char c : word) {
        if (c == 'L') w.push_back(Side::L);
        else if (c == 'R') w.push_back(Side::R);
        else throw std::invalid_argument("word must be over {L,R}");
    }
    return accepts(g, w);
}

SoficGraph trim(const SoficGraph& g) {
    std::vector<char> alive(g.size(), 1);
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<int> indeg(g.size(), 0), outdeg(g.size(), 0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!alive[i]) continue;
            for (int j : g.succ[i])
                if (alive[j]) {
                    ++outdeg[i];
                    ++indeg[j];
                }
        }
        for (std::size_t i = 0; i < g.size(); ++i)
            if (alive[i] && (indeg[i] == 0 || outdeg[i] == 0)) {
                alive[i] = 0;
                changed = true;
            }
    }
    SoficGraph out;
    std::vector<int> remap(g.size(), -1);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (alive[i]) remap[i] = out.add_vertex(g.vertices[i].label, g.vertices[i].name);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (alive[i])
            for (int j : g.succ[i])
                if (alive[j]) out.add_edge(remap[i], remap[j]);
    return out;
}

SoficGraph simplify(const SoficGraph& g) {
    if (g.size() == 0) return g;
    std::vector<int> block(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        block[i] = (g.vertices[i].label == Side::L) ? 0 : 1;
    for (;;) {
        std::map<std::pair<int, std::set<int>>, int> sig;
        std::vector<int> next(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            std::set<int> sb;
            for (int j : g.succ[i]) sb.insert(block[j]);
            auto key = std::make_pair(block[i], std::move(sb));
            auto it = sig.find(key);
            if (it == sig.end()) it = sig.emplace(key, (int)sig.size()).first;
            next[i] = it->second;
        }
        if (next == block) break;
        block = next;
    }
    int nblocks = *std::max_element(block.begin(), block.end()) + 1;
    SoficGraph q;
    std::vector<int> rep(nblocks, -1);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (rep[block[i]] < 0) rep[block[i]] = (int)i;
    for (int b = 0; b < nblocks; ++b)
        q.add_vertex(g.vertices[rep[b]].label, "[" + g.vertices[rep[b]].name + "]");
    for (std::size_t i = 0; i < g.size(); ++i)
        for (int j : g.succ[i]) q.add_edge(block[i], block[j]);
    q = trim(q);

    // greedy state merging: a same-label pair is merged when the bounded
    // language is unchanged (merging can only add words, so one containment
    // check suffices)
    bool merged = true;
    while (merged && q.size() > 2) {
        merged = false;
        int len = 2 * (int)q.size() + 4;
        for (std::size_t i = 0; i < q.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < q.size() && !merged; ++j) {
                if (q.vertices[i].label != q.vertices[j].label) continue;
                SoficGraph cand;
                for (std::size_t k = 0; k < q.size(); ++k)
                    if (k != j) cand.add_vertex(q.vertices[k].label, q.vertices[k].name);
                auto remap = [&](std::size_t k) {
                    if (k == j) return (int)i;
                    return (int)(k < j ? k : k - 1);
                };
                for (std::size_t a = 0; a < q.size(); ++a)
                    for (int b : q.succ[a]) cand.add_edge(remap(a), remap((std::size_t)b));
                cand = trim(cand);
                if (contains(q, cand, len).contained) {
                    q = cand;
                    merged = true;
                }
            }
        }
    }
    return q;
}

namespace {

void collect_words(const SoficGraph& g, const std::vector<char>& cur, std::string& prefix,
                   int n, std::vector<std::string>& out) {
    if ((int)prefix.size() == n) {
        out.push_back(prefix);
        return;
    }
    for (Side s : {Side::L, Side::R}) {
        std::vector<char> nxt(g.size(), 0);
        bool any = false;
        if (prefix.empty()) {
            for (std::size_t i = 0; i < g.size(); ++i)
                if (g.vertices[i].label == s) {
                    nxt[i] = 1;
                    any = true;
                }
        } else {
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (!cur[i]) continue;
                for (int j : g.succ[i])
                    if (g.vertices[j].label == s) {
                        nxt[j] = 1;
                        any = true;
                    }
            }
        }
        if (!any) continue;
        prefix.push_back(side_char(s));
        collect_words(g, nxt, prefix, n, out);
        prefix.pop_back();
    }
}

uint64_t label_mask(const SoficGraph& g, Side s) {
    uint64_t m = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.vertices[i].label == s) m |= (1ull << i);
    return m;
}

uint64_t step_mask(const SoficGraph& g, uint64_t m, Side s) {
    uint64_t out = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(m & (1ull << i))) continue;
        for (int j : g.succ[i])
            if (g.vertices[j].label == s) out |= (1ull << j);
    }
    return out;
}

}  // namespace

std::vector<std::string> words_of_length(const SoficGraph& g, int n) {
    std::vector<std::string> out;
    std::string prefix;
    collect_words(g, {}, prefix, n, out);
    return out;
}

ContainResult contains(const SoficGraph& g1, const SoficGraph& g2, int n) {
    if (g1.size() > 64 || g2.size() > 64) {
        for (int k = 1; k <= n; ++k)
            for (auto& w : words_of_length(g2, k))
                if (!accepts(g1, w)) return {false, false, w};
        return {true, false, std::nullopt};
    }
    struct Pair {
        uint64_t a, b;
        bool operator==(const Pair& o) const { return a == o.a && b == o.b; }
    };
    struct Hash {
        std::size_t operator()(const Pair& p) const {
            return std::hash<uint64_t>()(p.a * 0x9e3779b97f4a7c15ull ^ p.b);
        }
    };
    std::unordered_map<Pair, std::pair<Pair, char>, Hash> parent;
    std::deque<std::pair<Pair, int>> queue;
    auto push = [&](Pair p, Pair par, char ch, int depth) {
        if (parent.count(p)) return;
        parent[p] = {par, ch};
        queue.push_back({p, depth});
    };
    Pair root{~0ull, ~0ull};
    parent[root] = {root, 0};
    for (Side s : {Side::L, Side::R}) {
        Pair p{label_mask(g2, s), label_mask(g1, s)};
        if (p.a) push(p, root, side_char(s), 1);
    }
    const std::size_t budget = 1u << 16;
    bool truncated = false;
    while (!queue.empty()) {
        auto [p, depth] = queue.front();
        queue.pop_front();
        if (p.a && !p.b) {
            std::string w;
            Pair cur = p;
            while (!(cur == root)) {
                auto& pr = parent[cur];
                w.push_back(pr.second);
                cur = pr.first;
            }
            std::reverse(w.begin(), w.end());
            return {false, true, w};
        }
        if (depth >= n) {
            truncated = true;
            continue;
        }
        for (Side s : {Side::L, Side::R}) {
            Pair q{step_mask(g2, p.a, s), step_mask(g1, p.b, s)};
            if (q.a) push(q, p, side_char(s), depth + 1);
        }
        if (parent.size() > budget) {
            truncated = true;
            break;
        }
    }
    return {true, !truncated, std::nullopt};
}

bool language_equal(const SoficGraph& g1, const SoficGraph& g2, int n) {
    return contains(g1, g2, n).contained && contains(g2, g1, n).contained;
}

SoficGraph full_shift() {
    SoficGraph g;
    int l = g.add_vertex(Side::L, "L");
    int r = g.add_vertex(Side::R, "R");
    g.add_edge(l, l);
    g.add_edge(l, r);
    g.add_edge(r, l);
    g.add_edge(r, r);
    return g;
}

bool is_full_shift_graph(const SoficGraph& g) {
    if (g.size() != 2) return false;
    if (g.vertices[0].label == g.vertices[1].label) return false;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (!g.has_edge(i, j)) return false;
    return true;
}

// ---------------------------------------------------------------------------

std::string to_string(TheoremCase c) {
    switch (c) {
        case TheoremCase::Main1: return "Main1";
        case TheoremCase::Main2First: return "Main2-first";
        case TheoremCase::Main2Second: return "Main2-second";
        case TheoremCase::Main3: return "Main3";
    }
    return "?";
}

TheoremCase classify(const Quantities& q) {
    q.check();
    long lcap = q.l_cap_is_lower_bound ? LONG_MAX / 4 : q.l_cap;
    long rcap = q.r_cap_is_lower_bound ? LONG_MAX / 4 : q.r_cap;
    if (q.lc == q.rc && q.lc == lcap + 1 && q.lc == rcap + 1) return TheoremCase::Main1;
    if (q.lc == q.rc + 1 && q.lc == rcap + 2 && q.lc <= lcap) return TheoremCase::Main2First;
    if (q.rc == q.lc + 1 && q.rc == lcap + 2 && q.rc <= rcap) return TheoremCase::Main2Second;
    return TheoremCase::Main3;
}

namespace {

// Half-plane of the k-th backward point of a W^s(d) branch: alternates
// inside the window, then repeats down the leg.
Side lambda_side(int lc, int j) {
    int jj = std::min(j, lc - 1);
    return (jj % 2 == 0) ? Side::L : Side::R;
}
Side rho_side(int rc, int j) {
    int jj = std::min(j, rc - 1);
    return (jj % 2 == 0) ? Side::R : Side::L;
}

}  // namespace

SoficGraph region_engine_graph(int lc, int rc, int l_cross, int r_cross) {
    if (lc < 2 || rc < 2) throw std::invalid_argument("need lc, rc >= 2");
    if (l_cross < 1 || r_cross < 1) throw std::invalid_argument("need crossing indices >= 1");

    // Faces come from the endpoint-window arcs (the never-crossing picture);
    // finite crossing indices add the premature-crossing spill edges on top,
    // so the finite-crossing graph contains the windows-only graph by
    // construction.
    auto pls_window = [&](int j) { return j <= std::min(lc - 2, rc - 1); };
    auto prs_window = [&](int j) { return j <= std::min(rc - 2, lc - 1); };

    enum Fam { PLS, PRS, NONE };
    auto chain_arc = [&](Side s, int t) -> Fam {
        bool pls_here = pls_window(t) && lambda_side(lc, t) == s;
        bool prs_here = prs_window(t) && rho_side(rc, t) == s;
        if (pls_here && prs_here) return NONE;  // ambiguous: stop the chain
        if (pls_here) return PLS;
        if (prs_here) return PRS;
        return NONE;
    };

    SoficGraph g;  // edges in the P^{-1} direction first
    struct FaceIds {
        std::vector<int> chain;  // chain[0] = top face, chain[t] = lens of arc t
        int bottom = -1, outside = -1;
    } face[2];
    std::vector<int> fam_of[2];
    auto idx = [](Side s) { return s == Side::L ? 0 : 1; };

    for (Side s : {Side::L, Side::R}) {
        std::string S(1, side_char(s));
        for (int t = 0;; ++t) {
            Fam f = chain_arc(s, t);
            if (f == NONE) break;
            face[idx(s)].chain.push_back(
                g.add_vertex(s, S + (t == 0 ? ".top" : ".lens" + std::to_string(t))));
            fam_of[idx(s)].push_back(f);
        }
        if (face[idx(s)].chain.empty())
            throw NumericsInconsistency("region engine: empty chain on side " + S);
        face[idx(s)].bottom = g.add_vertex(s, S + ".bottom");
        face[idx(s)].outside = g.add_vertex(s, S + ".out");
    }

    for (Side s : {Side::L, Side::R}) {
        auto& F = face[idx(s)];
        int k = (int)F.chain.size();
        for (int t = 0; t < k; ++t) {
            Fam f = (Fam)fam_of[idx(s)][t];
            int j = t + 1;  // family index of the pulled-back arc
            Side s2 = (f == PLS) ? lambda_side(lc, j) : rho_side(rc, j);
            auto& F2 = face[idx(s2)];
            bool inside = (f == PLS) ? pls_window(j) : prs_window(j);
            int crossing = (f == PLS) ? l_cross : r_cross;
            if (inside && j < (int)F2.chain.size()) {
                g.add_edge(F.chain[t], F2.chain[j]);
            } else {
                // window exited without crossing: the image lies outside
                g.add_edge(F.chain[t], F2.outside);
            }
            if (j >= crossing) {
                // the family has met an ejection arc by this generation:
                // the image also spills across it
                g.add_edge(F.chain[t], F2.bottom);
                g.add_edge(F.chain[t], F2.outside);
            }
        }
        Side o = other(s);
        auto& Fo = face[idx(o)];
        // bottom face: strips against the inside of the ejection arc collapse
        // onto the opposite d point and stretch to an outside point
        g.add_edge(F.bottom, Fo.bottom);
        g.add_edge(F.bottom, Fo.outside);
        // outside: strips against the outer side re-enter above the primary
        // segment on the same half-plane
        g.add_edge(F.outside, F.chain[0]);
        g.add_edge(F.outside, F.outside);
    }

    // reverse the arrows: the graph for P rather than P^{-1}
    SoficGraph rev;
    for (auto& v : g.vertices) rev.add_vertex(v.label, v.name);
    for (std::size_t i = 0; i < g.size(); ++i)
        for (int j : g.succ[i]) rev.add_edge(j, (int)i);
    return trim(rev);
}

GraphBundle graph_template(const Quantities& q) {
    GraphBundle b;
    b.theorem_case = classify(q);
    const int INF = INT_MAX / 4;
    int lcap = q.l_cap_is_lower_bound ? INF : q.l_cap;
    int rcap = q.r_cap_is_lower_bound ? INF : q.r_cap;
    SoficGraph actual = region_engine_graph(q.lc, q.rc, lcap, rcap);
    if (b.theorem_case == TheoremCase::Main1) {
        b.exact = actual;
        b.lower = actual;
        b.upper = actual;
    } else {
        b.upper = actual;
        b.lower = region_engine_graph(q.lc, q.rc, INF, INF);
    }
    return b;
}

}  // namespace ctbp
