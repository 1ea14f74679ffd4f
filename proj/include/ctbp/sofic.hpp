#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctbp/pullback.hpp"

namespace ctbp {

/// Finite directed graph with {L,R}-labeled vertices (dual of a sofic
/// system). A finite word is accepted iff some directed path spells it;
/// the empty word is accepted by any nonempty graph.
struct SoficGraph {
    struct Vertex {
        Side label;
        std::string name;
    };
    std::vector<Vertex> vertices;
    std::vector<std::vector<int>> succ;

    int add_vertex(Side label, std::string name) {
        vertices.push_back({label, std::move(name)});
        succ.emplace_back();
        return (int)vertices.size() - 1;
    }
    void add_edge(int a, int b);
    bool has_edge(int a, int b) const;
    std::size_t size() const { return vertices.size(); }
    std::size_t edge_count() const;

    std::string to_dot() const;
};

/// Word membership by nondeterministic subset propagation.
bool accepts(const SoficGraph& g, const std::vector<Side>& word);
bool accepts(const SoficGraph& g, const std::string& word);  // "LRLL..."

/// Quotient by the coarsest label-preserving bisimulation, then trim
/// vertices that are not bi-essential. Language preserved for words that
/// remain bi-infinitely extendable (shift semantics).
SoficGraph simplify(const SoficGraph& g);

/// Remove vertices without outgoing or incoming edges (iterated).
SoficGraph trim(const SoficGraph& g);

/// All accepted words of length exactly n (for bounded-language tests).
std::vector<std::string> words_of_length(const SoficGraph& g, int n);

struct ContainResult {
    bool contained;
    bool exact;                        ///< subset construction completed
    std::optional<std::string> witness;  ///< word in g2 \ g1 when !contained
};

/// Does g1 accept every word of length <= n accepted by g2?  Uses the pair
/// subset construction; falls back to bounded length when the state budget
/// (2^16 pairs) or the 64-vertex mask limit is exceeded.
ContainResult contains(const SoficGraph& g1, const SoficGraph& g2, int n);

/// Language equality up to length n.
bool language_equal(const SoficGraph& g1, const SoficGraph& g2, int n);

/// The 2-vertex full shift on {L, R}.
SoficGraph full_shift();

/// Label-isomorphism to the 2-vertex full shift (criterion for the
/// ell_cap + 1 = 2 degenerate template).
bool is_full_shift_graph(const SoficGraph& g);

// ---------------------------------------------------------------------------

enum class TheoremCase { Main1, Main2First, Main2Second, Main3 };

std::string to_string(TheoremCase c);

/// Decide the theorem hypothesis chain a quantities tuple satisfies.
TheoremCase classify(const Quantities& q);

/// Graphs bounding (or describing) the itinerary language.
struct GraphBundle {
    TheoremCase theorem_case;
    std::optional<SoficGraph> exact;  ///< Main1 only
    SoficGraph lower, upper;          ///< always set (Main1: both = exact)
};

/// Parameterized graphs reconstructed from the theorem constructions:
/// inside pullback chains with endpoint windows, the crossing rule, and the
/// bottom/outside hub rules; then arrow reversal and L/R relabeling.
GraphBundle graph_template(const Quantities& q);

/// The region-transfer engine behind graph_template (exposed for tests):
/// effective crossing generations l_cross/r_cross may be INT_MAX to encode
/// the never-crossing lower-bound device.
SoficGraph region_engine_graph(int lc, int rc, int l_cross, int r_cross);

}  // namespace ctbp
