#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctbp/partition.hpp"

namespace ctbp {

/// Counter-based deterministic generator (splitmix64 stream).
struct SplitMix {
    std::uint64_t state;
    explicit SplitMix(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

struct SampleBox {
    double r_lo = 1e-3, r_hi = 1.0;
    double v_lo = -1.0, v_hi = 1.0;

    /// Region bounded by the computed seed arcs plus a relative margin.
    static SampleBox from_geometry(const GeometryResult& g, double margin = 0.2);
};

struct OrbitRecord {
    int orbit_id = 0;
    SectionPoint start{Side::L, 0, 0};
    std::string word;
    FlowOutcome terminal = FlowOutcome::budget_exceeded;  ///< after the last letter
    bool accepted = true;  ///< against the graph under test
};

struct SampleReport {
    std::array<double, 3> masses{};
    double energy = -1.0;
    std::uint64_t seed = 0;
    int n_orbits = 0;
    int max_letters = 0;
    std::vector<OrbitRecord> orbits;
    std::vector<int> counterexamples;  ///< orbit ids with accepted == false

    double acceptance_rate() const {
        int n = 0;
        for (auto& o : orbits) n += o.accepted;
        return orbits.empty() ? 1.0 : double(n) / orbits.size();
    }
};

struct SampleOptions {
    int n_orbits = 1000;
    int max_letters = 12;
    std::uint64_t seed = 1;
    SampleBox box;
    FlowOptions flow;
};

/// Record the forward letter word of one orbit until max_letters, escape or
/// absorption. The first letter is the starting half-plane.
std::pair<std::string, FlowOutcome> itinerary_word(const Dynamics& dyn, const SectionPoint& p,
                                                   int max_letters,
                                                   const FlowOptions& flow = {});

/// Monte Carlo itinerary sampling, checked against `graph`.
SampleReport sample_itineraries(const Dynamics& dyn, const SoficGraph& graph,
                                const SampleOptions& opts);

struct RealizeResult {
    bool found = false;
    SectionPoint start{Side::L, 0, 0};
    std::string word;      ///< the verified word
    int evaluations = 0;
};

struct RealizeOptions {
    int budget = 4000;  ///< orbit evaluations
    SampleBox box;
    FlowOptions flow;
    FlowOptions verify_flow;  ///< tighter re-simulation tolerance
    RealizeOptions() {
        verify_flow.rtol = 1e-12;
        verify_flow.atol = 1e-14;
    }
};

/// Shooting over nested rectangle subdivisions for an initial condition
/// whose orbit realizes the word; the hit is re-simulated at tighter
/// tolerance before being accepted.
RealizeResult realize_word(const Dynamics& dyn, const std::string& word,
                           const RealizeOptions& opts);

}  // namespace ctbp
