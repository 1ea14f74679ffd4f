#pragma once
#include <array>
#include <string>
#include <vector>

#include "ctbp/pullback.hpp"
#include "ctbp/sofic.hpp"

namespace ctbp {

/// Closed planar cell of one half-plane, bounded by the ejection arc, the
/// primary-segment pullbacks, the M line and a far frame.
struct Region {
    Side side;
    std::string name;
    std::vector<std::array<double, 2>> polygon;  ///< (r, v) vertices, CCW
    bool inside_ejection = false;
    bool touches_frame = false;  ///< unbounded outside cell (clipped)
    double area = 0;
};

struct RegionPartition {
    std::vector<Region> regions;
    double r_max = 0, v_min = 0, v_max = 0;  ///< clip frame

    /// index into regions, or -1 when not located
    int locate(Side side, double r, double v) const;
};

struct PartitionOptions {
    double snap_tol = 1e-9;
    double frame_pad = 0.35;     ///< relative padding of the clip frame
    int samples_per_region = 48;
    std::uint64_t sample_seed = 0x9d2c5680u;
    FlowOptions flow;
};

/// Planar subdivision of both half-planes by the ejection arcs and the
/// inside pullback chains (the arcs named in the theorem constructions).
RegionPartition build_partition(const GeometryResult& g, const PartitionOptions& opts = {});

enum class PartitionMode { exact, upper, lower };

struct UndeterminedTransition : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PartitionGraphResult {
    SoficGraph graph;
    RegionPartition partition;
    int unmapped_samples = 0;  ///< samples without a backward return
    int total_samples = 0;
};

/// Region-transition graph from deterministic interior sampling of P^{-1},
/// arrows reversed and vertices relabeled by half-plane.
///   exact: Main1 only; cross-validated against the template, throws
///          UndeterminedTransition on language mismatch.
///   upper: union of observed transitions (contains all itineraries).
///   lower: the never-crossing truncation device (window-only engine graph).
PartitionGraphResult graph_from_partition(const Dynamics& dyn, const GeometryResult& g,
                                          PartitionMode mode,
                                          const PartitionOptions& opts = {});

}  // namespace ctbp
