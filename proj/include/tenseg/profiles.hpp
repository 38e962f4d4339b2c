#pragma once

#include "tenseg/bo.hpp"
#include "tenseg/policy.hpp"

#include <array>
#include <iosfwd>
#include <utility>
#include <vector>

namespace tenseg {

// Best-performance heatmap over two motor axes, the third motor maximized
// out. Bins are half-open [lo, hi) except the last, which is closed, so
// every chi in [0,1] lands in exactly one bin.
struct ProfileGrid {
    static constexpr int kBins = 25;

    int axis_a = 0, axis_b = 1; // which two of (v1,v2,v3), 0-based
    std::array<std::array<double, kBins>, kBins> value{};
    std::array<std::array<bool, kBins>, kBins> filled{};

    static int bin_index(double chi);
    static double bin_center(int bin) { return (bin + 0.5) / kBins; }

    // keeps the max; marks the cell as filled
    void deposit(double chi_a, double chi_b, double performance);
    double max_filled_value() const;
};

using Observation = std::pair<Policy, double>;

// one grid per axis pair: (v1,v2), (v1,v3), (v2,v3)
std::array<ProfileGrid, 3> compute_profiles(const std::vector<Observation>& observations);

// the prior's profile: prior_mean sampled on the 25^3 lattice of bin centers,
// then projected exactly like measured observations
std::array<ProfileGrid, 3> compute_prior_profile(const PriorSpec& prior);

// 25x25 comma-separated matrix; one header line with the axis pair and bin
// edges; empty cells serialize as NA (0 is a legal performance)
void write_profile_csv(const ProfileGrid& grid, std::ostream& os);

// plain portable graymap (P2), linear value mapping, NA as minimum intensity
void write_profile_pgm(const ProfileGrid& grid, std::ostream& os);

} // namespace tenseg
