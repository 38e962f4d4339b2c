#include "tenseg/profiles.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace tenseg {

int ProfileGrid::bin_index(double chi) {
    if (!(chi >= 0.0 && chi <= 1.0))
        throw std::invalid_argument("ProfileGrid: chi outside [0,1]");
    const int b = int(chi * kBins);
    return b >= kBins ? kBins - 1 : b; // chi == 1 falls into the last bin
}

void ProfileGrid::deposit(double chi_a, double chi_b, double performance) {
    const int ia = bin_index(chi_a), ib = bin_index(chi_b);
    if (!filled[ia][ib] || performance > value[ia][ib]) {
        value[ia][ib] = performance;
        filled[ia][ib] = true;
    }
}

double ProfileGrid::max_filled_value() const {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kBins; ++a)
        for (int b = 0; b < kBins; ++b)
            if (filled[a][b])
                best = std::max(best, value[a][b]);
    return best;
}

std::array<ProfileGrid, 3> compute_profiles(const std::vector<Observation>& observations) {
    if (observations.empty())
        throw std::invalid_argument("compute_profiles: no observations");
    std::array<ProfileGrid, 3> grids;
    grids[0] = ProfileGrid{.axis_a = 0, .axis_b = 1};
    grids[1] = ProfileGrid{.axis_a = 0, .axis_b = 2};
    grids[2] = ProfileGrid{.axis_a = 1, .axis_b = 2};
    for (const auto& [policy, perf] : observations)
        for (auto& g : grids)
            g.deposit(policy.chi[g.axis_a], policy.chi[g.axis_b], perf);
    return grids;
}

std::array<ProfileGrid, 3> compute_prior_profile(const PriorSpec& prior) {
    std::vector<Observation> samples;
    samples.reserve(ProfileGrid::kBins * ProfileGrid::kBins * ProfileGrid::kBins);
    for (int i = 0; i < ProfileGrid::kBins; ++i)
        for (int j = 0; j < ProfileGrid::kBins; ++j)
            for (int k = 0; k < ProfileGrid::kBins; ++k) {
                const Policy p(ProfileGrid::bin_center(i), ProfileGrid::bin_center(j),
                               ProfileGrid::bin_center(k));
                samples.emplace_back(
                    p, prior.mean(Eigen::Vector3d(p.chi[0], p.chi[1], p.chi[2])));
            }
    return compute_profiles(samples);
}

void write_profile_csv(const ProfileGrid& grid, std::ostream& os) {
    os << "# profile v" << grid.axis_a + 1 << " (rows) vs v" << grid.axis_b + 1
       << " (cols); " << ProfileGrid::kBins << " uniform bins on [0,1], edges at i/"
       << ProfileGrid::kBins << "\n";
    char buf[32];
    for (int a = 0; a < ProfileGrid::kBins; ++a) {
        for (int b = 0; b < ProfileGrid::kBins; ++b) {
            if (b)
                os << ',';
            if (grid.filled[a][b]) {
                std::snprintf(buf, sizeof buf, "%.17g", grid.value[a][b]);
                os << buf;
            } else {
                os << "NA";
            }
        }
        os << '\n';
    }
}

void write_profile_pgm(const ProfileGrid& grid, std::ostream& os) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int a = 0; a < ProfileGrid::kBins; ++a)
        for (int b = 0; b < ProfileGrid::kBins; ++b)
            if (grid.filled[a][b]) {
                lo = std::min(lo, grid.value[a][b]);
                hi = std::max(hi, grid.value[a][b]);
            }
    const bool flat = !(hi > lo);
    os << "P2\n" << ProfileGrid::kBins << ' ' << ProfileGrid::kBins << "\n255\n";
    for (int a = 0; a < ProfileGrid::kBins; ++a) {
        for (int b = 0; b < ProfileGrid::kBins; ++b) {
            int pixel = 0;
            if (grid.filled[a][b])
                pixel = flat ? 255
                             : int(std::lround((grid.value[a][b] - lo) / (hi - lo) * 255.0));
            os << pixel << (b + 1 < ProfileGrid::kBins ? ' ' : '\n');
        }
    }
}

} // namespace tenseg
