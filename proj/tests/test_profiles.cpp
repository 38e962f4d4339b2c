#include <doctest.h>

#include "tenseg/profiles.hpp"
#include "tenseg/rng.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace tenseg;

namespace {

std::vector<Observation> random_observations(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Observation> obs;
    for (int i = 0; i < n; ++i)
        obs.emplace_back(Policy(rng.uniform(), rng.uniform(), rng.uniform()),
                         rng.uniform(0.0, 12.0));
    return obs;
}

// brute-force oracle: independent re-binning with its own arithmetic
void oracle_cell(const std::vector<Observation>& obs, int axis_a, int axis_b,
                 int ia, int ib, bool& filled, double& value) {
    filled = false;
    value = 0.0;
    for (const auto& [p, perf] : obs) {
        const auto bin = [](double chi) {
            int b = int(std::floor(chi * 25.0));
            return b > 24 ? 24 : b;
        };
        if (bin(p.chi[axis_a]) != ia || bin(p.chi[axis_b]) != ib)
            continue;
        if (!filled || perf > value)
            value = perf;
        filled = true;
    }
}

} // namespace

TEST_CASE("bin_index covers [0,1] with a closed last bin") {
    CHECK(ProfileGrid::bin_index(0.0) == 0);
    CHECK(ProfileGrid::bin_index(0.039999) == 0);
    CHECK(ProfileGrid::bin_index(0.04) == 1);
    CHECK(ProfileGrid::bin_index(0.5) == 12);
    CHECK(ProfileGrid::bin_index(0.9599) == 23);
    CHECK(ProfileGrid::bin_index(0.96) == 24);
    CHECK(ProfileGrid::bin_index(1.0) == 24);
}

TEST_CASE("worked two-observation example") {
    const std::vector<Observation> obs{{Policy(0.1, 0.2, 0.3), 1.0},
                                       {Policy(0.1, 0.2, 0.9), 2.0}};
    const auto grids = compute_profiles(obs);
    const ProfileGrid& v1v2 = grids[0];
    CHECK(v1v2.axis_a == 0);
    CHECK(v1v2.axis_b == 1);
    const int ia = ProfileGrid::bin_index(0.1), ib = ProfileGrid::bin_index(0.2);
    REQUIRE(v1v2.filled[ia][ib]);
    CHECK(v1v2.value[ia][ib] == 2.0); // the free motor is maximized out
}

TEST_CASE("a single observation fills exactly one cell per grid") {
    const std::vector<Observation> obs{{Policy(0.33, 0.77, 0.5), 4.25}};
    for (const auto& grid : compute_profiles(obs)) {
        int filled = 0;
        double val = -1.0;
        for (int i = 0; i < ProfileGrid::kBins; ++i)
            for (int j = 0; j < ProfileGrid::kBins; ++j)
                if (grid.filled[i][j]) {
                    ++filled;
                    val = grid.value[i][j];
                }
        CHECK(filled == 1);
        CHECK(val == 4.25);
    }
}

TEST_CASE("profiles match the brute-force binning oracle") {
    const auto obs = random_observations(400, 61);
    const auto grids = compute_profiles(obs);
    for (const auto& grid : grids)
        for (int i = 0; i < ProfileGrid::kBins; ++i)
            for (int j = 0; j < ProfileGrid::kBins; ++j) {
                bool filled;
                double value;
                oracle_cell(obs, grid.axis_a, grid.axis_b, i, j, filled, value);
                CHECK(grid.filled[i][j] == filled);
                if (filled)
                    CHECK(grid.value[i][j] == value);
            }
}

TEST_CASE("recomputation is idempotent and growth is monotone") {
    auto obs = random_observations(120, 67);
    const auto first = compute_profiles(obs);
    const auto second = compute_profiles(obs);
    for (int g = 0; g < 3; ++g) {
        CHECK(first[g].value == second[g].value);
        CHECK(first[g].filled == second[g].filled);
    }

    obs.emplace_back(Policy(0.5, 0.5, 0.5), 100.0);
    const auto grown = compute_profiles(obs);
    for (int g = 0; g < 3; ++g)
        for (int i = 0; i < ProfileGrid::kBins; ++i)
            for (int j = 0; j < ProfileGrid::kBins; ++j) {
                if (!first[g].filled[i][j])
                    continue;
                REQUIRE(grown[g].filled[i][j]);
                CHECK(grown[g].value[i][j] >= first[g].value[i][j]);
            }
}

TEST_CASE("the best cell equals the best observation") {
    const auto obs = random_observations(250, 71);
    double best = obs.front().second;
    for (const auto& [p, perf] : obs)
        best = std::max(best, perf);
    for (const auto& grid : compute_profiles(obs))
        CHECK(grid.max_filled_value() == best);
}

TEST_CASE("prior profile: hot corners, dead center, anchor symmetry") {
    const auto grids = compute_prior_profile(PriorSpec::hand_picked());
    for (const auto& grid : grids) {
        // every cell is populated (the lattice covers all bins)
        for (int i = 0; i < ProfileGrid::kBins; ++i)
            for (int j = 0; j < ProfileGrid::kBins; ++j)
                REQUIRE(grid.filled[i][j]);

        CHECK(grid.value[0][0] == doctest::Approx(0.3).epsilon(0.2));
        CHECK(grid.value[24][24] == doctest::Approx(0.3).epsilon(0.2));
        CHECK(grid.value[0][24] == doctest::Approx(0.3).epsilon(0.2));
        CHECK(grid.value[24][0] == doctest::Approx(0.3).epsilon(0.2));

        // at center-center every anchor is far in the two fixed coordinates,
        // so even the maximized-out free motor cannot reach a corner anchor
        CHECK(std::abs(grid.value[12][12]) < 1e-3);

        // the anchor set is symmetric under chi -> 1-chi on each axis
        for (int i = 0; i < ProfileGrid::kBins; ++i)
            for (int j = 0; j < ProfileGrid::kBins; ++j) {
                CHECK(grid.value[i][j] ==
                      doctest::Approx(grid.value[24 - i][j]).epsilon(1e-9));
                CHECK(grid.value[i][j] ==
                      doctest::Approx(grid.value[i][24 - j]).epsilon(1e-9));
            }
    }
}

TEST_CASE("profile CSV writes NA for empty cells and round-trips values") {
    ProfileGrid grid;
    grid.axis_a = 0;
    grid.axis_b = 2;
    grid.deposit(0.0, 0.0, 1.5);
    grid.deposit(1.0, 1.0, 0.0); // zero is a legal performance, not NA
    grid.deposit(0.5, 0.5, -2.25);

    std::ostringstream os;
    write_profile_csv(grid, os);
    const std::string text = os.str();

    std::istringstream is(text);
    std::string header;
    std::getline(is, header);
    CHECK(header.find("v1") != std::string::npos);
    CHECK(header.find("v3") != std::string::npos);

    std::vector<std::vector<std::string>> cells;
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> row;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ','))
            row.push_back(tok);
        cells.push_back(row);
    }
    REQUIRE(cells.size() == 25);
    for (const auto& row : cells)
        REQUIRE(row.size() == 25);

    int na_count = 0;
    for (const auto& row : cells)
        for (const auto& tok : row)
            na_count += tok == "NA" ? 1 : 0;
    CHECK(na_count == 25 * 25 - 3);

    CHECK(std::stod(cells[0][0]) == 1.5);
    CHECK(std::stod(cells[24][24]) == 0.0);
    CHECK(std::stod(cells[12][12]) == -2.25);
    CHECK(cells[24][24] != "NA");
}

TEST_CASE("profile PGM is a valid P2 graymap with NA at minimum intensity") {
    ProfileGrid grid;
    grid.deposit(0.0, 0.0, 5.0);
    grid.deposit(0.5, 0.5, 10.0);

    std::ostringstream os;
    write_profile_pgm(grid, os);
    std::istringstream is(os.str());

    std::string magic;
    int w = 0, h = 0, maxval = 0;
    is >> magic >> w >> h >> maxval;
    CHECK(magic == "P2");
    CHECK(w == 25);
    CHECK(h == 25);
    CHECK(maxval > 0);

    std::vector<int> pix;
    int v;
    while (is >> v)
        pix.push_back(v);
    REQUIRE(pix.size() == 25 * 25);
    int mn = maxval, mx = 0;
    for (int p : pix) {
        CHECK(p >= 0);
        CHECK(p <= maxval);
        mn = std::min(mn, p);
        mx = std::max(mx, p);
    }
    // the 10.0 cell maps to full intensity, empty cells to the minimum
    CHECK(mx == maxval);
    CHECK(mn == 0);
}
