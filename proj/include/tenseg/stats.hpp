#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tenseg {

// linear interpolation between closest ranks, position = q/100 * (n-1)
double percentile(std::vector<double> data, double q);

struct MannWhitneyResult {
    double u = 0.0; // U statistic of the first sample
    double p = 1.0; // two-tailed
    bool exact = false;
};

enum class MannWhitneyMethod { automatic, exact, normal_approx };

// Two-tailed Mann-Whitney U test. Midranks are used for ties. With
// `automatic`, p is exact by enumeration when n_a+n_b <= 12 and the pooled
// sample is tie-free, otherwise a normal approximation with tie and
// continuity corrections is used.
MannWhitneyResult mann_whitney_u(
    const std::vector<double>& a, const std::vector<double>& b,
    MannWhitneyMethod method = MannWhitneyMethod::automatic);

// significance stars: "****" p<=1e-4 ... "*" p<=0.05, else "ns"
std::string star_code(double p);

struct StatsSummary {
    double median = 0.0;
    double p5 = 0.0, p25 = 0.0, p75 = 0.0, p95 = 0.0;
    std::vector<double> outliers; // beyond 1.5*IQR whiskers
    std::size_t n = 0;
};

StatsSummary summarize(const std::vector<double>& data);

} // namespace tenseg
