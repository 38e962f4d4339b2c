#include "tenseg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tenseg {

double percentile(std::vector<double> data, double q) {
    if (data.empty())
        throw std::invalid_argument("percentile: empty data");
    if (!(q >= 0.0 && q <= 100.0))
        throw std::invalid_argument("percentile: q must lie in [0,100]");
    std::sort(data.begin(), data.end());
    const double pos = q / 100.0 * double(data.size() - 1);
    const std::size_t lo = std::size_t(pos);
    if (lo + 1 >= data.size())
        return data.back();
    const double frac = pos - double(lo);
    return data[lo] + frac * (data[lo + 1] - data[lo]);
}

namespace {

// midranks of the pooled sample, first n_a entries belong to a
std::vector<double> midranks(std::vector<double> pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]])
            ++j;
        const double rank = 0.5 * double(i + j) + 1.0; // average of ranks i+1..j+1
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double normal_two_tailed_p(double u, double na, double nb,
                           const std::vector<double>& pooled_sorted) {
    const double n = na + nb;
    const double mu = na * nb / 2.0;

    // tie correction: sum over tie groups of (t^3 - t)
    double tie_sum = 0.0;
    std::size_t i = 0;
    while (i < pooled_sorted.size()) {
        std::size_t j = i;
        while (j + 1 < pooled_sorted.size() && pooled_sorted[j + 1] == pooled_sorted[i])
            ++j;
        const double t = double(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    const double var =
        na * nb / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    if (var <= 0.0)
        return 1.0; // all observations tied
    const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double exact_two_tailed_p(double u_obs, std::size_t na,
                          const std::vector<double>& pooled_midranks) {
    // permutation test: assign every subset of size n_a of the pooled
    // midranks to sample a; ties just repeat midrank values
    const std::size_t n = pooled_midranks.size();
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + na, true);
    std::sort(pick.begin(), pick.end()); // lowest permutation for next_permutation
    long total = 0, count_le = 0, count_ge = 0;
    do {
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (pick[i])
                rank_sum += pooled_midranks[i];
        const double u = rank_sum - double(na * (na + 1)) / 2.0;
        ++total;
        if (u <= u_obs + 1e-12)
            ++count_le;
        if (u >= u_obs - 1e-12)
            ++count_ge;
    } while (std::next_permutation(pick.begin(), pick.end()));
    const double tail = double(std::min(count_le, count_ge)) / double(total);
    return std::min(1.0, 2.0 * tail);
}

} // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b,
                                 MannWhitneyMethod method) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney_u: both samples must be non-empty");

    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<double> ranks = midranks(pooled);

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        rank_sum_a += ranks[i];
    const double na = double(a.size()), nb = double(b.size());
    const double u = rank_sum_a - na * (na + 1.0) / 2.0;

    std::vector<double> pooled_sorted = pooled;
    std::sort(pooled_sorted.begin(), pooled_sorted.end());
    const bool tie_free =
        std::adjacent_find(pooled_sorted.begin(), pooled_sorted.end()) ==
        pooled_sorted.end();

    bool use_exact = false;
    switch (method) {
    case MannWhitneyMethod::automatic:
        use_exact = a.size() + b.size() <= 12 && tie_free;
        break;
    case MannWhitneyMethod::exact:
        use_exact = true;
        break;
    case MannWhitneyMethod::normal_approx:
        use_exact = false;
        break;
    }

    MannWhitneyResult res;
    res.u = u;
    res.exact = use_exact;
    std::vector<double> ranks_sorted = ranks;
    std::sort(ranks_sorted.begin(), ranks_sorted.end());
    res.p = use_exact ? exact_two_tailed_p(u, a.size(), ranks_sorted)
                      : normal_two_tailed_p(u, na, nb, pooled_sorted);
    return res;
}

std::string star_code(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("star_code: p must lie in [0,1]");
    if (p <= 1e-4)
        return "****";
    if (p <= 1e-3)
        return "***";
    if (p <= 1e-2)
        return "**";
    if (p <= 0.05)
        return "*";
    return "ns";
}

StatsSummary summarize(const std::vector<double>& data) {
    if (data.empty())
        throw std::invalid_argument("summarize: empty data");
    StatsSummary s;
    s.n = data.size();
    s.median = percentile(data, 50);
    s.p5 = percentile(data, 5);
    s.p25 = percentile(data, 25);
    s.p75 = percentile(data, 75);
    s.p95 = percentile(data, 95);
    const double iqr = s.p75 - s.p25;
    const double lo = s.p25 - 1.5 * iqr, hi = s.p75 + 1.5 * iqr;
    for (double x : data)
        if (x < lo || x > hi)
            s.outliers.push_back(x);
    return s;
}

} // namespace tenseg
