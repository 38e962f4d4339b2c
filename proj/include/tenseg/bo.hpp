#pragma once

#include "tenseg/gp.hpp"
#include "tenseg/policy.hpp"
#include "tenseg/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tenseg {

struct AcquisitionParams {
    double kappa = 0.2;    // exploration weight in mu + kappa*sigma
    int grid_per_dim = 51; // candidate lattice resolution per dimension
    // performances are divided by this before entering the GP, so kappa, the
    // kernel's unit signal variance, noise_var, and the 0.3 prior corners all
    // live on a common ~[0,1] scale; traces and CSVs keep raw cm/s
    double performance_scale = 15.0;

    void validate() const;
};

// The hand-crafted prior: a noise-free GP through 9 anchor points, 8 cube
// corners at `corner_value` and the center at 0. Motor-percent notation maps
// onto [0,1]: -100% -> 0, 0% -> 0.5, +100% -> 1.
class PriorSpec {
public:
    PriorSpec(std::vector<Eigen::VectorXd> anchor_points,
              std::vector<double> anchor_values, KernelParams kernel);

    // the stock 9-anchor prior; scale multiplies the 0.3 corner value
    static PriorSpec hand_picked(double scale = 1.0);

    double mean(const Eigen::VectorXd& x) const;
    MeanModelPtr mean_model() const { return mean_; }

    const std::vector<Eigen::VectorXd>& anchor_points() const { return points_; }
    const std::vector<double>& anchor_values() const { return values_; }

private:
    std::vector<Eigen::VectorXd> points_;
    std::vector<double> values_;
    MeanModelPtr mean_;
};

struct TrialRecord {
    Policy policy;
    double performance = 0.0;
    double best_so_far = 0.0;
};

struct OptimizationTrace {
    std::vector<TrialRecord> trials;
    int budget = 0;
    std::uint64_t rng_seed = 0;
    // set when the evaluator threw; the trials gathered so far are preserved
    std::optional<std::string> error;

    double final_best() const {
        return trials.empty() ? 0.0 : trials.back().best_so_far;
    }
    const TrialRecord& best_trial() const;
};

using Evaluator = std::function<double(const Policy&)>;

// uniform grid_per_dim^3 lattice over [0,1]^3, in lexicographic column order
Eigen::MatrixXd acquisition_lattice(int grid_per_dim);

// argmax over the lattice of mu(x) + kappa*sigma(x); ties resolve to the
// lexicographically smallest chi. Deterministic given model and params.
Policy ucb_select(const GpModel& model, const AcquisitionParams& params);

// Bayesian optimization: n_init_random uniform evaluations, then UCB-selected
// ones, refitting the GP after every trial. With a prior, n_init_random is 0.
// Prior-free fits use the empirical mean of the observations so far as a
// constant GP mean, so selection is invariant to uniform score shifts.
OptimizationTrace run_bo(const Evaluator& evaluate, int budget,
                         const PriorSpec* prior, int n_init_random,
                         std::uint64_t rng_seed,
                         const KernelParams& kernel = {},
                         const AcquisitionParams& acq = {});

OptimizationTrace run_random_search(const Evaluator& evaluate, int budget,
                                    std::uint64_t rng_seed);

} // namespace tenseg
