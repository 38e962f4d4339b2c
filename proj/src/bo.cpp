#include "tenseg/bo.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tenseg {

void AcquisitionParams::validate() const {
    if (!(kappa >= 0.0))
        throw std::invalid_argument("AcquisitionParams: kappa must be >= 0");
    if (grid_per_dim < 2)
        throw std::invalid_argument("AcquisitionParams: grid_per_dim must be >= 2");
    if (!(performance_scale > 0.0))
        throw std::invalid_argument(
            "AcquisitionParams: performance_scale must be > 0");
}

PriorSpec::PriorSpec(std::vector<Eigen::VectorXd> anchor_points,
                     std::vector<double> anchor_values, KernelParams kernel)
    : points_(std::move(anchor_points)), values_(std::move(anchor_values)) {
    if (points_.size() != values_.size())
        throw std::invalid_argument("PriorSpec: points/values length mismatch");
    TrainingSet ts;
    for (std::size_t i = 0; i < points_.size(); ++i)
        ts.add(points_[i], values_[i]);
    kernel.noise_var = 0.0; // the prior interpolates its anchors exactly
    auto gp = std::make_shared<GpModel>(GpModel::fit(std::move(ts), kernel));
    mean_ = std::make_shared<GpMean>(std::move(gp));
}

PriorSpec PriorSpec::hand_picked(double scale) {
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    for (int sx : {0, 1})
        for (int sy : {0, 1})
            for (int sz : {0, 1}) {
                pts.push_back(Eigen::Vector3d(double(sx), double(sy), double(sz)));
                vals.push_back(0.3 * scale);
            }
    pts.push_back(Eigen::Vector3d(0.5, 0.5, 0.5));
    vals.push_back(0.0);
    return PriorSpec(std::move(pts), std::move(vals), KernelParams{0.15, 0.0});
}

double PriorSpec::mean(const Eigen::VectorXd& x) const { return mean_->at(x); }

const TrialRecord& OptimizationTrace::best_trial() const {
    if (trials.empty())
        throw std::logic_error("OptimizationTrace: empty trace has no best trial");
    const TrialRecord* best = &trials.front();
    for (const auto& t : trials)
        if (t.performance > best->performance)
            best = &t;
    return *best;
}

Eigen::MatrixXd acquisition_lattice(int grid_per_dim) {
    const int g = grid_per_dim;
    Eigen::MatrixXd lattice(3, Eigen::Index(g) * g * g);
    Eigen::Index c = 0;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
            for (int k = 0; k < g; ++k)
                lattice.col(c++) = Eigen::Vector3d(double(i) / (g - 1),
                                                   double(j) / (g - 1),
                                                   double(k) / (g - 1));
    return lattice;
}

Policy ucb_select(const GpModel& model, const AcquisitionParams& params) {
    params.validate();
    const Eigen::MatrixXd lattice = acquisition_lattice(params.grid_per_dim);
    Eigen::VectorXd mean, var;
    model.predict(lattice, mean, var);

    // strict > keeps the first (lexicographically smallest) candidate on ties
    Eigen::Index best = 0;
    double best_ucb = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < lattice.cols(); ++i) {
        const double ucb = mean[i] + params.kappa * std::sqrt(var[i]);
        if (ucb > best_ucb) {
            best_ucb = ucb;
            best = i;
        }
    }
    return Policy(lattice(0, best), lattice(1, best), lattice(2, best));
}

namespace {

Policy uniform_policy(Rng& rng) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    const double c = rng.uniform();
    return Policy(a, b, c);
}

// appends the trial, maintaining the nondecreasing best-so-far sequence
void record(OptimizationTrace& trace, const Policy& p, double perf) {
    const double best = trace.trials.empty()
                            ? perf
                            : std::max(perf, trace.trials.back().best_so_far);
    trace.trials.push_back({p, perf, best});
}

} // namespace

OptimizationTrace run_bo(const Evaluator& evaluate, int budget,
                         const PriorSpec* prior, int n_init_random,
                         std::uint64_t rng_seed, const KernelParams& kernel,
                         const AcquisitionParams& acq) {
    if (budget < 0 || n_init_random < 0 || n_init_random > budget)
        throw std::invalid_argument("run_bo: need budget >= n_init_random >= 0");
    kernel.validate();
    acq.validate();

    OptimizationTrace trace;
    trace.budget = budget;
    trace.rng_seed = rng_seed;
    Rng rng(rng_seed);
    const MeanModelPtr prior_mean = prior ? prior->mean_model() : nullptr;

    TrainingSet data;
    for (int t = 0; t < budget; ++t) {
        Policy next;
        if (t < n_init_random) {
            next = uniform_policy(rng);
        } else {
            // Without a prior, fit around the empirical mean score. A fixed
            // zero mean would make every unexplored cell look like an
            // improvement whenever scores are negative (and never when they
            // are positive), so the UCB trade-off must be taken relative to
            // the average observation. This also makes the selection sequence
            // invariant to a uniform shift of the evaluator.
            MeanModelPtr mean = prior_mean;
            if (!mean && !data.values.empty()) {
                const double avg =
                    std::accumulate(data.values.begin(), data.values.end(), 0.0) /
                    double(data.values.size());
                mean = std::make_shared<ConstantMean>(avg);
            }
            const GpModel model = GpModel::fit(data, kernel, mean);
            next = ucb_select(model, acq);
        }
        double perf;
        try {
            perf = evaluate(next);
        } catch (const std::exception& e) {
            trace.error = e.what();
            return trace;
        }
        record(trace, next, perf);
        data.add(Eigen::Vector3d(next.chi[0], next.chi[1], next.chi[2]),
                 perf / acq.performance_scale);
    }
    return trace;
}

OptimizationTrace run_random_search(const Evaluator& evaluate, int budget,
                                    std::uint64_t rng_seed) {
    if (budget < 0)
        throw std::invalid_argument("run_random_search: budget must be >= 0");
    OptimizationTrace trace;
    trace.budget = budget;
    trace.rng_seed = rng_seed;
    Rng rng(rng_seed);
    for (int t = 0; t < budget; ++t) {
        const Policy next = uniform_policy(rng);
        double perf;
        try {
            perf = evaluate(next);
        } catch (const std::exception& e) {
            trace.error = e.what();
            return trace;
        }
        record(trace, next, perf);
    }
    return trace;
}

} // namespace tenseg
