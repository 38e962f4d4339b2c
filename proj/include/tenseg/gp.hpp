#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

namespace tenseg {

struct KernelParams {
    double beta = 0.15;      // kernel length-scale
    double noise_var = 1e-2; // observation noise variance added to K's diagonal

    void validate() const;
};

// exponential kernel exp(-||x1-x2||^2 / beta^2); symmetric, in (0,1],
// denormal results are flushed to zero
double kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
              const KernelParams& params);

struct TrainingSet {
    std::vector<Eigen::VectorXd> points; // all coordinates in [0,1]
    std::vector<double> values;

    void add(const Eigen::VectorXd& x, double y) {
        points.push_back(x);
        values.push_back(y);
    }
    std::size_t size() const { return points.size(); }
    void validate() const;
};

// Optional prior mean. Batch evaluation is virtual so that GP-backed priors
// can amortize kernel evaluations over a whole candidate lattice.
class MeanModel {
public:
    virtual ~MeanModel() = default;
    virtual double at(const Eigen::VectorXd& x) const = 0;
    virtual void at(const Eigen::MatrixXd& X, Eigen::VectorXd& out) const {
        out.resize(X.cols());
        for (Eigen::Index i = 0; i < X.cols(); ++i)
            out[i] = at(X.col(i));
    }
};

using MeanModelPtr = std::shared_ptr<const MeanModel>;

class FunctionMean : public MeanModel {
public:
    explicit FunctionMean(std::function<double(const Eigen::VectorXd&)> f)
        : f_(std::move(f)) {}
    double at(const Eigen::VectorXd& x) const override { return f_(x); }

private:
    std::function<double(const Eigen::VectorXd&)> f_;
};

class ConstantMean : public MeanModel {
public:
    explicit ConstantMean(double value) : value_(value) {}
    double at(const Eigen::VectorXd&) const override { return value_; }
    void at(const Eigen::MatrixXd& X, Eigen::VectorXd& out) const override {
        out.setConstant(X.cols(), value_);
    }

private:
    double value_;
};

// Gaussian-process posterior over a scalar performance function.
// Immutable after fit(); safe to share read-only across threads.
class GpModel {
public:
    struct Prediction {
        double mean = 0.0;
        double variance = 0.0;
    };

    // Builds K = [k(xi,xj)] + noise_var*I and its Cholesky factor. On a
    // factorization failure a jitter of 1e-10 is added to the diagonal and
    // escalated tenfold up to 1e-6 before giving up.
    static GpModel fit(TrainingSet training, KernelParams params,
                       MeanModelPtr prior = nullptr);

    Prediction predict(const Eigen::VectorXd& x) const;

    // Columns of X are query points. Same math as predict(), vectorized.
    void predict(const Eigen::MatrixXd& X, Eigen::VectorXd& mean,
                 Eigen::VectorXd& variance) const;

    const TrainingSet& training() const { return training_; }
    const KernelParams& kernel_params() const { return params_; }
    const MeanModelPtr& prior() const { return prior_; }
    double prior_at(const Eigen::VectorXd& x) const {
        return prior_ ? prior_->at(x) : 0.0;
    }

private:
    GpModel() = default;

    TrainingSet training_;
    KernelParams params_;
    MeanModelPtr prior_;
    Eigen::MatrixXd X_;                // d x n, training inputs as columns
    Eigen::LLT<Eigen::MatrixXd> llt_;  // factor of K
    Eigen::VectorXd alpha_;            // K^-1 (y - mu_p(X))
};

// Prior mean backed by a fitted GP (the hand-picked-anchor construction).
class GpMean : public MeanModel {
public:
    explicit GpMean(std::shared_ptr<const GpModel> gp) : gp_(std::move(gp)) {}
    double at(const Eigen::VectorXd& x) const override {
        return gp_->predict(x).mean;
    }
    void at(const Eigen::MatrixXd& X, Eigen::VectorXd& out) const override {
        Eigen::VectorXd var;
        gp_->predict(X, out, var);
    }

private:
    std::shared_ptr<const GpModel> gp_;
};

} // namespace tenseg
