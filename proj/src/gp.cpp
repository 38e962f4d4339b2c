#include "tenseg/gp.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tenseg {

void KernelParams::validate() const {
    if (!(beta > 0.0))
        throw std::invalid_argument("KernelParams: beta must be > 0");
    if (!(noise_var >= 0.0))
        throw std::invalid_argument("KernelParams: noise_var must be >= 0");
}

void TrainingSet::validate() const {
    if (points.size() != values.size())
        throw std::invalid_argument("TrainingSet: points/values length mismatch");
    for (const auto& p : points)
        for (Eigen::Index i = 0; i < p.size(); ++i)
            if (!(p[i] >= 0.0 && p[i] <= 1.0))
                throw std::invalid_argument(
                    "TrainingSet: point coordinates must lie in [0,1]");
    if (!points.empty()) {
        const Eigen::Index d = points.front().size();
        for (const auto& p : points)
            if (p.size() != d)
                throw std::invalid_argument("TrainingSet: inconsistent point dimensions");
    }
}

double kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
              const KernelParams& params) {
    if (x1.size() != x2.size())
        throw std::invalid_argument("kernel: dimension mismatch");
    const double sq = (x1 - x2).squaredNorm();
    double v = std::exp(-sq / (params.beta * params.beta));
    if (v < std::numeric_limits<double>::min())
        v = 0.0; // flush denormals from very distant pairs
    return v;
}

GpModel GpModel::fit(TrainingSet training, KernelParams params, MeanModelPtr prior) {
    params.validate();
    training.validate();

    GpModel m;
    m.training_ = std::move(training);
    m.params_ = params;
    m.prior_ = std::move(prior);

    const std::size_t n = m.training_.size();
    const Eigen::Index d = n ? m.training_.points.front().size() : 0;
    m.X_.resize(d, Eigen::Index(n));
    for (std::size_t i = 0; i < n; ++i)
        m.X_.col(Eigen::Index(i)) = m.training_.points[i];

    if (n == 0)
        return m;

    Eigen::MatrixXd K(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        K(i, i) = 1.0 + params.noise_var; // k(x,x) = 1 for the exponential kernel
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = kernel(m.training_.points[i], m.training_.points[j], params);
            K(i, j) = v;
            K(j, i) = v;
        }
    }

    double jitter = 0.0;
    m.llt_.compute(K);
    while (m.llt_.info() != Eigen::Success) {
        jitter = (jitter == 0.0) ? 1e-10 : jitter * 10.0;
        if (jitter > 1e-6) {
            std::ostringstream msg;
            msg << "GpModel::fit: covariance matrix is numerically singular "
                << "(n=" << n << ", noise_var=" << params.noise_var
                << ", jitter escalated to " << jitter / 10.0 << ")";
            throw std::runtime_error(msg.str());
        }
        m.llt_.compute(K + jitter * Eigen::MatrixXd::Identity(n, n));
    }

    Eigen::VectorXd residual(n);
    for (std::size_t i = 0; i < n; ++i)
        residual[i] = m.training_.values[i] - m.prior_at(m.training_.points[i]);
    m.alpha_ = m.llt_.solve(residual);
    return m;
}

GpModel::Prediction GpModel::predict(const Eigen::VectorXd& x) const {
    const std::size_t n = training_.size();
    Prediction out;
    if (n == 0) {
        out.mean = prior_at(x);
        out.variance = 1.0 + params_.noise_var;
        return out;
    }
    if (x.size() != X_.rows())
        throw std::invalid_argument("GpModel::predict: dimension mismatch");

    Eigen::VectorXd k(n);
    for (std::size_t i = 0; i < n; ++i)
        k[Eigen::Index(i)] = kernel(x, training_.points[i], params_);

    out.mean = prior_at(x) + k.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    double var = 1.0 + params_.noise_var - v.squaredNorm();
    out.variance = var < 0.0 ? 0.0 : var; // clamp round-off
    return out;
}

void GpModel::predict(const Eigen::MatrixXd& X, Eigen::VectorXd& mean,
                      Eigen::VectorXd& variance) const {
    const Eigen::Index q = X.cols();
    const Eigen::Index n = Eigen::Index(training_.size());

    Eigen::VectorXd prior_mu;
    if (prior_)
        prior_->at(X, prior_mu);
    else
        prior_mu = Eigen::VectorXd::Zero(q);

    if (n == 0) {
        mean = prior_mu;
        variance = Eigen::VectorXd::Constant(q, 1.0 + params_.noise_var);
        return;
    }
    if (X.rows() != X_.rows())
        throw std::invalid_argument("GpModel::predict: dimension mismatch");

    // K_cross(i,j) = k(train_i, query_j), via squared distances in one pass
    Eigen::MatrixXd D = -2.0 * (X_.transpose() * X);
    D.colwise() += X_.colwise().squaredNorm().transpose();
    D.rowwise() += X.colwise().squaredNorm();
    const double inv_b2 = 1.0 / (params_.beta * params_.beta);
    Eigen::MatrixXd Kc = (-D.cwiseMax(0.0) * inv_b2).array().exp().matrix();

    mean = prior_mu + Kc.transpose() * alpha_;
    const Eigen::MatrixXd V = llt_.matrixL().solve(Kc);
    variance = (1.0 + params_.noise_var - V.colwise().squaredNorm().transpose().array())
                   .cwiseMax(0.0)
                   .matrix();
}

} // namespace tenseg
