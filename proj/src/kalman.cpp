#include "spikeguard/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spikeguard/csv_util.hpp"

namespace spikeguard::kalman {
namespace {

constexpr double kMadToSigma = 1.4826;
constexpr std::size_t kMinMadSamples = 10;

void require_psd(const Eigen::MatrixXd& m, const char* name, bool strict) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(name) + " must be square");
    const double tol = 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument(std::string(name) + " must be symmetric");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    const double min_ev = eig.eigenvalues().minCoeff();
    if (strict ? !(min_ev > 0.0) : min_ev < -1e-10)
        throw std::invalid_argument(std::string(name) +
                                    (strict ? " must be positive definite"
                                            : " must be positive semi-definite"));
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& p) { return 0.5 * (p + p.transpose()); }

}  // namespace

void KalmanModel::validate() const {
    const auto n = F.rows();
    if (F.cols() != n) throw std::invalid_argument("F must be square");
    if (H.cols() != n) throw std::invalid_argument("H column count must equal state dimension");
    if (B.rows() != n) throw std::invalid_argument("B row count must equal state dimension");
    if (Q.rows() != n) throw std::invalid_argument("Q must match the state dimension");
    if (R.rows() != H.rows()) throw std::invalid_argument("R must match the observation dimension");
    require_psd(Q, "Q", false);
    require_psd(R, "R", true);
}

KalmanModel KalmanModel::local_linear_trend(double r, double q_level, double q_slope) {
    KalmanModel m;
    m.F = Eigen::MatrixXd{{1.0, 1.0}, {0.0, 1.0}};
    m.H = Eigen::MatrixXd{{1.0, 0.0}};
    m.B = Eigen::MatrixXd::Zero(2, 1);
    m.Q = Eigen::MatrixXd{{q_level, 0.0}, {0.0, q_slope}};
    m.R = Eigen::MatrixXd{{r}};
    return m;
}

void HuberConfig::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("Huber delta must be positive");
    if (scale == ScaleEstimator::fixed && !(fixed_scale > 0.0))
        throw std::invalid_argument("fixed Huber scale must be positive");
    if (scale == ScaleEstimator::mad_of_innovations && mad_window < kMinMadSamples)
        throw std::invalid_argument("MAD window must hold at least 10 innovations");
}

double huber_weight(double residual, double scale, double delta) {
    if (!(scale > 0.0)) throw std::invalid_argument("Huber scale must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("Huber delta must be positive");
    const double r = std::fabs(residual) / scale;
    return r <= delta ? 1.0 : delta / r;
}

KalmanState kf_predict(const KalmanState& state, const KalmanModel& model,
                       const Eigen::VectorXd& control) {
    if (state.x.size() != model.F.cols() || state.P.rows() != model.F.cols() ||
        state.P.cols() != model.F.cols())
        throw std::invalid_argument("state dimension does not match the model");
    if (control.size() != model.B.cols())
        throw std::invalid_argument("control vector does not match B");
    KalmanState out;
    out.x = model.F * state.x + model.B * control;
    out.P = symmetrized(model.F * state.P * model.F.transpose() + model.Q);
    return out;
}

KalmanState kf_predict(const KalmanState& state, const KalmanModel& model) {
    return kf_predict(state, model, Eigen::VectorXd::Zero(model.B.cols()));
}

UpdateResult kf_update_robust(const KalmanState& prior, double observation,
                              const KalmanModel& model, const HuberConfig& huber,
                              std::optional<double> scale) {
    if (model.obs_dim() != 1) throw std::invalid_argument("robust update needs a scalar observation");
    if (prior.x.size() != model.H.cols())
        throw std::invalid_argument("state dimension does not match H");
    if (!std::isfinite(observation)) throw std::invalid_argument("observation is not finite");

    const Eigen::VectorXd pht = prior.P * model.H.transpose();
    const double s = (model.H * pht)(0, 0) + model.R(0, 0);
    if (!(s > 0.0) || !std::isfinite(s)) throw std::domain_error("innovation variance is singular");

    UpdateResult out;
    out.innovation = observation - (model.H * prior.x)(0);
    out.innovation_var = s;
    if (scale) {
        out.scale = *scale;
    } else if (huber.scale == ScaleEstimator::fixed) {
        out.scale = huber.fixed_scale;
    } else {
        out.scale = std::sqrt(s);
    }
    out.weight = huber_weight(out.innovation, out.scale, huber.delta);
    out.gain = (out.weight / s) * pht;

    const auto n = prior.x.size();
    out.posterior.x = prior.x + out.gain * out.innovation;
    out.posterior.P = symmetrized(
        (Eigen::MatrixXd::Identity(n, n) - out.gain * model.H) * prior.P);
    return out;
}

std::string FilterTrace::to_csv(std::span<const double> observed) const {
    std::string out = "index,observed,prior_mean,posterior_mean,prior_var,innovation,weight\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        out += std::to_string(i);
        for (double v : {observed[i], s.prior_mean, s.posterior_mean, s.prior_var, s.innovation,
                         s.weight}) {
            out += ',';
            out += csv::format_double(v);
        }
        out += '\n';
    }
    return out;
}

RobustFilter::RobustFilter(KalmanModel model, HuberConfig huber, KalmanState init)
    : model_(std::move(model)), huber_(huber), state_(std::move(init)) {
    model_.validate();
    huber_.validate();
    if (model_.obs_dim() != 1) throw std::invalid_argument("filter needs a scalar observation model");
    if (state_.x.size() != model_.state_dim() || state_.P.rows() != model_.state_dim())
        throw std::invalid_argument("initial state does not match the model");
    if (huber_.scale == ScaleEstimator::mad_of_innovations) recent_.reserve(huber_.mad_window);
}

const KalmanState& RobustFilter::predict() {
    if (!predicted_) {
        prior_ = kf_predict(state_, model_);
        predicted_ = true;
    }
    return prior_;
}

FilterStep RobustFilter::update(double observation) {
    predict();
    std::optional<double> scale;
    if (huber_.scale == ScaleEstimator::mad_of_innovations && recent_.size() >= kMinMadSamples) {
        std::vector<double> abs_dev(recent_);
        const double centre = median(abs_dev);
        for (double& v : abs_dev) v = std::fabs(v - centre);
        const double mad = kMadToSigma * median(abs_dev);
        if (mad > 0.0) scale = mad;
    }
    auto res = kf_update_robust(prior_, observation, model_, huber_, scale);

    if (huber_.scale == ScaleEstimator::mad_of_innovations) {
        if (recent_.size() < huber_.mad_window)
            recent_.push_back(res.innovation);
        else
            recent_[seen_ % huber_.mad_window] = res.innovation;
        ++seen_;
    }

    FilterStep step;
    step.prior = prior_;
    step.posterior = res.posterior;
    step.innovation = res.innovation;
    step.innovation_var = res.innovation_var;
    step.weight = res.weight;
    step.gain = std::move(res.gain);
    step.prior_mean = (model_.H * prior_.x)(0);
    step.prior_var = (model_.H * prior_.P * model_.H.transpose())(0, 0);
    step.posterior_mean = (model_.H * res.posterior.x)(0);

    state_ = std::move(res.posterior);
    predicted_ = false;
    return step;
}

FilterTrace filter_series(std::span<const double> values, const KalmanModel& model,
                          const HuberConfig& huber, const KalmanState& init) {
    RobustFilter filter(model, huber, init);
    FilterTrace trace;
    trace.measurement_var = model.R(0, 0);
    trace.steps.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        try {
            trace.steps.push_back(filter.update(values[k]));
        } catch (const std::exception& e) {
            throw std::runtime_error("filter step " + std::to_string(k) + ": " + e.what());
        }
    }
    return trace;
}

double median(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("median of an empty range");
    std::vector<double> v(x.begin(), x.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lower + upper);
}

LocalTrendSetup local_trend_setup(std::span<const double> deseasonalized) {
    if (deseasonalized.size() < 2)
        throw std::invalid_argument("need at least two points to estimate noise levels");
    std::vector<double> diffs(deseasonalized.size() - 1);
    for (std::size_t i = 1; i < deseasonalized.size(); ++i)
        diffs[i - 1] = deseasonalized[i] - deseasonalized[i - 1];
    const double centre = median(diffs);
    for (double& d : diffs) d = std::fabs(d - centre);
    const double sigma = kMadToSigma * median(diffs);

    const std::size_t head = std::min<std::size_t>(48, deseasonalized.size());
    const double level = median(deseasonalized.first(head));
    // A perfectly flat series has zero MAD; keep R strictly positive relative
    // to the price level so the bounds stay well defined.
    const double floor_sd = 1e-6 * std::max(1.0, std::fabs(level));
    const double r = std::max(sigma * sigma, floor_sd * floor_sd);

    LocalTrendSetup setup{KalmanModel::local_linear_trend(r, r / 100.0, r / 10000.0), {}};
    setup.init.x = Eigen::Vector2d{level, 0.0};
    setup.init.P = Eigen::MatrixXd{{r, 0.0}, {0.0, r / 100.0}};
    return setup;
}

}  // namespace spikeguard::kalman
