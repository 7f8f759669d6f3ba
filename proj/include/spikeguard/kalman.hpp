#pragma once

// Linear Kalman filter with a Huber-weighted measurement update. The weight
// w_k in (0, 1] scales the gain, so an innovation far outside its expected
// spread moves the state by at most K * delta * scale.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spikeguard::kalman {

struct KalmanModel {
    Eigen::MatrixXd F;  // state transition
    Eigen::MatrixXd H;  // observation
    Eigen::MatrixXd B;  // control input
    Eigen::MatrixXd Q;  // process noise covariance
    Eigen::MatrixXd R;  // measurement noise covariance

    Eigen::Index state_dim() const { return F.rows(); }
    Eigen::Index obs_dim() const { return H.rows(); }

    // Dimension consistency, symmetric PSD Q, symmetric PD R.
    void validate() const;

    // state = [level, slope], F = [[1,1],[0,1]], H = [1,0], B = 0.
    static KalmanModel local_linear_trend(double r, double q_level, double q_slope);
};

struct KalmanState {
    Eigen::VectorXd x;
    Eigen::MatrixXd P;
};

enum class ScaleEstimator {
    innovation_sd,       // sqrt(S) from the filter
    fixed,               // HuberConfig::fixed_scale
    mad_of_innovations,  // 1.4826 * MAD of the last `mad_window` innovations
};

struct HuberConfig {
    double delta = 1.345;
    ScaleEstimator scale = ScaleEstimator::innovation_sd;
    double fixed_scale = 1.0;
    std::size_t mad_window = 336;

    void validate() const;
};

// 1 when |residual| / scale <= delta, delta / (|residual| / scale) otherwise.
double huber_weight(double residual, double scale, double delta);

KalmanState kf_predict(const KalmanState& state, const KalmanModel& model,
                       const Eigen::VectorXd& control);
KalmanState kf_predict(const KalmanState& state, const KalmanModel& model);

struct UpdateResult {
    KalmanState posterior;
    double innovation = 0.0;      // y_k
    double innovation_var = 0.0;  // S_k
    double scale = 0.0;           // scale used to standardize y_k
    double weight = 1.0;          // w_k
    Eigen::VectorXd gain;         // K_k, already multiplied by w_k
};

// Scalar-observation update. `scale` overrides the estimator in `huber`
// (filter_series passes the MAD scale this way).
UpdateResult kf_update_robust(const KalmanState& prior, double observation,
                              const KalmanModel& model, const HuberConfig& huber,
                              std::optional<double> scale = std::nullopt);

struct FilterStep {
    KalmanState prior;
    KalmanState posterior;
    double innovation = 0.0;
    double innovation_var = 0.0;
    double weight = 1.0;
    Eigen::VectorXd gain;

    // Observation-space projections H x and H P H^T.
    double prior_mean = 0.0;
    double prior_var = 0.0;
    double posterior_mean = 0.0;
};

struct FilterTrace {
    std::vector<FilterStep> steps;
    double measurement_var = 0.0;  // R (scalar observation)

    std::size_t size() const noexcept { return steps.size(); }
    // CSV: index,observed,prior_mean,posterior_mean,prior_var,innovation,weight
    std::string to_csv(std::span<const double> observed) const;
};

// Runs predict/update over every value. Errors carry the failing step index.
FilterTrace filter_series(std::span<const double> values, const KalmanModel& model,
                          const HuberConfig& huber, const KalmanState& init);

// Incremental form of filter_series for callers that need to act between
// the predict and update halves of a step.
class RobustFilter {
public:
    RobustFilter(KalmanModel model, HuberConfig huber, KalmanState init);

    // Prior for the next observation.
    const KalmanState& predict();
    FilterStep update(double observation);

private:
    KalmanModel model_;
    HuberConfig huber_;
    KalmanState state_;
    KalmanState prior_;
    std::vector<double> recent_;  // ring buffer of innovations for the MAD scale
    std::size_t seen_ = 0;
    bool predicted_ = false;
};

// Noise and initial-state choices for the local linear trend model on a
// deseasonalized price series.
struct LocalTrendSetup {
    KalmanModel model;
    KalmanState init;
};

// R = (1.4826 * MAD of first differences)^2, floored at a tiny fraction of
// the series scale; Q = diag(R / 100, R / 10000); level = median of the first
// 48 points, slope 0, P = diag(R, R / 100).
LocalTrendSetup local_trend_setup(std::span<const double> deseasonalized);

// Median of a copy of `x`; mean of the two middle values for even sizes.
double median(std::span<const double> x);

}  // namespace spikeguard::kalman
