#include "spikeguard/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>

#include "spikeguard/csv_util.hpp"

namespace spikeguard::baselines {

std::vector<double> seasonal_naive_forecast(std::span<const double> lookback, std::size_t period,
                                            std::size_t horizon) {
    if (period == 0) throw std::invalid_argument("seasonal period must be positive");
    if (lookback.size() < period)
        throw std::invalid_argument("lookback of " + std::to_string(lookback.size()) +
                                    " is shorter than the period " + std::to_string(period));
    const std::size_t base = lookback.size() - period;
    std::vector<double> out(horizon);
    for (std::size_t h = 0; h < horizon; ++h) out[h] = lookback[base + h % period];
    return out;
}

void ArGrid::validate() const {
    if (p_values.empty() || d_values.empty()) throw std::invalid_argument("AR grid is empty");
    for (int p : p_values)
        if (p < 0) throw std::invalid_argument("AR order must be >= 0");
    for (int d : d_values)
        if (d != 0 && d != 1) throw std::invalid_argument("differencing order must be 0 or 1");
}

namespace {

std::vector<double> difference(std::span<const double> x, int d) {
    std::vector<double> out(x.begin(), x.end());
    for (int k = 0; k < d; ++k) {
        for (std::size_t i = out.size() - 1; i > 0; --i) out[i] -= out[i - 1];
        out.erase(out.begin());
    }
    return out;
}

// Design for targets z[first..n) of the differenced series z with an
// intercept column followed by lags 1..max_p.
struct Design {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Design build_design(std::span<const double> z, std::size_t first, int max_p) {
    const auto rows = static_cast<Eigen::Index>(z.size() - first);
    Design d{Eigen::MatrixXd(rows, max_p + 1), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = first + static_cast<std::size_t>(r);
        d.y(r) = z[t];
        d.x(r, 0) = 1.0;
        for (int k = 1; k <= max_p; ++k) d.x(r, k) = z[t - static_cast<std::size_t>(k)];
    }
    return d;
}

std::optional<ArModel> solve(const Design& design, const Eigen::MatrixXd& gram,
                             const Eigen::VectorXd& xty, int p, int d) {
    const auto k = static_cast<Eigen::Index>(p + 1);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram.topLeftCorner(k, k));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.rcond() > 1e-12))
        return std::nullopt;
    const Eigen::VectorXd beta = ldlt.solve(xty.head(k));
    if (!beta.allFinite()) return std::nullopt;
    const Eigen::VectorXd resid = design.y - design.x.leftCols(k) * beta;
    const auto n = static_cast<double>(design.y.size());
    const double rss = std::max(resid.squaredNorm(), std::numeric_limits<double>::min());

    ArModel m;
    m.p = p;
    m.d = d;
    m.intercept = beta(0);
    m.coefficients.assign(beta.data() + 1, beta.data() + k);
    m.sigma2 = rss / n;
    m.aic = n * std::log(rss / n) + 2.0 * static_cast<double>(p + 1);
    m.n_eff = static_cast<std::size_t>(design.y.size());
    return m;
}

}  // namespace

std::optional<ArModel> fit_ar(std::span<const double> lookback, int p, int d,
                              std::size_t first_target) {
    if (p < 0 || (d != 0 && d != 1)) throw std::invalid_argument("invalid AR order");
    if (first_target < static_cast<std::size_t>(p + d) || first_target >= lookback.size())
        throw std::invalid_argument("first target index leaves no room for the lags");
    const auto z = difference(lookback, d);
    const auto design = build_design(z, first_target - static_cast<std::size_t>(d), p);
    const Eigen::MatrixXd gram = design.x.transpose() * design.x;
    const Eigen::VectorXd xty = design.x.transpose() * design.y;
    return solve(design, gram, xty, p, d);
}

std::vector<ArModel> fit_ar_grid(std::span<const double> lookback, const ArGrid& grid) {
    grid.validate();
    const int max_p = *std::max_element(grid.p_values.begin(), grid.p_values.end());
    const int max_d = *std::max_element(grid.d_values.begin(), grid.d_values.end());
    if (lookback.size() < static_cast<std::size_t>(max_p) + 10)
        throw std::invalid_argument("lookback of " + std::to_string(lookback.size()) +
                                    " is too short for AR order " + std::to_string(max_p));
    const std::size_t first = static_cast<std::size_t>(max_p + max_d);

    std::vector<int> ds = grid.d_values;
    std::vector<int> ps = grid.p_values;
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());

    std::vector<ArModel> out;
    for (int d : ds) {
        const auto z = difference(lookback, d);
        const auto design = build_design(z, first - static_cast<std::size_t>(d), max_p);
        const Eigen::MatrixXd gram = design.x.transpose() * design.x;
        const Eigen::VectorXd xty = design.x.transpose() * design.y;
        for (int p : ps)
            if (auto m = solve(design, gram, xty, p, d)) out.push_back(std::move(*m));
    }
    return out;
}

ArModel fit_auto_ar(std::span<const double> lookback, const ArGrid& grid) {
    const auto candidates = fit_ar_grid(lookback, grid);
    if (candidates.empty()) throw std::runtime_error("no AR candidate could be fitted");
    // Candidates arrive in (d, p) order, so strict < keeps the smaller on ties.
    const ArModel* best = &candidates.front();
    for (const auto& m : candidates)
        if (m.aic < best->aic) best = &m;
    return *best;
}

std::vector<double> ar_forecast(const ArModel& model, std::span<const double> lookback,
                                std::size_t horizon) {
    if (lookback.size() < static_cast<std::size_t>(model.p + model.d) || lookback.empty())
        throw std::invalid_argument("lookback too short for this AR model");
    auto z = difference(lookback, model.d);
    const std::size_t known = z.size();
    z.resize(known + horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t t = known + h;
        double v = model.intercept;
        for (int k = 1; k <= model.p; ++k) v += model.coefficients[k - 1] * z[t - k];
        z[t] = v;
    }
    std::vector<double> out(z.begin() + static_cast<std::ptrdiff_t>(known), z.end());
    if (model.d == 1) {
        double level = lookback.back();
        for (double& v : out) {
            level += v;
            v = level;
        }
    }
    return out;
}

namespace {

struct HwState {
    double level;
    double trend;
    std::vector<double> seasonal;
};

// Level/trend/seasonal from the first two cycles, level anchored at t = m - 1.
HwState hw_initial(std::span<const double> x, std::size_t m) {
    double mean1 = 0.0, mean2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mean1 += x[i];
        mean2 += x[m + i];
    }
    mean1 /= static_cast<double>(m);
    mean2 /= static_cast<double>(m);
    const double trend = (mean2 - mean1) / static_cast<double>(m);
    const double mid = 0.5 * static_cast<double>(m - 1);
    HwState s{mean1 + trend * mid, trend, std::vector<double>(m)};
    for (std::size_t i = 0; i < m; ++i)
        s.seasonal[i] = x[i] - (mean1 + trend * (static_cast<double>(i) - mid));
    return s;
}

double hw_run(std::span<const double> x, std::size_t m, double a, double b, double g,
              HwState& s) {
    double sse = 0.0;
    for (std::size_t t = m; t < x.size(); ++t) {
        double& season = s.seasonal[t % m];
        const double pred = s.level + s.trend + season;
        const double err = x[t] - pred;
        sse += err * err;
        const double prev = s.level;
        s.level = a * (x[t] - season) + (1.0 - a) * (s.level + s.trend);
        s.trend = b * (s.level - prev) + (1.0 - b) * s.trend;
        season = g * (x[t] - s.level) + (1.0 - g) * season;
    }
    return sse;
}

}  // namespace

HoltWintersModel holt_winters_fit(std::span<const double> lookback, std::size_t period) {
    if (period == 0) throw std::invalid_argument("seasonal period must be positive");
    if (lookback.size() < 2 * period)
        throw std::invalid_argument("Holt-Winters needs at least two full periods of data");
    const HwState init = hw_initial(lookback, period);
    HoltWintersModel best;
    best.sse = std::numeric_limits<double>::infinity();
    for (int ia = 0; ia < 7; ++ia) {
        for (int ib = 0; ib < 7; ++ib) {
            for (int ig = 0; ig < 7; ++ig) {
                const double a = 0.05 + 0.15 * ia;
                const double b = 0.05 + 0.15 * ib;
                const double g = 0.05 + 0.15 * ig;
                HwState s = init;
                const double sse = hw_run(lookback, period, a, b, g, s);
                if (sse < best.sse) {
                    best = {a, b, g, period, s.level, s.trend, std::move(s.seasonal),
                            lookback.size(), sse};
                }
            }
        }
    }
    if (!std::isfinite(best.sse)) throw std::runtime_error("Holt-Winters fit diverged");
    return best;
}

HoltWintersModel holt_winters_apply(std::span<const double> lookback, std::size_t period,
                                    double alpha, double beta, double gamma) {
    if (period == 0) throw std::invalid_argument("seasonal period must be positive");
    if (lookback.size() < 2 * period)
        throw std::invalid_argument("Holt-Winters needs at least two full periods of data");
    for (double c : {alpha, beta, gamma})
        if (!(c > 0.0 && c < 1.0))
            throw std::invalid_argument("smoothing constants must lie in (0, 1)");
    HwState s = hw_initial(lookback, period);
    const double sse = hw_run(lookback, period, alpha, beta, gamma, s);
    return {alpha, beta, gamma, period, s.level, s.trend, std::move(s.seasonal), lookback.size(),
            sse};
}

std::vector<double> holt_winters_forecast(const HoltWintersModel& model, std::size_t horizon) {
    std::vector<double> out(horizon);
    for (std::size_t h = 0; h < horizon; ++h)
        out[h] = model.level + static_cast<double>(h + 1) * model.trend +
                 model.seasonal[(model.next_t + h) % model.period];
    return out;
}

void ForecastMatrix::validate() const {
    if (horizon == 0) throw std::invalid_argument("forecast horizon must be positive");
    if (values.size() != origins.size() * horizon)
        throw std::invalid_argument("forecast matrix shape does not match its windows");
    for (std::size_t w = 1; w < origins.size(); ++w)
        if (origins[w] <= origins[w - 1])
            throw std::invalid_argument("forecast window origins must be strictly increasing");
}

std::string ForecastMatrix::to_csv() const {
    std::string out = "window_start,h,prediction\n";
    for (std::size_t w = 0; w < origins.size(); ++w)
        for (std::size_t h = 0; h < horizon; ++h)
            out += std::to_string(origins[w]) + "," + std::to_string(h) + "," +
                   csv::format_double(values[w * horizon + h]) + "\n";
    return out;
}

ForecastMatrix load_external_predictions(const std::filesystem::path& path,
                                         std::size_t expected_horizon,
                                         std::optional<std::span<const std::size_t>> known_origins,
                                         std::string label) {
    if (expected_horizon == 0) throw std::invalid_argument("expected horizon must be positive");
    const auto lines = csv::read_lines(path);
    if (lines.empty() || lines.front() != "window_start,h,prediction")
        throw std::invalid_argument(path.string() + ": header must be window_start,h,prediction");

    std::map<std::size_t, std::vector<std::optional<double>>> rows;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        const auto f = csv::split(lines[li]);
        const std::string where = path.string() + " line " + std::to_string(li + 1);
        if (f.size() != 3) throw std::invalid_argument(where + ": expected 3 fields");
        const auto start = csv::parse_int(f[0]);
        const auto h = csv::parse_int(f[1]);
        const auto v = csv::parse_double(f[2]);
        if (!start || *start < 0) throw std::invalid_argument(where + ": bad window_start");
        if (!h || *h < 0 || static_cast<std::size_t>(*h) >= expected_horizon)
            throw std::invalid_argument(where + ": h outside [0, " +
                                        std::to_string(expected_horizon) + ")");
        if (!v) throw std::invalid_argument(where + ": prediction is not a finite number");
        const auto origin = static_cast<std::size_t>(*start);
        if (known_origins &&
            !std::binary_search(known_origins->begin(), known_origins->end(), origin))
            throw std::invalid_argument(where + ": unknown window_start " + std::to_string(origin));
        auto& row = rows[origin];
        if (row.empty()) row.resize(expected_horizon);
        auto& slot = row[static_cast<std::size_t>(*h)];
        if (slot) throw std::invalid_argument(where + ": duplicate horizon for window " +
                                              std::to_string(origin));
        slot = *v;
    }

    ForecastMatrix m;
    m.label = std::move(label);
    m.horizon = expected_horizon;
    for (const auto& [origin, row] : rows) {
        for (std::size_t h = 0; h < expected_horizon; ++h)
            if (!row[h])
                throw std::invalid_argument("window " + std::to_string(origin) +
                                            " is missing horizon h=" + std::to_string(h));
        m.origins.push_back(origin);
        for (const auto& v : row) m.values.push_back(*v);
    }
    return m;
}

}  // namespace spikeguard::baselines
