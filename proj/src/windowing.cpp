#include "spikeguard/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spikeguard/csv_util.hpp"

namespace spikeguard::windowing {

void SplitSpec::validate() const {
    if (!(train > 0.0 && validation > 0.0 && test > 0.0))
        throw std::invalid_argument("split fractions must be positive");
    if (std::fabs(train + validation + test - 1.0) > 1e-9)
        throw std::invalid_argument("split fractions must sum to 1");
}

SplitSpec SplitSpec::parse(std::string_view text) {
    const auto fields = csv::split(text);
    if (fields.size() != 3) throw std::invalid_argument("split must be three comma-separated fractions");
    SplitSpec s;
    double* targets[3] = {&s.train, &s.validation, &s.test};
    for (int i = 0; i < 3; ++i) {
        const auto v = csv::parse_double(fields[i]);
        if (!v) throw std::invalid_argument("split fraction '" + std::string(fields[i]) + "' is not a number");
        *targets[i] = *v;
    }
    s.validate();
    return s;
}

std::string SplitSpec::to_string() const {
    return csv::format_double(train) + "," + csv::format_double(validation) + "," +
           csv::format_double(test);
}

namespace {

// floor(frac * length), tolerant of fractions like 0.7 + 0.2 that land a hair
// below the exact product.
std::size_t boundary(double frac, std::size_t length) {
    const double exact = frac * static_cast<double>(length);
    return static_cast<std::size_t>(std::floor(exact + 1e-9 * std::max(1.0, exact)));
}

}  // namespace

SplitRanges chronological_split(std::size_t length, const SplitSpec& spec) {
    spec.validate();
    if (length < kMinSplitLength)
        throw std::invalid_argument("series of length " + std::to_string(length) +
                                    " is too short to split (minimum " +
                                    std::to_string(kMinSplitLength) + ")");
    const std::size_t b1 = boundary(spec.train, length);
    const std::size_t b2 = std::min(length, boundary(spec.train + spec.validation, length));
    if (b1 == 0 || b2 <= b1 || b2 >= length)
        throw std::invalid_argument("split leaves an empty segment");
    return {{0, b1}, {b1, b2}, {b2, length}};
}

WindowSet make_windows(std::size_t segment_length, std::size_t lookback, std::size_t horizon,
                       std::size_t stride, std::size_t origin) {
    if (lookback < 1 || horizon < 1 || stride < 1)
        throw std::invalid_argument("lookback, horizon and stride must be >= 1");
    WindowSet set;
    set.lookback = lookback;
    set.horizon = horizon;
    set.stride = stride;
    if (segment_length < lookback + horizon) return set;
    const std::size_t count = (segment_length - lookback - horizon) / stride + 1;
    set.windows.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = origin + k * stride;
        set.windows.push_back({{i, i + lookback}, {i + lookback, i + lookback + horizon}});
    }
    return set;
}

WindowSet test_windows(const SplitRanges& split, std::size_t lookback, std::size_t horizon,
                       std::size_t stride, bool warmup_overlap) {
    if (!warmup_overlap)
        return make_windows(split.test.size(), lookback, horizon, stride, split.test.begin);
    // Lookback may start up to L steps before the test segment, but never
    // before the validation segment begins.
    const std::size_t first = split.test.begin - std::min(lookback, split.validation.size());
    return make_windows(split.test.end - first, lookback, horizon, stride, first);
}

}  // namespace spikeguard::windowing
