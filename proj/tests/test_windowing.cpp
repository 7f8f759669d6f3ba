#include <doctest.h>

#include <random>
#include <stdexcept>

#include "spikeguard/windowing.hpp"

using namespace spikeguard::windowing;

namespace {

std::size_t brute_force_count(std::size_t length, std::size_t l, std::size_t h, std::size_t stride) {
    std::size_t count = 0;
    for (std::size_t i = 0; i + l + h <= length; i += stride) ++count;
    return count;
}

}  // namespace

TEST_CASE("chronological split examples") {
    auto s = chronological_split(100);
    CHECK(s.train == IndexRange{0, 70});
    CHECK(s.validation == IndexRange{70, 90});
    CHECK(s.test == IndexRange{90, 100});
    s = chronological_split(69'600);
    CHECK(s.train == IndexRange{0, 48'720});
    CHECK(s.validation == IndexRange{48'720, 62'640});
    CHECK(s.test == IndexRange{62'640, 69'600});
    s = chronological_split(10);
    CHECK(s.train == IndexRange{0, 7});
    CHECK(s.validation == IndexRange{7, 9});
    CHECK(s.test == IndexRange{9, 10});
    CHECK_THROWS_AS(chronological_split(9), std::invalid_argument);
}

TEST_CASE("split spec parsing and validation") {
    const auto s = SplitSpec::parse("0.6,0.3,0.1");
    CHECK(s.train == 0.6);
    CHECK(s.to_string() == "0.6,0.3,0.1");
    CHECK_THROWS_AS(SplitSpec::parse("0.6,0.3"), std::invalid_argument);
    CHECK_THROWS_AS(SplitSpec::parse("0.6,0.3,0.2"), std::invalid_argument);
    CHECK_THROWS_AS(SplitSpec::parse("0.6,x,0.1"), std::invalid_argument);
    CHECK_THROWS_AS(SplitSpec::parse("1,0,0"), std::invalid_argument);
}

TEST_CASE("split ranges are contiguous and cover the series") {
    for (std::size_t n = 10; n < 3000; n += 7) {
        const auto s = chronological_split(n);
        CHECK(s.train.begin == 0);
        CHECK(s.train.end == s.validation.begin);
        CHECK(s.validation.end == s.test.begin);
        CHECK(s.test.end == n);
    }
}

TEST_CASE("window count examples") {
    CHECK(make_windows(560, 512, 48, 1).size() == 1);
    CHECK(make_windows(600, 512, 48, 1).size() == 41);
    CHECK(make_windows(100, 512, 48, 1).size() == 0);
    CHECK_THROWS_AS(make_windows(100, 0, 48, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_windows(100, 5, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_windows(100, 5, 5, 0), std::invalid_argument);
}

TEST_CASE("window counts match brute force; windows are ordered and leak-free") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> len(1, 3000), lb(1, 600), hz(1, 100), st(1, 50);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = len(rng), l = lb(rng), h = hz(rng), s = st(rng);
        const auto w = make_windows(n, l, h, s, 17);
        REQUIRE(w.size() == brute_force_count(n, l, h, s));
        for (std::size_t k = 0; k < w.size(); ++k) {
            const auto& win = w.windows[k];
            CHECK(win.input.size() == l);
            CHECK(win.target.size() == h);
            CHECK(win.input.end == win.target.begin);
            CHECK(win.input.begin == 17 + k * s);
            CHECK(win.target.end <= 17 + n);
        }
    }
}

TEST_CASE("test windows stay in the test segment unless warm-up is enabled") {
    const auto split = chronological_split(20'000);
    const auto strict = test_windows(split, 512, 48, 1);
    REQUIRE(strict.size() == 2000 - 560 + 1);
    for (const auto& w : strict.windows) {
        CHECK(split.test.contains(w.input.begin));
        CHECK(w.target.end <= split.test.end);
    }
    const auto warm = test_windows(split, 512, 48, 1, true);
    REQUIRE(warm.size() == 2000 - 48 + 1);
    CHECK(warm.windows.front().input.begin == split.test.begin - 512);
    CHECK(warm.windows.front().target.begin == split.test.begin);
    for (const auto& w : warm.windows) {
        CHECK(w.input.begin >= split.validation.begin);
        CHECK(split.test.contains(w.target.begin));
        CHECK(w.target.end <= split.test.end);
    }

    // A validation segment shorter than the lookback caps the warm-up.
    const auto tiny = chronological_split(1000, SplitSpec{0.85, 0.05, 0.1});
    const auto capped = test_windows(tiny, 80, 10, 1, true);
    CHECK(capped.windows.front().input.begin == tiny.validation.begin);
}
