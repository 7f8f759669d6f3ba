#pragma once

// Chronological train/validation/test splitting and overlapping
// lookback/horizon windows.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace spikeguard::windowing {

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    std::size_t size() const noexcept { return end - begin; }
    bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
    bool operator==(const IndexRange&) const = default;
};

struct SplitSpec {
    double train = 0.7;
    double validation = 0.2;
    double test = 0.1;

    void validate() const;
    // "0.7,0.2,0.1"
    static SplitSpec parse(std::string_view text);
    std::string to_string() const;
};

struct SplitRanges {
    IndexRange train;
    IndexRange validation;
    IndexRange test;
};

inline constexpr std::size_t kMinSplitLength = 10;

// Boundaries floor(train * length) and floor((train + validation) * length).
SplitRanges chronological_split(std::size_t length, const SplitSpec& spec = {});

struct Window {
    IndexRange input;   // [i, i + L)
    IndexRange target;  // [i + L, i + L + H)
};

struct WindowSet {
    std::size_t lookback = 512;
    std::size_t horizon = 48;
    std::size_t stride = 1;
    std::vector<Window> windows;

    std::size_t size() const noexcept { return windows.size(); }
};

// floor((length - L - H) / stride) + 1 windows when length >= L + H, else none.
// Indices are offset by `origin` so windows can be placed inside a segment.
WindowSet make_windows(std::size_t segment_length, std::size_t lookback, std::size_t horizon,
                       std::size_t stride, std::size_t origin = 0);

// Evaluation windows for the test segment. By default every index lies in the
// test segment; with `warmup_overlap` the lookback may reach back into the
// validation segment (never the training segment) while targets stay in test.
WindowSet test_windows(const SplitRanges& split, std::size_t lookback, std::size_t horizon,
                       std::size_t stride, bool warmup_overlap = false);

}  // namespace spikeguard::windowing
