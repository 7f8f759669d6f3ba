#include "spikeguard/simd/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace spikeguard::simd {
namespace {

Isa detect() {
    if (const char* forced = std::getenv("SPIKEGUARD_SIMD")) {
        const std::string_view name{forced};
        if (name == "scalar") return Isa::scalar;
        if (name == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
    }
    return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

Isa& current() {
    static Isa isa = detect();
    return isa;
}

}  // namespace

bool isa_supported(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return true;
    case Isa::avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    }
    return false;
}

const KernelTable& kernels() {
#if defined(__x86_64__) || defined(_M_X64)
    if (current() == Isa::avx2) return avx2_kernels();
#endif
    return scalar_kernels();
}

Isa active_isa() { return current(); }

std::string_view isa_name(Isa isa) {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

void set_active_isa(Isa isa) {
    if (!isa_supported(isa))
        throw std::invalid_argument("SIMD variant not supported on this CPU: " +
                                    std::string(isa_name(isa)));
    current() = isa;
}

}  // namespace spikeguard::simd
