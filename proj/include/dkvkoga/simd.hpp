#pragma once

#include <cstddef>

// Data-parallel inner loops used by the dense linear algebra and kernel
// assembly code. Every routine exists as a portable scalar reference and,
// where the target supports it, as a vectorized variant (AVX2+FMA on x86-64,
// NEON on aarch64). The active table is chosen once at startup from CPU
// capabilities; DKV_SIMD=scalar|avx2|neon overrides the choice. Scalar and
// vector variants are equivalence-tested against each other.

namespace dkv::simd {

struct Ops {
    const char* name;
    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i (a[i]-b[i])^2
    double (*sqdist)(const double* a, const double* b, std::size_t n);
    // sum_i a[i]
    double (*sum)(const double* a, std::size_t n);
    // sum_i a[i]^2
    double (*sumsq)(const double* a, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // x[i] *= alpha
    void (*scal)(double alpha, double* x, std::size_t n);
};

// Scalar reference implementation; always available.
const Ops& scalar_ops();

// Vector variants; nullptr when not compiled in or not supported by the CPU.
const Ops* avx2_ops();
const Ops* neon_ops();

// Table selected at startup (honors DKV_SIMD).
const Ops& active();

} // namespace dkv::simd
