#pragma once

#include <cstddef>
#include <string_view>

namespace semfactor::kernels {

// Dense inner-loop primitives used by the similarity, factor and alignment
// stages. Every kernel has a scalar reference implementation and, on x86-64
// with AVX2+FMA, a vectorized variant selected at runtime. Variants may
// differ from the reference only by floating-point summation order; the test
// suite checks them against each other on random data.
struct Ops {
    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum_i x[i]^2
    double (*sumsq)(const double* x, std::size_t n);
    // single pass over (x, y): xy = sum x*y, xx = sum x^2, yy = sum y^2
    void (*dot3)(const double* x, const double* y, std::size_t n,
                 double* xy, double* xx, double* yy);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // plane rotation: (x[i], y[i]) <- (c*x[i] - s*y[i], s*x[i] + c*y[i])
    void (*rot)(double* x, double* y, std::size_t n, double c, double s);

    const char* name;
};

enum class Backend { Auto, Scalar, Avx2 };

// Active kernel table. Selected once: SEMFACTOR_KERNEL=scalar|avx2|auto wins,
// otherwise the best backend the CPU supports.
const Ops& active();

// Overrides the active table (tests, CLI --kernel flag). Throws on
// Backend::Avx2 when the CPU lacks AVX2+FMA.
void select(Backend backend);

Backend parse_backend(std::string_view name);  // "auto" | "scalar" | "avx2"

bool avx2_supported();

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when not compiled in or unsupported

}  // namespace semfactor::kernels
