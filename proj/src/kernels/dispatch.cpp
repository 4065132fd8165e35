#include "semfactor/kernels.hpp"

#include <cstdlib>
#include <string>

#include "semfactor/io_util.hpp"

namespace semfactor::kernels {
namespace {

// TODO: NEON variants behind this same table for aarch64 builds.
const Ops* g_active = nullptr;

const Ops& pick(Backend backend) {
    switch (backend) {
        case Backend::Scalar:
            return scalar_ops();
        case Backend::Avx2: {
            const Ops* ops = avx2_ops();
            if (!ops)
                throw Error(ErrorCode::Args,
                            "avx2 kernels requested but not supported on this CPU");
            return *ops;
        }
        case Backend::Auto:
        default: {
            const Ops* ops = avx2_ops();
            return ops ? *ops : scalar_ops();
        }
    }
}

Backend env_backend() {
    const char* env = std::getenv("SEMFACTOR_KERNEL");
    if (!env || !*env) return Backend::Auto;
    return parse_backend(env);
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend parse_backend(std::string_view name) {
    if (name == "auto") return Backend::Auto;
    if (name == "scalar") return Backend::Scalar;
    if (name == "avx2") return Backend::Avx2;
    throw Error(ErrorCode::Args, "unknown kernel backend '" +
                                     std::string(name) +
                                     "' (expected auto, scalar or avx2)");
}

const Ops& active() {
    if (!g_active) g_active = &pick(env_backend());
    return *g_active;
}

void select(Backend backend) { g_active = &pick(backend); }

}  // namespace semfactor::kernels
