#include <cstdlib>
#include <string>

#include "daclin/error.hpp"
#include "daclin/kernels.hpp"

namespace daclin::kernels {

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(DACLIN_HAVE_AVX2)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    }
    return false;
}

const MlpKernels& kernels_for(Isa isa) {
    if (!isa_supported(isa))
        throw ConfigError("kernel variant '" + std::string(isa_name(isa)) + "' not available on this CPU/build");
#if defined(DACLIN_HAVE_AVX2)
    if (isa == Isa::avx2) return avx2::table;
#endif
    return scalar::table;
}

namespace {

Isa pick() {
    if (const char* env = std::getenv("DACLIN_KERNEL")) {
        const std::string want(env);
        if (want == "scalar") return Isa::scalar;
        if (want == "avx2") return Isa::avx2;
        if (!want.empty() && want != "auto")
            throw ConfigError("DACLIN_KERNEL must be scalar, avx2 or auto, got '" + want + "'");
    }
    return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

} // namespace

const MlpKernels& active_kernels() {
    static const MlpKernels& chosen = kernels_for(pick());
    return chosen;
}

} // namespace daclin::kernels
