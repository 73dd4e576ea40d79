#pragma once

// Data-parallel inner loops of MLP training and evaluation.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is picked once at startup from CPUID and can
// be forced with DACLIN_KERNEL=scalar|avx2. Results of the two variants agree
// to rounding (the horizontal sums are ordered differently); a given variant
// is bit-reproducible run to run.

#include <cstddef>
#include <span>
#include <string_view>

namespace daclin::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// Parameters of the single-hidden-layer network, hidden width = w0.size().
struct MlpView {
    std::span<const double> w0;
    std::span<const double> b0;
    std::span<const double> w1;
    double b1 = 0.0;
};

struct MlpGradView {
    std::span<double> w0;
    std::span<double> b0;
    std::span<double> w1;
    double* b1 = nullptr;
};

struct AdamStep {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double bias1 = 1.0; // 1 - beta1^t
    double bias2 = 1.0; // 1 - beta2^t
};

struct MlpKernels {
    Isa isa;
    // out[n] = w1 . relu(w0 * x[n] + b0) + b1
    void (*forward)(const MlpView& net, std::span<const double> x, std::span<double> out);
    // Overwrites grad with the gradient of mean((yhat - y)^2) over the batch
    // and returns the batch sum of squared residuals. scratch.size() >= H.
    double (*gradient)(const MlpView& net, std::span<const double> x, std::span<const double> y,
                       const MlpGradView& grad, std::span<double> scratch);
    // In-place bias-corrected Adam update over flat parameter/moment arrays.
    void (*adam)(std::span<double> params, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const AdamStep& step);
};

bool isa_supported(Isa isa);
const MlpKernels& kernels_for(Isa isa);

// Best supported variant unless overridden through DACLIN_KERNEL.
const MlpKernels& active_kernels();

namespace scalar {
extern const MlpKernels table;
}
#if defined(DACLIN_HAVE_AVX2)
namespace avx2 {
extern const MlpKernels table;
}
#endif

} // namespace daclin::kernels
