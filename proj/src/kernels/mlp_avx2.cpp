#include <immintrin.h>

#include <cmath>

#include "daclin/kernels.hpp"

namespace daclin::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

// Hidden pre-activations for one input; returns w1 . relu(z) without b1.
inline double hidden_pass(const MlpView& net, double xn, double* z_out) {
    const std::size_t hidden = net.w0.size();
    const double* w0 = net.w0.data();
    const double* b0 = net.b0.data();
    const double* w1 = net.w1.data();
    const __m256d xv = _mm256_set1_pd(xn);
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc0 = zero;
    __m256d acc1 = zero;
    std::size_t i = 0;
    for (; i + 8 <= hidden; i += 8) {
        const __m256d za = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + i), xv, _mm256_loadu_pd(b0 + i));
        const __m256d zb = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + i + 4), xv, _mm256_loadu_pd(b0 + i + 4));
        if (z_out) {
            _mm256_storeu_pd(z_out + i, za);
            _mm256_storeu_pd(z_out + i + 4, zb);
        }
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + i), _mm256_max_pd(za, zero), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + i + 4), _mm256_max_pd(zb, zero), acc1);
    }
    for (; i + 4 <= hidden; i += 4) {
        const __m256d z = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + i), xv, _mm256_loadu_pd(b0 + i));
        if (z_out) _mm256_storeu_pd(z_out + i, z);
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + i), _mm256_max_pd(z, zero), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < hidden; ++i) {
        const double z = std::fma(w0[i], xn, b0[i]);
        if (z_out) z_out[i] = z;
        if (z > 0.0) acc = std::fma(w1[i], z, acc);
    }
    return acc;
}

void forward(const MlpView& net, std::span<const double> x, std::span<double> out) {
    for (std::size_t n = 0; n < x.size(); ++n) out[n] = hidden_pass(net, x[n], nullptr) + net.b1;
}

double gradient(const MlpView& net, std::span<const double> x, std::span<const double> y,
                const MlpGradView& grad, std::span<double> scratch) {
    const std::size_t hidden = net.w0.size();
    double* gw0 = grad.w0.data();
    double* gb0 = grad.b0.data();
    double* gw1 = grad.w1.data();
    const double* w1 = net.w1.data();
    double* z = scratch.data();
    for (std::size_t i = 0; i < hidden; ++i) gw0[i] = gb0[i] = gw1[i] = 0.0;
    double gb1 = 0.0;
    double sse = 0.0;
    const double scale = 2.0 / static_cast<double>(x.size());
    const __m256d zero = _mm256_setzero_pd();

    for (std::size_t n = 0; n < x.size(); ++n) {
        const double residual = hidden_pass(net, x[n], z) + net.b1 - y[n];
        sse += residual * residual;
        const double r = scale * residual;
        gb1 += r;
        const __m256d rv = _mm256_set1_pd(r);
        const __m256d xv = _mm256_set1_pd(x[n]);
        std::size_t i = 0;
        for (; i + 4 <= hidden; i += 4) {
            const __m256d zi = _mm256_loadu_pd(z + i);
            const __m256d active = _mm256_cmp_pd(zi, zero, _CMP_GT_OQ);
            const __m256d h = _mm256_and_pd(active, zi);
            _mm256_storeu_pd(gw1 + i, _mm256_fmadd_pd(rv, h, _mm256_loadu_pd(gw1 + i)));
            const __m256d gz = _mm256_and_pd(active, _mm256_mul_pd(rv, _mm256_loadu_pd(w1 + i)));
            _mm256_storeu_pd(gw0 + i, _mm256_fmadd_pd(gz, xv, _mm256_loadu_pd(gw0 + i)));
            _mm256_storeu_pd(gb0 + i, _mm256_add_pd(gz, _mm256_loadu_pd(gb0 + i)));
        }
        for (; i < hidden; ++i) {
            if (z[i] > 0.0) {
                gw1[i] = std::fma(r, z[i], gw1[i]);
                const double gz = r * w1[i];
                gw0[i] = std::fma(gz, x[n], gw0[i]);
                gb0[i] += gz;
            }
        }
    }
    *grad.b1 = gb1;
    return sse;
}

void adam(std::span<double> params, std::span<const double> grad, std::span<double> m,
          std::span<double> v, const AdamStep& s) {
    const __m256d b1 = _mm256_set1_pd(s.beta1);
    const __m256d c1 = _mm256_set1_pd(1.0 - s.beta1);
    const __m256d b2 = _mm256_set1_pd(s.beta2);
    const __m256d c2 = _mm256_set1_pd(1.0 - s.beta2);
    const __m256d bias1 = _mm256_set1_pd(s.bias1);
    const __m256d bias2 = _mm256_set1_pd(s.bias2);
    const __m256d lr = _mm256_set1_pd(s.lr);
    const __m256d eps = _mm256_set1_pd(s.eps);
    std::size_t i = 0;
    for (; i + 4 <= params.size(); i += 4) {
        const __m256d g = _mm256_loadu_pd(grad.data() + i);
        const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m.data() + i)), _mm256_mul_pd(c1, g));
        const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v.data() + i)),
                                         _mm256_mul_pd(c2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m.data() + i, mi);
        _mm256_storeu_pd(v.data() + i, vi);
        const __m256d mhat = _mm256_div_pd(mi, bias1);
        const __m256d vhat = _mm256_div_pd(vi, bias2);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), eps));
        _mm256_storeu_pd(params.data() + i, _mm256_sub_pd(_mm256_loadu_pd(params.data() + i), step));
    }
    for (; i < params.size(); ++i) {
        const double g = grad[i];
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * (g * g);
        params[i] -= s.lr * (m[i] / s.bias1) / (std::sqrt(v[i] / s.bias2) + s.eps);
    }
}

} // namespace

const MlpKernels table{Isa::avx2, &forward, &gradient, &adam};

} // namespace daclin::kernels::avx2
