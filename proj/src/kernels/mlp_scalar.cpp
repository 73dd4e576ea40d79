#include <cmath>

#include "daclin/kernels.hpp"

namespace daclin::kernels::scalar {
namespace {

void forward(const MlpView& net, std::span<const double> x, std::span<double> out) {
    const std::size_t hidden = net.w0.size();
    for (std::size_t n = 0; n < x.size(); ++n) {
        double acc = 0.0;
        for (std::size_t i = 0; i < hidden; ++i) {
            const double z = net.w0[i] * x[n] + net.b0[i];
            if (z > 0.0) acc += net.w1[i] * z;
        }
        out[n] = acc + net.b1;
    }
}

double gradient(const MlpView& net, std::span<const double> x, std::span<const double> y,
                const MlpGradView& grad, std::span<double> scratch) {
    const std::size_t hidden = net.w0.size();
    for (std::size_t i = 0; i < hidden; ++i) grad.w0[i] = grad.b0[i] = grad.w1[i] = 0.0;
    double gb1 = 0.0;
    double sse = 0.0;
    const double scale = 2.0 / static_cast<double>(x.size());

    for (std::size_t n = 0; n < x.size(); ++n) {
        double acc = 0.0;
        for (std::size_t i = 0; i < hidden; ++i) {
            const double z = net.w0[i] * x[n] + net.b0[i];
            scratch[i] = z;
            if (z > 0.0) acc += net.w1[i] * z;
        }
        const double residual = acc + net.b1 - y[n];
        sse += residual * residual;
        const double r = scale * residual;
        gb1 += r;
        for (std::size_t i = 0; i < hidden; ++i) {
            const double z = scratch[i];
            if (z > 0.0) {
                grad.w1[i] += r * z;
                const double gz = r * net.w1[i];
                grad.w0[i] += gz * x[n];
                grad.b0[i] += gz;
            }
        }
    }
    *grad.b1 = gb1;
    return sse;
}

void adam(std::span<double> params, std::span<const double> grad, std::span<double> m,
          std::span<double> v, const AdamStep& s) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * (g * g);
        const double mhat = m[i] / s.bias1;
        const double vhat = v[i] / s.bias2;
        params[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
}

} // namespace

const MlpKernels table{Isa::scalar, &forward, &gradient, &adam};

} // namespace daclin::kernels::scalar
