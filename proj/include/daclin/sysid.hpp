#pragma once

// Memoryless identification of the static transfer characteristic.
//
// Two regressors map a normalized code x in [-1, 1] to the normalized
// captured output: a single-hidden-layer ReLU network trained on the MSE
// with Adam, and a least-squares polynomial on a Vandermonde design.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "daclin/capture_chain.hpp"

namespace daclin {

// code -> (code - x_center) / x_scale ; output -> (y - y_center) / y_scale
struct Normalization {
    double x_center = 511.5;
    double x_scale = 511.5;
    double y_center = 0.0;
    double y_scale = 1.0;

    static Normalization for_bits(int bits);
    double input(double code) const { return (code - x_center) / x_scale; }
};

struct MlpParams {
    std::vector<double> w0;
    std::vector<double> b0;
    std::vector<double> w1;
    double b1 = 0.0;

    static MlpParams zeros(int hidden);
    int hidden() const { return static_cast<int>(w0.size()); }
    void validate() const;
};

struct TrainConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 256;
    int epochs = 500;
    std::uint64_t seed = 0;
    int hidden = 271;

    void validate() const;
};

struct MlpModel {
    MlpParams params;
    Normalization norm;
};

struct PolyModel {
    int degree = 15;
    std::vector<double> coeffs; // ascending powers of the normalized input
    Normalization norm;
};

using Model = std::variant<MlpModel, PolyModel>;

double relu(double u);

// yhat = w1 . relu(w0 * x + b0) + b1
double mlp_forward(double x, const MlpParams& params);

// Gradient of the batch MSE; ReLU subgradient at 0 is 0.
MlpParams mlp_gradient(const MlpParams& params, std::span<const double> x, std::span<const double> y);

// Flat Adam optimizer state over [w0 | b0 | w1 | b1].
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t n_params, const TrainConfig& cfg);
    void step(std::span<double> params, std::span<const double> grad);
    long steps() const { return t_; }

private:
    std::vector<double> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

struct TrainResult {
    MlpModel model;
    // loss_history[0] is the loss at initialization, [e] after epoch e.
    std::vector<double> loss_history;
};

TrainResult train_mlp(const Dataset& ds, const TrainConfig& cfg);

PolyModel fit_polynomial(const Dataset& ds, int degree);
double poly_eval(const PolyModel& model, double x_normalized);

double model_eval(const Model& model, std::uint32_t code);

double mse_loss(const Model& model, const Dataset& ds);

} // namespace daclin
