#include "daclin/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "daclin/error.hpp"
#include "daclin/kernels.hpp"
#include "daclin/rng.hpp"

namespace daclin {

Normalization Normalization::for_bits(int bits) {
    const double half = static_cast<double>((1U << bits) - 1U) / 2.0;
    return {half, half, 0.0, 1.0};
}

MlpParams MlpParams::zeros(int hidden) {
    MlpParams p;
    p.w0.assign(hidden, 0.0);
    p.b0.assign(hidden, 0.0);
    p.w1.assign(hidden, 0.0);
    return p;
}

void MlpParams::validate() const {
    if (w0.empty()) throw ArgumentError("MLP needs at least one hidden unit");
    if (b0.size() != w0.size() || w1.size() != w0.size())
        throw ArgumentError("MLP parameter vectors differ in length");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(w0.begin(), w0.end(), finite) || !std::all_of(b0.begin(), b0.end(), finite) ||
        !std::all_of(w1.begin(), w1.end(), finite) || !std::isfinite(b1))
        throw ArgumentError("MLP parameters must be finite");
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
        throw ConfigError("Adam betas must lie in (0, 1)");
    if (!(eps > 0.0)) throw ConfigError("Adam eps must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (hidden < 1) throw ConfigError("hidden width must be >= 1");
}

double relu(double u) { return u > 0.0 ? u : 0.0; }

double mlp_forward(double x, const MlpParams& params) {
    double acc = 0.0;
    for (std::size_t i = 0; i < params.w0.size(); ++i)
        acc += params.w1[i] * relu(params.w0[i] * x + params.b0[i]);
    return acc + params.b1;
}

namespace {

kernels::MlpView view_of(const MlpParams& p) { return {p.w0, p.b0, p.w1, p.b1}; }

// Flat layout [w0 | b0 | w1 | b1] shared by the trainer and the optimizer.
struct FlatNet {
    explicit FlatNet(std::size_t hidden) : h(hidden), data(3 * hidden + 1, 0.0) {}
    std::size_t h;
    std::vector<double> data;

    std::span<double> w0() { return {data.data(), h}; }
    std::span<double> b0() { return {data.data() + h, h}; }
    std::span<double> w1() { return {data.data() + 2 * h, h}; }
    double& b1() { return data[3 * h]; }

    kernels::MlpView view() const {
        return {{data.data(), h}, {data.data() + h, h}, {data.data() + 2 * h, h}, data[3 * h]};
    }
    kernels::MlpGradView grad_view() { return {w0(), b0(), w1(), &b1()}; }

    MlpParams params() const {
        MlpParams p;
        p.w0.assign(data.begin(), data.begin() + h);
        p.b0.assign(data.begin() + h, data.begin() + 2 * h);
        p.w1.assign(data.begin() + 2 * h, data.begin() + 3 * h);
        p.b1 = data[3 * h];
        return p;
    }
};

double mean_squared(std::span<const double> yhat, std::span<const double> y) {
    double sse = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) {
        const double r = yhat[n] - y[n];
        sse += r * r;
    }
    return sse / static_cast<double>(y.size());
}

} // namespace

MlpParams mlp_gradient(const MlpParams& params, std::span<const double> x, std::span<const double> y) {
    params.validate();
    if (x.empty() || x.size() != y.size()) throw ArgumentError("gradient batch must be non-empty and paired");
    const auto& k = kernels::active_kernels();
    MlpParams g = MlpParams::zeros(params.hidden());
    std::vector<double> scratch(params.w0.size());
    k.gradient(view_of(params), x, y, {g.w0, g.b0, g.w1, &g.b1}, scratch);
    return g;
}

AdamOptimizer::AdamOptimizer(std::size_t n_params, const TrainConfig& cfg)
    : m_(n_params, 0.0), v_(n_params, 0.0), lr_(cfg.lr), beta1_(cfg.beta1), beta2_(cfg.beta2), eps_(cfg.eps) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw ArgumentError("Adam state size does not match parameter count");
    ++t_;
    kernels::AdamStep s;
    s.lr = lr_;
    s.beta1 = beta1_;
    s.beta2 = beta2_;
    s.eps = eps_;
    s.bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    s.bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    kernels::active_kernels().adam(params, grad, m_, v_, s);
}

TrainResult train_mlp(const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    ds.validate();
    const std::size_t n = ds.size();
    if (n < static_cast<std::size_t>(cfg.batch_size))
        throw ArgumentError("dataset has " + std::to_string(n) + " rows, fewer than batch_size " +
                            std::to_string(cfg.batch_size));

    const Normalization norm = Normalization::for_bits(ds.bits);
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = norm.input(ds.x[i]);
        ys[i] = (ds.y[i] - norm.y_center) / norm.y_scale;
    }

    const auto hidden = static_cast<std::size_t>(cfg.hidden);
    FlatNet net(hidden);
    Rng rng(cfg.seed);
    const double limit = std::sqrt(6.0 / static_cast<double>(1 + hidden));
    for (double& w : net.w0()) w = limit * (2.0 * rng.uniform() - 1.0);
    for (double& w : net.w1()) w = limit * (2.0 * rng.uniform() - 1.0);

    const auto& k = kernels::active_kernels();
    FlatNet grad(hidden);
    std::vector<double> scratch(hidden);
    std::vector<double> yhat(n);
    AdamOptimizer adam(net.data.size(), cfg);

    auto full_loss = [&] {
        k.forward(net.view(), xs, yhat);
        return mean_squared(yhat, ys);
    };

    TrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs) + 1);
    result.loss_history.push_back(full_loss());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    std::vector<double> bx(batch), by(batch);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t len = std::min(batch, n - start);
            for (std::size_t j = 0; j < len; ++j) {
                bx[j] = xs[order[start + j]];
                by[j] = ys[order[start + j]];
            }
            k.gradient(net.view(), {bx.data(), len}, {by.data(), len}, grad.grad_view(), scratch);
            adam.step(net.data, grad.data);
        }
        const double loss = full_loss();
        if (!std::isfinite(loss))
            throw TrainingError("training diverged (non-finite loss) at epoch " + std::to_string(epoch), epoch);
        result.loss_history.push_back(loss);
    }

    result.model.params = net.params();
    result.model.norm = norm;
    return result;
}

PolyModel fit_polynomial(const Dataset& ds, int degree) {
    ds.validate();
    if (degree < 0) throw ArgumentError("polynomial degree must be >= 0");
    const auto cols = static_cast<std::size_t>(degree) + 1;
    const std::set<std::uint32_t> distinct(ds.x.begin(), ds.x.end());
    if (distinct.size() < cols)
        throw FitError("rank deficient: " + std::to_string(distinct.size()) + " distinct codes for degree " +
                       std::to_string(degree));

    PolyModel model;
    model.degree = degree;
    model.norm = Normalization::for_bits(ds.bits);
    const auto rows = static_cast<Eigen::Index>(ds.size());
    Eigen::MatrixXd v(rows, static_cast<Eigen::Index>(cols));
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double x = model.norm.input(ds.x[r]);
        double p = 1.0;
        for (std::size_t c = 0; c < cols; ++c) {
            v(r, static_cast<Eigen::Index>(c)) = p;
            p *= x;
        }
        y(r) = (ds.y[r] - model.norm.y_center) / model.norm.y_scale;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
    if (qr.rank() < static_cast<Eigen::Index>(cols))
        throw FitError("Vandermonde design is numerically rank deficient (rank " + std::to_string(qr.rank()) +
                       " < " + std::to_string(cols) + ")");
    const Eigen::VectorXd c = qr.solve(y);
    model.coeffs.assign(c.data(), c.data() + c.size());
    for (double v_c : model.coeffs)
        if (!std::isfinite(v_c)) throw FitError("polynomial fit produced non-finite coefficients");
    return model;
}

double poly_eval(const PolyModel& model, double x) {
    double acc = 0.0;
    for (auto it = model.coeffs.rbegin(); it != model.coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double model_eval(const Model& model, std::uint32_t code) {
    return std::visit(
        [code](const auto& m) {
            const double x = m.norm.input(static_cast<double>(code));
            double y;
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MlpModel>)
                y = mlp_forward(x, m.params);
            else
                y = poly_eval(m, x);
            return y * m.norm.y_scale + m.norm.y_center;
        },
        model);
}

double mse_loss(const Model& model, const Dataset& ds) {
    if (ds.size() == 0) throw ArgumentError("mse_loss needs a non-empty dataset");
    std::vector<double> pred(ds.size());
    if (const auto* mlp = std::get_if<MlpModel>(&model)) {
        std::vector<double> xs(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) xs[i] = mlp->norm.input(ds.x[i]);
        kernels::active_kernels().forward(view_of(mlp->params), xs, pred);
        for (double& p : pred) p = p * mlp->norm.y_scale + mlp->norm.y_center;
    } else {
        for (std::size_t i = 0; i < ds.size(); ++i) pred[i] = model_eval(model, ds.x[i]);
    }
    return mean_squared(pred, ds.y);
}

} // namespace daclin
