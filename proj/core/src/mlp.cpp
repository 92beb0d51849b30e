#include "jointflow/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "jointflow/error.hpp"
#include "jointflow/random.hpp"
#include "jointflow/text_io.hpp"

namespace jointflow {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::ReLU: return "relu";
    }
    return "tanh";
}

Activation activation_from_string(const std::string& name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::ReLU;
    throw Error(ErrorCode::InvalidSpec, "unknown activation '" + name + "' (expected sigmoid, tanh or relu)");
}

void NetSpec::validate() const {
    if (layer_sizes.size() < 2) throw Error(ErrorCode::InvalidSpec, "a network needs at least 2 layers");
    for (int s : layer_sizes) {
        if (s < 1) throw Error(ErrorCode::InvalidSpec, "layer sizes must be positive");
    }
}

std::size_t Network::num_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.biases.size();
    return n;
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorCode::InvalidSpec, "learning_rate must be nonnegative");
    }
    if (epochs < 1) throw Error(ErrorCode::InvalidSpec, "epochs must be at least 1");
    if (mini_batch && *mini_batch == 0) throw Error(ErrorCode::InvalidSpec, "mini-batch size must be positive");
}

namespace {

template <typename T>
T activate(Activation a, T z) {
    switch (a) {
        case Activation::Sigmoid: return T(1) / (T(1) + std::exp(-z));
        case Activation::Tanh: return std::tanh(z);
        case Activation::ReLU: return z > T(0) ? z : T(0);
    }
    return z;
}

// Derivative expressed through the activation's output.
double activation_grad(Activation a, double y) {
    switch (a) {
        case Activation::Sigmoid: return y * (1.0 - y);
        case Activation::Tanh: return 1.0 - y * y;
        case Activation::ReLU: return y > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

void check_input(const Network& net, std::size_t n) {
    if (net.layers.empty()) throw Error(ErrorCode::InvalidSpec, "network has no layers");
    if (n != static_cast<std::size_t>(net.layers.front().in)) {
        throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(n) + " values, network expects " +
                                                      std::to_string(net.layers.front().in));
    }
}

void check_target(const Network& net, std::size_t n) {
    if (n != static_cast<std::size_t>(net.layers.back().out)) {
        throw Error(ErrorCode::DimensionMismatch, "target has " + std::to_string(n) + " values, network emits " +
                                                      std::to_string(net.layers.back().out));
    }
}

template <typename T>
std::vector<T> forward_as(const Network& net, std::span<const double> input) {
    std::vector<T> cur(input.begin(), input.end());
    std::vector<T> next;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const auto& l = net.layers[li];
        const bool hidden = li + 1 < net.layers.size();
        next.assign(static_cast<std::size_t>(l.out), T(0));
        for (int o = 0; o < l.out; ++o) {
            T z = static_cast<T>(l.biases[o]);
            const double* row = &l.weights[static_cast<std::size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) z += static_cast<T>(row[i]) * cur[i];
            next[o] = hidden ? activate<T>(net.spec.activation, z) : z;
        }
        cur.swap(next);
    }
    return cur;
}

Gradients zero_like(const Network& net) {
    Gradients g = net.layers;
    for (auto& l : g) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.biases.begin(), l.biases.end(), 0.0);
    }
    return g;
}

/// Reusable buffers for one forward/backward pass.
struct Workspace {
    std::vector<std::vector<double>> acts;    // acts[0] = input, acts[l+1] = layer l output
    std::vector<std::vector<double>> deltas;  // dLoss/dz per layer

    explicit Workspace(const Network& net) {
        acts.resize(net.layers.size() + 1);
        deltas.resize(net.layers.size());
        acts[0].resize(static_cast<std::size_t>(net.layers.front().in));
        for (std::size_t li = 0; li < net.layers.size(); ++li) {
            acts[li + 1].resize(static_cast<std::size_t>(net.layers[li].out));
            deltas[li].resize(static_cast<std::size_t>(net.layers[li].out));
        }
    }
};

// Adds this example's gradient into `grad`; returns the example loss.
double accumulate_gradient(const Network& net, std::span<const double> input, std::span<const double> target,
                           Workspace& ws, Gradients& grad) {
    const std::size_t depth = net.layers.size();
    std::copy(input.begin(), input.end(), ws.acts[0].begin());
    for (std::size_t li = 0; li < depth; ++li) {
        const auto& l = net.layers[li];
        const auto& in = ws.acts[li];
        auto& out = ws.acts[li + 1];
        const bool hidden = li + 1 < depth;
        for (int o = 0; o < l.out; ++o) {
            double z = l.biases[o];
            const double* row = &l.weights[static_cast<std::size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) z += row[i] * in[i];
            out[o] = hidden ? activate<double>(net.spec.activation, z) : z;
        }
    }

    const auto& y = ws.acts[depth];
    const double n_out = static_cast<double>(y.size());
    double loss = 0.0;
    auto& d_last = ws.deltas[depth - 1];
    for (std::size_t o = 0; o < y.size(); ++o) {
        const double diff = y[o] - target[o];
        loss += diff * diff;
        d_last[o] = 2.0 * diff / n_out;
    }
    loss /= n_out;

    for (std::size_t li = depth; li-- > 0;) {
        const auto& l = net.layers[li];
        const auto& in = ws.acts[li];
        const auto& delta = ws.deltas[li];
        auto& g = grad[li];
        for (int o = 0; o < l.out; ++o) {
            const double d = delta[o];
            g.biases[o] += d;
            double* grow = &g.weights[static_cast<std::size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) grow[i] += d * in[i];
        }
        if (li == 0) break;
        auto& prev = ws.deltas[li - 1];
        for (int i = 0; i < l.in; ++i) {
            double s = 0.0;
            for (int o = 0; o < l.out; ++o) s += l.w(o, i) * delta[o];
            prev[i] = s * activation_grad(net.spec.activation, in[i]);
        }
    }
    return loss;
}

void apply_step(Network& net, const Gradients& grad, double step) {
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        auto& l = net.layers[li];
        const auto& g = grad[li];
        for (std::size_t k = 0; k < l.weights.size(); ++k) l.weights[k] -= step * g.weights[k];
        for (std::size_t k = 0; k < l.biases.size(); ++k) l.biases[k] -= step * g.biases[k];
    }
}

void clear(Gradients& grad) {
    for (auto& l : grad) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.biases.begin(), l.biases.end(), 0.0);
    }
}

long double loss_extended(const Network& net, std::span<const double> input, std::span<const double> target) {
    const auto y = forward_as<long double>(net, input);
    long double loss = 0.0L;
    for (std::size_t o = 0; o < y.size(); ++o) {
        const long double diff = y[o] - static_cast<long double>(target[o]);
        loss += diff * diff;
    }
    return loss / static_cast<long double>(y.size());
}

}  // namespace

Network init(const NetSpec& spec, std::uint64_t seed) {
    spec.validate();
    Network net;
    net.spec = spec;
    Rng rng(seed);
    for (std::size_t li = 0; li + 1 < spec.layer_sizes.size(); ++li) {
        DenseLayer l;
        l.in = spec.layer_sizes[li];
        l.out = spec.layer_sizes[li + 1];
        const double limit = std::sqrt(3.0 / static_cast<double>(l.in));
        l.weights.resize(static_cast<std::size_t>(l.in) * l.out);
        for (auto& w : l.weights) w = rng.uniform(-limit, limit);
        l.biases.assign(static_cast<std::size_t>(l.out), 0.0);
        net.layers.push_back(std::move(l));
    }
    return net;
}

std::vector<double> forward(const Network& net, std::span<const double> input) {
    check_input(net, input.size());
    return forward_as<double>(net, input);
}

double forward_scalar(const Network& net, std::span<const double> input) {
    const auto out = forward(net, input);
    if (out.size() != 1) throw Error(ErrorCode::DimensionMismatch, "network has more than one output");
    return out.front();
}

double mse_loss(const Network& net, std::span<const double> input, std::span<const double> target) {
    check_target(net, target.size());
    const auto y = forward(net, input);
    double loss = 0.0;
    for (std::size_t o = 0; o < y.size(); ++o) loss += (y[o] - target[o]) * (y[o] - target[o]);
    return loss / static_cast<double>(y.size());
}

Gradients backprop(const Network& net, std::span<const double> input, std::span<const double> target) {
    check_input(net, input.size());
    check_target(net, target.size());
    Workspace ws(net);
    auto grad = zero_like(net);
    accumulate_gradient(net, input, target, ws, grad);
    return grad;
}

TrainResult train(Network net, const std::vector<std::vector<double>>& inputs,
                  const std::vector<std::vector<double>>& targets, const TrainConfig& cfg) {
    cfg.validate();
    if (inputs.empty()) throw Error(ErrorCode::EmptyDataset, "no training examples");
    if (inputs.size() != targets.size()) {
        throw Error(ErrorCode::DimensionMismatch, std::to_string(inputs.size()) + " inputs but " +
                                                      std::to_string(targets.size()) + " targets");
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        check_input(net, inputs[i].size());
        check_target(net, targets[i].size());
    }

    const std::size_t m = inputs.size();
    const std::size_t batch = std::min(cfg.mini_batch.value_or(m), m);
    Workspace ws(net);
    auto grad = zero_like(net);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(cfg.seed);

    TrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < m) {
            for (std::size_t i = m - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < m; start += batch) {
            const std::size_t stop = std::min(start + batch, m);
            clear(grad);
            for (std::size_t k = start; k < stop; ++k) {
                const auto idx = order[k];
                epoch_loss += accumulate_gradient(net, inputs[idx], targets[idx], ws, grad);
            }
            apply_step(net, grad, cfg.learning_rate / static_cast<double>(stop - start));
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(m));
    }
    result.net = std::move(net);
    return result;
}

double compare_gradients(const Network& net, std::span<const double> input, std::span<const double> target,
                         double epsilon, const Gradients& analytic) {
    check_input(net, input.size());
    check_target(net, target.size());
    Network probe = net;
    double worst = 0.0;
    auto check = [&](double& param, double a) {
        const double saved = param;
        const double hi = saved + epsilon;
        const double lo = saved - epsilon;
        param = hi;
        const long double up = loss_extended(probe, input, target);
        param = lo;
        const long double down = loss_extended(probe, input, target);
        param = saved;
        // Divide by the step actually taken, which differs from 2*epsilon by rounding.
        const long double step = static_cast<long double>(hi) - static_cast<long double>(lo);
        const double numeric = static_cast<double>((up - down) / step);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(a - numeric) / denom);
    };
    for (std::size_t li = 0; li < probe.layers.size(); ++li) {
        auto& l = probe.layers[li];
        for (std::size_t k = 0; k < l.weights.size(); ++k) check(l.weights[k], analytic[li].weights[k]);
        for (std::size_t k = 0; k < l.biases.size(); ++k) check(l.biases[k], analytic[li].biases[k]);
    }
    return worst;
}

double gradient_check(const Network& net, std::span<const double> input, std::span<const double> target,
                      double epsilon) {
    return compare_gradients(net, input, target, epsilon, backprop(net, input, target));
}

nlohmann::json to_json(const Network& net) {
    nlohmann::json j;
    j["format"] = "jointflow-mlp";
    j["version"] = 1;
    j["layer_sizes"] = net.spec.layer_sizes;
    j["activation"] = to_string(net.spec.activation);
    auto& layers = j["layers"] = nlohmann::json::array();
    for (const auto& l : net.layers) layers.push_back({{"weights", l.weights}, {"biases", l.biases}});
    return j;
}

Network network_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "jointflow-mlp") {
            throw Error(ErrorCode::Parse, "not a jointflow-mlp model");
        }
        Network net;
        net.spec.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        net.spec.activation = activation_from_string(j.at("activation").get<std::string>());
        net.spec.validate();
        const auto& layers = j.at("layers");
        if (layers.size() + 1 != net.spec.layer_sizes.size()) {
            throw Error(ErrorCode::Parse, "layer count does not match layer_sizes");
        }
        for (std::size_t li = 0; li < layers.size(); ++li) {
            DenseLayer l;
            l.in = net.spec.layer_sizes[li];
            l.out = net.spec.layer_sizes[li + 1];
            l.weights = layers[li].at("weights").get<std::vector<double>>();
            l.biases = layers[li].at("biases").get<std::vector<double>>();
            if (l.weights.size() != static_cast<std::size_t>(l.in) * l.out ||
                l.biases.size() != static_cast<std::size_t>(l.out)) {
                throw Error(ErrorCode::Parse, "layer " + std::to_string(li) + " has mismatched shapes");
            }
            net.layers.push_back(std::move(l));
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed model: ") + e.what());
    }
}

void save_network(const Network& net, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << to_json(net).dump(1) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

Network load_network(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        return network_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

}  // namespace jointflow
