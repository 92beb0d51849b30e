#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace jointflow {

enum class Activation { Sigmoid, Tanh, ReLU };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Layer widths from input to output; hidden layers use `activation`, the
/// output layer is linear.
struct NetSpec {
    std::vector<int> layer_sizes;
    Activation activation = Activation::Tanh;

    void validate() const;
    int inputs() const { return layer_sizes.front(); }
    int outputs() const { return layer_sizes.back(); }
};

/// Fully connected layer, weights row-major out x in.
struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> weights;
    std::vector<double> biases;

    double& w(int row, int col) { return weights[static_cast<std::size_t>(row) * in + col]; }
    double w(int row, int col) const { return weights[static_cast<std::size_t>(row) * in + col]; }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct Network {
    NetSpec spec;
    std::vector<DenseLayer> layers;

    std::size_t num_parameters() const;

    friend bool operator==(const Network& a, const Network& b) {
        return a.spec.layer_sizes == b.spec.layer_sizes && a.spec.activation == b.spec.activation &&
               a.layers == b.layers;
    }
};

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 200;
    std::optional<std::size_t> mini_batch;  ///< nullopt trains full-batch
    std::uint64_t seed = 1;                 ///< shuffles mini-batches

    void validate() const;
};

struct TrainResult {
    Network net;
    /// Mean squared error seen during each epoch, measured before the updates
    /// it triggers (for full-batch training: the loss at the start of the epoch).
    std::vector<double> loss_history;
};

/// Gradient of the single-example MSE loss, same layout as Network::layers.
using Gradients = std::vector<DenseLayer>;

/// Weights uniform in +/- sqrt(3 / fan_in) (variance 1/fan_in), zero biases.
Network init(const NetSpec& spec, std::uint64_t seed);

std::vector<double> forward(const Network& net, std::span<const double> input);

/// Single-output convenience wrapper.
double forward_scalar(const Network& net, std::span<const double> input);

/// Mean over outputs of squared error for one example.
double mse_loss(const Network& net, std::span<const double> input, std::span<const double> target);

/// Backpropagated gradient of mse_loss with respect to every parameter.
Gradients backprop(const Network& net, std::span<const double> input, std::span<const double> target);

/// Gradient descent on mean MSE. inputs[i] pairs with targets[i].
TrainResult train(Network net, const std::vector<std::vector<double>>& inputs,
                  const std::vector<std::vector<double>>& targets, const TrainConfig& cfg);

/// Worst relative error between `analytic` and central finite differences of
/// mse_loss, with |a - b| / max(|a|, |b|, 1e-8) per parameter. Loss
/// evaluations for the differences run in extended precision.
double compare_gradients(const Network& net, std::span<const double> input, std::span<const double> target,
                         double epsilon, const Gradients& analytic);

/// compare_gradients against backprop.
double gradient_check(const Network& net, std::span<const double> input, std::span<const double> target,
                      double epsilon);

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

}  // namespace jointflow
