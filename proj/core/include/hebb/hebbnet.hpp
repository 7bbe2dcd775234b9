#ifndef HEBB_HEBBNET_HPP
#define HEBB_HEBBNET_HPP

#include "hebb/numerics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hebb::net {

constexpr int layer_width = 784;

// Activation entries beyond this magnitude count as divergence.
constexpr double divergence_limit = 1e150;

enum class activation_kind : uint8_t { relu = 0, step = 1 };

struct network_config {
    int width = layer_width;
    int hidden_layers = 3;       // H; swept over [2,15]
    double learning_rate = 1e-7; // eta
    uint64_t seed = 0;
    activation_kind activation = activation_kind::relu;

    // Interpretation flags, defaults follow the primary reading.
    bool binary_hebb = false;      // binarize activations entering the outer product
    bool update_first = true;      // update the input->h1 matrix
    bool update_last = true;       // update the hH->output matrix
    bool final_activation = true;  // apply the activation after the output layer
};

struct network {
    network_config config;
    std::vector<matrix> weights; // H+1 matrices, index i maps layer i to i+1
    std::string trained_on = "untrained";
    bool diverged = false;

    int num_weight_layers() const { return config.hidden_layers + 1; }
};

struct activation_trace {
    std::vector<vec> activations; // a0 = input .. a_{H+1} = output
    bool diverged = false;

    const vec& output() const { return activations.back(); }
};

struct layer_update_summary {
    double raw_update_sum = 0.0;  // sum of eta * a_post[j] * a_pre[k] over all entries
    double subtracted_mean = 0.0; // raw_update_sum / (rows * cols)
};

struct train_report {
    size_t samples_seen = 0;
    bool diverged = false;
    std::optional<size_t> first_divergence_sample;
    std::vector<double> weight_sum_drift; // |sum(W_i) - initial sum| per layer
};

// Weights depend only on config.seed, width and depth; two networks with the
// same seed and depth start bit-identical whatever they are later trained on.
network init_network(const network_config& config);

activation_trace forward(const network& net, const vec& x);

// Applies W_i += eta * a_{i+1} a_i^T - mean * J per updated layer; the entry
// sum of each W_i is unchanged.
std::vector<layer_update_summary> hebbian_update(network& net, const activation_trace& trace, double eta);

// Single pass over samples in the given order; stops at first divergence.
train_report train(network& net, const std::vector<const vec*>& samples, double eta);
train_report train(network& net, const std::vector<vec>& samples, double eta);

// L2 norm of the forward output; +inf when the pass diverges.
double output_norm(const network& net, const vec& x);

// Per-layer entry sums, used by the conservation checks.
std::vector<double> weight_sums(const network& net);

// Versioned binary model file plus a text sidecar manifest at path + ".manifest.txt".
void save_model(const network& net, const std::string& path, const std::string& manifest_extra = "");
network load_model(const std::string& path);

} // namespace hebb::net

#endif
