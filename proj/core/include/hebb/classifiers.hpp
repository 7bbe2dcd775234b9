#ifndef HEBB_CLASSIFIERS_HPP
#define HEBB_CLASSIFIERS_HPP

#include "hebb/hebbnet.hpp"
#include "hebb/mnist_io.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace hebb::cls {

using mnist::num_labels;

// ---- stage 1: average-vector classification ----

struct average_vector_model {
    std::array<vec, num_labels> per_label;
};

enum class metric_kind { euclidean, cosine };

average_vector_model build_average_vectors(const net::network& network,
                                           const mnist::prepared_dataset& averaging_half);

// Nearest average under the metric; ties go to the smallest label index.
int classify_by_average(const average_vector_model& model, const net::network& network,
                        const vec& x, metric_kind metric);

struct stage1_cell {
    int hidden_layers = 0;
    double learning_rate = 0.0;
    metric_kind metric = metric_kind::euclidean;
    double accuracy = 0.0;
    bool diverged = false;
};

struct stage1_options {
    uint64_t seed = 0;
    net::activation_kind activation = net::activation_kind::relu;
    size_t max_test_per_label = SIZE_MAX; // smoke-run truncation
};

// Trains on the learning half, builds averages from the averaging half, and
// scores the test set under both metrics for every (H, eta) pair.
std::vector<stage1_cell> stage1_experiment(const mnist::prepared_dataset& train,
                                           const mnist::prepared_dataset& test,
                                           const std::vector<int>& hidden_list,
                                           const std::vector<double>& eta_list,
                                           const stage1_options& opt);

// ---- stage 2/3: per-label bank ----

// Controls trained alongside the ten per-label networks.
enum class bank_role { per_label, all_data, uniform, untrained };

struct model_bank {
    std::array<net::network, num_labels> per_label;
    net::network all_data;
    net::network uniform;
    net::network untrained;
    std::array<net::train_report, num_labels> per_label_reports;
    net::train_report all_data_report;
    net::train_report uniform_report;

    net::network& member(bank_role role, int label = 0);
    const net::network& member(bank_role role, int label = 0) const;
};

struct bank_options {
    uint64_t seed = 0;
    int hidden_layers = 3;
    double learning_rate = 1e-7;
    net::activation_kind activation = net::activation_kind::relu;
    size_t cap = 5420;
    // When true the all-data control trains on the full capped set (cap per
    // label); when false it trains on cap total, spread evenly across labels.
    bool all_data_full = true;
    // uniform control: 1/10 of each label's capped data
    size_t uniform_fraction = 10;
    // stage 3 never consults the controls; skipping them saves a full
    // training pass over the capped set
    bool train_controls = true;
};

model_bank build_model_bank(const mnist::prepared_dataset& train, const bank_options& opt);

// ---- norm comparison (stage 2) ----

struct comparison_counts {
    size_t wins = 0;   // probe label's own network had the strictly larger norm
    size_t losses = 0;
    size_t ties = 0;

    size_t total() const { return wins + losses + ties; }
};

// Opponent keys: "net0".."net9", "all_data", "uniform", "untrained".
struct norm_comparison_table {
    std::array<std::map<std::string, comparison_counts>, num_labels> per_probe;
};

norm_comparison_table norm_comparison(const model_bank& bank, const mnist::prepared_dataset& test);

// ---- norm-argmax classifier (stage 3) ----

struct norm_prediction {
    int label = 0;
    bool degenerate = false; // no usable norm (all zero or all models diverged)
};

norm_prediction classify_by_norm(const model_bank& bank, const vec& x);

struct evaluation_result {
    double overall_accuracy = 0.0;
    bool accuracy_defined = false;
    std::array<double, num_labels> per_label_accuracy{};
    std::array<std::array<size_t, num_labels>, num_labels> confusion{}; // [actual][predicted]
    std::vector<int> diverged_models;
    size_t degenerate_inputs = 0;
};

evaluation_result evaluate(const model_bank& bank, const mnist::prepared_dataset& test);

} // namespace hebb::cls

#endif
