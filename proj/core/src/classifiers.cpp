#include "hebb/classifiers.hpp"
#include "hebb/parallel.hpp"

#include <cmath>
#include <limits>

namespace hebb::cls {

namespace {

// Round-robin across label buckets, each bucket in file order. Used wherever
// training should not dwell on a single label.
std::vector<const vec*> interleave(const std::array<std::vector<vec>, num_labels>& buckets,
                                   size_t per_label_limit = SIZE_MAX)
{
    std::vector<const vec*> out;
    size_t limit = 0;
    for (const auto& b : buckets)
        limit = std::max(limit, std::min(b.size(), per_label_limit));
    for (size_t i = 0; i < limit; ++i)
        for (int label = 0; label < num_labels; ++label)
            if (i < std::min(buckets[label].size(), per_label_limit))
                out.push_back(&buckets[label][i]);
    return out;
}

std::vector<const vec*> bucket_ptrs(const std::vector<vec>& bucket)
{
    std::vector<const vec*> out;
    out.reserve(bucket.size());
    for (const vec& v : bucket)
        out.push_back(&v);
    return out;
}

} // namespace

average_vector_model build_average_vectors(const net::network& network,
                                           const mnist::prepared_dataset& averaging_half)
{
    average_vector_model model;
    for (int label = 0; label < num_labels; ++label) {
        const auto& bucket = averaging_half.per_label[label];
        if (bucket.empty())
            throw std::invalid_argument("build_average_vectors: empty bucket for label " +
                                        std::to_string(label));
        vec sum(network.config.width, 0.0);
        for (const vec& x : bucket) {
            const net::activation_trace trace = net::forward(network, x);
            const vec& out = trace.output();
            for (size_t k = 0; k < sum.size(); ++k)
                sum[k] += out[k];
        }
        for (double& v : sum)
            v /= double(bucket.size());
        model.per_label[label] = std::move(sum);
    }
    return model;
}

int classify_by_average(const average_vector_model& model, const net::network& network,
                        const vec& x, metric_kind metric)
{
    const net::activation_trace trace = net::forward(network, x);
    const vec& out = trace.output();
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int label = 0; label < num_labels; ++label) {
        // both metrics framed as "larger is better"
        const double score = metric == metric_kind::euclidean
                                 ? -numerics::euclidean_distance(out, model.per_label[label])
                                 : numerics::cosine_similarity(out, model.per_label[label]);
        if (score > best_score) {
            best_score = score;
            best = label;
        }
    }
    return best;
}

std::vector<stage1_cell> stage1_experiment(const mnist::prepared_dataset& train,
                                           const mnist::prepared_dataset& test,
                                           const std::vector<int>& hidden_list,
                                           const std::vector<double>& eta_list,
                                           const stage1_options& opt)
{
    // one split shared by every cell, derived from the experiment seed
    random_source split_rng(opt.seed ^ 0x68616c66u); // "half" tag keeps the split stream separate
    const mnist::half_split_result halves = mnist::half_split(train, split_rng);
    const std::vector<const vec*> learning_order = interleave(halves.learning_half.per_label);

    std::vector<stage1_cell> cells;
    for (int hidden : hidden_list) {
        for (double eta : eta_list) {
            net::network_config cfg;
            cfg.hidden_layers = hidden;
            cfg.learning_rate = eta;
            cfg.seed = opt.seed;
            cfg.activation = opt.activation;
            net::network network = net::init_network(cfg);
            bool diverged = false;
            if (eta != 0.0) {
                const net::train_report report = net::train(network, learning_order, eta);
                diverged = report.diverged;
            }
            const average_vector_model model = build_average_vectors(network, halves.averaging_half);

            size_t total = 0, correct_euc = 0, correct_cos = 0;
            for (int label = 0; label < num_labels; ++label) {
                const auto& bucket = test.per_label[label];
                const size_t n = std::min(bucket.size(), opt.max_test_per_label);
                for (size_t i = 0; i < n; ++i) {
                    ++total;
                    if (classify_by_average(model, network, bucket[i], metric_kind::euclidean) == label)
                        ++correct_euc;
                    if (classify_by_average(model, network, bucket[i], metric_kind::cosine) == label)
                        ++correct_cos;
                }
            }
            const double denom = total ? double(total) : 1.0;
            cells.push_back({hidden, eta, metric_kind::euclidean, correct_euc / denom, diverged});
            cells.push_back({hidden, eta, metric_kind::cosine, correct_cos / denom, diverged});
        }
    }
    return cells;
}

net::network& model_bank::member(bank_role role, int label)
{
    switch (role) {
    case bank_role::per_label: return per_label[label];
    case bank_role::all_data: return all_data;
    case bank_role::uniform: return uniform;
    default: return untrained;
    }
}

const net::network& model_bank::member(bank_role role, int label) const
{
    return const_cast<model_bank*>(this)->member(role, label);
}

model_bank build_model_bank(const mnist::prepared_dataset& train, const bank_options& opt)
{
    for (int label = 0; label < num_labels; ++label)
        if (train.per_label[label].size() < opt.cap / opt.uniform_fraction)
            throw std::invalid_argument("build_model_bank: not enough samples for label " +
                                        std::to_string(label));

    net::network_config cfg;
    cfg.hidden_layers = opt.hidden_layers;
    cfg.learning_rate = opt.learning_rate;
    cfg.seed = opt.seed;
    cfg.activation = opt.activation;

    model_bank bank;
    for (int label = 0; label < num_labels; ++label) {
        bank.per_label[label] = net::init_network(cfg);
        bank.per_label[label].trained_on = std::to_string(label);
    }
    bank.all_data = net::init_network(cfg);
    bank.all_data.trained_on = "all";
    bank.uniform = net::init_network(cfg);
    bank.uniform.trained_on = "uniform";
    bank.untrained = net::init_network(cfg);
    bank.untrained.trained_on = "untrained";

    // per-label nets see their own label uninterrupted, in file order
    for (int label = 0; label < num_labels; ++label) {
        const auto ptrs = bucket_ptrs(train.per_label[label]);
        bank.per_label_reports[label] = net::train(bank.per_label[label], ptrs, opt.learning_rate);
    }

    if (opt.train_controls) {
        const size_t even_share = opt.cap / num_labels;
        const auto all_order = opt.all_data_full ? interleave(train.per_label)
                                                 : interleave(train.per_label, even_share);
        bank.all_data_report = net::train(bank.all_data, all_order, opt.learning_rate);

        const auto uniform_order = interleave(train.per_label, opt.cap / opt.uniform_fraction);
        bank.uniform_report = net::train(bank.uniform, uniform_order, opt.learning_rate);
    }

    return bank;
}

norm_comparison_table norm_comparison(const model_bank& bank, const mnist::prepared_dataset& test)
{
    norm_comparison_table table;
    for (int probe = 0; probe < num_labels; ++probe) {
        auto& row = table.per_probe[probe];
        for (const vec& x : test.per_label[probe]) {
            const double own = net::output_norm(bank.per_label[probe], x);
            auto tally = [&](const std::string& key, const net::network& opponent) {
                const double other = net::output_norm(opponent, x);
                comparison_counts& c = row[key];
                if (own > other)
                    ++c.wins;
                else if (own < other)
                    ++c.losses;
                else
                    ++c.ties;
            };
            for (int opp = 0; opp < num_labels; ++opp)
                if (opp != probe)
                    tally("net" + std::to_string(opp), bank.per_label[opp]);
            tally("all_data", bank.all_data);
            tally("uniform", bank.uniform);
            tally("untrained", bank.untrained);
        }
    }
    return table;
}

norm_prediction classify_by_norm(const model_bank& bank, const vec& x)
{
    norm_prediction p;
    double best = -1.0;
    int usable = 0;
    for (int label = 0; label < num_labels; ++label) {
        const net::network& n = bank.per_label[label];
        if (n.diverged)
            continue; // diverged members cannot produce a usable norm
        const double norm = net::output_norm(n, x);
        if (!std::isfinite(norm))
            continue;
        ++usable;
        if (norm > best) {
            best = norm;
            p.label = label;
        }
    }
    if (usable == 0 || best <= 0.0) {
        p.label = 0;
        p.degenerate = true;
    }
    return p;
}

evaluation_result evaluate(const model_bank& bank, const mnist::prepared_dataset& test)
{
    evaluation_result r;
    for (int label = 0; label < num_labels; ++label)
        if (bank.per_label[label].diverged)
            r.diverged_models.push_back(label);

    for (int actual = 0; actual < num_labels; ++actual) {
        for (const vec& x : test.per_label[actual]) {
            const norm_prediction p = classify_by_norm(bank, x);
            if (p.degenerate)
                ++r.degenerate_inputs;
            ++r.confusion[actual][p.label];
        }
    }

    size_t total = 0, diag = 0;
    for (int a = 0; a < num_labels; ++a) {
        size_t row_total = 0;
        for (int p = 0; p < num_labels; ++p)
            row_total += r.confusion[a][p];
        total += row_total;
        diag += r.confusion[a][a];
        r.per_label_accuracy[a] = row_total ? double(r.confusion[a][a]) / row_total : 0.0;
    }
    if (total > 0) {
        r.overall_accuracy = double(diag) / total;
        r.accuracy_defined = true;
    }
    return r;
}

} // namespace hebb::cls
