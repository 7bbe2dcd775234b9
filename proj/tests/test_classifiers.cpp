#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hebb/classifiers.hpp"

#include <cmath>

using namespace hebb;
using namespace hebb::cls;

namespace {

matrix identity(int n)
{
    matrix m(n, n);
    for (int i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

// width-3 single-matrix network; identity weights make forward the identity
// on nonnegative inputs
net::network identity_net(int width = 3)
{
    net::network n;
    n.config.width = width;
    n.config.hidden_layers = 0;
    n.weights.push_back(identity(width));
    return n;
}

net::network scaled_net(double scale, int width = 3)
{
    net::network n = identity_net(width);
    for (int i = 0; i < width; ++i)
        n.weights[0](i, i) = scale;
    return n;
}

mnist::prepared_dataset toy_dataset(const std::array<std::vector<vec>, 10>& buckets)
{
    mnist::prepared_dataset d;
    d.per_label = buckets;
    return d;
}

std::array<std::vector<vec>, 10> filled_buckets(const vec& sample)
{
    std::array<std::vector<vec>, 10> b;
    for (auto& bucket : b)
        bucket.push_back(sample);
    return b;
}

} // namespace

TEST_CASE("build_average_vectors")
{
    const net::network n = identity_net();

    SUBCASE("empty bucket rejected")
    {
        mnist::prepared_dataset d;
        d.per_label[0].push_back({ 1.0, 0.0, 0.0 });
        CHECK_THROWS_AS(build_average_vectors(n, d), std::invalid_argument);
    }
    SUBCASE("singleton average equals the sample's output")
    {
        auto buckets = filled_buckets({ 0.25, 0.5, 0.75 });
        const average_vector_model m = build_average_vectors(n, toy_dataset(buckets));
        CHECK(m.per_label[4] == vec{ 0.25, 0.5, 0.75 });
    }
    SUBCASE("duplicated sample gives the singleton average")
    {
        auto buckets = filled_buckets({ 0.25, 0.5, 0.75 });
        buckets[4].push_back({ 0.25, 0.5, 0.75 });
        const average_vector_model m = build_average_vectors(n, toy_dataset(buckets));
        CHECK(m.per_label[4][0] == doctest::Approx(0.25));
        CHECK(m.per_label[4][2] == doctest::Approx(0.75));
    }
    SUBCASE("two samples give the componentwise midpoint")
    {
        auto buckets = filled_buckets({ 0.0, 0.0, 0.0 });
        buckets[2] = { { 1.0, 0.0, 2.0 }, { 3.0, 4.0, 0.0 } };
        const average_vector_model m = build_average_vectors(n, toy_dataset(buckets));
        CHECK(m.per_label[2][0] == doctest::Approx(2.0));
        CHECK(m.per_label[2][1] == doctest::Approx(2.0));
        CHECK(m.per_label[2][2] == doctest::Approx(1.0));
    }
}

TEST_CASE("classify_by_average")
{
    const net::network n = identity_net();
    average_vector_model model;
    for (int label = 0; label < 10; ++label)
        model.per_label[label] = { double(label), 1.0, 0.0 };

    SUBCASE("exact match wins under both metrics")
    {
        const vec x = { 7.0, 1.0, 0.0 };
        CHECK(classify_by_average(model, n, x, metric_kind::euclidean) == 7);
        CHECK(classify_by_average(model, n, x, metric_kind::cosine) == 7);
    }
    SUBCASE("equidistant averages break ties toward label 0")
    {
        average_vector_model flat;
        for (int label = 0; label < 10; ++label)
            flat.per_label[label] = { 1.0, 1.0, 1.0 };
        CHECK(classify_by_average(flat, n, { 0.3, 0.6, 0.2 }, metric_kind::euclidean) == 0);
        CHECK(classify_by_average(flat, n, { 0.3, 0.6, 0.2 }, metric_kind::cosine) == 0);
    }
    SUBCASE("nearer average wins in a hand-placed geometry")
    {
        CHECK(classify_by_average(model, n, { 2.0, 1.0, 0.0 }, metric_kind::euclidean) == 2);
        CHECK(classify_by_average(model, n, { 8.2, 1.0, 0.0 }, metric_kind::euclidean) == 8);
    }
}

TEST_CASE("classify_by_norm")
{
    model_bank bank;
    for (int label = 0; label < 10; ++label)
        bank.per_label[label] = scaled_net(0.1 * (label + 1));

    SUBCASE("argmax picks the largest norm")
    {
        CHECK(classify_by_norm(bank, { 1.0, 1.0, 1.0 }).label == 9);
        CHECK_FALSE(classify_by_norm(bank, { 1.0, 1.0, 1.0 }).degenerate);
    }
    SUBCASE("ties break toward the smallest label")
    {
        model_bank tied;
        for (int label = 0; label < 10; ++label)
            tied.per_label[label] = scaled_net(label == 2 || label == 5 ? 2.0 : 1.0);
        CHECK(classify_by_norm(tied, { 1.0, 0.0, 0.0 }).label == 2);
    }
    SUBCASE("zero input is degenerate")
    {
        const norm_prediction p = classify_by_norm(bank, { 0.0, 0.0, 0.0 });
        CHECK(p.label == 0);
        CHECK(p.degenerate);
    }
    SUBCASE("diverged members are skipped")
    {
        bank.per_label[9].diverged = true;
        CHECK(classify_by_norm(bank, { 1.0, 1.0, 1.0 }).label == 8);
    }
    SUBCASE("argmax is invariant under uniform positive rescaling")
    {
        const vec x = { 0.4, 1.2, 0.7 };
        const int before = classify_by_norm(bank, x).label;
        model_bank scaled = bank;
        for (int label = 0; label < 10; ++label)
            for (int i = 0; i < 3; ++i)
                scaled.per_label[label].weights[0](i, i) *= 7.5;
        CHECK(classify_by_norm(scaled, x).label == before);
    }
}

TEST_CASE("norm_comparison")
{
    model_bank bank;
    for (int label = 0; label < 10; ++label)
        bank.per_label[label] = scaled_net(0.1 * (label + 1));
    bank.all_data = scaled_net(5.0);
    bank.uniform = scaled_net(0.01);
    bank.untrained = scaled_net(0.02);

    mnist::prepared_dataset test;
    for (int label = 0; label < 10; ++label)
        for (int i = 0; i < 3 + label; ++i)
            test.per_label[label].push_back({ 1.0, 0.5, 0.25 });

    const norm_comparison_table table = norm_comparison(bank, test);

    SUBCASE("row sums equal the probe label's test count")
    {
        for (int probe = 0; probe < 10; ++probe) {
            CHECK(table.per_probe[probe].size() == 12); // 9 other nets + 3 controls
            for (const auto& [opp, counts] : table.per_probe[probe])
                CHECK(counts.total() == test.per_label[probe].size());
        }
    }
    SUBCASE("strict norm ordering shows up as wins and losses")
    {
        // probe 9 has the largest per-label scale; beats everything except all_data
        const auto& row = table.per_probe[9];
        CHECK(row.at("net0").wins == test.per_label[9].size());
        CHECK(row.at("all_data").losses == test.per_label[9].size());
        CHECK(row.at("untrained").wins == test.per_label[9].size());
    }
    SUBCASE("identical networks tie on every sample")
    {
        model_bank twins;
        for (int label = 0; label < 10; ++label)
            twins.per_label[label] = scaled_net(1.0);
        twins.all_data = scaled_net(1.0);
        twins.uniform = scaled_net(1.0);
        twins.untrained = scaled_net(1.0);
        const norm_comparison_table t2 = norm_comparison(twins, test);
        for (const auto& [opp, counts] : t2.per_probe[0])
            CHECK(counts.ties == test.per_label[0].size());
    }
}

TEST_CASE("evaluate")
{
    model_bank bank;
    for (int label = 0; label < 10; ++label) {
        // net k responds strongest to basis-ish inputs with x[0] near k/10
        bank.per_label[label] = scaled_net(1.0);
        bank.per_label[label].weights[0](0, 0) = 0.0;
        bank.per_label[label].weights[0](1, 1) = 0.0;
        bank.per_label[label].weights[0](2, 2) = 0.0;
        bank.per_label[label].weights[0](label % 3, label % 3) = 1.0;
    }

    SUBCASE("empty test set yields flagged undefined accuracy")
    {
        mnist::prepared_dataset empty;
        const evaluation_result r = evaluate(bank, empty);
        CHECK_FALSE(r.accuracy_defined);
        CHECK(r.overall_accuracy == 0.0);
    }
    SUBCASE("confusion diagonal matches overall accuracy")
    {
        mnist::prepared_dataset test;
        for (int label = 0; label < 10; ++label)
            for (int i = 0; i < 4; ++i)
                test.per_label[label].push_back({ label % 3 == 0 ? 1.0 : 0.1,
                                                  label % 3 == 1 ? 1.0 : 0.1,
                                                  label % 3 == 2 ? 1.0 : 0.1 });
        const evaluation_result r = evaluate(bank, test);
        size_t total = 0, diag = 0;
        for (int a = 0; a < 10; ++a)
            for (int p = 0; p < 10; ++p) {
                total += r.confusion[a][p];
                if (a == p)
                    diag += r.confusion[a][p];
            }
        CHECK(total == 40);
        CHECK(r.overall_accuracy == doctest::Approx(double(diag) / double(total)));
        CHECK(r.accuracy_defined);
    }
    SUBCASE("repeat evaluation is identical")
    {
        mnist::prepared_dataset test;
        test.per_label[3].push_back({ 0.2, 1.0, 0.4 });
        const evaluation_result a = evaluate(bank, test);
        const evaluation_result b = evaluate(bank, test);
        CHECK(a.overall_accuracy == b.overall_accuracy);
        CHECK(a.confusion == b.confusion);
    }
}

TEST_CASE("stage1_experiment smoke run is deterministic")
{
    // tiny synthetic dataset: distinct constant-direction vectors per label
    mnist::prepared_dataset train, test;
    for (int label = 0; label < 10; ++label) {
        for (int i = 0; i < 4; ++i) {
            vec v(784, 0.0);
            for (int k = 0; k < 784; ++k)
                v[k] = (k % 10 == label) ? 1.0 : 0.01 * (i + 1);
            const double n = numerics::l2_norm(v);
            for (double& x : v)
                x /= n;
            train.per_label[label].push_back(v);
            if (i < 2)
                test.per_label[label].push_back(v);
        }
    }
    stage1_options opt;
    opt.seed = 7;
    const auto a = stage1_experiment(train, test, { 2 }, { 0.0 }, opt);
    const auto b = stage1_experiment(train, test, { 2 }, { 0.0 }, opt);
    REQUIRE(a.size() == 2); // both metrics
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].accuracy == b[i].accuracy);
        CHECK_FALSE(a[i].diverged);
    }
}

TEST_CASE("build_model_bank on synthetic data")
{
    mnist::prepared_dataset train;
    for (int label = 0; label < 10; ++label)
        for (int i = 0; i < 20; ++i) {
            vec v(784, 0.0);
            for (int k = 0; k < 784; ++k)
                v[k] = (k % 10 == label) ? 0.035 : 0.001;
            train.per_label[label].push_back(v);
        }

    bank_options opt;
    opt.seed = 123;
    opt.hidden_layers = 2;
    opt.learning_rate = 1e-6;
    opt.cap = 20;
    const model_bank bank = build_model_bank(train, opt);

    SUBCASE("all members start from identical weights")
    {
        const net::network fresh = net::init_network(bank.untrained.config);
        CHECK(bank.untrained.weights == fresh.weights);
        // per-label nets trained with eta > 0 have moved
        CHECK_FALSE(bank.per_label[0].weights == fresh.weights);
    }
    SUBCASE("per-label training sample counts")
    {
        for (int label = 0; label < 10; ++label)
            CHECK(bank.per_label_reports[label].samples_seen == 20);
        CHECK(bank.all_data_report.samples_seen == 200);   // full capped set
        CHECK(bank.uniform_report.samples_seen == 20);     // cap/10 per label
    }
    SUBCASE("insufficient samples rejected")
    {
        mnist::prepared_dataset thin;
        CHECK_THROWS_AS(build_model_bank(thin, opt), std::invalid_argument);
    }
}
