#include "hebb/hebbnet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hebb::net {

namespace {

bool entry_ok(double v)
{
    return std::isfinite(v) && std::fabs(v) <= divergence_limit;
}

bool vec_ok(const vec& v)
{
    for (double x : v)
        if (!entry_ok(x))
            return false;
    return true;
}

void apply_activation(vec& v, activation_kind kind)
{
    if (kind == activation_kind::relu) {
        for (double& x : v)
            if (x < 0.0)
                x = 0.0;
    } else {
        for (double& x : v)
            x = x > 0.0 ? 1.0 : 0.0;
    }
}

void write_u16(std::ostream& os, uint16_t v)
{
    char b[2] = { char(v & 0xff), char(v >> 8) };
    os.write(b, 2);
}

void write_u32(std::ostream& os, uint32_t v)
{
    char b[4];
    for (int i = 0; i < 4; ++i)
        b[i] = char((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void write_u64(std::ostream& os, uint64_t v)
{
    char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = char((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

void write_f64(std::ostream& os, double v)
{
    write_u64(os, std::bit_cast<uint64_t>(v));
}

uint16_t read_u16(std::istream& is)
{
    uint8_t b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return uint16_t(b[0]) | (uint16_t(b[1]) << 8);
}

uint32_t read_u32(std::istream& is)
{
    uint8_t b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= uint32_t(b[i]) << (8 * i);
    return v;
}

uint64_t read_u64(std::istream& is)
{
    uint8_t b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= uint64_t(b[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& is)
{
    return std::bit_cast<double>(read_u64(is));
}

} // namespace

network init_network(const network_config& config)
{
    network net;
    net.config = config;
    random_source rng(config.seed);
    const int n = config.width;
    net.weights.reserve(net.num_weight_layers());
    for (int i = 0; i < net.num_weight_layers(); ++i)
        net.weights.push_back(numerics::he_init(n, n, rng));
    return net;
}

activation_trace forward(const network& net, const vec& x)
{
    if (static_cast<int>(x.size()) != net.config.width)
        throw std::invalid_argument("forward: input dimension mismatch");
    activation_trace trace;
    trace.activations.reserve(net.num_weight_layers() + 1);
    trace.activations.push_back(x);
    for (int i = 0; i < net.num_weight_layers(); ++i) {
        vec a = numerics::matvec(net.weights[i], trace.activations.back());
        if (!vec_ok(a)) {
            trace.diverged = true;
            trace.activations.push_back(std::move(a));
            return trace;
        }
        const bool last = (i == net.num_weight_layers() - 1);
        if (!last || net.config.final_activation)
            apply_activation(a, net.config.activation);
        trace.activations.push_back(std::move(a));
    }
    return trace;
}

std::vector<layer_update_summary> hebbian_update(network& net, const activation_trace& trace, double eta)
{
    if (trace.activations.size() != size_t(net.num_weight_layers()) + 1)
        throw std::invalid_argument("hebbian_update: trace depth mismatch");
    std::vector<layer_update_summary> summaries(net.num_weight_layers());
    if (eta == 0.0)
        return summaries;
    const bool binary = net.config.binary_hebb;
    for (int i = 0; i < net.num_weight_layers(); ++i) {
        if (i == 0 && !net.config.update_first)
            continue;
        if (i == net.num_weight_layers() - 1 && !net.config.update_last)
            continue;
        matrix& w = net.weights[i];
        const vec& pre = trace.activations[i];
        const vec& post = trace.activations[i + 1];
        double sum_pre = 0.0, sum_post = 0.0;
        for (double v : pre)
            sum_pre += binary ? (v > 0.0 ? 1.0 : 0.0) : v;
        for (double v : post)
            sum_post += binary ? (v > 0.0 ? 1.0 : 0.0) : v;
        const double raw_sum = eta * sum_post * sum_pre;
        const double mean = raw_sum / (double(w.rows()) * w.cols());
        if (!std::isfinite(mean)) {
            net.diverged = true;
            return summaries;
        }
        const int rows = w.rows(), cols = w.cols();
        double* wp = w.data();
        const double* prep = pre.data();
        for (int j = 0; j < rows; ++j, wp += cols) {
            double c = binary ? (post[j] > 0.0 ? eta : 0.0) : eta * post[j];
            if (!std::isfinite(c)) {
                net.diverged = true;
                return summaries;
            }
            if (binary) {
                for (int k = 0; k < cols; ++k)
                    wp[k] += c * (prep[k] > 0.0 ? 1.0 : 0.0) - mean;
            } else {
                for (int k = 0; k < cols; ++k)
                    wp[k] += c * prep[k] - mean;
            }
        }
        summaries[i] = { raw_sum, mean };
    }
    return summaries;
}

train_report train(network& net, const std::vector<const vec*>& samples, double eta)
{
    train_report report;
    const std::vector<double> initial_sums = weight_sums(net);
    for (size_t s = 0; s < samples.size(); ++s) {
        const activation_trace trace = forward(net, *samples[s]);
        if (trace.diverged) {
            net.diverged = true;
            report.diverged = true;
            report.first_divergence_sample = s;
            break;
        }
        hebbian_update(net, trace, eta);
        if (net.diverged) {
            report.diverged = true;
            report.first_divergence_sample = s;
            break;
        }
        ++report.samples_seen;
    }
    const std::vector<double> final_sums = weight_sums(net);
    report.weight_sum_drift.resize(final_sums.size());
    for (size_t i = 0; i < final_sums.size(); ++i)
        report.weight_sum_drift[i] = std::fabs(final_sums[i] - initial_sums[i]);
    return report;
}

train_report train(network& net, const std::vector<vec>& samples, double eta)
{
    std::vector<const vec*> ptrs;
    ptrs.reserve(samples.size());
    for (const vec& v : samples)
        ptrs.push_back(&v);
    return train(net, ptrs, eta);
}

double output_norm(const network& net, const vec& x)
{
    if (net.diverged)
        return std::numeric_limits<double>::infinity();
    const activation_trace trace = forward(net, x);
    if (trace.diverged)
        return std::numeric_limits<double>::infinity();
    return numerics::l2_norm(trace.output());
}

std::vector<double> weight_sums(const network& net)
{
    std::vector<double> sums;
    sums.reserve(net.weights.size());
    for (const matrix& w : net.weights) {
        double s = 0.0;
        const double* p = w.data();
        for (size_t i = 0; i < w.size(); ++i)
            s += p[i];
        sums.push_back(s);
    }
    return sums;
}

void save_model(const network& net, const std::string& path, const std::string& manifest_extra)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write " + path);
    os.write("HEBN", 4);
    write_u16(os, 1); // format version
    write_u32(os, uint32_t(net.config.width));
    write_u32(os, uint32_t(net.config.hidden_layers));
    os.put(char(net.config.activation));
    write_u64(os, net.config.seed);
    write_f64(os, net.config.learning_rate);
    for (const matrix& w : net.weights) {
        const double* p = w.data();
        for (size_t i = 0; i < w.size(); ++i)
            write_f64(os, p[i]);
    }
    if (!os)
        throw std::runtime_error("write failed: " + path);

    std::ofstream mf(path + ".manifest.txt");
    mf << "format = HEBN v1\n"
       << "width = " << net.config.width << "\n"
       << "hidden_layers = " << net.config.hidden_layers << "\n"
       << "learning_rate = " << std::scientific << net.config.learning_rate << "\n"
       << "seed = " << net.config.seed << "\n"
       << "activation = " << (net.config.activation == activation_kind::relu ? "relu" : "step") << "\n"
       << "trained_on = " << net.trained_on << "\n"
       << "diverged = " << (net.diverged ? "true" : "false") << "\n";
    if (!manifest_extra.empty())
        mf << manifest_extra;
}

network load_model(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "HEBN", 4) != 0)
        throw std::runtime_error("not a HEBN model file: " + path);
    const uint16_t version = read_u16(is);
    if (version != 1)
        throw std::runtime_error("unsupported HEBN version " + std::to_string(version));
    network net;
    net.config.width = int(read_u32(is));
    net.config.hidden_layers = int(read_u32(is));
    net.config.activation = activation_kind(is.get());
    net.config.seed = read_u64(is);
    net.config.learning_rate = read_f64(is);
    const int n = net.config.width;
    for (int i = 0; i < net.num_weight_layers(); ++i) {
        matrix w(n, n);
        double* p = w.data();
        for (size_t k = 0; k < w.size(); ++k)
            p[k] = read_f64(is);
        net.weights.push_back(std::move(w));
    }
    if (!is)
        throw std::runtime_error("truncated HEBN model file: " + path);
    // trained_on / diverged live in the sidecar manifest; leave defaults here
    return net;
}

} // namespace hebb::net
