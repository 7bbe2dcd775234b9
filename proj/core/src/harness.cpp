#include "hebb/harness.hpp"
#include "hebb/parallel.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace hebb::harness {

namespace {

const char* stage_name(stage_kind s)
{
    switch (s) {
    case stage_kind::prepare_check: return "prepare-check";
    case stage_kind::stage1: return "stage1";
    case stage_kind::stage2: return "stage2";
    case stage_kind::stage3: return "stage3";
    default: return "sweep";
    }
}

std::string find_data_file(const std::string& dir, const std::string& base)
{
    for (const std::string& name : { base, base + ".gz" }) {
        const fs::path p = fs::path(dir) / name;
        if (fs::exists(p))
            return p.string();
    }
    return {};
}

std::string crc32_hex(const std::vector<uint8_t>& bytes)
{
    const uint32_t crc = uint32_t(::crc32(0L, bytes.data(), uInt(bytes.size())));
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", crc);
    return buf;
}

struct loaded_data {
    mnist::prepared_dataset train;          // capped + normalized per config
    mnist::prepared_dataset train_uncapped; // stage 1 uses the full train set
    mnist::prepared_dataset test;
    json checksums;
};

loaded_data load_data(const run_config& cfg)
{
    const std::array<std::string, 4> names = {
        "train-images-idx3-ubyte", "train-labels-idx1-ubyte",
        "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"
    };
    std::array<std::vector<uint8_t>, 4> bytes;
    json checksums;
    for (size_t i = 0; i < names.size(); ++i) {
        const std::string path = find_data_file(cfg.data_dir, names[i]);
        if (path.empty())
            throw std::runtime_error("missing data file " + names[i] + " in " + cfg.data_dir);
        bytes[i] = mnist::read_file_maybe_gzip(path);
        checksums[names[i]] = crc32_hex(bytes[i]);
    }
    const auto train_images = mnist::parse_idx_images(bytes[0]);
    const auto train_labels = mnist::parse_idx_labels(bytes[1]);
    const auto test_images = mnist::parse_idx_images(bytes[2]);
    const auto test_labels = mnist::parse_idx_labels(bytes[3]);

    loaded_data d;
    d.train = mnist::prepare(train_images, train_labels, cfg.cap, cfg.normalize);
    d.train.origin = mnist::provenance::train;
    d.train_uncapped = mnist::prepare(train_images, train_labels, std::nullopt, cfg.normalize);
    d.train_uncapped.origin = mnist::provenance::train;
    d.test = mnist::prepare(test_images, test_labels, std::nullopt, cfg.normalize);
    d.test.origin = mnist::provenance::test;
    if (cfg.test_cap != SIZE_MAX)
        for (auto& bucket : d.test.per_label)
            if (bucket.size() > cfg.test_cap)
                bucket.resize(cfg.test_cap);
    d.checksums = std::move(checksums);
    return d;
}

// Fields that change cell results; grid lists and worker count do not belong here.
std::string cell_config_signature(const run_config& cfg, const json& checksums)
{
    std::ostringstream os;
    os << "seed=" << cfg.seed
       << ";cap=" << cfg.cap
       << ";normalize=" << cfg.normalize
       << ";activation=" << (cfg.activation == net::activation_kind::relu ? "relu" : "step")
       << ";test_cap=" << cfg.test_cap
       << ";all_data_full=" << cfg.all_data_full
       << ";data=" << checksums.dump();
    return os.str();
}

json config_snapshot(const run_config& cfg)
{
    json j;
    j["stage"] = stage_name(cfg.stage);
    j["data_dir"] = cfg.data_dir;
    j["seed"] = cfg.seed;
    j["cap"] = cfg.cap;
    j["normalize"] = cfg.normalize;
    j["activation"] = cfg.activation == net::activation_kind::relu ? "relu" : "step";
    j["workers"] = cfg.workers;
    j["test_cap"] = cfg.test_cap == SIZE_MAX ? json(nullptr) : json(cfg.test_cap);
    j["all_data_full"] = cfg.all_data_full;
    j["hidden"] = cfg.hidden_list;
    json etas = json::array();
    for (double e : cfg.eta_list)
        etas.push_back(format_eta(e));
    j["eta"] = etas;
    return j;
}

class manifest {
public:
    manifest(const fs::path& path) : path_(path)
    {
        if (fs::exists(path_)) {
            std::ifstream f(path_);
            f >> doc_;
        }
        if (!doc_.contains("cells"))
            doc_["cells"] = json::object();
    }

    bool cell_done(const std::string& id, const std::string& signature) const
    {
        const auto& cells = doc_["cells"];
        if (!cells.contains(id))
            return false;
        const auto& c = cells[id];
        const std::string status = c.value("status", "");
        return (status == "done" || status == "diverged") &&
               c.value("config_signature", "") == signature;
    }

    json cell(const std::string& id) const { return doc_["cells"][id]; }

    void record_cell(const std::string& id, json cell)
    {
        std::lock_guard<std::mutex> lock(mu_);
        doc_["cells"][id] = std::move(cell);
        flush_locked();
    }

    void set_header(const json& config, const json& checksums)
    {
        std::lock_guard<std::mutex> lock(mu_);
        doc_["artifact_version"] = artifact_version;
        doc_["config"] = config;
        doc_["data_checksums"] = checksums;
        flush_locked();
    }

    std::vector<std::string> cell_ids_with_prefix(const std::string& prefix) const
    {
        std::vector<std::string> ids;
        for (const auto& [id, _] : doc_["cells"].items())
            if (id.rfind(prefix, 0) == 0)
                ids.push_back(id);
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    const json& doc() const { return doc_; }

private:
    void flush_locked()
    {
        const fs::path tmp = path_.string() + ".tmp";
        {
            std::ofstream f(tmp);
            f << doc_.dump(2) << '\n';
        }
        fs::rename(tmp, path_);
    }

    fs::path path_;
    json doc_;
    std::mutex mu_;
};

std::string cell_id(const char* stage, int hidden, double eta)
{
    return std::string(stage) + ":H=" + std::to_string(hidden) + ":eta=" + format_eta(eta);
}

// ---- CSV emission (fixed order, fixed formatting) ----

void emit_stage1_csv(const manifest& m, const fs::path& out)
{
    std::ofstream f(out);
    f << "hidden_layers,learning_rate,metric,accuracy,diverged\n";
    for (const std::string& id : m.cell_ids_with_prefix("stage1:")) {
        const json c = m.cell(id);
        if (c.value("status", "") == "failed")
            continue;
        for (const char* metric : { "euclidean", "cosine" }) {
            f << c["hidden_layers"].get<int>() << ','
              << c["learning_rate"].get<std::string>() << ','
              << metric << ','
              << format_accuracy(c[std::string("accuracy_") + metric].get<double>()) << ','
              << (c["diverged"].get<bool>() ? 1 : 0) << '\n';
        }
    }
}

void emit_stage2_csv(const manifest& m, const fs::path& out)
{
    std::ofstream f(out);
    f << "probe_label,opponent,wins,losses,ties\n";
    for (const std::string& id : m.cell_ids_with_prefix("stage2:")) {
        const json c = m.cell(id);
        if (c.value("status", "") == "failed")
            continue;
        for (const auto& row : c["comparisons"])
            f << row["probe_label"].get<int>() << ','
              << row["opponent"].get<std::string>() << ','
              << row["wins"].get<size_t>() << ','
              << row["losses"].get<size_t>() << ','
              << row["ties"].get<size_t>() << '\n';
    }
}

void emit_stage3_csvs(const manifest& m, const char* prefix, const fs::path& dir)
{
    struct row {
        int hidden;
        double eta;
        json cell;
    };
    std::vector<row> rows;
    for (const std::string& id : m.cell_ids_with_prefix(std::string(prefix) + ":")) {
        const json c = m.cell(id);
        if (c.value("status", "") == "failed")
            continue;
        rows.push_back({ c["hidden_layers"].get<int>(),
                         std::stod(c["learning_rate"].get<std::string>()), c });
    }
    std::sort(rows.begin(), rows.end(), [](const row& a, const row& b) {
        if (a.hidden != b.hidden)
            return a.hidden < b.hidden;
        return a.eta > b.eta;
    });

    std::ofstream f(dir / "stage3_results.csv");
    f << "hidden_layers,learning_rate,accuracy,diverged\n";
    for (const row& r : rows)
        f << r.hidden << ',' << r.cell["learning_rate"].get<std::string>() << ','
          << format_accuracy(r.cell["accuracy"].get<double>()) << ','
          << (r.cell["diverged"].get<bool>() ? 1 : 0) << '\n';

    std::ofstream g(dir / "stage3_per_label.csv");
    g << "hidden_layers,learning_rate,label,accuracy\n";
    for (const row& r : rows)
        for (int label = 0; label < mnist::num_labels; ++label)
            g << r.hidden << ',' << r.cell["learning_rate"].get<std::string>() << ','
              << label << ','
              << format_accuracy(r.cell["per_label"][label].get<double>()) << '\n';
}

// ---- stage runners ----

int run_prepare_check(const run_config& cfg)
{
    const loaded_data d = load_data(cfg);
    std::printf("data ok; checksums %s\n", d.checksums.dump().c_str());
    std::printf("label,train_capped,train_full,test\n");
    for (int label = 0; label < mnist::num_labels; ++label)
        std::printf("%d,%zu,%zu,%zu\n", label, d.train.per_label[label].size(),
                    d.train_uncapped.per_label[label].size(), d.test.per_label[label].size());
    if (!cfg.dump_prepared.empty()) {
        mnist::dump_csv(d.train, cfg.dump_prepared);
        std::printf("prepared train vectors written to %s\n", cfg.dump_prepared.c_str());
    }
    return exit_ok;
}

int run_stage1(const run_config& cfg, const loaded_data& d, manifest& m, const std::string& signature)
{
    // eta = 0 baseline always accompanies the grid
    std::vector<double> etas = cfg.eta_list;
    if (std::find(etas.begin(), etas.end(), 0.0) == etas.end())
        etas.push_back(0.0);

    struct cell_task {
        int hidden;
        double eta;
    };
    std::vector<cell_task> tasks;
    for (int h : cfg.hidden_list)
        for (double e : etas)
            if (!m.cell_done(cell_id("stage1", h, e), signature))
                tasks.push_back({ h, e });

    bool any_failed = false;
    std::mutex fail_mu;
    parallel_for(tasks.size(), cfg.workers, [&](size_t begin, size_t end) {
        for (size_t t = begin; t < end; ++t) {
            const auto [hidden, eta] = tasks[t];
            const std::string id = cell_id("stage1", hidden, eta);
            json cell;
            cell["hidden_layers"] = hidden;
            cell["learning_rate"] = format_eta(eta);
            cell["config_signature"] = signature;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                cls::stage1_options opt;
                opt.seed = cfg.seed;
                opt.activation = cfg.activation;
                opt.max_test_per_label = cfg.test_cap;
                const auto cells = cls::stage1_experiment(d.train_uncapped, d.test,
                                                          { hidden }, { eta }, opt);
                for (const auto& c : cells)
                    cell[c.metric == cls::metric_kind::euclidean ? "accuracy_euclidean"
                                                                 : "accuracy_cosine"] = c.accuracy;
                cell["diverged"] = cells.front().diverged;
                cell["status"] = cells.front().diverged ? "diverged" : "done";
            } catch (const std::exception& e) {
                cell["status"] = "failed";
                cell["error"] = e.what();
                std::lock_guard<std::mutex> lock(fail_mu);
                any_failed = true;
            }
            cell["wall_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            m.record_cell(id, std::move(cell));
        }
    });
    emit_stage1_csv(m, fs::path(cfg.out_dir) / "stage1_results.csv");
    return any_failed ? exit_cell_failed : exit_ok;
}

json bank_cell(const run_config& cfg, const loaded_data& d, int hidden, double eta,
               bool with_comparison, bool with_evaluation)
{
    cls::bank_options opt;
    opt.seed = cfg.seed;
    opt.hidden_layers = hidden;
    opt.learning_rate = eta;
    opt.activation = cfg.activation;
    opt.cap = cfg.cap;
    opt.all_data_full = cfg.all_data_full;
    opt.train_controls = with_comparison;
    const cls::model_bank bank = cls::build_model_bank(d.train, opt);

    bool any_diverged = bank.all_data.diverged || bank.uniform.diverged;
    for (const auto& n : bank.per_label)
        any_diverged = any_diverged || n.diverged;

    json cell;
    cell["diverged"] = any_diverged;
    if (with_comparison) {
        const cls::norm_comparison_table table = cls::norm_comparison(bank, d.test);
        json rows = json::array();
        for (int probe = 0; probe < mnist::num_labels; ++probe)
            for (const auto& [opponent, counts] : table.per_probe[probe]) {
                json r;
                r["probe_label"] = probe;
                r["opponent"] = opponent;
                r["wins"] = counts.wins;
                r["losses"] = counts.losses;
                r["ties"] = counts.ties;
                rows.push_back(std::move(r));
            }
        cell["comparisons"] = std::move(rows);
    }
    if (with_evaluation) {
        const cls::evaluation_result r = cls::evaluate(bank, d.test);
        cell["accuracy"] = r.overall_accuracy;
        cell["per_label"] = r.per_label_accuracy;
        cell["diverged_models"] = r.diverged_models;
        cell["degenerate_inputs"] = r.degenerate_inputs;
    }
    if (cfg.save_models) {
        const fs::path dir = fs::path(cfg.out_dir) / "models";
        fs::create_directories(dir);
        const std::string tag = "H" + std::to_string(hidden) + "_eta" + format_eta(eta);
        for (int label = 0; label < mnist::num_labels; ++label)
            net::save_model(bank.per_label[label],
                            (dir / ("net" + std::to_string(label) + "_" + tag + ".hebn")).string());
        net::save_model(bank.all_data, (dir / ("all_data_" + tag + ".hebn")).string());
        net::save_model(bank.uniform, (dir / ("uniform_" + tag + ".hebn")).string());
        net::save_model(bank.untrained, (dir / ("untrained_" + tag + ".hebn")).string());
    }
    return cell;
}

int run_bank_stage(const run_config& cfg, const loaded_data& d, manifest& m,
                   const std::string& signature, const char* prefix)
{
    const bool is_stage2 = std::string(prefix) == "stage2";
    struct cell_task {
        int hidden;
        double eta;
    };
    std::vector<cell_task> tasks;
    for (int h : cfg.hidden_list)
        for (double e : cfg.eta_list)
            if (!m.cell_done(cell_id(prefix, h, e), signature))
                tasks.push_back({ h, e });

    bool any_failed = false;
    std::mutex fail_mu;
    parallel_for(tasks.size(), cfg.workers, [&](size_t begin, size_t end) {
        for (size_t t = begin; t < end; ++t) {
            const auto [hidden, eta] = tasks[t];
            const std::string id = cell_id(prefix, hidden, eta);
            json cell;
            cell["hidden_layers"] = hidden;
            cell["learning_rate"] = format_eta(eta);
            cell["config_signature"] = signature;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                json result = bank_cell(cfg, d, hidden, eta, is_stage2, !is_stage2);
                for (auto& [k, v] : result.items())
                    cell[k] = std::move(v);
                cell["status"] = cell["diverged"].get<bool>() ? "diverged" : "done";
            } catch (const std::exception& e) {
                cell["status"] = "failed";
                cell["error"] = e.what();
                std::lock_guard<std::mutex> lock(fail_mu);
                any_failed = true;
            }
            cell["wall_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            m.record_cell(id, std::move(cell));
        }
    });
    if (is_stage2)
        emit_stage2_csv(m, fs::path(cfg.out_dir) / "stage2_results.csv");
    else
        emit_stage3_csvs(m, prefix, cfg.out_dir);
    return any_failed ? exit_cell_failed : exit_ok;
}

} // namespace

std::string format_eta(double eta)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eta);
    return buf;
}

std::string format_accuracy(double a)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", a);
    return buf;
}

void apply_preset(run_config& cfg, const std::string& preset)
{
    if (preset == "desk") {
        cfg.hidden_list = { 2, 3, 14 };
        cfg.eta_list = { 1e-2, 1e-5, 1e-7 };
    } else if (preset == "full") {
        cfg.hidden_list.clear();
        for (int h = 2; h <= 15; ++h)
            cfg.hidden_list.push_back(h);
        cfg.eta_list.clear();
        for (int p = 1; p <= 9; ++p)
            cfg.eta_list.push_back(std::pow(10.0, -p));
    } else {
        throw std::invalid_argument("unknown preset: " + preset);
    }
}

namespace {

std::vector<std::string> split_list(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

std::vector<int> parse_hidden_list(const std::string& s)
{
    std::vector<int> out;
    for (const std::string& tok : split_list(s, ',')) {
        const size_t dots = tok.find("..");
        if (dots != std::string::npos) {
            const int lo = std::stoi(tok.substr(0, dots));
            const int hi = std::stoi(tok.substr(dots + 2));
            for (int h = lo; h <= hi; ++h)
                out.push_back(h);
        } else {
            out.push_back(std::stoi(tok));
        }
    }
    return out;
}

std::vector<double> parse_eta_list(const std::string& s)
{
    std::vector<double> out;
    for (const std::string& tok : split_list(s, ',')) {
        const size_t dots = tok.find("..");
        if (dots != std::string::npos) {
            // decade range, e.g. 1e-1..1e-9
            double lo = std::stod(tok.substr(0, dots));
            const double hi = std::stod(tok.substr(dots + 2));
            for (double e = lo; e >= hi * 0.999; e /= 10.0)
                out.push_back(e);
        } else {
            out.push_back(std::stod(tok));
        }
    }
    return out;
}

} // namespace

void apply_grid_selector(run_config& cfg, const std::string& selector)
{
    // tokens of the form key=values; bare tokens continue the previous key
    std::string current_key;
    std::string current_val;
    auto flush = [&]() {
        if (current_key.empty())
            return;
        if (current_key == "H" || current_key == "hidden")
            cfg.hidden_list = parse_hidden_list(current_val);
        else if (current_key == "eta")
            cfg.eta_list = parse_eta_list(current_val);
        else
            throw std::invalid_argument("grid selector: unknown key " + current_key);
        current_key.clear();
        current_val.clear();
    };
    for (const std::string& tok : split_list(selector, ',')) {
        const size_t eq = tok.find('=');
        if (eq != std::string::npos) {
            flush();
            current_key = tok.substr(0, eq);
            current_val = tok.substr(eq + 1);
        } else {
            if (current_key.empty())
                throw std::invalid_argument("grid selector: value before key in " + selector);
            current_val += "," + tok;
        }
    }
    flush();
}

void load_config_file(run_config& cfg, const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::string trimmed;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c)))
                trimmed += c;
        if (trimmed.empty())
            continue;
        const size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trimmed.substr(0, eq);
        const std::string value = trimmed.substr(eq + 1);
        if (key == "data_dir")
            cfg.data_dir = value;
        else if (key == "out")
            cfg.out_dir = value;
        else if (key == "hidden")
            cfg.hidden_list = parse_hidden_list(value);
        else if (key == "eta")
            cfg.eta_list = parse_eta_list(value);
        else if (key == "seed")
            cfg.seed = std::stoull(value);
        else if (key == "cap")
            cfg.cap = std::stoull(value);
        else if (key == "normalize")
            cfg.normalize = value == "true" || value == "1";
        else if (key == "activation")
            cfg.activation = value == "step" ? net::activation_kind::step : net::activation_kind::relu;
        else if (key == "workers")
            cfg.workers = std::stoull(value);
        else if (key == "test_cap")
            cfg.test_cap = std::stoull(value);
        else if (key == "all_data_full")
            cfg.all_data_full = value == "true" || value == "1";
        else if (key == "save_models")
            cfg.save_models = value == "true" || value == "1";
        else if (key == "preset")
            apply_preset(cfg, value);
        else
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown key " + key);
    }
}

int run_stage(const run_config& cfg)
{
    if (cfg.stage == stage_kind::prepare_check) {
        try {
            return run_prepare_check(cfg);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return exit_missing_data;
        }
    }

    loaded_data data;
    try {
        data = load_data(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_missing_data;
    }

    fs::create_directories(cfg.out_dir);
    manifest m(fs::path(cfg.out_dir) / "manifest.json");
    m.set_header(config_snapshot(cfg), data.checksums);
    const std::string signature = cell_config_signature(cfg, data.checksums);

    switch (cfg.stage) {
    case stage_kind::stage1:
        return run_stage1(cfg, data, m, signature);
    case stage_kind::stage2:
        return run_bank_stage(cfg, data, m, signature, "stage2");
    case stage_kind::stage3:
        return run_bank_stage(cfg, data, m, signature, "stage3");
    case stage_kind::sweep:
        return run_bank_stage(cfg, data, m, signature, "stage3");
    default:
        return exit_config_error;
    }
}

int inspect_model(const std::string& path)
{
    try {
        const net::network n = net::load_model(path);
        std::printf("HEBN v1 model: width=%d hidden_layers=%d eta=%s seed=%llu activation=%s\n",
                    n.config.width, n.config.hidden_layers,
                    format_eta(n.config.learning_rate).c_str(),
                    static_cast<unsigned long long>(n.config.seed),
                    n.config.activation == net::activation_kind::relu ? "relu" : "step");
        const std::vector<double> sums = net::weight_sums(n);
        for (size_t i = 0; i < sums.size(); ++i)
            std::printf("layer %zu: entry sum %.9g\n", i, sums[i]);
        const std::string manifest_path = path + ".manifest.txt";
        if (fs::exists(manifest_path)) {
            std::ifstream f(manifest_path);
            std::printf("--- manifest ---\n%s",
                        std::string((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>()).c_str());
        }
        return exit_ok;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_missing_results;
    }
}

} // namespace hebb::harness
