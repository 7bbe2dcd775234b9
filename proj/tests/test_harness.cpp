#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hebb/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

using namespace hebb;
using namespace hebb::harness;
namespace fs = std::filesystem;

namespace {

void write_bytes(const fs::path& path, const std::vector<uint8_t>& bytes)
{
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

// small synthetic MNIST-shaped dataset with a label-dependent pixel pattern
void write_synthetic_dataset(const fs::path& dir, int train_per_label, int test_per_label)
{
    fs::create_directories(dir);
    auto build = [](int per_label, uint8_t salt) {
        mnist::raw_image_set images;
        mnist::raw_label_set labels;
        for (int i = 0; i < per_label; ++i) {
            for (uint8_t label = 0; label < 10; ++label) {
                std::vector<uint8_t> img(mnist::image_dim, 0);
                for (int k = 0; k < mnist::image_dim; ++k)
                    if (k % 10 == label)
                        img[k] = uint8_t(120 + ((i * 37 + k + salt) % 100));
                img[(i + label) % mnist::image_dim] = 255; // per-sample variation
                images.pixels.insert(images.pixels.end(), img.begin(), img.end());
                ++images.count;
                labels.labels.push_back(label);
                ++labels.count;
            }
        }
        return std::pair{ images, labels };
    };
    const auto [train_images, train_labels] = build(train_per_label, 0);
    const auto [test_images, test_labels] = build(test_per_label, 7);
    write_bytes(dir / "train-images-idx3-ubyte", mnist::serialize_idx_images(train_images));
    write_bytes(dir / "train-labels-idx1-ubyte", mnist::serialize_idx_labels(train_labels));
    write_bytes(dir / "t10k-images-idx3-ubyte", mnist::serialize_idx_images(test_images));
    write_bytes(dir / "t10k-labels-idx1-ubyte", mnist::serialize_idx_labels(test_labels));
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

run_config synthetic_config(const fs::path& data, const fs::path& out)
{
    run_config cfg;
    cfg.data_dir = data.string();
    cfg.out_dir = out.string();
    cfg.hidden_list = { 2 };
    cfg.eta_list = { 1e-5 };
    cfg.seed = 11;
    cfg.cap = 20;
    return cfg;
}

} // namespace

TEST_CASE("format helpers")
{
    CHECK(format_eta(1e-7) == "1e-07");
    CHECK(format_eta(0.0) == "0");
    CHECK(format_eta(0.1) == "0.1");
    CHECK(format_accuracy(0.75) == "0.750000");
}

TEST_CASE("grid selector")
{
    run_config cfg;
    apply_grid_selector(cfg, "H=2..3,eta=1e-7");
    CHECK(cfg.hidden_list == std::vector<int>{ 2, 3 });
    REQUIRE(cfg.eta_list.size() == 1);
    CHECK(cfg.eta_list[0] == doctest::Approx(1e-7));

    apply_grid_selector(cfg, "H=2,5,14");
    CHECK(cfg.hidden_list == std::vector<int>{ 2, 5, 14 });

    apply_grid_selector(cfg, "eta=1e-1..1e-3");
    REQUIRE(cfg.eta_list.size() == 3);
    CHECK(cfg.eta_list[2] == doctest::Approx(1e-3));

    CHECK_THROWS_AS(apply_grid_selector(cfg, "bogus=1"), std::invalid_argument);
}

TEST_CASE("presets")
{
    run_config cfg;
    apply_preset(cfg, "desk");
    CHECK(cfg.hidden_list == std::vector<int>{ 2, 3, 14 });
    CHECK(cfg.eta_list.size() == 3);

    apply_preset(cfg, "full");
    CHECK(cfg.hidden_list.size() == 14);
    CHECK(cfg.hidden_list.front() == 2);
    CHECK(cfg.hidden_list.back() == 15);
    CHECK(cfg.eta_list.size() == 9);
    CHECK(cfg.eta_list.front() == doctest::Approx(1e-1));
    CHECK(cfg.eta_list.back() == doctest::Approx(1e-9));

    CHECK_THROWS_AS(apply_preset(cfg, "nope"), std::invalid_argument);
}

TEST_CASE("config file parsing")
{
    const fs::path dir = fs::temp_directory_path() / "hebb_cfg_test";
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "run.cfg");
        f << "# comment\n"
          << "seed = 99\n"
          << "hidden = 2..4\n"
          << "eta = 1e-6,1e-7\n"
          << "cap = 100\n"
          << "activation = step\n";
    }
    run_config cfg;
    load_config_file(cfg, (dir / "run.cfg").string());
    CHECK(cfg.seed == 99);
    CHECK(cfg.hidden_list == std::vector<int>{ 2, 3, 4 });
    CHECK(cfg.eta_list.size() == 2);
    CHECK(cfg.cap == 100);
    CHECK(cfg.activation == net::activation_kind::step);

    {
        std::ofstream f(dir / "bad.cfg");
        f << "wibble = 3\n";
    }
    run_config cfg2;
    CHECK_THROWS_AS(load_config_file(cfg2, (dir / "bad.cfg").string()), std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("missing data directory exits with code 2")
{
    run_config cfg;
    cfg.data_dir = "/nonexistent/nowhere";
    cfg.out_dir = (fs::temp_directory_path() / "hebb_missing_out").string();
    CHECK(run_stage(cfg) == exit_missing_data);
}

TEST_CASE("stage3 end-to-end on synthetic data")
{
    const fs::path base = fs::temp_directory_path() / "hebb_harness_s3";
    fs::remove_all(base);
    write_synthetic_dataset(base / "data", 30, 6);

    run_config cfg = synthetic_config(base / "data", base / "out");
    REQUIRE(run_stage(cfg) == exit_ok);

    const fs::path results = base / "out" / "stage3_results.csv";
    REQUIRE(fs::exists(results));
    const std::string csv = slurp(results);
    CHECK(csv.rfind("hidden_layers,learning_rate,accuracy,diverged\n", 0) == 0);
    CHECK(csv.find("2,1e-05,") != std::string::npos);
    REQUIRE(fs::exists(base / "out" / "stage3_per_label.csv"));
    REQUIRE(fs::exists(base / "out" / "manifest.json"));

    SUBCASE("re-run is idempotent and byte-identical")
    {
        const std::string per_label_before = slurp(base / "out" / "stage3_per_label.csv");
        REQUIRE(run_stage(cfg) == exit_ok);
        CHECK(slurp(results) == csv);
        CHECK(slurp(base / "out" / "stage3_per_label.csv") == per_label_before);
    }
    SUBCASE("worker count does not change emitted numbers")
    {
        run_config cfg2 = synthetic_config(base / "data", base / "out2");
        cfg2.hidden_list = { 2, 3 };
        cfg2.workers = 2;
        run_config cfg1 = cfg2;
        cfg1.out_dir = (base / "out1").string();
        cfg1.workers = 1;
        REQUIRE(run_stage(cfg1) == exit_ok);
        REQUIRE(run_stage(cfg2) == exit_ok);
        CHECK(slurp(base / "out1" / "stage3_results.csv") ==
              slurp(base / "out2" / "stage3_results.csv"));
        CHECK(slurp(base / "out1" / "stage3_per_label.csv") ==
              slurp(base / "out2" / "stage3_per_label.csv"));
    }
    SUBCASE("figure emission from stage3 results")
    {
        CHECK(emit_figure_data((base / "out").string(), "3") == exit_ok);
        CHECK(fs::exists(base / "out" / "figure3.csv"));
        CHECK(fs::exists(base / "out" / "figure3.svg"));
        CHECK(emit_figure_data((base / "out").string(), "4") == exit_ok);
        CHECK(fs::exists(base / "out" / "figure4.csv"));
        // stage1 figures need stage1 cells
        CHECK(emit_figure_data((base / "out").string(), "1a") == exit_missing_results);
        CHECK(emit_figure_data((base / "out").string(), "bogus") == exit_config_error);
        CHECK(emit_figure_data((base / "nothing").string(), "3") == exit_missing_results);
    }
    fs::remove_all(base);
}

TEST_CASE("stage1 and stage2 end-to-end on synthetic data")
{
    const fs::path base = fs::temp_directory_path() / "hebb_harness_s12";
    fs::remove_all(base);
    write_synthetic_dataset(base / "data", 8, 4);

    run_config cfg = synthetic_config(base / "data", base / "out");
    cfg.stage = stage_kind::stage1;
    REQUIRE(run_stage(cfg) == exit_ok);
    const std::string s1 = slurp(base / "out" / "stage1_results.csv");
    CHECK(s1.rfind("hidden_layers,learning_rate,metric,accuracy,diverged\n", 0) == 0);
    CHECK(s1.find(",0,euclidean,") != std::string::npos); // eta=0 baseline row present
    CHECK(emit_figure_data((base / "out").string(), "1a") == exit_ok);
    CHECK(emit_figure_data((base / "out").string(), "1b") == exit_ok);
    CHECK(fs::exists(base / "out" / "figure1a.csv"));
    CHECK(fs::exists(base / "out" / "figure1b.svg"));

    cfg.stage = stage_kind::stage2;
    REQUIRE(run_stage(cfg) == exit_ok);
    const std::string s2 = slurp(base / "out" / "stage2_results.csv");
    CHECK(s2.rfind("probe_label,opponent,wins,losses,ties\n", 0) == 0);
    // 10 probes x 12 opponents plus header
    CHECK(std::count(s2.begin(), s2.end(), '\n') == 121);
    CHECK(emit_figure_data((base / "out").string(), "2") == exit_ok);
    CHECK(fs::exists(base / "out" / "figure2.csv"));
    CHECK(fs::exists(base / "out" / "figure2.svg"));
    fs::remove_all(base);
}

TEST_CASE("model save and inspect through the harness")
{
    const fs::path base = fs::temp_directory_path() / "hebb_harness_models";
    fs::remove_all(base);
    write_synthetic_dataset(base / "data", 4, 2);
    run_config cfg = synthetic_config(base / "data", base / "out");
    cfg.cap = 4;
    cfg.save_models = true;
    REQUIRE(run_stage(cfg) == exit_ok);
    const fs::path model = base / "out" / "models" / "net0_H2_eta1e-05.hebn";
    REQUIRE(fs::exists(model));
    CHECK(inspect_model(model.string()) == exit_ok);
    CHECK(inspect_model((base / "nope.hebn").string()) == exit_missing_results);
    fs::remove_all(base);
}
