#ifndef HEBB_HARNESS_HPP
#define HEBB_HARNESS_HPP

#include "hebb/classifiers.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hebb::harness {

constexpr const char* artifact_version = "1.0.0";

// exit codes shared by the CLI
constexpr int exit_ok = 0;
constexpr int exit_cell_failed = 1;
constexpr int exit_missing_data = 2;
constexpr int exit_config_error = 3;
constexpr int exit_missing_results = 4;

enum class stage_kind { prepare_check, stage1, stage2, stage3, sweep };

struct run_config {
    std::string data_dir;
    std::string out_dir = "results";
    stage_kind stage = stage_kind::stage3;
    std::vector<int> hidden_list = {3};
    std::vector<double> eta_list = {1e-7};
    uint64_t seed = 42;
    net::activation_kind activation = net::activation_kind::relu;
    size_t cap = 5420;
    bool normalize = true;
    size_t workers = 1;
    size_t test_cap = SIZE_MAX;     // per-label test truncation for smoke runs
    bool all_data_full = true;
    bool save_models = false;
    std::string dump_prepared; // prepare-check: write prepared train vectors here
};

// grid lists for the named presets (stage-3 sweep)
void apply_preset(run_config& cfg, const std::string& preset);

// "H=2..3,eta=1e-7" style subset selector; replaces the config lists
void apply_grid_selector(run_config& cfg, const std::string& selector);

// key=value config file; unknown keys are an error
void load_config_file(run_config& cfg, const std::string& path);

int run_stage(const run_config& cfg);

// figure ids: 1a, 1b, 2, 3, 4
int emit_figure_data(const std::string& results_dir, const std::string& figure);

int inspect_model(const std::string& path);

// helpers shared with tests
std::string format_eta(double eta);
std::string format_accuracy(double a);

} // namespace hebb::harness

#endif
