// Command-line front end for the Hebbian MNIST experiments.

#include "hebb/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>

namespace {

using hebb::harness::run_config;
using hebb::harness::stage_kind;

struct cli_state {
    run_config cfg;
    std::string config_file;
    std::string hidden_spec;
    std::string eta_spec;
    std::string activation = "relu";
    std::string preset;
    std::string grid;
    size_t test_cap = 0;
};

void add_run_options(CLI::App* cmd, cli_state& st)
{
    cmd->add_option("--config", st.config_file, "key=value config file");
    cmd->add_option("--data-dir", st.cfg.data_dir, "directory with the MNIST IDX files");
    cmd->add_option("--out", st.cfg.out_dir, "output directory");
    cmd->add_option("--hidden", st.hidden_spec, "hidden layer counts, e.g. 3 or 2..15 or 2,3,14");
    cmd->add_option("--eta", st.eta_spec, "learning rates, e.g. 1e-7 or 1e-1..1e-9");
    cmd->add_option("--seed", st.cfg.seed, "global seed");
    cmd->add_option("--cap", st.cfg.cap, "per-label training cap");
    cmd->add_option("--activation", st.activation, "relu or step")
        ->check(CLI::IsMember({ "relu", "step" }));
    cmd->add_option("--workers", st.cfg.workers, "worker thread count");
    cmd->add_option("--preset", st.preset, "grid preset: desk or full")
        ->check(CLI::IsMember({ "desk", "full" }));
    cmd->add_option("--grid", st.grid, "grid subset, e.g. \"H=2..3,eta=1e-7\"");
    cmd->add_option("--test-cap", st.test_cap, "per-label test truncation (smoke runs)");
    cmd->add_flag("--save-models", st.cfg.save_models, "serialize trained networks");
    cmd->add_flag("!--no-normalize", st.cfg.normalize, "skip unit-norm normalization");
    cmd->add_flag("!--no-all-data-full", st.cfg.all_data_full,
                  "all-data control trains on cap samples total instead of the full capped set");
}

int finish_and_run(cli_state& st, stage_kind stage)
{
    try {
        if (!st.config_file.empty())
            hebb::harness::load_config_file(st.cfg, st.config_file);
        if (!st.hidden_spec.empty() || !st.eta_spec.empty()) {
            std::string sel;
            if (!st.hidden_spec.empty())
                sel += "H=" + st.hidden_spec;
            if (!st.eta_spec.empty())
                sel += (sel.empty() ? "" : ",") + std::string("eta=") + st.eta_spec;
            hebb::harness::apply_grid_selector(st.cfg, sel);
        }
        if (!st.preset.empty())
            hebb::harness::apply_preset(st.cfg, st.preset);
        if (!st.grid.empty())
            hebb::harness::apply_grid_selector(st.cfg, st.grid);
        st.cfg.activation = st.activation == "step" ? hebb::net::activation_kind::step
                                                    : hebb::net::activation_kind::relu;
        if (st.test_cap > 0)
            st.cfg.test_cap = st.test_cap;
        if (st.cfg.data_dir.empty())
            if (const char* env = std::getenv("HEBBNET_DATA_DIR"))
                st.cfg.data_dir = env;
        if (st.cfg.data_dir.empty()) {
            std::fprintf(stderr, "error: no data directory (use --data-dir or HEBBNET_DATA_DIR)\n");
            return hebb::harness::exit_missing_data;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return hebb::harness::exit_config_error;
    }
    st.cfg.stage = stage;
    return hebb::harness::run_stage(st.cfg);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{ "Hebbian-trained MNIST networks: norm-based classification experiments" };
    app.require_subcommand(1);

    cli_state st;
    int rc = 0;

    auto* prep = app.add_subcommand("prepare-check", "parse and summarize the data files");
    add_run_options(prep, st);
    prep->add_option("--dump-prepared", st.cfg.dump_prepared,
                     "write the prepared train vectors as CSV (debugging)");
    prep->callback([&] { rc = finish_and_run(st, stage_kind::prepare_check); });

    auto* s1 = app.add_subcommand("stage1", "average-vector classification experiment");
    add_run_options(s1, st);
    s1->callback([&] { rc = finish_and_run(st, stage_kind::stage1); });

    auto* s2 = app.add_subcommand("stage2", "per-label norm comparison experiment");
    add_run_options(s2, st);
    s2->callback([&] { rc = finish_and_run(st, stage_kind::stage2); });

    auto* s3 = app.add_subcommand("stage3", "norm-argmax classifier evaluation");
    add_run_options(s3, st);
    s3->callback([&] { rc = finish_and_run(st, stage_kind::stage3); });

    auto* sw = app.add_subcommand("sweep", "stage-3 grid sweep over depth and learning rate");
    add_run_options(sw, st);
    sw->callback([&] {
        if (st.preset.empty() && st.hidden_spec.empty() && st.eta_spec.empty() && st.grid.empty())
            st.preset = "full";
        rc = finish_and_run(st, stage_kind::sweep);
    });

    std::string figure_id, results_dir = "results";
    auto* fig = app.add_subcommand("figure", "emit figure CSV and SVG from run results");
    fig->add_option("figure", figure_id, "figure id: 1a, 1b, 2, 3 or 4")->required();
    fig->add_option("--results", results_dir, "results directory");
    fig->callback([&] { rc = hebb::harness::emit_figure_data(results_dir, figure_id); });

    std::string model_path;
    auto* ins = app.add_subcommand("inspect-model", "print a serialized model's header and sums");
    ins->add_option("model", model_path, "path to a .hebn file")->required();
    ins->callback([&] { rc = hebb::harness::inspect_model(model_path); });

    CLI11_PARSE(app, argc, argv);
    return rc;
}
