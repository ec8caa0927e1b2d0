// Command-line front end for the campaign suites.
//
//   asyncbo run      --policies pessimistic,greedy --buffers 0,4,9 --dims 5 ...
//   asyncbo figure2  [flags]      preset grids
//   asyncbo plot     curves.csv --out charts/
//
// Exit codes: 0 success, 1 configuration error, 2 campaign failure, 3 I/O failure.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <asyncbo/config.hpp>
#include <asyncbo/csv.hpp>
#include <asyncbo/suite.hpp>
#include <asyncbo/svg.hpp>

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kRuntimeError = 2, kIoError = 3 };

struct SuiteFlags {
    std::string config_path;
    std::vector<std::string> policies;
    std::vector<int> buffers;
    std::vector<int> dims;
    std::vector<double> noise;
    std::optional<int> replicates;
    std::optional<int> budget;
    std::optional<int> init_count;
    std::optional<std::uint64_t> seed;
    std::optional<int> candidates_per_dim;
    std::optional<int> workers;
    std::string out;
    bool force = false;
    bool save_traces = false;
    bool linear_y = false;
    bool quiet = false;
};

void add_suite_flags(CLI::App* cmd, SuiteFlags& f)
{
    cmd->add_option("--config", f.config_path, "JSON file with suite settings (flags override it)");
    cmd->add_option("--policies", f.policies, "serial, greedy, pessimistic, asc-pessimism, desc-pessimism, lcb-liar")
        ->delimiter(',');
    cmd->add_option("--buffers", f.buffers, "buffer lengths; 0 adds the serial baseline")->delimiter(',');
    cmd->add_option("--dims", f.dims, "input dimensions")->delimiter(',');
    cmd->add_option("--noise", f.noise, "observation noise standard deviations")->delimiter(',');
    cmd->add_option("--replicates", f.replicates, "campaigns per cell (>= 2)");
    cmd->add_option("--budget", f.budget, "completed experiments per campaign");
    cmd->add_option("--init-count", f.init_count, "random initial experiments per campaign");
    cmd->add_option("--seed", f.seed, "base seed; replicate r uses seed + r");
    cmd->add_option("--candidates-per-dim", f.candidates_per_dim, "UCB candidates per input dimension");
    cmd->add_option("--workers", f.workers, "worker threads");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_flag("--force", f.force, "recompute cells that already have complete output");
    cmd->add_flag("--save-traces", f.save_traces, "also write per-replicate traces");
    cmd->add_flag("--linear-y", f.linear_y, "linear instead of log loss axis in charts");
    cmd->add_flag("-q,--quiet", f.quiet, "no progress output");
}

asyncbo::SuiteConfig resolve(asyncbo::SuiteConfig cfg, const SuiteFlags& f)
{
    using namespace asyncbo;
    if (!f.config_path.empty()) {
        const std::string text = read_text_file(f.config_path);
        cfg = suite_config_from_json(text, cfg);
    }
    if (!f.policies.empty())
        cfg.policies = parse_policy_list(f.policies);
    if (!f.buffers.empty())
        cfg.buffers = f.buffers;
    if (!f.dims.empty())
        cfg.dims = f.dims;
    if (!f.noise.empty())
        cfg.noise = f.noise;
    if (f.replicates)
        cfg.replicates = *f.replicates;
    if (f.budget)
        cfg.budget = *f.budget;
    if (f.init_count)
        cfg.init_count = *f.init_count;
    if (f.seed)
        cfg.base_seed = *f.seed;
    if (f.candidates_per_dim)
        cfg.candidates_per_dim = *f.candidates_per_dim;
    if (f.workers)
        cfg.workers = *f.workers;
    if (!f.out.empty())
        cfg.output_dir = f.out;
    else if (f.config_path.empty() || cfg.output_dir == "results")
        cfg.output_dir = std::filesystem::path("results") / cfg.name;
    cfg.force = cfg.force || f.force;
    cfg.save_traces = cfg.save_traces || f.save_traces;
    if (f.linear_y)
        cfg.log_y = false;
    cfg.validate();
    return cfg;
}

int run_suite_command(const asyncbo::SuiteConfig& cfg, bool quiet)
{
    using namespace asyncbo;
    SuiteHooks hooks;
    if (!quiet) {
        std::cerr << cfg.name << ": " << expand_grid(cfg).size() << " cells x " << cfg.replicates
                  << " replicates -> " << cfg.output_dir.string() << "\n";
        hooks.on_campaign = [](const CellKey& key, int r, std::size_t done, std::size_t total) {
            std::cerr << "[" << done << "/" << total << "] " << cell_label(key) << " D=" << key.dimension
                      << " noise=" << format_double(key.noise_std) << " replicate " << r << "\n";
        };
    }
    const SuiteResult res = run_suite(cfg, hooks);
    for (const auto& c : res.cells)
        if (c.state == CellState::Failed)
            std::cerr << "cell " << cell_file_stem(c.key) << " failed: " << c.message << "\n";
    if (!quiet)
        std::cerr << "wrote " << (cfg.output_dir / (cfg.name + ".csv")).string() << "\n";
    return res.ok() ? kOk : kRuntimeError;
}

int plot_command(const std::string& csv_path, const std::string& out_dir, const std::string& title, bool linear_y)
{
    using namespace asyncbo;
    const auto curves = read_csv(csv_path);
    if (curves.empty())
        throw std::invalid_argument("no curves in " + csv_path);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError(out_dir, "cannot create directory: " + ec.message());
    std::map<std::pair<int, double>, std::vector<AggregateCurves>> groups;
    for (const auto& c : curves)
        groups[{c.key.dimension, c.key.noise_std}].push_back(c);
    const std::string stem = std::filesystem::path(csv_path).stem().string();
    for (const auto& [dn, group] : groups) {
        SvgStyle style;
        style.log_y = !linear_y;
        style.title = (title.empty() ? stem : title) + ": D = " + std::to_string(dn.first)
                      + ", noise = " + format_double(dn.second);
        const auto path = std::filesystem::path(out_dir)
                          / (stem + "_d" + std::to_string(dn.first) + "_n" + format_double(dn.second) + ".svg");
        render_svg(group, style, path);
        std::cerr << "wrote " << path.string() << "\n";
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Asynchronous Bayesian optimization campaigns on the TriPeak benchmark"};
    app.require_subcommand(1);

    SuiteFlags run_flags;
    auto* run = app.add_subcommand("run", "run a custom suite");
    add_suite_flags(run, run_flags);

    std::map<int, SuiteFlags> figure_flags;
    std::map<int, CLI::App*> figures;
    for (int fig : {2, 3, 4}) {
        figures[fig] = app.add_subcommand("figure" + std::to_string(fig),
                                          "run the preset grid " + std::to_string(fig));
        add_suite_flags(figures[fig], figure_flags[fig]);
    }

    std::string plot_in, plot_out = ".", plot_title;
    bool plot_linear = false;
    auto* plot = app.add_subcommand("plot", "render SVG charts from a curves CSV");
    plot->add_option("csv", plot_in, "curves CSV written by run/figureN")->required();
    plot->add_option("--out", plot_out, "output directory");
    plot->add_option("--title", plot_title, "chart title prefix");
    plot->add_flag("--linear-y", plot_linear, "linear loss axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) {
            asyncbo::SuiteConfig base;
            return run_suite_command(resolve(base, run_flags), run_flags.quiet);
        }
        for (auto& [fig, cmd] : figures)
            if (*cmd)
                return run_suite_command(resolve(asyncbo::figure_preset(fig), figure_flags[fig]),
                                         figure_flags[fig].quiet);
        if (*plot)
            return plot_command(plot_in, plot_out, plot_title, plot_linear);
    } catch (const asyncbo::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kOk;
}
