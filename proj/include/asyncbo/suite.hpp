#ifndef ASYNCBO_SUITE_HPP
#define ASYNCBO_SUITE_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <asyncbo/aggregate.hpp>
#include <asyncbo/campaign.hpp>
#include <asyncbo/csv.hpp>
#include <asyncbo/svg.hpp>

namespace asyncbo {

/// Runs f(0..n-1) on `workers` threads. Each index runs exactly once; the
/// assignment of indices to threads is unspecified.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& f)
{
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                f(i);
        });
}

struct SuiteConfig {
    std::string name = "run";
    /// Asynchronous policies to run at every positive buffer length; serial
    /// runs once per (dimension, noise) when buffers contains 0 or policies
    /// contains Serial.
    std::vector<PolicyKind> policies{PolicyKind::Pessimistic};
    std::vector<int> buffers{0, 4};
    std::vector<int> dims{5};
    std::vector<double> noise{0.0};
    int replicates = 50;
    int budget = 200;
    int init_count = 5;
    std::uint64_t base_seed = 1;
    int candidates_per_dim = 1024;
    int workers = 1;
    std::filesystem::path output_dir = "results";
    bool force = false;
    bool save_traces = false;
    bool log_y = true;

    void validate() const
    {
        if (replicates < 2)
            throw std::invalid_argument("replicates must be >= 2");
        if (budget <= init_count || init_count < 1)
            throw std::invalid_argument("need budget > init_count >= 1");
        if (candidates_per_dim < 1)
            throw std::invalid_argument("candidates-per-dim must be >= 1");
        if (workers < 1)
            throw std::invalid_argument("workers must be >= 1");
        if (policies.empty() || buffers.empty() || dims.empty() || noise.empty())
            throw std::invalid_argument("policies, buffers, dims and noise must be non-empty");
        for (int b : buffers)
            if (b < 0 || b > kMaxBufferLength)
                throw std::invalid_argument("buffer lengths must be in 0..10");
        for (int d : dims)
            if (d < 1 || d > 10)
                throw std::invalid_argument("dimensions must be in 1..10");
        for (double s : noise)
            if (!(s >= 0.0) || !std::isfinite(s))
                throw std::invalid_argument("noise levels must be finite and >= 0");
        if (output_dir.empty())
            throw std::invalid_argument("output directory must be set");
    }

    /// Campaign settings for replicate r of a cell.
    CampaignConfig campaign(const CellKey& key, int replicate) const
    {
        CampaignConfig c;
        c.policy = key.policy;
        c.buffer_length = key.buffer_length;
        c.dimension = key.dimension;
        c.noise_std = key.noise_std;
        c.budget = budget;
        c.init_count = init_count;
        c.seed = base_seed + static_cast<std::uint64_t>(replicate);
        c.acquisition.candidates_per_dim = candidates_per_dim;
        return c;
    }
};

/// Grid cells of a suite, sorted in CSV order.
inline std::vector<CellKey> expand_grid(const SuiteConfig& cfg)
{
    const bool serial = std::count(cfg.buffers.begin(), cfg.buffers.end(), 0) > 0
                        || std::count(cfg.policies.begin(), cfg.policies.end(), PolicyKind::Serial) > 0;
    std::set<CellKey> cells;
    for (int d : cfg.dims)
        for (double s : cfg.noise) {
            if (serial)
                cells.insert({PolicyKind::Serial, 0, d, s});
            for (PolicyKind p : cfg.policies) {
                if (p == PolicyKind::Serial)
                    continue;
                for (int b : cfg.buffers)
                    if (b > 0)
                        cells.insert({p, b, d, s});
            }
        }
    return {cells.begin(), cells.end()};
}

inline std::string cell_file_stem(const CellKey& key)
{
    return std::string(to_string(key.policy)) + "_b" + std::to_string(key.buffer_length) + "_d"
           + std::to_string(key.dimension) + "_n" + format_double(key.noise_std);
}

/// Per-replicate traces as CSV (one row per completed experiment).
inline std::string traces_to_csv(const std::vector<CampaignTrace>& traces)
{
    std::string s = "replicate,experiment,submit_index,x,y_observed,y_true,loss,effective_time\n";
    for (std::size_t r = 0; r < traces.size(); ++r)
        for (std::size_t k = 0; k < traces[r].size(); ++k) {
            const auto& e = traces[r].experiments[k];
            s += std::to_string(r) + "," + std::to_string(k + 1) + "," + std::to_string(e.submit_index) + ",";
            for (Eigen::Index i = 0; i < e.x.size(); ++i) {
                if (i)
                    s += ' ';
                s += format_double(e.x[i]);
            }
            s += "," + format_double(e.y_observed) + "," + format_double(e.y_true) + "," + format_double(e.loss) + ","
                 + format_double(e.effective_time) + "\n";
        }
    return s;
}

enum class CellState { Computed, Reused, Failed };

struct CellStatus {
    CellKey key;
    CellState state = CellState::Computed;
    std::string message;
};

struct SuiteResult {
    std::vector<AggregateCurves> curves;
    std::vector<CellStatus> cells;
    /// Filled only when run_suite is asked to keep them.
    std::map<CellKey, std::vector<CampaignTrace>> traces;

    bool ok() const
    {
        return std::none_of(cells.begin(), cells.end(), [](const CellStatus& c) { return c.state == CellState::Failed; });
    }
};

struct SuiteHooks {
    /// Called after each finished campaign (from worker threads, serialized).
    std::function<void(const CellKey&, int replicate, std::size_t done, std::size_t total)> on_campaign;
    bool keep_traces = false;
};

namespace detail {

/// Settings that determine a cell's curves besides its key; stored next to
/// the cell CSV so a rerun only reuses results computed the same way.
inline std::string cell_fingerprint(const SuiteConfig& cfg)
{
    return "replicates=" + std::to_string(cfg.replicates) + " budget=" + std::to_string(cfg.budget) + " init_count="
           + std::to_string(cfg.init_count) + " base_seed=" + std::to_string(cfg.base_seed)
           + " candidates_per_dim=" + std::to_string(cfg.candidates_per_dim) + "\n";
}

inline bool cell_file_complete(const std::filesystem::path& path, const CellKey& key, const SuiteConfig& cfg,
                               AggregateCurves& out)
{
    auto stamp = path;
    stamp.replace_extension(".stamp");
    if (!std::filesystem::exists(path) || !std::filesystem::exists(stamp))
        return false;
    try {
        if (read_text_file(stamp) != cell_fingerprint(cfg))
            return false;
        auto curves = read_csv(path);
        if (curves.size() != 1 || !(curves[0].key == key) || static_cast<int>(curves[0].size()) != cfg.budget)
            return false;
        out = std::move(curves[0]);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

inline void ensure_writable(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError(dir, "cannot create directory: " + ec.message());
    const auto probe = dir / ".write_probe";
    write_text_file(probe, "");
    std::filesystem::remove(probe, ec);
}

} // namespace detail

inline std::string summary_json(const SuiteConfig& cfg, const SuiteResult& res)
{
    std::string s = "{\n  \"name\": \"" + cfg.name + "\",\n  \"replicates\": " + std::to_string(cfg.replicates)
                    + ",\n  \"budget\": " + std::to_string(cfg.budget) + ",\n  \"cells\": [\n";
    for (std::size_t i = 0; i < res.cells.size(); ++i) {
        const auto& c = res.cells[i];
        const char* state = c.state == CellState::Computed ? "computed" : c.state == CellState::Reused ? "reused" : "failed";
        std::string msg;
        for (char ch : c.message)
            msg += (ch == '"' || ch == '\\') ? std::string("\\") + ch : std::string(1, ch);
        s += "    {\"cell\": \"" + cell_file_stem(c.key) + "\", \"status\": \"" + state + "\"";
        if (!msg.empty())
            s += ", \"message\": \"" + msg + "\"";
        s += i + 1 < res.cells.size() ? "},\n" : "}\n";
    }
    s += "  ]\n}\n";
    return s;
}

/// Runs every cell of the grid, aggregates, and writes into output_dir:
///   cells/<cell>.csv   per-cell curves (reused on rerun unless force; the
///                      .stamp sidecar must match the current settings)
///   traces/<cell>.csv  raw traces (save_traces only)
///   <name>.csv         all curves, long format
///   <name>_d<D>_n<noise>.svg  one chart per (dimension, noise)
///   <name>_summary.json
/// Output bytes depend only on the configuration, not on `workers`.
inline SuiteResult run_suite(const SuiteConfig& cfg, const SuiteHooks& hooks = {})
{
    cfg.validate();
    const auto cells_dir = cfg.output_dir / "cells";
    const auto traces_dir = cfg.output_dir / "traces";
    detail::ensure_writable(cfg.output_dir);
    detail::ensure_writable(cells_dir);
    if (cfg.save_traces)
        detail::ensure_writable(traces_dir);

    const std::vector<CellKey> grid = expand_grid(cfg);
    SuiteResult res;
    std::vector<std::optional<AggregateCurves>> curves(grid.size());
    std::vector<std::size_t> todo;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        AggregateCurves existing;
        const auto path = cells_dir / (cell_file_stem(grid[c]) + ".csv");
        if (!cfg.force && detail::cell_file_complete(path, grid[c], cfg, existing))
            curves[c] = std::move(existing);
        else
            todo.push_back(c);
    }

    const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
    std::vector<std::vector<CampaignTrace>> traces(grid.size());
    std::vector<std::vector<std::string>> errors(grid.size());
    for (std::size_t c : todo) {
        traces[c].resize(reps);
        errors[c].resize(reps);
    }
    std::mutex progress_mutex;
    std::size_t done = 0;
    const std::size_t total = todo.size() * reps;
    parallel_for(total, cfg.workers, [&](std::size_t job) {
        const std::size_t c = todo[job / reps];
        const int r = static_cast<int>(job % reps);
        const CellKey& key = grid[c];
        try {
            traces[c][static_cast<std::size_t>(r)] = run_campaign(cfg.campaign(key, r), TriPeakSpec(key.dimension, key.noise_std));
        } catch (const std::exception& e) {
            errors[c][static_cast<std::size_t>(r)] = e.what();
        }
        if (hooks.on_campaign) {
            std::lock_guard lock(progress_mutex);
            hooks.on_campaign(key, r, ++done, total);
        }
    });

    for (std::size_t c = 0; c < grid.size(); ++c) {
        CellStatus status{grid[c], CellState::Reused, {}};
        if (!curves[c]) {
            status.state = CellState::Computed;
            for (std::size_t r = 0; r < reps; ++r)
                if (!errors[c][r].empty()) {
                    status.state = CellState::Failed;
                    status.message = "replicate " + std::to_string(r) + ": " + errors[c][r];
                    break;
                }
            if (status.state == CellState::Computed) {
                curves[c] = aggregate(traces[c], grid[c]);
                write_csv({*curves[c]}, cells_dir / (cell_file_stem(grid[c]) + ".csv"));
                write_text_file(cells_dir / (cell_file_stem(grid[c]) + ".stamp"), detail::cell_fingerprint(cfg));
                if (cfg.save_traces)
                    write_text_file(traces_dir / (cell_file_stem(grid[c]) + ".csv"), traces_to_csv(traces[c]));
                if (hooks.keep_traces)
                    res.traces[grid[c]] = std::move(traces[c]);
            }
        }
        if (curves[c])
            res.curves.push_back(std::move(*curves[c]));
        res.cells.push_back(std::move(status));
    }

    if (!res.curves.empty()) {
        write_csv(res.curves, cfg.output_dir / (cfg.name + ".csv"));
        std::map<std::pair<int, double>, std::vector<AggregateCurves>> groups;
        for (const auto& c : res.curves)
            groups[{c.key.dimension, c.key.noise_std}].push_back(c);
        for (const auto& [dn, group] : groups) {
            SvgStyle style;
            style.log_y = cfg.log_y;
            style.title = cfg.name + ": D = " + std::to_string(dn.first) + ", noise = " + format_double(dn.second)
                          + ", " + std::to_string(cfg.replicates) + " replicates";
            render_svg(group, style,
                       cfg.output_dir / (cfg.name + "_d" + std::to_string(dn.first) + "_n" + format_double(dn.second) + ".svg"));
        }
    }
    write_text_file(cfg.output_dir / (cfg.name + "_summary.json"), summary_json(cfg, res));
    return res;
}

/// Preset grids 2, 3 and 4 (see the README command table).
inline SuiteConfig figure_preset(int figure)
{
    SuiteConfig cfg;
    switch (figure) {
    case 2:
        cfg.name = "figure2";
        cfg.policies = {PolicyKind::Greedy, PolicyKind::Pessimistic, PolicyKind::AscendingPessimism,
                        PolicyKind::DescendingPessimism, PolicyKind::LCBLiar};
        cfg.buffers = {0, 1, 2, 4, 9};
        cfg.dims = {5};
        cfg.noise = {0.0};
        break;
    case 3:
        cfg.name = "figure3";
        cfg.policies = {PolicyKind::Pessimistic};
        cfg.buffers = {0, 1, 2, 4, 9};
        cfg.dims = {2, 3, 4, 5, 6};
        cfg.noise = {0.0};
        break;
    case 4:
        cfg.name = "figure4";
        cfg.policies = {PolicyKind::Pessimistic};
        cfg.buffers = {0, 4, 9};
        cfg.dims = {2, 3, 4, 5, 6};
        cfg.noise = {0.01, 0.02, 0.05};
        break;
    default: throw std::invalid_argument("no preset for figure " + std::to_string(figure));
    }
    return cfg;
}

} // namespace asyncbo

#endif
