#pragma once

// Experiment harness: run configuration files, multi-seed orchestration,
// trailing-window smoothing, summary tables, and CSV/SVG output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qoc/agent.hpp"
#include "qoc/envs.hpp"
#include "qoc/trainer.hpp"

namespace qoc::expkit {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    envs::EnvId env = envs::EnvId::CartPole;
    std::string variant = "classical";  // a VariantSpec name, or "random"
    agent::NetOptions net;
    trainer::TrainConfig train;
    std::vector<std::uint64_t> seeds{0};
    std::filesystem::path out_dir = "runs";
    int smoothing_window = 2000;
    int curve_stride = 100;
    long checkpoint_interval = 0;  // 0: final checkpoint only

    bool is_random() const { return variant == "random"; }
    /// Display name such as "hybrid_f (no CNOT)" or "classical (16 neurons)".
    std::string label() const;
    void validate() const;
};

/// Key/value schema, one "key = default  # description" line per setting.
std::string config_schema();
std::string to_config_text(const RunConfig& config);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

struct EpisodeRecord {
    long end_step = 0;
    double ret = 0.0;
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<trainer::StepMetrics> metrics;
    std::vector<EpisodeRecord> episodes() const;
    std::vector<long> option_histogram(int n_options) const;
};

std::string metrics_csv(std::span<const trainer::StepMetrics> metrics);
std::vector<trainer::StepMetrics> parse_metrics_csv(std::string_view text);

/// Runs one seed in memory. Writes nothing.
SeedRun run_seed(const RunConfig& config, std::uint64_t seed);

struct CurvePoint {
    long step = 0;
    double mean = 0.0;
    double sd = 0.0;
};

struct AggregateCurve {
    std::string label;
    std::vector<CurvePoint> points;
};

/// Mean of returns of episodes ending in (step - window, step]; nullopt when
/// no episode ended in that window.
std::optional<double> smooth_at(std::span<const EpisodeRecord> episodes, long step, long window);

/// smooth_at evaluated at every requested step.
std::vector<std::optional<double>> smooth_trailing(std::span<const EpisodeRecord> episodes,
                                                   std::span<const long> steps, long window);

struct Stats {
    double mean = 0.0;
    double sd = 0.0;  // population standard deviation
    std::size_t n = 0;
};
Stats mean_sd(std::span<const double> values);

/// Seed-mean and SD of the smoothed return at steps stride, 2*stride, ...,
/// total_steps. A point exists only where every seed has a smoothed value.
AggregateCurve aggregate(std::string label, std::span<const std::vector<EpisodeRecord>> per_seed, long total_steps,
                         long window, long stride);

struct ExperimentResult {
    RunConfig config;
    std::vector<SeedRun> runs;
    AggregateCurve curve;
};

/// Runs every seed (in parallel up to the QOC_WORKERS limit) and writes
///   <out>/resolved.config, <out>/aggregate.csv, <out>/summary.txt,
///   <out>/seed_<s>/metrics.csv and <out>/seed_<s>/checkpoint*.txt.
ExperimentResult run_experiment(const RunConfig& config, bool write_artifacts = true);

/// A finished experiment loaded back from its directory.
struct LoadedExperiment {
    RunConfig config;
    std::filesystem::path dir;
    std::vector<std::vector<EpisodeRecord>> episodes;  // per seed
};
/// Every directory at or below `root` holding a resolved.config, sorted by path.
std::vector<LoadedExperiment> load_experiments(const std::filesystem::path& root);

struct SummaryRow {
    std::string label;
    envs::EnvId env = envs::EnvId::CartPole;
    double mean = 0.0;
    double sd = 0.0;
    double relative = 1.0;
};

/// Pooled episodic-return statistics per experiment, relative to the
/// classical baseline of the same environment. Throws ConfigError when an
/// environment has no baseline among `experiments`.
std::vector<SummaryRow> summarize(std::span<const LoadedExperiment> experiments);
std::string format_summary(std::span<const SummaryRow> rows);

std::string curve_csv(const AggregateCurve& curve);
AggregateCurve parse_curve_csv(std::string_view text, std::string label = {});
/// Self-contained SVG: one mean polyline and one +-SD band per curve.
std::string render_svg(std::span<const AggregateCurve> curves, std::string_view title);

/// Built-in experiment matrices: "main" (8 hybrids + classical + random),
/// "scaling" (classical FE widths 16/24/32), "options" (3 and 4 options for
/// classical and hybrid_p), "ablation" (hybrid_f depth +-2, fixed lambda,
/// no CNOT). Each entry gets its own subdirectory of base.out_dir.
std::vector<RunConfig> experiment_suite(std::string_view name, const RunConfig& base);

/// Finite-difference and parameter-shift checks of every gradient path.
/// Prints one line per check; returns true when all pass.
bool run_gradcheck(std::ostream& out, std::uint64_t seed = 7);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace qoc::expkit
