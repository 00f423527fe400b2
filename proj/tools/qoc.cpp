#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qoc/expkit.hpp"

namespace {

using namespace qoc;

struct TrainFlags {
    std::string config_path;
    std::string env;
    std::string variant;
    int options = 0;
    std::vector<std::uint64_t> seeds;
    long steps = 0;
    std::string out;
    int fe_width = 0;
    int depth_delta = 0;
    bool no_scaling = false;
    bool no_entangle = false;
    long checkpoint_interval = -1;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--config", f.config_path, "key = value configuration file (flags override it)");
    cmd->add_option("--env", f.env, "cartpole | acrobot");
    cmd->add_option("--variant", f.variant, "classical | hybrid_{f,o,t,p,fo,ft,fp,fotp} | random");
    cmd->add_option("--options", f.options, "number of options")->check(CLI::Range(2, 4));
    cmd->add_option("--seeds", f.seeds, "seed list")->delimiter(',');
    cmd->add_option("--steps", f.steps, "environment steps per seed")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--fe-width", f.fe_width, "classical feature-extractor hidden width")->check(CLI::PositiveNumber);
    cmd->add_option("--depth-delta", f.depth_delta, "layers added to the quantum feature extractor");
    cmd->add_flag("--no-scaling", f.no_scaling, "freeze the input scalings at 1");
    cmd->add_flag("--no-entangle", f.no_entangle, "drop the CNOT ring");
    cmd->add_option("--checkpoint-interval", f.checkpoint_interval, "steps between checkpoints (0: final only)");
}

expkit::RunConfig resolve(const TrainFlags& f, const CLI::App* cmd) {
    expkit::RunConfig c = f.config_path.empty() ? expkit::RunConfig{} : expkit::load_config(f.config_path);
    if (!f.env.empty()) c.env = envs::parse_env(f.env);
    if (!f.variant.empty()) c.variant = f.variant;
    if (cmd->count("--options")) c.net.n_options = f.options;
    if (!f.seeds.empty()) c.seeds = f.seeds;
    if (cmd->count("--steps")) c.train.total_steps = f.steps;
    if (!f.out.empty()) c.out_dir = f.out;
    if (cmd->count("--fe-width")) c.net.fe_width = f.fe_width;
    if (cmd->count("--depth-delta")) c.net.depth_delta = f.depth_delta;
    if (f.no_scaling) c.net.learnable_scaling = false;
    if (f.no_entangle) c.net.entangling = false;
    if (f.checkpoint_interval >= 0) c.checkpoint_interval = f.checkpoint_interval;
    c.validate();
    return c;
}

void print_result(const expkit::ExperimentResult& r) {
    std::cout << r.config.label() << " on " << envs::env_name(r.config.env) << ": " << r.runs.size() << " seed(s), "
              << r.config.train.total_steps << " steps each -> " << r.config.out_dir.string() << '\n';
    if (!r.curve.points.empty()) {
        const auto& p = r.curve.points.back();
        std::printf("final smoothed return %.2f +- %.2f\n", p.mean, p.sd);
    }
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid quantum-classical option-critic experiments"};
    app.require_subcommand(1);

    TrainFlags train_flags;
    auto* train = app.add_subcommand("train", "train one configuration over one or more seeds");
    add_train_flags(train, train_flags);

    std::string suite_name;
    TrainFlags suite_flags;
    auto* suite = app.add_subcommand("suite", "run a built-in experiment matrix");
    suite->add_option("name", suite_name, "main | scaling | options | ablation")->required();
    add_train_flags(suite, suite_flags);

    std::string summarize_in;
    auto* summarize = app.add_subcommand("summarize", "tabulate finished experiments");
    summarize->add_option("--in", summarize_in, "directory holding experiment outputs")->required();

    std::string plot_in;
    std::string plot_out = "curves.svg";
    std::string plot_title = "smoothed episodic return";
    auto* plot = app.add_subcommand("plot", "render aggregate curves as SVG");
    plot->add_option("--in", plot_in, "directory holding experiment outputs")->required();
    plot->add_option("--out", plot_out, "SVG file to write");
    plot->add_option("--title", plot_title, "plot title");

    std::uint64_t gc_seed = 7;
    auto* gradcheck = app.add_subcommand("gradcheck", "check every gradient path against finite differences");
    gradcheck->add_option("--seed", gc_seed, "RNG seed for the random probes");

    auto* schema = app.add_subcommand("schema", "print the configuration keys with their defaults");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            print_result(expkit::run_experiment(resolve(train_flags, train)));
        } else if (suite->parsed()) {
            const auto base = resolve(suite_flags, suite);
            for (const auto& c : expkit::experiment_suite(suite_name, base)) print_result(expkit::run_experiment(c));
        } else if (summarize->parsed()) {
            const auto loaded = expkit::load_experiments(summarize_in);
            if (loaded.empty()) throw expkit::ConfigError("no experiments under " + summarize_in);
            std::cout << expkit::format_summary(expkit::summarize(loaded));
        } else if (plot->parsed()) {
            const auto loaded = expkit::load_experiments(plot_in);
            if (loaded.empty()) throw expkit::ConfigError("no experiments under " + plot_in);
            std::vector<expkit::AggregateCurve> curves;
            for (const auto& e : loaded) {
                const std::string label = e.config.label() + " [" + std::string(envs::env_name(e.config.env)) + "]";
                curves.push_back(expkit::parse_curve_csv(slurp(e.dir / "aggregate.csv"), label));
            }
            std::ofstream(plot_out) << expkit::render_svg(curves, plot_title);
            std::cout << "wrote " << plot_out << '\n';
        } else if (gradcheck->parsed()) {
            return expkit::run_gradcheck(std::cout, gc_seed) ? 0 : 1;
        } else if (schema->parsed()) {
            std::cout << expkit::config_schema();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
