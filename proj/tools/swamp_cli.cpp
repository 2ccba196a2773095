#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swamp/swamp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitDiverged = 2;
constexpr int kExitMaxIters = 3;
constexpr int kExitUsage = 64;
constexpr int kExitFailure = 1;
constexpr std::uint64_t kDefaultSeed = 1;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
};

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

void add_common(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("-c,--config", args.config_path, "key = value config file");
    cmd->add_option("-o,--out-dir", args.out_dir, "directory for output files");
    cmd->add_option("--seed", args.seed, "base seed (overrides the config)");
    cmd->add_option("overrides", args.overrides, "key=value overrides applied after the config file");
}

/// Config file, then positional overrides, then --seed. Records whether the
/// seed came from anywhere at all.
swamp::KeyValueConfig resolve_config(const CommonArgs& args, bool& seed_defaulted)
{
    swamp::KeyValueConfig cfg;
    if (!args.config_path.empty())
        cfg = swamp::KeyValueConfig::load(args.config_path);
    for (const auto& o : args.overrides)
        cfg.set_assignment(o);
    if (args.seed)
        cfg.set("seed", std::to_string(*args.seed));
    seed_defaulted = !cfg.has("seed");
    if (seed_defaulted)
        cfg.set("seed", std::to_string(kDefaultSeed));
    return cfg;
}

json manifest_base(const std::string& command, bool seed_defaulted)
{
    json m;
    m["tool"] = "swamp_cli";
    m["version"] = swamp::kVersion;
    m["command"] = command;
    if (seed_defaulted)
        m["warnings"] = json::array({"no seed given; using default seed " + std::to_string(kDefaultSeed)});
    return m;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out)
        throw std::runtime_error("failed writing '" + path.string() + "'");
}

void write_manifest(const fs::path& dir, const json& manifest)
{
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

fs::path prepare_dir(const std::string& dir)
{
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

std::string number(double v)
{
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
}

// ---------------------------------------------------------------------------

int cmd_generate(const CommonArgs& args, const std::string& matrix_csv)
{
    bool seed_defaulted = false;
    auto cfg = resolve_config(args, seed_defaulted);
    cfg.require_known({"ensemble", "M", "N", "gamma", "eta", "row_weight", "balanced_columns", "density", "signal",
                       "K", "channel", "delta", "rho", "prior_mean", "prior_var", "seed", "output"});

    const std::string ensemble = cfg.get_string("ensemble", "gaussian");
    const auto cols = cfg.get_size("N", 1000);
    const auto rows = cfg.get_size("M", cols / 2);
    const auto seed = cfg.get_u64("seed", kDefaultSeed);
    if (rows == 0 || cols == 0)
        throw UsageError("M and N must be positive");

    swamp::EnsembleSpec es;
    es.rows = rows;
    es.cols = cols;
    es.seed = swamp::derive_seed(seed, {1});
    if (ensemble == "gaussian")
        es.kind = swamp::GaussianIid{cfg.get_double("gamma", 0.0)};
    else if (ensemble == "lowrank")
        es.kind = swamp::LowRank{cfg.get_double("eta", 1.0)};
    else if (ensemble == "pooling")
        es.kind = swamp::Pooling{cfg.get_size("row_weight", 7), cfg.get_bool("balanced_columns", false)};
    else if (ensemble == "sparse_gaussian")
        es.kind = swamp::SparseGaussian{cfg.get_double("density", 0.25)};
    else
        throw UsageError("unknown ensemble '" + ensemble + "' (gaussian, lowrank, pooling, sparse_gaussian)");

    const std::string signal = cfg.get_string("signal", ensemble == "pooling" ? "binary" : "bernoulli_gaussian");
    swamp::PriorParams prior{cfg.get_double("rho", 0.2), cfg.get_double("prior_mean", 0.0),
                             cfg.get_double("prior_var", 1.0)};
    std::size_t k = 0;
    if (signal == "binary") {
        k = cfg.get_size("K", static_cast<std::size_t>(std::llround(prior.rho * static_cast<double>(cols))));
        if (!cfg.has("rho"))
            prior.rho = static_cast<double>(k) / static_cast<double>(cols);
        if (!cfg.has("prior_mean"))
            prior.mean = 1.0;
    } else if (signal != "bernoulli_gaussian") {
        throw UsageError("unknown signal '" + signal + "' (bernoulli_gaussian, binary)");
    }
    prior.validate();

    const std::string channel_name = cfg.get_string("channel", "awgn");
    swamp::OutputChannel channel;
    if (channel_name == "awgn")
        channel = swamp::AwgnChannel{cfg.get_double("delta", 1e-8)};
    else if (channel_name == "sign")
        channel = swamp::SignChannel{};
    else
        throw UsageError("unknown channel '" + channel_name + "' (awgn, sign)");

    auto phi = swamp::generate_matrix(es);
    if (const auto* pool = std::get_if<swamp::Pooling>(&es.kind))
        for (std::size_t r = 0; r < phi.rows(); ++r)
            if (phi.row_size(r) != pool->row_weight)
                throw std::runtime_error("pooling row " + std::to_string(r) + " does not have weight " +
                                         std::to_string(pool->row_weight));

    swamp::Rng signal_rng(swamp::derive_seed(seed, {2}));
    auto x = signal == "binary" ? swamp::gen_binary_signal(cols, k, signal_rng)
                                : swamp::gen_signal(cols, prior, signal_rng);
    const auto inst = swamp::make_instance(std::move(phi), std::move(x), channel, prior, seed);

    const auto dir = prepare_dir(args.out_dir);
    const auto out = dir / cfg.get_string("output", "instance.json");
    swamp::save_instance(inst, out.string());
    json outputs = json::array({out.string()});
    if (!matrix_csv.empty()) {
        swamp::export_matrix_csv(inst.matrix, matrix_csv);
        outputs.push_back(matrix_csv);
    }

    auto manifest = manifest_base("generate", seed_defaulted);
    manifest["config"] = cfg.entries();
    manifest["seed"] = seed;
    manifest["outputs"] = outputs;
    write_manifest(dir, manifest);
    std::cerr << "generate: wrote " << out.string() << " (M=" << inst.rows() << ", N=" << inst.cols() << ")\n";
    std::cout << out.string() << '\n';
    return 0;
}

int cmd_solve(const CommonArgs& args, const std::string& instance_path)
{
    bool seed_defaulted = false;
    auto cfg = resolve_config(args, seed_defaulted);
    cfg.require_known({"algorithm", "t_max", "epsilon", "seed", "schedule", "divergence_threshold"});

    swamp::SolveConfig sc;
    sc.algorithm = swamp::parse_algorithm(cfg.get_string("algorithm", "swamp"));
    sc.schedule = swamp::parse_schedule(cfg.get_string("schedule", "random_sequential"));
    sc.t_max = cfg.get_size("t_max", sc.t_max);
    sc.epsilon = cfg.get_double("epsilon", sc.epsilon);
    sc.seed = cfg.get_u64("seed", kDefaultSeed);
    if (cfg.has("divergence_threshold"))
        sc.divergence_threshold = cfg.get_double("divergence_threshold", 0.0);
    sc.validate();

    const auto inst = swamp::load_instance(instance_path);
    std::cerr << "solve: " << swamp::to_string(sc.algorithm) << " on M=" << inst.rows() << ", N=" << inst.cols()
              << '\n';
    const auto report = swamp::solve(inst, sc);

    const auto dir = prepare_dir(args.out_dir);
    write_text(dir / "trace.csv", swamp::trace_csv(report));
    {
        std::ostringstream est;
        est << "i,a,v\n";
        for (std::size_t i = 0; i < report.a.size(); ++i)
            est << i << ',' << number(report.a[i]) << ',' << number(report.v[i]) << '\n';
        write_text(dir / "estimate.csv", est.str());
    }
    const double final_mse = report.final_mse();
    json summary;
    summary["status"] = swamp::to_string(report.status);
    summary["iterations"] = report.iterations;
    summary["final_mse"] = std::isfinite(final_mse) ? json(final_mse) : json(nullptr);
    summary["seed"] = report.seed;
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    auto manifest = manifest_base("solve", seed_defaulted);
    manifest["instance"] = instance_path;
    manifest["instance_seed"] = inst.seed;
    manifest["config"] = cfg.entries();
    manifest["seed"] = sc.seed;
    manifest["outputs"] = {(dir / "trace.csv").string(), (dir / "estimate.csv").string(),
                           (dir / "summary.json").string()};
    write_manifest(dir, manifest);

    std::cout << summary.dump() << '\n';
    std::cerr << "solve: " << swamp::to_string(report.status) << " after " << report.iterations << " iterations\n";
    switch (report.status) {
    case swamp::Status::converged: return kExitConverged;
    case swamp::Status::diverged: return kExitDiverged;
    case swamp::Status::max_iters: return kExitMaxIters;
    }
    return kExitFailure;
}

json spec_json(const swamp::ExperimentSpec& spec)
{
    json j = json::object();
    for (const auto& [k, v] : swamp::describe(spec))
        j[k] = v;
    return j;
}

int cmd_experiment(const CommonArgs& args, std::size_t workers)
{
    bool seed_defaulted = false;
    auto cfg = resolve_config(args, seed_defaulted);
    if (workers)
        cfg.set("workers", std::to_string(workers));
    const auto spec = swamp::spec_from_config(cfg);
    if (spec.family == swamp::Family::timing)
        throw UsageError("use the bench subcommand for the timing family");

    const auto cells = swamp::cells_of(spec);
    const std::size_t total = cells.size() * spec.trials;
    std::size_t done = 0;
    const auto [xname, yname] = swamp::cell_columns(spec.family);
    const auto results = swamp::run_experiment(spec, [&](const swamp::TrialResult& r) {
        ++done;
        std::cerr << "[" << done << "/" << total << "] " << xname << "=" << r.cell.x;
        if (!yname.empty())
            std::cerr << ' ' << yname << "=" << r.cell.y;
        std::cerr << " trial=" << r.trial;
        for (const auto& o : r.outcomes)
            std::cerr << ' ' << swamp::to_string(o.algorithm) << ":" << swamp::to_string(o.status)
                      << (o.success ? "+" : "-");
        std::cerr << '\n';
    });

    const auto dir = prepare_dir(args.out_dir);
    json outputs = json::array();
    swamp::emit_csv(spec, results, (dir / "results.csv").string());
    outputs.push_back((dir / "results.csv").string());
    if (spec.family == swamp::Family::pooling_phase) {
        const auto diagram = swamp::phase_diagram(spec, results);
        write_text(dir / "phase.csv", swamp::phase_csv(diagram, spec.algorithms));
        write_text(dir / "contour.csv", swamp::contour_csv(diagram, spec.algorithms));
        outputs.push_back((dir / "phase.csv").string());
        outputs.push_back((dir / "contour.csv").string());
    }

    auto manifest = manifest_base("experiment", seed_defaulted);
    manifest["config"] = spec_json(spec);
    manifest["seed"] = spec.base_seed;
    manifest["seed_scheme"] = "trial seed = derive_seed(seed, {family, bits(x), bits(y), trial})";
    json seeds = json::array();
    for (const auto& r : results)
        seeds.push_back({{"cell", r.cell.index}, {"trial", r.trial}, {"seed", r.seed}});
    manifest["trial_seeds"] = seeds;
    manifest["outputs"] = outputs;
    write_manifest(dir, manifest);
    std::cout << (dir / "results.csv").string() << '\n';
    return 0;
}

int cmd_bench(const CommonArgs& args)
{
    bool seed_defaulted = false;
    auto cfg = resolve_config(args, seed_defaulted);
    if (cfg.has("family") && cfg.get_string("family", "") != "timing")
        throw UsageError("bench only runs the timing family");
    cfg.set("family", "timing");
    const auto spec = swamp::spec_from_config(cfg);
    std::cerr << "bench: " << spec.iterations << " iterations per size\n";
    const auto table = swamp::timing_benchmark(spec);

    const auto dir = prepare_dir(args.out_dir);
    write_text(dir / "timing.csv", swamp::timing_csv(table));
    json slopes = json::object();
    for (const auto& [algorithm, slope] : table.slopes)
        slopes[std::string(swamp::to_string(algorithm))] = std::isfinite(slope) ? json(slope) : json(nullptr);

    auto manifest = manifest_base("bench", seed_defaulted);
    manifest["config"] = spec_json(spec);
    manifest["seed"] = spec.base_seed;
    manifest["loglog_slope"] = slopes;
    manifest["outputs"] = {(dir / "timing.csv").string()};
    write_manifest(dir, manifest);
    for (const auto& row : table.rows)
        std::cerr << "bench: N=" << row.n << ' ' << swamp::to_string(row.algorithm) << ' ' << row.seconds_per_500
                  << " s/500\n";
    std::cout << json{{"loglog_slope", slopes}}.dump() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Approximate message passing solvers for sparse estimation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", swamp::kVersion);

    CommonArgs gen_args, solve_args, exp_args, bench_args;
    std::string matrix_csv, instance_path;
    std::size_t workers = 0;

    auto* gen = app.add_subcommand("generate", "draw a problem instance");
    add_common(gen, gen_args);
    gen->add_option("--matrix-csv", matrix_csv, "also export the matrix as CSV");

    auto* sol = app.add_subcommand("solve", "run a solver on an instance file");
    sol->add_option("-i,--instance", instance_path, "instance JSON")->required();
    add_common(sol, solve_args);

    auto* exp = app.add_subcommand("experiment", "run an experiment grid");
    add_common(exp, exp_args);
    exp->add_option("-j,--workers", workers, "concurrent trials");

    auto* bench = app.add_subcommand("bench", "time fixed iteration counts across sizes");
    add_common(bench, bench_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen)
            return cmd_generate(gen_args, matrix_csv);
        if (*sol)
            return cmd_solve(solve_args, instance_path);
        if (*exp)
            return cmd_experiment(exp_args, workers);
        if (*bench)
            return cmd_bench(bench_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
