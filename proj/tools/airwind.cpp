#include "airwind/evaluation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace airwind;

namespace {

// Published run count for the full training grid.
constexpr int kPublishedGridRuns = 1281;

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

struct GridArgs {
    int trajectories = 16;
    std::vector<double> speeds{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    int headings = 16;
    double eta = 1.0;
    std::uint64_t seed = 2024;
    bool zero_noise = false;

    void add_to(CLI::App* app)
    {
        app->add_option("--trajectories", trajectories, "Base trajectories (2 plans x 8 rotations)")
            ->check(CLI::Range(1, 16))
            ->capture_default_str();
        app->add_option("--speeds", speeds, "Wind speeds in m/s")
            ->delimiter(',')
            ->capture_default_str();
        app->add_option("--headings", headings, "Wind headings per non-zero speed")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app->add_option("--eta", eta, "Pitot calibration factor")->capture_default_str();
        app->add_option("--seed", seed, "Base seed for sensor noise")->capture_default_str();
        app->add_flag("--zero-noise", zero_noise, "Disable sensor noise");
    }

    std::vector<ScenarioSpec> grid() const
    {
        GridOptions g;
        g.trajectories = trajectories;
        g.speeds = speeds;
        g.headings = headings;
        g.eta = eta;
        g.seed = seed;
        auto specs = training_grid(g);
        if (zero_noise) {
            for (auto& s : specs) {
                s.noise = SensorNoise::zero();
            }
        }
        return specs;
    }
};

// ---------------------------------------------------------------------------

int cmd_grid_list(const GridArgs& args)
{
    const auto specs = args.grid();
    std::cout << "index,name,wind_speed,wind_heading_deg,initial_heading_deg,duration\n";
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        std::cout << i << ',' << s.name << ',' << s.wind.front().speed << ','
                  << rad2deg(s.wind.front().heading) << ',' << rad2deg(s.initial_heading) << ','
                  << s.run_duration() << '\n';
    }
    std::cerr << "runs: " << specs.size() << " (published count " << kPublishedGridRuns << ")\n";
    return 0;
}

int cmd_dataset(const GridArgs& args, int stride, const std::string& out)
{
    const auto specs = args.grid();
    DatasetOptions opts;
    opts.stride = stride;
    const Dataset d = generate_dataset(specs, opts);
    save_dataset(d, out);
    std::cout << "runs: " << specs.size() << " (published count " << kPublishedGridRuns << ")\n"
              << "rows: " << d.size() << '\n'
              << "wrote " << out << '\n';
    return 0;
}

json metrics_json(const std::optional<SplitMetrics>& m)
{
    if (!m) {
        return nullptr;
    }
    json j{{"count", m->count}, {"mse", m->mse}};
    j["r"] = m->r ? json(*m->r) : json(nullptr);
    return j;
}

int cmd_train(const std::string& dataset, const TrainOptions& opts, std::uint64_t split_seed,
              const std::string& out, const std::string& report_path)
{
    Dataset d = load_dataset(dataset);
    assign_splits(d, split_seed);
    const TrainResult res = train_scg(d, opts);
    save_model(res.model, out);

    const auto& rep = res.report;
    json j;
    j["dataset"] = dataset;
    j["dataset_fingerprint"] = file_fingerprint(dataset);
    j["epochs"] = opts.epochs;
    j["seed"] = opts.seed;
    j["split_seed"] = split_seed;
    j["normalize"] = opts.normalize;
    j["splits"] = {{"train", d.indices(Split::Train).size()},
                   {"validation", d.indices(Split::Validation).size()},
                   {"test", d.indices(Split::Test).size()}};
    j["best_epoch"] = rep.best_epoch;
    j["train_mse"] = rep.train_mse;
    j["validation_mse"] = rep.validation_mse;
    j["metrics"] = {{"train", metrics_json(rep.metrics[0])},
                    {"validation", metrics_json(rep.metrics[1])},
                    {"test", metrics_json(rep.metrics[2])}};
    j["error_histogram"] = {{"edges", rep.error_histogram.edges},
                            {"counts", rep.error_histogram.counts}};
    j["zero_target_variance"] = rep.zero_target_variance;
    j["reference"] = {{"note", "published values from a different simulator and grid"},
                      {"r", 0.997},
                      {"mse", 0.0205}};
    j["model"] = out;
    j["model_fingerprint"] = file_fingerprint(out);
    write_text(report_path, j.dump(2) + "\n");

    std::cout << "epochs: " << rep.train_mse.size() << ", best epoch " << rep.best_epoch << '\n';
    if (rep.metrics[2]) {
        std::cout << "test mse: " << rep.metrics[2]->mse;
        if (rep.metrics[2]->r) {
            std::cout << ", R: " << *rep.metrics[2]->r;
        }
        std::cout << '\n';
    }
    std::cout << "wrote " << out << " and " << report_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

// Everything needed to reproduce a run, also written as run_manifest.json.
struct RunPlan {
    std::string scenario_text;
    std::vector<EstimatorKind> estimators;
    std::map<EstimatorKind, std::string> config_text;
    std::string model_path;
    std::string model_fingerprint;
    std::optional<Vec3> oracle_bias;
    double burn_in = 0.0;
    int estimator_hz = 16;
    double tau = 1.5;
    bool filter_ekf_inputs = false;
    bool sensor_logs = true;
};

json plan_json(const RunPlan& p)
{
    json j;
    j["format"] = "airwind-run-manifest";
    j["version"] = 1;
    j["scenario"] = p.scenario_text;
    std::string names;
    for (auto k : p.estimators) {
        names += (names.empty() ? "" : ",") + std::string(estimator_name(k));
    }
    j["estimators"] = names;
    json cfgs = json::object();
    for (const auto& [k, text] : p.config_text) {
        cfgs[std::string(estimator_name(k))] = text;
    }
    j["configs"] = cfgs;
    if (!p.model_path.empty()) {
        j["model"] = {{"path", p.model_path}, {"fingerprint", p.model_fingerprint}};
    }
    if (p.oracle_bias) {
        j["oracle_bias"] = {p.oracle_bias->x(), p.oracle_bias->y(), p.oracle_bias->z()};
    }
    j["burn_in"] = p.burn_in;
    j["scheduler"] = {{"estimator_hz", p.estimator_hz},
                      {"tau", p.tau},
                      {"filter_ekf_inputs", p.filter_ekf_inputs}};
    j["sensor_logs"] = p.sensor_logs;
    return j;
}

RunPlan plan_from_json(const json& j)
{
    if (j.value("format", "") != "airwind-run-manifest" || j.value("version", 0) != 1) {
        throw std::runtime_error("not an airwind run manifest (version 1)");
    }
    RunPlan p;
    p.scenario_text = j.at("scenario").get<std::string>();
    p.estimators = parse_estimator_list(j.at("estimators").get<std::string>());
    for (const auto& [name, text] : j.at("configs").items()) {
        p.config_text[parse_estimator(name)] = text.get<std::string>();
    }
    if (j.contains("model")) {
        p.model_path = j["model"].at("path").get<std::string>();
        p.model_fingerprint = j["model"].at("fingerprint").get<std::string>();
    }
    if (j.contains("oracle_bias")) {
        const auto b = j["oracle_bias"].get<std::vector<double>>();
        if (b.size() != 3) {
            throw std::runtime_error("manifest oracle_bias needs 3 values");
        }
        p.oracle_bias = Vec3(b[0], b[1], b[2]);
    }
    p.burn_in = j.value("burn_in", 0.0);
    const auto& s = j.at("scheduler");
    p.estimator_hz = s.at("estimator_hz").get<int>();
    p.tau = s.at("tau").get<double>();
    p.filter_ekf_inputs = s.at("filter_ekf_inputs").get<bool>();
    p.sensor_logs = j.value("sensor_logs", true);
    return p;
}

void write_timing(const RunLog& log, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << "estimator,steps,mean_us,median_us,max_us\n";
    for (const auto& s : log.series) {
        if (s.step_micros.empty()) {
            continue;
        }
        std::vector<double> v = s.step_micros;
        std::sort(v.begin(), v.end());
        double sum = 0.0;
        for (double x : v) {
            sum += x;
        }
        out << estimator_name(s.kind) << ',' << v.size() << ',' << sum / v.size() << ','
            << v[v.size() / 2] << ',' << v.back() << '\n';
    }
}

int execute_plan(const RunPlan& plan, const std::string& out_dir, bool timing)
{
    std::istringstream sin(plan.scenario_text);
    const ScenarioSpec spec = parse_scenario(sin);

    RunOptions opts;
    opts.estimators = plan.estimators;
    opts.scheduler.estimator_hz = plan.estimator_hz;
    opts.scheduler.tau = plan.tau;
    opts.scheduler.filter_ekf_inputs = plan.filter_ekf_inputs;
    opts.time_steps = timing;
    for (const auto& [k, text] : plan.config_text) {
        std::istringstream cin(text);
        opts.configs[k] = parse_config(cin);
    }

    const bool needs_nn = std::any_of(plan.estimators.begin(), plan.estimators.end(), [](auto k) {
        return k == EstimatorKind::Nn || k == EstimatorKind::Hybrid;
    });
    if (needs_nn) {
        if (plan.oracle_bias) {
            opts.nn = oracle_source(spec, *plan.oracle_bias);
        } else if (!plan.model_path.empty()) {
            const std::string fp = file_fingerprint(plan.model_path);
            if (!plan.model_fingerprint.empty() && fp != plan.model_fingerprint) {
                throw std::runtime_error("model '" + plan.model_path + "' fingerprint " + fp +
                                         " does not match the manifest (" +
                                         plan.model_fingerprint + ")");
            }
            opts.nn = mlp_source(std::make_shared<const MlpModel>(load_model(plan.model_path)));
        } else {
            throw std::runtime_error(
                "nn and hybrid estimators need --model <file> (or --oracle-bias for a stand-in)");
        }
    }

    fs::create_directories(out_dir);
    const RunLog log = run_scenario(spec, opts);
    const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    write_estimate_log(log, path("estimates.csv"));
    write_truth_log(log, path("truth.csv"));
    const RmsReport full = compute_rms(log, 0.0);
    write_rms_report(full, path("rms.csv"));
    if (plan.burn_in > 0.0) {
        write_rms_report(compute_rms(log, plan.burn_in), path("rms_burn_in.csv"));
    }
    if (plan.sensor_logs) {
        const Trajectory traj(spec);
        write_sensor_logs(synthesize_sensors(traj, spec.noise, spec.seeds, spec.run_duration(),
                                             opts.scheduler.rates),
                          out_dir);
    }
    if (timing) {
        write_timing(log, path("timing.csv"));
    }

    json manifest = plan_json(plan);
    manifest["outputs"] = {"estimates.csv", "truth.csv", "rms.csv"};
    write_text(path("run_manifest.json"), manifest.dump(2) + "\n");

    std::cout << format_rms_report(full);
    if (plan.burn_in > 0.0) {
        std::cout << format_rms_report(compute_rms(log, plan.burn_in));
    }
    for (const auto& s : log.series) {
        if (s.skipped_updates > 0) {
            std::cerr << estimator_name(s.kind) << ": " << s.skipped_updates
                      << " updates skipped (ill-conditioned innovation covariance)\n";
        }
    }
    return 0;
}

std::optional<Vec3> parse_bias(const std::string& text)
{
    if (text.empty()) {
        return std::nullopt;
    }
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        v.push_back(std::stod(item));
    }
    if (v.size() != 3) {
        throw std::invalid_argument("--oracle-bias needs three comma-separated values");
    }
    return Vec3(v[0], v[1], v[2]);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wind and Pitot scale-factor estimation for a robotic airship"};
    app.require_subcommand(1);

    // grid-list
    GridArgs list_args;
    auto* list = app.add_subcommand("grid-list", "List the training grid runs");
    list_args.add_to(list);

    // dataset
    GridArgs ds_args;
    int stride = 1;
    std::string ds_out = "dataset.csv";
    auto* ds = app.add_subcommand("dataset", "Simulate the training grid and write a dataset");
    ds_args.add_to(ds);
    ds->add_option("--stride", stride, "Keep every n-th estimator tick")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    ds->add_option("-o,--out", ds_out, "Output dataset file")->capture_default_str();

    // train
    std::string tr_dataset;
    std::string tr_out = "model.txt";
    std::string tr_report = "train_report.json";
    TrainOptions tr_opts;
    std::uint64_t split_seed = 7;
    bool raw = false;
    auto* tr = app.add_subcommand("train", "Train the network with scaled conjugate gradient");
    tr->add_option("--dataset", tr_dataset, "Dataset file")->required();
    tr->add_option("--epochs", tr_opts.epochs, "Training epochs")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    tr->add_option("--seed", tr_opts.seed, "Weight initialization seed")->capture_default_str();
    tr->add_option("--split-seed", split_seed, "Train/validation/test split seed")
        ->capture_default_str();
    tr->add_option("-o,--out", tr_out, "Output model file")->capture_default_str();
    tr->add_option("--report", tr_report, "Training report (JSON)")->capture_default_str();
    tr->add_flag("--raw", raw, "Train on unnormalized inputs and targets");

    // run
    std::string scenario_path;
    int builtin = 0;
    std::string estimators = "cho2011,ekf,nn,hybrid";
    std::string model_path;
    std::string bias_text;
    double burn_in = 0.0;
    std::string run_out = "run";
    std::string cfg_cho, cfg_ekf, cfg_hybrid;
    std::optional<std::uint64_t> seed_override;
    bool zero_noise = false;
    bool timing = false;
    bool no_sensor_logs = false;
    bool filter_ekf = false;
    double tau = 1.5;
    std::string manifest_path;
    auto* run = app.add_subcommand("run", "Run a scenario through the selected estimators");
    auto* o_scn = run->add_option("--scenario", scenario_path, "Scenario file");
    auto* o_builtin = run->add_option("--builtin", builtin, "Built-in evaluation scenario (1 or 2)")
                        ->check(CLI::Range(1, 2));
    auto* o_manifest =
        run->add_option("--manifest", manifest_path, "Replay a run_manifest.json");
    o_scn->excludes(o_builtin)->excludes(o_manifest);
    o_builtin->excludes(o_manifest);
    run->add_option("--estimators", estimators, "Comma-separated estimator list")
        ->capture_default_str();
    run->add_option("--model", model_path, "Trained network file");
    run->add_option("--oracle-bias", bias_text,
                    "Use the true wind plus this bias (v_nw,v_ew,c_f) as the network output");
    run->add_option("--burn-in", burn_in, "Also report RMS excluding the first seconds")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    run->add_option("-o,--out", run_out, "Output directory")->capture_default_str();
    run->add_option("--config-cho2011", cfg_cho, "Filter config file for cho2011");
    run->add_option("--config-ekf", cfg_ekf, "Filter config file for ekf");
    run->add_option("--config-hybrid", cfg_hybrid, "Filter config file for hybrid");
    run->add_option("--seed", seed_override, "Derive all sensor seeds from this value");
    run->add_flag("--zero-noise", zero_noise, "Disable sensor noise");
    run->add_option("--tau", tau, "Network input low-pass time constant (s)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    run->add_flag("--filter-ekf-inputs", filter_ekf, "Feed low-passed frames to the filters too");
    run->add_flag("--timing", timing, "Write per-estimator step timing to timing.csv");
    run->add_flag("--no-sensor-logs", no_sensor_logs, "Skip the raw sensor logs");

    // rms
    std::string rms_est, rms_truth, rms_out;
    double rms_burn = 0.0;
    auto* rms = app.add_subcommand("rms", "Compute the RMS table from logs on disk");
    rms->add_option("--estimates", rms_est, "Estimate log")->required();
    rms->add_option("--truth", rms_truth, "Truth log")->required();
    rms->add_option("--burn-in", rms_burn, "Exclude the first seconds")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    rms->add_option("-o,--out", rms_out, "Write the report here as well");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            return cmd_grid_list(list_args);
        }
        if (*ds) {
            return cmd_dataset(ds_args, stride, ds_out);
        }
        if (*tr) {
            tr_opts.normalize = !raw;
            return cmd_train(tr_dataset, tr_opts, split_seed, tr_out, tr_report);
        }
        if (*rms) {
            const RmsReport rep =
                compute_rms(read_estimate_log(rms_est), read_truth_log(rms_truth), rms_burn);
            std::cout << format_rms_report(rep);
            if (!rms_out.empty()) {
                write_rms_report(rep, rms_out);
            }
            return 0;
        }
        if (*run) {
            if (!manifest_path.empty()) {
                const RunPlan plan = plan_from_json(json::parse(read_text(manifest_path)));
                return execute_plan(plan, run_out, timing);
            }
            ScenarioSpec spec;
            if (builtin != 0) {
                spec = reference_scenario(builtin);
            } else if (!scenario_path.empty()) {
                spec = load_scenario(scenario_path);
            } else {
                throw std::invalid_argument("run needs --scenario, --builtin or --manifest");
            }
            if (seed_override) {
                spec.seeds = NoiseSeeds::derive(*seed_override);
            }
            if (zero_noise) {
                spec.noise = SensorNoise::zero();
            }
            spec.validate();

            RunPlan plan;
            plan.scenario_text = format_scenario(spec);
            plan.estimators = parse_estimator_list(estimators);
            const std::pair<EstimatorKind, const std::string*> cfgs[] = {
                {EstimatorKind::Cho2011, &cfg_cho},
                {EstimatorKind::Ekf, &cfg_ekf},
                {EstimatorKind::Hybrid, &cfg_hybrid}};
            for (const auto& [kind, file] : cfgs) {
                if (std::find(plan.estimators.begin(), plan.estimators.end(), kind) ==
                    plan.estimators.end()) {
                    continue;
                }
                EstimatorConfig c;
                if (file->empty()) {
                    c = default_config(kind == EstimatorKind::Cho2011 ? MeasurementVariant::Cho2011
                                       : kind == EstimatorKind::Ekf ? MeasurementVariant::ThreeEq
                                                                    : MeasurementVariant::Hybrid);
                } else {
                    c = load_config(*file);
                }
                plan.config_text[kind] = format_config(c);
            }
            plan.oracle_bias = parse_bias(bias_text);
            if (!model_path.empty()) {
                plan.model_path = fs::absolute(model_path).string();
                plan.model_fingerprint = file_fingerprint(model_path);
            }
            plan.burn_in = burn_in;
            plan.tau = tau;
            plan.filter_ekf_inputs = filter_ekf;
            plan.sensor_logs = !no_sensor_logs;
            return execute_plan(plan, run_out, timing);
        }
    } catch (const std::exception& e) {
        std::cerr << "airwind: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
