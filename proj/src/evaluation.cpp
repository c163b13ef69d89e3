#include "airwind/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace airwind {

std::string_view estimator_name(EstimatorKind kind)
{
    switch (kind) {
    case EstimatorKind::Cho2011:
        return "cho2011";
    case EstimatorKind::Ekf:
        return "ekf";
    case EstimatorKind::Nn:
        return "nn";
    case EstimatorKind::Hybrid:
        return "hybrid";
    }
    return "unknown";
}

EstimatorKind parse_estimator(std::string_view name)
{
    while (!name.empty() && std::isspace(static_cast<unsigned char>(name.front()))) {
        name.remove_prefix(1);
    }
    while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) {
        name.remove_suffix(1);
    }
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (auto k : {EstimatorKind::Cho2011, EstimatorKind::Ekf, EstimatorKind::Nn,
                   EstimatorKind::Hybrid}) {
        if (estimator_name(k) == lower) {
            return k;
        }
    }
    throw std::invalid_argument("unknown estimator '" + std::string(name) +
                                "' (expected cho2011, ekf, nn or hybrid)");
}

std::vector<EstimatorKind> parse_estimator_list(std::string_view list)
{
    std::vector<EstimatorKind> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const auto comma = std::min(list.find(',', pos), list.size());
        const auto item = list.substr(pos, comma - pos);
        if (!item.empty()) {
            const auto k = parse_estimator(item);
            if (std::find(out.begin(), out.end(), k) != out.end()) {
                throw std::invalid_argument("estimator '" + std::string(item) + "' listed twice");
            }
            out.push_back(k);
        }
        pos = comma + 1;
    }
    if (out.empty()) {
        throw std::invalid_argument("no estimators selected");
    }
    return out;
}

NeuralSource mlp_source(std::shared_ptr<const MlpModel> model)
{
    if (!model) {
        throw std::invalid_argument("network source needs a model");
    }
    return [model](const MeasurementFrame& filtered, double) {
        return nn_estimate(*model, filtered);
    };
}

NeuralSource oracle_source(const ScenarioSpec& spec, const Vec3& bias)
{
    auto traj = std::make_shared<const Trajectory>(spec);
    return [traj, bias](const MeasurementFrame&, double t) {
        const TruthSample s = traj->at(t);
        return WindState{s.wind_n + bias.x(), s.wind_e + bias.y(), s.c_f + bias.z()};
    };
}

const EstimateSeries* RunLog::find(EstimatorKind kind) const
{
    for (const auto& s : series) {
        if (s.kind == kind) {
            return &s;
        }
    }
    return nullptr;
}

namespace {

MeasurementVariant variant_for(EstimatorKind k)
{
    switch (k) {
    case EstimatorKind::Cho2011:
        return MeasurementVariant::Cho2011;
    case EstimatorKind::Hybrid:
        return MeasurementVariant::Hybrid;
    default:
        return MeasurementVariant::ThreeEq;
    }
}

bool finite(const WindState& s) { return s.vec().allFinite(); }

} // namespace

RunLog run_scenario(const ScenarioSpec& spec, const RunOptions& options)
{
    const Trajectory traj(spec);
    const double duration = spec.run_duration();
    const SensorStreams streams =
        synthesize_sensors(traj, spec.noise, spec.seeds, duration, options.scheduler.rates);
    const RateScheduler probe(options.scheduler);
    const std::vector<TickFrames> ticks = schedule_streams(streams, duration, options.scheduler);

    const bool needs_nn = std::any_of(options.estimators.begin(), options.estimators.end(),
                                      [](EstimatorKind k) {
                                          return k == EstimatorKind::Nn || k == EstimatorKind::Hybrid;
                                      });
    if (needs_nn && !options.nn) {
        throw std::invalid_argument("nn and hybrid estimators need a network model");
    }

    RunLog log;
    log.time.reserve(ticks.size());
    log.truth.reserve(ticks.size());
    for (const auto& f : ticks) {
        const TruthSample s = traj.at(f.time());
        log.time.push_back(f.time());
        log.truth.push_back({s.t, s.v_ned, s.att, {s.wind_n, s.wind_e, s.c_f}});
    }

    using clock = std::chrono::steady_clock;
    const auto micros_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::micro>(clock::now() - t0).count();
    };

    std::vector<WindState> nn_out;
    std::vector<double> nn_micros;
    if (needs_nn) {
        nn_out.reserve(ticks.size());
        for (const auto& f : ticks) {
            const auto t0 = clock::now();
            nn_out.push_back(options.nn(f.filtered, f.time()));
            if (options.time_steps) {
                nn_micros.push_back(micros_since(t0));
            }
        }
    }

    for (EstimatorKind kind : options.estimators) {
        EstimateSeries series;
        series.kind = kind;
        series.states.reserve(ticks.size());

        if (kind == EstimatorKind::Nn) {
            series.step_micros = nn_micros;
            for (std::size_t i = 0; i < ticks.size(); ++i) {
                if (!finite(nn_out[i])) {
                    throw std::runtime_error("network produced a non-finite estimate at t=" +
                                             std::to_string(ticks[i].time()));
                }
                series.states.push_back(nn_out[i]);
            }
            log.series.push_back(std::move(series));
            continue;
        }

        const auto it = options.configs.find(kind);
        EstimatorConfig cfg =
            it != options.configs.end() ? it->second : default_config(variant_for(kind));
        if (cfg.variant != variant_for(kind)) {
            throw std::invalid_argument("config for '" + std::string(estimator_name(kind)) +
                                        "' has variant " + std::string(variant_name(cfg.variant)));
        }
        WindEkf ekf(cfg);
        series.covariances.reserve(ticks.size());
        for (std::size_t i = 0; i < ticks.size(); ++i) {
            const MeasurementFrame& frame = probe.ekf_frame(ticks[i]);
            const auto t0 = clock::now();
            if (kind == EstimatorKind::Hybrid) {
                hybrid_step(ekf, frame, nn_out[i]);
            } else {
                ekf.step(frame);
            }
            if (options.time_steps) {
                // The hybrid pays for the network evaluation as well.
                series.step_micros.push_back(micros_since(t0) +
                                             (kind == EstimatorKind::Hybrid ? nn_micros[i] : 0.0));
            }
            if (ekf.health().update_skipped) {
                ++series.skipped_updates;
            }
            if (!finite(ekf.state()) || !ekf.covariance().allFinite()) {
                throw std::runtime_error(std::string(estimator_name(kind)) +
                                         ": non-finite state or covariance at t=" +
                                         std::to_string(ticks[i].time()));
            }
            series.states.push_back(ekf.state());
            series.covariances.push_back(ekf.covariance());
        }
        log.series.push_back(std::move(series));
    }
    return log;
}

// ---------------------------------------------------------------------------
// RMS

const RmsRow* RmsReport::find(std::string_view estimator) const
{
    for (const auto& r : rows) {
        if (r.estimator == estimator) {
            return &r;
        }
    }
    return nullptr;
}

namespace {

RmsReport rms_from_columns(const std::vector<double>& time, const std::vector<WindState>& truth,
                           const std::vector<std::string>& names,
                           const std::vector<const std::vector<WindState>*>& values,
                           double burn_in)
{
    RmsReport rep;
    rep.burn_in = burn_in;
    for (std::size_t e = 0; e < names.size(); ++e) {
        double sn = 0.0, se = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < time.size(); ++i) {
            if (time[i] < burn_in) {
                continue;
            }
            const WindState& est = (*values[e])[i];
            const double dn = est.v_nw - truth[i].v_nw;
            const double de = est.v_ew - truth[i].v_ew;
            sn += dn * dn;
            se += de * de;
            ++n;
        }
        if (n == 0) {
            throw std::invalid_argument("no samples after the burn-in window");
        }
        rep.samples = n;
        rep.rows.push_back({names[e], std::sqrt(sn / static_cast<double>(n)),
                            std::sqrt(se / static_cast<double>(n)), std::nullopt, std::nullopt});
    }
    if (const RmsRow* cho = rep.find("cho2011")) {
        const RmsRow base = *cho;
        for (auto& r : rep.rows) {
            if (base.rms_n > 0.0) {
                r.pct_n = (r.rms_n - base.rms_n) / base.rms_n * 100.0;
            }
            if (base.rms_e > 0.0) {
                r.pct_e = (r.rms_e - base.rms_e) / base.rms_e * 100.0;
            }
        }
    }
    return rep;
}

std::string num(double v)
{
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, end};
}

std::string stamp_text(double t)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", t);
    return buf;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t row)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw std::runtime_error("'" + path + "' row " + std::to_string(row) + ": bad number '" +
                                 cell + "'");
    }
    return v;
}

} // namespace

RmsReport compute_rms(const RunLog& log, double burn_in)
{
    std::vector<WindState> truth;
    truth.reserve(log.truth.size());
    for (const auto& t : log.truth) {
        truth.push_back(t.wind);
    }
    std::vector<std::string> names;
    std::vector<const std::vector<WindState>*> values;
    for (const auto& s : log.series) {
        names.emplace_back(estimator_name(s.kind));
        values.push_back(&s.states);
    }
    return rms_from_columns(log.time, truth, names, values, burn_in);
}

RmsReport compute_rms(const EstimateTable& est, const TruthTable& truth, double burn_in)
{
    if (est.time.size() != truth.time.size()) {
        throw std::invalid_argument("estimate and truth logs have different lengths (" +
                                    std::to_string(est.time.size()) + " vs " +
                                    std::to_string(truth.time.size()) + ")");
    }
    for (std::size_t i = 0; i < est.time.size(); ++i) {
        if (std::abs(est.time[i] - truth.time[i]) > 5e-7) {
            throw std::invalid_argument("logs misaligned at row " + std::to_string(i + 1) +
                                        ": t=" + stamp_text(est.time[i]) + " vs " +
                                        stamp_text(truth.time[i]));
        }
    }
    std::vector<const std::vector<WindState>*> values;
    for (const auto& v : est.values) {
        values.push_back(&v);
    }
    return rms_from_columns(est.time, truth.wind, est.estimators, values, burn_in);
}

void write_estimate_log(const RunLog& log, const std::string& path)
{
    auto out = open_out(path);
    out << "time,true_v_nw,true_v_ew,true_c_f";
    for (const auto& s : log.series) {
        const auto n = estimator_name(s.kind);
        out << ',' << n << "_v_nw," << n << "_v_ew," << n << "_c_f";
    }
    out << '\n';
    for (std::size_t i = 0; i < log.time.size(); ++i) {
        const WindState& w = log.truth[i].wind;
        out << stamp_text(log.time[i]) << ',' << num(w.v_nw) << ',' << num(w.v_ew) << ','
            << num(w.c_f);
        for (const auto& s : log.series) {
            const WindState& e = s.states[i];
            out << ',' << num(e.v_nw) << ',' << num(e.v_ew) << ',' << num(e.c_f);
        }
        out << '\n';
    }
}

void write_truth_log(const RunLog& log, const std::string& path)
{
    auto out = open_out(path);
    out << "time,v_n,v_e,v_d,phi,theta,psi,v_nw,v_ew,c_f\n";
    for (const auto& t : log.truth) {
        out << stamp_text(t.t) << ',' << num(t.v_ned.x()) << ',' << num(t.v_ned.y()) << ','
            << num(t.v_ned.z()) << ',' << num(t.att.phi) << ',' << num(t.att.theta) << ','
            << num(t.att.psi) << ',' << num(t.wind.v_nw) << ',' << num(t.wind.v_ew) << ','
            << num(t.wind.c_f) << '\n';
    }
}

std::string format_rms_report(const RmsReport& rep)
{
    std::ostringstream os;
    os << "# burn_in=" << num(rep.burn_in) << " samples=" << rep.samples << '\n';
    os << "estimator,rms_v_nw,rms_v_ew,pct_v_nw,pct_v_ew\n";
    for (const auto& r : rep.rows) {
        os << r.estimator << ',' << num(r.rms_n) << ',' << num(r.rms_e) << ','
           << (r.pct_n ? num(*r.pct_n) : "") << ',' << (r.pct_e ? num(*r.pct_e) : "") << '\n';
    }
    return os.str();
}

void write_rms_report(const RmsReport& report, const std::string& path)
{
    auto out = open_out(path);
    out << format_rms_report(report);
}

EstimateTable read_estimate_log(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open estimate log '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("estimate log '" + path + "' is empty");
    }
    const auto header = split_csv(line);
    if (header.size() < 7 || (header.size() - 4) % 3 != 0 || header[0] != "time") {
        throw std::runtime_error("estimate log '" + path + "' has an unexpected header");
    }
    EstimateTable t;
    for (std::size_t c = 4; c < header.size(); c += 3) {
        const std::string& h = header[c];
        const auto cut = h.rfind("_v_nw");
        if (cut == std::string::npos || cut + 5 != h.size()) {
            throw std::runtime_error("estimate log '" + path + "': bad column '" + h + "'");
        }
        t.estimators.push_back(h.substr(0, cut));
    }
    t.values.resize(t.estimators.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("estimate log '" + path + "' row " + std::to_string(row) +
                                     ": wrong column count");
        }
        t.time.push_back(parse_cell(cells[0], path, row));
        for (std::size_t e = 0; e < t.estimators.size(); ++e) {
            const std::size_t c = 4 + 3 * e;
            t.values[e].push_back({parse_cell(cells[c], path, row),
                                   parse_cell(cells[c + 1], path, row),
                                   parse_cell(cells[c + 2], path, row)});
        }
    }
    return t;
}

TruthTable read_truth_log(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open truth log '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != "time,v_n,v_e,v_d,phi,theta,psi,v_nw,v_ew,c_f") {
        throw std::runtime_error("truth log '" + path + "' has an unexpected header");
    }
    TruthTable t;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto cells = split_csv(line);
        if (cells.size() != 10) {
            throw std::runtime_error("truth log '" + path + "' row " + std::to_string(row) +
                                     ": wrong column count");
        }
        t.time.push_back(parse_cell(cells[0], path, row));
        t.wind.push_back({parse_cell(cells[7], path, row), parse_cell(cells[8], path, row),
                          parse_cell(cells[9], path, row)});
    }
    return t;
}

void write_sensor_logs(const SensorStreams& streams, const std::string& dir)
{
    {
        auto out = open_out(dir + "/sensor_imu.csv");
        out << "time,phi,theta,psi\n";
        for (const auto& s : streams.imu) {
            out << stamp_text(stamp_to_seconds(s.stamp)) << ',' << num(s.att.phi) << ','
                << num(s.att.theta) << ',' << num(s.att.psi) << '\n';
        }
    }
    {
        auto out = open_out(dir + "/sensor_gps.csv");
        out << "time,v_n,v_e,v_d\n";
        for (const auto& s : streams.gps) {
            out << stamp_text(stamp_to_seconds(s.stamp)) << ',' << num(s.v_ned.x()) << ','
                << num(s.v_ned.y()) << ',' << num(s.v_ned.z()) << '\n';
        }
    }
    {
        auto out = open_out(dir + "/sensor_pitot.csv");
        out << "time,v_pitot\n";
        for (const auto& s : streams.pitot) {
            out << stamp_text(stamp_to_seconds(s.stamp)) << ',' << num(s.v_pitot) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------

Dataset generate_dataset(const std::vector<ScenarioSpec>& specs, const DatasetOptions& options)
{
    if (options.stride < 1) {
        throw std::invalid_argument("dataset stride must be >= 1");
    }
    std::vector<double> inputs;
    std::vector<double> targets;
    std::vector<std::int64_t> ids;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const Trajectory traj(specs[k]);
        const double duration = specs[k].run_duration();
        const auto streams = synthesize_sensors(traj, specs[k].noise, specs[k].seeds, duration,
                                                options.scheduler.rates);
        const auto ticks = schedule_streams(streams, duration, options.scheduler);
        for (std::size_t i = 0; i < ticks.size(); i += static_cast<std::size_t>(options.stride)) {
            const NnInput z = remap_inputs(ticks[i].filtered);
            inputs.insert(inputs.end(), z.data(), z.data() + kNnInputs);
            const TruthSample s = traj.at(ticks[i].time());
            targets.insert(targets.end(), {s.wind_n, s.wind_e, s.c_f});
            ids.push_back(static_cast<std::int64_t>(k));
        }
    }
    Dataset d;
    const auto n = static_cast<Eigen::Index>(ids.size());
    d.inputs = Eigen::Map<const Eigen::MatrixXd>(inputs.data(), kNnInputs, n);
    d.targets = Eigen::Map<const Eigen::MatrixXd>(targets.data(), kNnOutputs, n);
    d.scenario = std::move(ids);
    return d;
}

std::string file_fingerprint(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

} // namespace airwind
