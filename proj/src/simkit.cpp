#include "airwind/simkit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace airwind {

namespace {

std::uint64_t splitmix64(std::uint64_t& x)
{
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double segment_duration(const Segment& seg, double turn_rate)
{
    return seg.kind == Segment::Kind::Straight ? seg.value : std::abs(seg.value) / turn_rate;
}

Stamp period_quanta(int hz)
{
    if (hz <= 0 || kQuantaPerSecond % hz != 0) {
        throw std::invalid_argument("sensor rate " + std::to_string(hz) +
                                    " Hz does not divide the 3600 Hz time base");
    }
    return kQuantaPerSecond / hz;
}

} // namespace

NoiseSeeds NoiseSeeds::derive(std::uint64_t base)
{
    std::uint64_t state = base;
    NoiseSeeds s;
    s.imu = splitmix64(state);
    s.gps = splitmix64(state);
    s.pitot = splitmix64(state);
    return s;
}

void ScenarioSpec::validate() const
{
    if (!(airspeed > 0.0) || !(turn_rate > 0.0) || !(eta > 0.0)) {
        throw std::invalid_argument("scenario '" + name +
                                    "': airspeed, turn rate and eta must be positive");
    }
    for (const auto& seg : segments) {
        if (!std::isfinite(seg.value) || !(segment_duration(seg, turn_rate) > 0.0)) {
            throw std::invalid_argument("scenario '" + name +
                                        "': segment durations must be positive");
        }
    }
    for (const auto& w : wind) {
        if (!(w.speed >= 0.0) || !std::isfinite(w.start) || !std::isfinite(w.heading)) {
            throw std::invalid_argument("scenario '" + name + "': wind speeds must be >= 0");
        }
    }
    if (duration < 0.0 || !std::isfinite(duration)) {
        throw std::invalid_argument("scenario '" + name + "': negative duration");
    }
    if (run_duration() <= 0.0) {
        throw std::invalid_argument("scenario '" + name + "': empty run");
    }
    if (std::abs(alpha_amplitude) >= kPi / 4.0 || std::abs(beta_amplitude) >= kPi / 4.0 ||
        !(flow_angle_period > 0.0)) {
        throw std::invalid_argument("scenario '" + name + "': flow-angle stress out of range");
    }
    const auto neg = [](double s) { return !(s >= 0.0); };
    if (neg(noise.roll_pitch) || neg(noise.yaw) || neg(noise.ground_speed) || neg(noise.pitot)) {
        throw std::invalid_argument("scenario '" + name + "': noise sigmas must be >= 0");
    }
}

double ScenarioSpec::plan_duration() const
{
    double total = 0.0;
    for (const auto& seg : segments) {
        total += segment_duration(seg, turn_rate);
    }
    return total;
}

double ScenarioSpec::run_duration() const { return duration > 0.0 ? duration : plan_duration(); }

Eigen::Vector2d wind_at(const ScenarioSpec& spec, double t)
{
    const WindChange* active = nullptr;
    for (const auto& w : spec.wind) {
        if (w.start <= t && (!active || w.start >= active->start)) {
            active = &w;
        }
    }
    if (!active) {
        return Eigen::Vector2d::Zero();
    }
    return {active->speed * std::cos(active->heading), active->speed * std::sin(active->heading)};
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(ScenarioSpec spec) : spec_(std::move(spec))
{
    spec_.validate();
    double t = 0.0;
    double heading = spec_.initial_heading;
    for (const auto& seg : spec_.segments) {
        const double d = segment_duration(seg, spec_.turn_rate);
        const double rate = seg.kind == Segment::Kind::Turn
                                ? std::copysign(spec_.turn_rate, seg.value)
                                : 0.0;
        pieces_.push_back({t, t + d, heading, rate});
        t += d;
        heading += rate * d;
    }
    pieces_.push_back({t, std::numeric_limits<double>::infinity(), heading, 0.0});
}

double Trajectory::course_at(double t) const
{
    for (const auto& p : pieces_) {
        if (t < p.t1) {
            return p.heading0 + p.rate * (std::max(t, p.t0) - p.t0);
        }
    }
    return pieces_.back().heading0;
}

TruthSample Trajectory::at(double t) const
{
    TruthSample s;
    s.t = t;
    const double course = course_at(t);
    const double phase = 2.0 * kPi * t / spec_.flow_angle_period;
    const double alpha = spec_.alpha_amplitude * std::sin(phase);
    const double beta = spec_.beta_amplitude * std::cos(phase);

    // Pitching by alpha keeps the flight path level; yawing by -beta keeps the
    // air-relative velocity on the commanded course.
    s.att = {0.0, alpha, wrap_angle(course - beta)};
    const Eigen::Vector2d w = wind_at(spec_, t);
    s.wind_n = w.x();
    s.wind_e = w.y();
    s.v_ned = {spec_.airspeed * std::cos(course) + w.x(), spec_.airspeed * std::sin(course) + w.y(),
               0.0};
    s.c_f = std::sqrt(spec_.eta) * std::cos(alpha) * std::cos(beta);
    s.v_pitot = s.c_f * spec_.airspeed;
    s.pos = {0.0, 0.0, -spec_.altitude};
    return s;
}

std::vector<TruthSample> simulate_truth(const ScenarioSpec& spec, double rate_hz)
{
    if (!(rate_hz > 0.0)) {
        throw std::invalid_argument("truth rate must be positive");
    }
    const Trajectory traj(spec);
    const double dt = 1.0 / rate_hz;
    const auto n = static_cast<std::size_t>(std::floor(spec.run_duration() * rate_hz + 1e-9));
    std::vector<TruthSample> out;
    out.reserve(n);
    Vec3 pos(0.0, 0.0, -spec.altitude);
    for (std::size_t k = 0; k < n; ++k) {
        TruthSample s = traj.at(static_cast<double>(k) * dt);
        if (k > 0) {
            pos += 0.5 * dt * (out.back().v_ned + s.v_ned);
        }
        s.pos = pos;
        out.push_back(s);
    }
    return out;
}

SensorStreams synthesize_sensors(const Trajectory& truth, const SensorNoise& noise,
                                 const NoiseSeeds& seeds, double duration,
                                 const SensorRates& rates)
{
    const Stamp end = std::llround(duration * kQuantaPerSecond);
    SensorStreams out;

    {
        std::mt19937_64 rng(seeds.imu);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const Stamp step = period_quanta(rates.imu_hz);
        for (Stamp s = 0; s < end; s += step) {
            const TruthSample ts = truth.at(stamp_to_seconds(s));
            ImuSample m{s, ts.att};
            m.att.phi += noise.roll_pitch * gauss(rng);
            m.att.theta += noise.roll_pitch * gauss(rng);
            m.att.psi = wrap_angle(m.att.psi + noise.yaw * gauss(rng));
            out.imu.push_back(m);
        }
    }
    {
        std::mt19937_64 rng(seeds.gps);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const Stamp step = period_quanta(rates.gps_hz);
        for (Stamp s = 0; s < end; s += step) {
            GpsSample m{s, truth.at(stamp_to_seconds(s)).v_ned};
            for (int i = 0; i < 3; ++i) {
                m.v_ned(i) += noise.ground_speed * gauss(rng);
            }
            out.gps.push_back(m);
        }
    }
    {
        std::mt19937_64 rng(seeds.pitot);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const Stamp step = period_quanta(rates.pitot_hz);
        for (Stamp s = 0; s < end; s += step) {
            const double v = truth.at(stamp_to_seconds(s)).v_pitot + noise.pitot * gauss(rng);
            out.pitot.push_back({s, std::max(v, 0.0)});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario catalogue

namespace {

Segment straight(double seconds) { return {Segment::Kind::Straight, seconds}; }
Segment turn(double degrees) { return {Segment::Kind::Turn, deg2rad(degrees)}; }

std::string fmt_deg(double deg)
{
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, deg);
    return {buf, end};
}

} // namespace

std::vector<ScenarioSpec> base_training_plans()
{
    // (a) clockwise rectangle, 420 m x 262.5 m legs; (b) anticlockwise
    // triangle. Both are closed circuits lasting 300 s at 7 m/s.
    ScenarioSpec a;
    a.name = "a";
    a.segments = {straight(52.5), turn(90), straight(37.5), turn(90),
                  straight(52.5), turn(90), straight(37.5), turn(90)};
    ScenarioSpec b;
    b.name = "b";
    b.segments = {straight(60), turn(-120), straight(60), turn(-120), straight(60), turn(-120)};
    return {a, b};
}

std::vector<ScenarioSpec> training_grid(const GridOptions& options)
{
    if (options.trajectories < 1 || options.trajectories > 16 || options.headings < 1) {
        throw std::invalid_argument("grid needs 1..16 trajectories and >= 1 wind heading");
    }
    const auto plans = base_training_plans();
    std::vector<ScenarioSpec> grid;
    std::uint64_t index = 0;
    for (int v = 0; v < options.trajectories; ++v) {
        ScenarioSpec base = plans[static_cast<std::size_t>(v % 2)];
        const double rot_deg = 45.0 * (v / 2);
        base.initial_heading = deg2rad(rot_deg);
        base.eta = options.eta;
        const std::string stem = base.name + "_r" + fmt_deg(rot_deg);

        bool zero_done = false;
        for (double speed : options.speeds) {
            if (speed < 0.0) {
                throw std::invalid_argument("grid wind speeds must be >= 0");
            }
            const int nh = speed == 0.0 ? 1 : options.headings;
            if (speed == 0.0) {
                if (zero_done) {
                    continue;
                }
                zero_done = true;
            }
            for (int h = 0; h < nh; ++h) {
                const double hdg = 360.0 * h / options.headings;
                ScenarioSpec s = base;
                s.name = stem + "_w" + fmt_deg(speed) + "_h" + fmt_deg(speed == 0.0 ? 0.0 : hdg);
                s.wind = {{0.0, speed, deg2rad(speed == 0.0 ? 0.0 : hdg)}};
                s.seeds = NoiseSeeds::derive(options.seed + 7919 * index++);
                grid.push_back(std::move(s));
            }
        }
    }
    return grid;
}

ScenarioSpec reference_scenario(int which)
{
    ScenarioSpec s;
    s.segments = {straight(20), turn(90),   straight(30), turn(90),  straight(20),
                  turn(-90),    straight(10), turn(-90), straight(20), turn(180),
                  straight(20), turn(90),   straight(10)};
    s.duration = 320.0;
    if (which == 1) {
        s.name = "scenario1";
        s.wind = {{0.0, 2.0, kPi / 2.0}, {160.0, 3.0, kPi}};
        s.seeds = NoiseSeeds::derive(101);
    } else if (which == 2) {
        s.name = "scenario2";
        s.wind = {{0.0, 2.0, 0.0}, {160.0, 3.0, kPi / 2.0}};
        s.seeds = NoiseSeeds::derive(202);
    } else {
        throw std::invalid_argument("reference scenarios are numbered 1 and 2");
    }
    return s;
}

// ---------------------------------------------------------------------------
// Scenario text format

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& tok, int lineno)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": bad number '" +
                                    tok + "'");
    }
    return v;
}

std::uint64_t to_u64(const std::string& tok, int lineno)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw std::invalid_argument("scenario line " + std::to_string(lineno) +
                                    ": bad integer '" + tok + "'");
    }
    return v;
}

std::string num(double v)
{
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, end};
}

} // namespace

ScenarioSpec parse_scenario(std::istream& in)
{
    ScenarioSpec s;
    s.segments.clear();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto fail = [&](const std::string& what) {
            throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": " + what);
        };

        if (const auto eq = line.find('='); eq != std::string::npos) {
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key == "name") {
                s.name = val;
            } else if (key == "noise") {
                if (val == "zero") {
                    s.noise = SensorNoise::zero();
                } else if (val == "default") {
                    s.noise = SensorNoise{};
                } else {
                    fail("noise must be 'default' or 'zero'");
                }
            } else if (key == "seed") {
                s.seeds = NoiseSeeds::derive(to_u64(val, lineno));
            } else if (key == "seed_imu") {
                s.seeds.imu = to_u64(val, lineno);
            } else if (key == "seed_gps") {
                s.seeds.gps = to_u64(val, lineno);
            } else if (key == "seed_pitot") {
                s.seeds.pitot = to_u64(val, lineno);
            } else {
                const double v = to_double(val, lineno);
                if (key == "airspeed") {
                    s.airspeed = v;
                } else if (key == "altitude") {
                    s.altitude = v;
                } else if (key == "eta") {
                    s.eta = v;
                } else if (key == "turn_rate_deg") {
                    s.turn_rate = deg2rad(v);
                } else if (key == "initial_heading_deg") {
                    s.initial_heading = deg2rad(v);
                } else if (key == "duration") {
                    s.duration = v;
                } else if (key == "sigma_roll_pitch") {
                    s.noise.roll_pitch = v;
                } else if (key == "sigma_yaw") {
                    s.noise.yaw = v;
                } else if (key == "sigma_ground_speed") {
                    s.noise.ground_speed = v;
                } else if (key == "sigma_pitot") {
                    s.noise.pitot = v;
                } else if (key == "alpha_amplitude_deg") {
                    s.alpha_amplitude = deg2rad(v);
                } else if (key == "beta_amplitude_deg") {
                    s.beta_amplitude = deg2rad(v);
                } else if (key == "flow_angle_period") {
                    s.flow_angle_period = v;
                } else {
                    fail("unknown key '" + key + "'");
                }
            }
            continue;
        }

        std::istringstream ss(line);
        std::string word;
        ss >> word;
        std::vector<std::string> args;
        for (std::string tok; ss >> tok;) {
            args.push_back(tok);
        }
        if (word == "wind") {
            if (args.size() != 3) {
                fail("expected 'wind <start_s> <speed> <heading_deg>'");
            }
            s.wind.push_back({to_double(args[0], lineno), to_double(args[1], lineno),
                              deg2rad(to_double(args[2], lineno))});
        } else if (word == "segment") {
            if (args.size() != 2) {
                fail("expected 'segment straight <s>' or 'segment turn <deg>'");
            }
            if (args[0] == "straight") {
                s.segments.push_back(straight(to_double(args[1], lineno)));
            } else if (args[0] == "turn") {
                s.segments.push_back(turn(to_double(args[1], lineno)));
            } else {
                fail("unknown segment kind '" + args[0] + "'");
            }
        } else {
            fail("unrecognised line '" + line + "'");
        }
    }
    s.validate();
    return s;
}

ScenarioSpec load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open scenario file '" + path + "'");
    }
    return parse_scenario(in);
}

std::string format_scenario(const ScenarioSpec& s)
{
    std::ostringstream os;
    os << "name = " << s.name << '\n'
       << "airspeed = " << num(s.airspeed) << '\n'
       << "altitude = " << num(s.altitude) << '\n'
       << "eta = " << num(s.eta) << '\n'
       << "turn_rate_deg = " << num(rad2deg(s.turn_rate)) << '\n'
       << "initial_heading_deg = " << num(rad2deg(s.initial_heading)) << '\n'
       << "duration = " << num(s.duration) << '\n'
       << "seed_imu = " << s.seeds.imu << '\n'
       << "seed_gps = " << s.seeds.gps << '\n'
       << "seed_pitot = " << s.seeds.pitot << '\n'
       << "sigma_roll_pitch = " << num(s.noise.roll_pitch) << '\n'
       << "sigma_yaw = " << num(s.noise.yaw) << '\n'
       << "sigma_ground_speed = " << num(s.noise.ground_speed) << '\n'
       << "sigma_pitot = " << num(s.noise.pitot) << '\n';
    if (s.alpha_amplitude != 0.0 || s.beta_amplitude != 0.0) {
        os << "alpha_amplitude_deg = " << num(rad2deg(s.alpha_amplitude)) << '\n'
           << "beta_amplitude_deg = " << num(rad2deg(s.beta_amplitude)) << '\n'
           << "flow_angle_period = " << num(s.flow_angle_period) << '\n';
    }
    for (const auto& w : s.wind) {
        os << "wind " << num(w.start) << ' ' << num(w.speed) << ' ' << num(rad2deg(w.heading))
           << '\n';
    }
    for (const auto& seg : s.segments) {
        if (seg.kind == Segment::Kind::Straight) {
            os << "segment straight " << num(seg.value) << '\n';
        } else {
            os << "segment turn " << num(rad2deg(seg.value)) << '\n';
        }
    }
    return os.str();
}

} // namespace airwind
