// Acceptance suite: one test per criterion, followed by a one-line verdict
// per criterion on stdout.

#include "airwind/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

using namespace airwind;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    std::string title;
    bool passed = false;
    std::string detail;
};

std::map<int, Verdict>& verdicts()
{
    static std::map<int, Verdict> v;
    return v;
}

std::string g_cli_path;

class Acceptance : public ::testing::Test {
protected:
    void begin(int id, std::string title)
    {
        id_ = id;
        verdicts()[id].title = std::move(title);
    }
    void note(const std::string& s)
    {
        auto& d = verdicts()[id_].detail;
        d += (d.empty() ? "" : "; ") + s;
    }
    void TearDown() override
    {
        if (id_ > 0) {
            verdicts()[id_].passed = !HasFailure();
        }
    }

private:
    int id_ = 0;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4)
{
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

// ---------------------------------------------------------------------------

TEST_F(Acceptance, JacobianOracle)
{
    begin(1, "Jacobian matches central finite differences at 1000 random points");
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> wind(-5, 5), cf(0.5, 1.5), unit(-1, 1),
        ang(-kPi, kPi), pitch(-1.4, 1.4), mag(0, 10);
    const double h = 1e-6;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const WindState chi{wind(rng), wind(rng), cf(rng)};
        Vec3 v(unit(rng), unit(rng), unit(rng));
        v = v.normalized() * mag(rng);
        const MeasurementFrame f{mag(rng), v.x(), v.y(), v.z(), {ang(rng), pitch(rng), ang(rng)}};
        const Eigen::MatrixXd a = jacobian(chi, f, MeasurementVariant::ThreeEq);
        for (int j = 0; j < 3; ++j) {
            Vec3 xp = chi.vec(), xm = chi.vec();
            xp(j) += h;
            xm(j) -= h;
            const Eigen::VectorXd fd = (observe(WindState::from_vec(xp), f, MeasurementVariant::ThreeEq) -
                                        observe(WindState::from_vec(xm), f, MeasurementVariant::ThreeEq)) /
                                       (2 * h);
            for (int i = 0; i < 3; ++i) {
                const double scale = std::max({1.0, std::abs(a(i, j)), std::abs(fd(i))});
                worst = std::max(worst, std::abs(a(i, j) - fd(i)) / scale);
            }
        }
    }
    const double elapsed = seconds_since(t0);
    note("max rel error " + fmt(worst) + ", " + fmt(elapsed, 3) + " s");
    EXPECT_LT(worst, 1e-6);
    EXPECT_LT(elapsed, 5.0);
}

TEST_F(Acceptance, NoiselessConvergence)
{
    begin(2, "noiseless scenario 1: EKF converges within 60 s of first turn and of the wind step");
    const auto t0 = Clock::now();
    ScenarioSpec s = reference_scenario(1);
    s.noise = SensorNoise::zero();
    s.eta = 1.0;
    RunOptions o;
    o.estimators = {EstimatorKind::Ekf};
    const RunLog log = run_scenario(s, o);
    const double elapsed = seconds_since(t0);

    // First heading change of the path: end of the first straight leg.
    ASSERT_EQ(s.segments.front().kind, Segment::Kind::Straight);
    const double first_turn = s.segments.front().value;
    const double step = 160.0;
    const auto& est = log.find(EstimatorKind::Ekf)->states;

    // Converged by the deadline and staying converged until the next event.
    const auto last_violation = [&](double from, double to) {
        double last = -1.0;
        for (std::size_t i = 0; i < log.time.size(); ++i) {
            const double t = log.time[i];
            if (t < from || t >= to) {
                continue;
            }
            const WindState& w = log.truth[i].wind;
            const double e = std::hypot(est[i].v_nw - w.v_nw, est[i].v_ew - w.v_ew);
            if (!(e < 0.05) || !(std::abs(est[i].c_f - w.c_f) < 0.01)) {
                last = t;
            }
        }
        return last;
    };
    const double end = s.run_duration();
    const double last1 = last_violation(first_turn, step);
    const double last2 = last_violation(step, end);
    note("initial: last violation at t=" + fmt(last1, 5) + " s (deadline " +
         fmt(first_turn + 60, 4) + ")");
    note("after step: last violation at t=" + fmt(last2, 5) + " s (deadline " +
         fmt(step + 60, 4) + ")");
    note(fmt(elapsed, 3) + " s");
    EXPECT_LT(last1, first_turn + 60.0) << "initial convergence too slow";
    EXPECT_LT(last2, step + 60.0) << "no re-convergence within 60 s of the wind step";
    EXPECT_LT(elapsed, 10.0);
}

TEST_F(Acceptance, BaselineOrdering)
{
    begin(3, "median full-run RMS over 25 noisy runs: EKF below Cho2011 for both components");
    const auto t0 = Clock::now();
    std::vector<double> cho_n, cho_e, ekf_n, ekf_e;
    for (int k = 0; k < 25; ++k) {
        ScenarioSpec s = reference_scenario(1);
        s.seeds = NoiseSeeds::derive(5000 + k);
        RunOptions o;
        o.estimators = {EstimatorKind::Cho2011, EstimatorKind::Ekf};
        const RmsReport r = compute_rms(run_scenario(s, o));
        cho_n.push_back(r.find("cho2011")->rms_n);
        cho_e.push_back(r.find("cho2011")->rms_e);
        ekf_n.push_back(r.find("ekf")->rms_n);
        ekf_e.push_back(r.find("ekf")->rms_e);
    }
    const double elapsed = seconds_since(t0);
    note("cho2011 (" + fmt(median(cho_n)) + ", " + fmt(median(cho_e)) + "), ekf (" +
         fmt(median(ekf_n)) + ", " + fmt(median(ekf_e)) + ") m/s, " + fmt(elapsed, 3) + " s");
    EXPECT_LT(median(ekf_n), median(cho_n));
    EXPECT_LT(median(ekf_e), median(cho_e));
    EXPECT_LT(elapsed, 180.0);
}

TEST_F(Acceptance, HybridDegeneracy)
{
    begin(4, "hybrid with network rows scaled by 1e9 tracks the three-equation EKF within 1e-6");
    const ScenarioSpec s = reference_scenario(1);
    EstimatorConfig hc = default_config(MeasurementVariant::Hybrid);
    hc.r.diagonal().tail<3>() *= 1e9;
    EstimatorConfig ec = default_config(MeasurementVariant::ThreeEq);
    ec.q = hc.q;
    ec.r = hc.r.topLeftCorner<3, 3>();
    RunOptions o;
    o.estimators = {EstimatorKind::Ekf, EstimatorKind::Hybrid};
    o.configs[EstimatorKind::Ekf] = ec;
    o.configs[EstimatorKind::Hybrid] = hc;
    o.nn = oracle_source(s, Vec3(0.3, 0.3, 0.0));
    const RunLog log = run_scenario(s, o);
    const auto& a = log.find(EstimatorKind::Ekf)->states;
    const auto& b = log.find(EstimatorKind::Hybrid)->states;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, (a[i].vec() - b[i].vec()).cwiseAbs().maxCoeff());
    }
    note("max per-tick difference " + fmt(worst) + " over " + std::to_string(a.size()) +
         " ticks");
    EXPECT_LT(worst, 1e-6);
}

TEST_F(Acceptance, HybridBenefit)
{
    begin(5, "biased oracle network: hybrid East RMS below EKF in at least 20 of 25 runs");
    int wins = 0;
    for (int k = 0; k < 25; ++k) {
        ScenarioSpec s = reference_scenario(1);
        s.seeds = NoiseSeeds::derive(7000 + k);
        RunOptions o;
        o.estimators = {EstimatorKind::Ekf, EstimatorKind::Hybrid};
        o.nn = oracle_source(s, Vec3(0.3, 0.3, 0.0));
        const RmsReport r = compute_rms(run_scenario(s, o));
        wins += r.find("hybrid")->rms_e < r.find("ekf")->rms_e;
    }
    note(std::to_string(wins) + "/25 runs");
    EXPECT_GE(wins, 20);
}

TEST_F(Acceptance, NetworkTrainingSanity)
{
    begin(6, "reduced grid, 2000 SCG epochs: test MSE <= 0.05, pooled R >= 0.95, deterministic");
    const auto t0 = Clock::now();
    GridOptions g;
    g.trajectories = 2;
    g.speeds = {1.0, 3.0, 5.0};
    g.headings = 8;
    const auto specs = training_grid(g);
    ASSERT_EQ(specs.size(), 48u);
    DatasetOptions dopt;
    dopt.stride = 16;
    Dataset d = generate_dataset(specs, dopt);
    assign_splits(d, 7);
    TrainOptions topt;
    topt.epochs = 2000;
    topt.seed = 1;
    const TrainResult a = train_scg(d, topt);
    const double first = seconds_since(t0);
    const TrainResult b = train_scg(d, topt);
    const double elapsed = seconds_since(t0);

    ASSERT_TRUE(a.report.metrics[2].has_value());
    const SplitMetrics& test = *a.report.metrics[2];
    ASSERT_TRUE(test.r.has_value());
    note(std::to_string(d.size()) + " rows, test MSE " + fmt(test.mse) + ", R " +
         fmt(*test.r, 5) + ", best epoch " + std::to_string(a.report.best_epoch));
    note(fmt(first, 4) + " s per training run, " + fmt(elapsed, 4) + " s total");
    EXPECT_LE(test.mse, 0.05);
    EXPECT_GE(*test.r, 0.95);
    EXPECT_EQ(format_model(a.model), format_model(b.model));
    EXPECT_EQ(a.report.train_mse, b.report.train_mse);
    EXPECT_EQ(a.report.validation_mse, b.report.validation_mse);
    EXPECT_LT(elapsed, 900.0);
}

TEST_F(Acceptance, GradientCheck)
{
    begin(7, "training gradient matches finite differences on a 3-row dataset");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::MatrixXd x(kNnInputs, 3), t(kNnOutputs, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i) = u(rng);
    }
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        t(i) = u(rng);
    }
    const MlpModel m = MlpModel::random(17);
    Eigen::VectorXd g;
    mse_and_gradient(m, x, t, &g);
    const Eigen::VectorXd p = m.flatten();
    const double h = 1e-6;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        MlpModel mp = m, mm = m;
        Eigen::VectorXd pp = p, pm = p;
        pp(i) += h;
        pm(i) -= h;
        mp.unflatten(pp);
        mm.unflatten(pm);
        const double fd = (mse_and_gradient(mp, x, t, nullptr) - mse_and_gradient(mm, x, t, nullptr)) /
                          (2 * h);
        worst = std::max(worst, std::abs(fd - g(i)) / std::max(1e-3, std::abs(g(i))));
    }
    note("max rel error " + fmt(worst) + " over " + std::to_string(p.size()) + " parameters");
    EXPECT_LT(worst, 1e-5);
}

TEST_F(Acceptance, LowPassStepResponse)
{
    begin(8, "low-pass unit step equals 1 - exp(-t/tau) at tau, 2 tau, 3 tau");
    const double tau = 1.5, ts = 0.0625;
    LowPass f(tau, ts);
    f.step(0.0);
    double worst = 0.0;
    int n = 0;
    for (int k = 1; k <= 3; ++k) {
        const int target = static_cast<int>(std::lround(k * tau / ts));
        double y = 0.0;
        while (n < target) {
            y = f.step(1.0);
            ++n;
        }
        worst = std::max(worst, std::abs(y - (1.0 - std::exp(-k))));
    }
    note("max error " + fmt(worst));
    EXPECT_LT(worst, 1e-6);
}

TEST_F(Acceptance, SchedulerRates)
{
    begin(9, "100 s run: 10000 IMU, 400 GPS, 1800 Pitot samples, 1600 ticks, 4 ticks per GPS");
    ScenarioSpec s = reference_scenario(1);
    s.duration = 100.0;
    const SensorStreams st = synthesize_sensors(Trajectory(s), s.noise, s.seeds, 100.0);
    const auto ticks = schedule_streams(st, 100.0);
    std::map<Stamp, int> reuse;
    for (const auto& t : ticks) {
        ++reuse[t.gps_stamp];
    }
    const bool all_four =
        std::all_of(reuse.begin(), reuse.end(), [](const auto& kv) { return kv.second == 4; });
    note(std::to_string(st.imu.size()) + "/" + std::to_string(st.gps.size()) + "/" +
         std::to_string(st.pitot.size()) + " samples, " + std::to_string(ticks.size()) + " ticks");
    EXPECT_EQ(st.imu.size(), 10000u);
    EXPECT_EQ(st.gps.size(), 400u);
    EXPECT_EQ(st.pitot.size(), 1800u);
    EXPECT_EQ(ticks.size(), 1600u);
    EXPECT_EQ(reuse.size(), 400u);
    EXPECT_TRUE(all_four);
}

TEST_F(Acceptance, FilterHealth)
{
    begin(10, "covariance symmetric with non-negative diagonal over 1e5 random steps, all finite");
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1, 1);
    std::size_t bad = 0, skipped = 0;
    for (auto v : {MeasurementVariant::Cho2011, MeasurementVariant::ThreeEq,
                   MeasurementVariant::Hybrid}) {
        WindEkf ekf(default_config(v));
        for (int i = 0; i < 100000; ++i) {
            const MeasurementFrame f{std::abs(8 * u(rng)), 10 * u(rng), 10 * u(rng), u(rng),
                                     {0.3 * u(rng), 0.3 * u(rng), kPi * u(rng)}};
            ekf.step(f, WindState{5 * u(rng), 5 * u(rng), 1 + 0.5 * u(rng)});
            const Mat3& p = ekf.covariance();
            const bool ok = p == p.transpose() && (p.diagonal().array() >= 0).all() &&
                            p.allFinite() && ekf.state().vec().allFinite() &&
                            ekf.state().c_f >= ekf.config().cf_floor;
            bad += !ok;
            skipped += ekf.health().update_skipped;
        }
    }
    // Scenario runs throw on any non-finite estimate or covariance.
    std::size_t runs = 0;
    for (int which : {1, 2}) {
        for (bool noisy : {false, true}) {
            ScenarioSpec s = reference_scenario(which);
            if (!noisy) {
                s.noise = SensorNoise::zero();
            }
            RunOptions o;
            o.nn = oracle_source(s, Vec3(0.3, 0.3, 0.0));
            EXPECT_NO_THROW(run_scenario(s, o));
            ++runs;
        }
    }
    note(std::to_string(bad) + " unhealthy of 300000 random steps (" + std::to_string(skipped) +
         " skipped updates), " + std::to_string(runs) + " scenario runs checked per tick");
    EXPECT_EQ(bad, 0u);
}

TEST_F(Acceptance, ManifestReplayDeterminism)
{
    begin(11, "replaying a run manifest reproduces logs and reports byte for byte");
    ASSERT_FALSE(g_cli_path.empty()) << "pass --cli <path to airwind>";
    const fs::path root = fs::temp_directory_path() / "airwind_acceptance_replay";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path model = root / "model.txt";
    save_model(MlpModel::random(5), model.string());

    const std::string cli = "\"" + g_cli_path + "\"";
    const std::string first = cli + " run --builtin 1 --estimators cho2011,ekf,nn,hybrid --model \"" +
                              model.string() + "\" --burn-in 20 --out \"" +
                              (root / "a").string() + "\" > \"" + (root / "a.log").string() +
                              "\" 2>&1";
    ASSERT_EQ(std::system(first.c_str()), 0) << slurp(root / "a.log");
    const std::string replay = cli + " run --manifest \"" + (root / "a" / "run_manifest.json").string() +
                               "\" --out \"" + (root / "b").string() + "\" > \"" +
                               (root / "b.log").string() + "\" 2>&1";
    ASSERT_EQ(std::system(replay.c_str()), 0) << slurp(root / "b.log");

    int compared = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        const fs::path other = root / "b" / entry.path().filename();
        ASSERT_TRUE(fs::exists(other)) << other;
        EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
        ++compared;
    }
    EXPECT_EQ(slurp(root / "a.log"), slurp(root / "b.log"));
    note(std::to_string(compared) + " files compared");
    EXPECT_GE(compared, 8);
    fs::remove_all(root);
}

// ---------------------------------------------------------------------------

int main(int argc, char** argv)
{
    ::testing::InitGoogleTest(&argc, argv);
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") {
            g_cli_path = argv[i + 1];
        }
    }
    const int rc = RUN_ALL_TESTS();

    std::printf("\nAcceptance criteria\n");
    int passed = 0;
    for (const auto& [id, v] : verdicts()) {
        passed += v.passed;
        std::printf("  [%2d] %s  %s\n       %s\n", id, v.passed ? "PASS" : "FAIL", v.title.c_str(),
                    v.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", passed, verdicts().size());
    return rc;
}
