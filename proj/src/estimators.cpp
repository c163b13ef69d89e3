#include "airwind/estimators.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace airwind {

namespace {

bool symmetric_psd(const Eigen::MatrixXd& m, bool strictly_positive)
{
    if (m.rows() != m.cols() || !m.allFinite()) {
        return false;
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
        return false;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    return strictly_positive ? lo > 0.0 : lo >= -1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
}

} // namespace

void EstimatorConfig::validate() const
{
    const int dim = measurement_dim(variant);
    if (r.rows() != dim || r.cols() != dim) {
        throw std::invalid_argument("R is " + std::to_string(r.rows()) + "x" +
                                    std::to_string(r.cols()) + ", variant " +
                                    std::string(variant_name(variant)) + " needs " +
                                    std::to_string(dim) + "x" + std::to_string(dim));
    }
    if (!symmetric_psd(q, false)) {
        throw std::invalid_argument("Q must be symmetric positive semidefinite");
    }
    if (!symmetric_psd(p0, false)) {
        throw std::invalid_argument("P0 must be symmetric positive semidefinite");
    }
    if (!symmetric_psd(r, true)) {
        throw std::invalid_argument("R must be symmetric positive definite");
    }
    if (!(cf_floor > 0.0)) {
        throw std::invalid_argument("c_f floor must be positive");
    }
    if (!x0.vec().allFinite() || x0.c_f < cf_floor) {
        throw std::invalid_argument("initial state must be finite with c_f above the floor");
    }
}

EstimatorConfig default_config(MeasurementVariant variant)
{
    EstimatorConfig c;
    c.variant = variant;
    c.p0 = Vec3(4.0, 4.0, 0.25).asDiagonal();
    switch (variant) {
    case MeasurementVariant::Cho2011:
        c.q = Vec3(1e-3, 1e-4, 5e-6).asDiagonal();
        c.r = Eigen::MatrixXd::Constant(1, 1, 163.84);
        break;
    case MeasurementVariant::ThreeEq:
        c.q = Vec3(1e-4, 1e-4, 5e-7).asDiagonal();
        c.r = Eigen::VectorXd::Constant(3, 40.96).asDiagonal();
        break;
    case MeasurementVariant::Hybrid:
        c.q = Vec3(1e-4, 1e-4, 5e-7).asDiagonal();
        c.r = Eigen::VectorXd::Constant(6, 10.24).asDiagonal();
        break;
    }
    return c;
}

FilterEstimate predict(const FilterEstimate& prior, const EstimatorConfig& config)
{
    const Mat3 F = process_model();
    FilterEstimate out;
    out.state = WindState::from_vec(F * prior.state.vec());
    out.cov = F * prior.cov * F.transpose() + config.q;
    out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
    return out;
}

UpdateResult update(const FilterEstimate& predicted, const Eigen::VectorXd& z,
                    const MeasurementFrame& frame, const EstimatorConfig& config,
                    const std::optional<WindState>& nn_out)
{
    const int dim = measurement_dim(config.variant);
    if (z.size() != dim) {
        throw std::invalid_argument("measurement has " + std::to_string(z.size()) +
                                    " rows, variant expects " + std::to_string(dim));
    }

    UpdateResult res{predicted, {}};
    FilterHealth& health = res.health;

    const Eigen::VectorXd h =
        observe(predicted.state, frame, config.variant,
                config.variant == MeasurementVariant::Hybrid ? nn_out : std::nullopt,
                config.cf_floor);
    const Eigen::MatrixXd H = jacobian(predicted.state, frame, config.variant, config.cf_floor);
    const Eigen::MatrixXd& P = predicted.cov;

    health.innovation = z - h;
    health.innovation_cov = H * P * H.transpose() + config.r;

    const Eigen::LLT<Eigen::MatrixXd> llt(health.innovation_cov);
    if (!health.innovation.allFinite() || !health.innovation_cov.allFinite() ||
        llt.info() != Eigen::Success || llt.rcond() < 1e-15) {
        health.update_skipped = true;
        return res;
    }

    // K = P H^T C^-1, computed as (C^-1 H P)^T since C and P are symmetric.
    const Eigen::MatrixXd K = llt.solve(H * P).transpose();
    health.nis = health.innovation.dot(llt.solve(health.innovation));

    Vec3 x = predicted.state.vec() + K * health.innovation;
    Mat3 Pn = (Mat3::Identity() - K * H) * P;
    Pn = (0.5 * (Pn + Pn.transpose())).eval();
    if (!x.allFinite() || !Pn.allFinite()) {
        health.update_skipped = true;
        return res;
    }
    if (x(2) < config.cf_floor) {
        x(2) = config.cf_floor;
        health.cf_clamped = true;
    }
    res.estimate.state = WindState::from_vec(x);
    res.estimate.cov = Pn;
    return res;
}

WindEkf::WindEkf(EstimatorConfig config) : config_(std::move(config))
{
    config_.validate();
    reset();
}

void WindEkf::reset()
{
    est_.state = config_.x0;
    est_.cov = config_.p0;
    health_ = {};
}

void WindEkf::predict() { est_ = airwind::predict(est_, config_); }

const FilterHealth& WindEkf::update(const MeasurementFrame& frame,
                                    const std::optional<WindState>& nn_out)
{
    auto res = airwind::update(est_, measurement_vector(frame, config_.variant, nn_out), frame,
                               config_, nn_out);
    est_ = res.estimate;
    health_ = std::move(res.health);
    return health_;
}

const WindState& WindEkf::step(const MeasurementFrame& frame,
                               const std::optional<WindState>& nn_out)
{
    predict();
    update(frame, nn_out);
    return est_.state;
}

// ---------------------------------------------------------------------------
// Config text format

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& text, const std::string& key)
{
    std::vector<double> out;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw std::invalid_argument("config key '" + key + "': bad number '" + tok + "'");
        }
        out.push_back(v);
    }
    return out;
}

Eigen::VectorXd expect_n(const std::vector<double>& v, std::size_t n, const std::string& key)
{
    if (v.size() != n) {
        throw std::invalid_argument("config key '" + key + "' expects " + std::to_string(n) +
                                    " values, got " + std::to_string(v.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
}

void append_diag(std::ostringstream& os, const char* key, const Eigen::MatrixXd& m)
{
    os << key << " =";
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, m(i, i));
        os << ' ' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    os << '\n';
}

} // namespace

EstimatorConfig parse_config(std::istream& in)
{
    std::map<std::string, std::string> kv;
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
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        }
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    const auto vit = kv.find("variant");
    if (vit == kv.end()) {
        throw std::invalid_argument("config is missing 'variant'");
    }
    EstimatorConfig c = default_config(parse_variant(vit->second));
    const auto dim = static_cast<std::size_t>(measurement_dim(c.variant));
    for (const auto& [key, value] : kv) {
        if (key == "variant") {
            continue;
        }
        const auto nums = parse_numbers(value, key);
        if (key == "q") {
            c.q = expect_n(nums, 3, key).asDiagonal();
        } else if (key == "p0") {
            c.p0 = expect_n(nums, 3, key).asDiagonal();
        } else if (key == "r") {
            c.r = expect_n(nums, dim, key).asDiagonal();
        } else if (key == "x0") {
            c.x0 = WindState::from_vec(expect_n(nums, 3, key));
        } else if (key == "cf_floor") {
            c.cf_floor = expect_n(nums, 1, key)(0);
        } else {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

EstimatorConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open estimator config '" + path + "'");
    }
    return parse_config(in);
}

std::string format_config(const EstimatorConfig& config)
{
    std::ostringstream os;
    os << "variant = " << variant_name(config.variant) << '\n';
    append_diag(os, "q", config.q);
    append_diag(os, "r", config.r);
    append_diag(os, "p0", config.p0);
    append_diag(os, "x0", Eigen::MatrixXd(config.x0.vec().asDiagonal()));
    append_diag(os, "cf_floor", Eigen::MatrixXd::Constant(1, 1, config.cf_floor));
    return os.str();
}

} // namespace airwind
