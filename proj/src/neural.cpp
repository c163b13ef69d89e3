#include "airwind/neural.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace airwind {

namespace {

constexpr std::array<int, kNnLayers + 1> kWidths{kNnInputs, kNnHidden, kNnHidden, kNnHidden,
                                                  kNnOutputs};

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& x) { return 1.0 / (1.0 + (-x).exp()); }

std::string num(double v)
{
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, end};
}

Eigen::MatrixXd normalize_cols(const Normalization& n, const Eigen::MatrixXd& x)
{
    return ((x.colwise() - n.shift).array().colwise() / n.scale.array()).matrix();
}

Eigen::MatrixXd denormalize_cols(const Normalization& n, const Eigen::MatrixXd& x)
{
    return ((x.array().colwise() * n.scale.array()).matrix().colwise() + n.shift);
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx)
{
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.col(static_cast<Eigen::Index>(i)) = m.col(idx[i]);
    }
    return out;
}

/// Hidden stack on already-normalized inputs; returns normalized outputs and
/// optionally every layer's activation.
Eigen::MatrixXd forward_normalized(const MlpModel& model, const Eigen::MatrixXd& x,
                                   std::array<Eigen::MatrixXd, kNnLayers>* acts)
{
    Eigen::MatrixXd a = x;
    for (int l = 0; l < kNnHiddenLayers; ++l) {
        if (acts) {
            (*acts)[static_cast<std::size_t>(l)] = a;
        }
        Eigen::MatrixXd z = model.weights[static_cast<std::size_t>(l)] * a;
        z.colwise() += model.biases[static_cast<std::size_t>(l)];
        a = sigmoid(z.array()).matrix();
    }
    if (acts) {
        (*acts)[kNnHiddenLayers] = a;
    }
    Eigen::MatrixXd y = model.weights[kNnHiddenLayers] * a;
    y.colwise() += model.biases[kNnHiddenLayers];
    return y;
}

} // namespace

Normalization Normalization::identity(int n)
{
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

Normalization Normalization::min_max(const Eigen::MatrixXd& data)
{
    const Eigen::Index n = data.rows();
    Normalization out = identity(static_cast<int>(n));
    if (data.cols() == 0) {
        return out;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lo = data.row(i).minCoeff();
        const double hi = data.row(i).maxCoeff();
        out.shift(i) = 0.5 * (hi + lo);
        out.scale(i) = hi > lo ? 0.5 * (hi - lo) : 1.0;
    }
    return out;
}

MlpModel MlpModel::zeros()
{
    MlpModel m;
    for (std::size_t l = 0; l < kNnLayers; ++l) {
        m.weights[l] = Eigen::MatrixXd::Zero(kWidths[l + 1], kWidths[l]);
        m.biases[l] = Eigen::VectorXd::Zero(kWidths[l + 1]);
    }
    m.input_norm = Normalization::identity(kNnInputs);
    m.output_norm = Normalization::identity(kNnOutputs);
    return m;
}

MlpModel MlpModel::random(std::uint64_t seed)
{
    MlpModel m = zeros();
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < kNnLayers; ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(kWidths[l]));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j) {
            for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i) {
                m.weights[l](i, j) = u(rng);
            }
        }
        for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) {
            m.biases[l](i) = u(rng);
        }
    }
    return m;
}

std::size_t MlpModel::parameter_count() const
{
    std::size_t n = 0;
    for (std::size_t l = 0; l < kNnLayers; ++l) {
        n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    }
    return n;
}

Eigen::VectorXd MlpModel::flatten() const
{
    Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < kNnLayers; ++l) {
        p.segment(k, weights[l].size()) = weights[l].reshaped();
        k += weights[l].size();
        p.segment(k, biases[l].size()) = biases[l];
        k += biases[l].size();
    }
    return p;
}

void MlpModel::unflatten(const Eigen::VectorXd& p)
{
    if (static_cast<std::size_t>(p.size()) != parameter_count()) {
        throw std::invalid_argument("parameter vector has wrong length");
    }
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < kNnLayers; ++l) {
        weights[l].reshaped() = p.segment(k, weights[l].size());
        k += weights[l].size();
        biases[l] = p.segment(k, biases[l].size());
        k += biases[l].size();
    }
}

void MlpModel::validate() const
{
    for (std::size_t l = 0; l < kNnLayers; ++l) {
        if (weights[l].rows() != kWidths[l + 1] || weights[l].cols() != kWidths[l] ||
            biases[l].size() != kWidths[l + 1]) {
            throw std::invalid_argument("layer " + std::to_string(l + 1) + " has wrong shape");
        }
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            throw std::invalid_argument("layer " + std::to_string(l + 1) +
                                        " has non-finite parameters");
        }
    }
    const auto check = [](const Normalization& n, int dim, const char* what) {
        if (n.shift.size() != dim || n.scale.size() != dim || !n.shift.allFinite() ||
            !n.scale.allFinite() || (n.scale.array() <= 0.0).any()) {
            throw std::invalid_argument(std::string(what) + " normalization is invalid");
        }
    };
    check(input_norm, kNnInputs, "input");
    check(output_norm, kNnOutputs, "output");
}

Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs)
{
    return denormalize_cols(model.output_norm,
                            forward_normalized(model, normalize_cols(model.input_norm, inputs),
                                               nullptr));
}

Eigen::Vector3d forward(const MlpModel& model, const NnInput& input)
{
    return forward_batch(model, input);
}

NnInput remap_inputs(const MeasurementFrame& f)
{
    const double ct = std::cos(f.att.theta);
    NnInput z;
    z << f.v_pitot * f.v_pitot, f.v_d * f.v_d, f.v_n, f.v_e, f.v_e * f.v_e, f.v_n * f.v_n,
        f.v_pitot * std::cos(f.att.psi) * ct, f.v_pitot * std::sin(f.att.psi) * ct;
    return z;
}

std::optional<double> pooled_r(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target)
{
    if (pred.size() != target.size() || pred.size() == 0) {
        throw std::invalid_argument("pooled_r needs equally sized, non-empty inputs");
    }
    const Eigen::ArrayXd p = pred.reshaped().array();
    const Eigen::ArrayXd t = target.reshaped().array();
    const Eigen::ArrayXd dp = p - p.mean();
    const Eigen::ArrayXd dt = t - t.mean();
    const double vp = (dp * dp).sum();
    const double vt = (dt * dt).sum();
    if (vp <= 0.0 || vt <= 0.0) {
        return std::nullopt;
    }
    return std::clamp((dp * dt).sum() / std::sqrt(vp * vt), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Dataset handling

std::vector<Eigen::Index> Dataset::indices(Split s) const
{
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < split.size(); ++i) {
        if (split[i] == s) {
            out.push_back(static_cast<Eigen::Index>(i));
        }
    }
    return out;
}

void assign_splits(Dataset& data, std::uint64_t seed)
{
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Fisher-Yates with our own index draw so the permutation does not depend
    // on the standard library's shuffle implementation.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::llround(0.70 * static_cast<double>(n)));
    const auto n_val = std::min(n - n_train,
                                static_cast<std::size_t>(std::llround(0.15 * static_cast<double>(n))));
    data.split.assign(n, Split::Test);
    for (std::size_t k = 0; k < n; ++k) {
        data.split[order[k]] =
            k < n_train ? Split::Train : (k < n_train + n_val ? Split::Validation : Split::Test);
    }
}

// ---------------------------------------------------------------------------
// Loss, gradient, metrics

double mse_and_gradient(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
                        Eigen::VectorXd* gradient)
{
    const double denom = static_cast<double>(t.size());
    if (denom == 0.0) {
        if (gradient) {
            gradient->setZero(static_cast<Eigen::Index>(model.parameter_count()));
        }
        return 0.0;
    }
    std::array<Eigen::MatrixXd, kNnLayers> acts;
    const Eigen::MatrixXd y = forward_normalized(model, x, gradient ? &acts : nullptr);
    const Eigen::MatrixXd err = y - t;
    const double mse = err.squaredNorm() / denom;
    if (!gradient) {
        return mse;
    }

    std::array<Eigen::MatrixXd, kNnLayers> gw;
    std::array<Eigen::VectorXd, kNnLayers> gb;
    Eigen::MatrixXd delta = (2.0 / denom) * err;
    for (int l = kNnLayers - 1; l >= 0; --l) {
        const auto ul = static_cast<std::size_t>(l);
        gw[ul] = delta * acts[ul].transpose();
        gb[ul] = delta.rowwise().sum();
        if (l > 0) {
            const Eigen::ArrayXXd a = acts[ul].array();
            delta = ((model.weights[ul].transpose() * delta).array() * a * (1.0 - a)).matrix();
        }
    }
    gradient->resize(static_cast<Eigen::Index>(model.parameter_count()));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < kNnLayers; ++l) {
        gradient->segment(k, gw[l].size()) = gw[l].reshaped();
        k += gw[l].size();
        gradient->segment(k, gb[l].size()) = gb[l];
        k += gb[l].size();
    }
    return mse;
}

void compute_metrics(const MlpModel& model, const Dataset& data, TrainReport& report)
{
    if (data.split.size() != data.size()) {
        throw std::invalid_argument("dataset has no split labels");
    }
    const Eigen::MatrixXd pred = normalize_cols(model.output_norm, forward_batch(model, data.inputs));
    const Eigen::MatrixXd targ = normalize_cols(model.output_norm, data.targets);

    for (Split s : {Split::Train, Split::Validation, Split::Test}) {
        auto& slot = report.metrics[static_cast<std::size_t>(s)];
        const auto idx = data.indices(s);
        if (idx.empty()) {
            slot.reset();
            continue;
        }
        const Eigen::MatrixXd p = gather(pred, idx);
        const Eigen::MatrixXd t = gather(targ, idx);
        SplitMetrics m;
        m.count = idx.size();
        m.mse = (p - t).squaredNorm() / static_cast<double>(t.size());
        m.r = pooled_r(p, t);
        slot = m;
    }

    const Eigen::ArrayXd resid = (targ - pred).reshaped().array();
    Histogram& h = report.error_histogram;
    constexpr int kBins = 20;
    h.edges.clear();
    h.counts.assign(kBins, 0);
    if (resid.size() == 0) {
        return;
    }
    double lo = resid.minCoeff();
    double hi = resid.maxCoeff();
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double w = (hi - lo) / kBins;
    for (int i = 0; i <= kBins; ++i) {
        h.edges.push_back(i == kBins ? hi : lo + w * i);
    }
    for (double v : resid) {
        const int b = std::clamp(static_cast<int>((v - lo) / w), 0, kBins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
}

// ---------------------------------------------------------------------------
// Scaled conjugate gradient

TrainResult train_scg(const Dataset& data, const TrainOptions& opt)
{
    if (data.size() == 0) {
        throw std::invalid_argument("cannot train on an empty dataset");
    }
    if (data.split.size() != data.size()) {
        throw std::invalid_argument("dataset has no split labels");
    }
    if (opt.epochs < 0) {
        throw std::invalid_argument("epoch count must be >= 0");
    }
    const auto train_idx = data.indices(Split::Train);
    const auto val_idx = data.indices(Split::Validation);
    if (train_idx.empty()) {
        throw std::invalid_argument("training split is empty");
    }

    TrainResult res{MlpModel::random(opt.seed), {}};
    MlpModel& model = res.model;
    const Eigen::MatrixXd train_in = gather(data.inputs, train_idx);
    const Eigen::MatrixXd train_out = gather(data.targets, train_idx);
    if (opt.normalize) {
        model.input_norm = Normalization::min_max(train_in);
        model.output_norm = Normalization::min_max(train_out);
    }
    const Eigen::MatrixXd xt = normalize_cols(model.input_norm, train_in);
    const Eigen::MatrixXd tt = normalize_cols(model.output_norm, train_out);
    const Eigen::MatrixXd xv = normalize_cols(model.input_norm, gather(data.inputs, val_idx));
    const Eigen::MatrixXd tv = normalize_cols(model.output_norm, gather(data.targets, val_idx));

    {
        const Eigen::ArrayXd flat = tt.reshaped().array();
        res.report.zero_target_variance = (flat - flat.mean()).square().sum() == 0.0;
    }

    MlpModel probe = model;
    const auto loss = [&](const Eigen::VectorXd& w, Eigen::VectorXd* g) {
        probe.unflatten(w);
        return mse_and_gradient(probe, xt, tt, g);
    };
    const auto val_loss = [&](const Eigen::VectorXd& w) {
        probe.unflatten(w);
        return mse_and_gradient(probe, xv, tv, nullptr);
    };

    Eigen::VectorXd w = model.flatten();
    const Eigen::Index n_params = w.size();
    Eigen::VectorXd grad;
    double e_w = loss(w, &grad);
    Eigen::VectorXd r = -grad;
    Eigen::VectorXd p = r;

    Eigen::VectorXd best_w = w;
    double best_val = val_idx.empty() ? e_w : val_loss(w);

    double lambda = opt.lambda;
    double lambda_bar = 0.0;
    double delta = 0.0;
    bool success = true;
    Eigen::Index successes = 0;
    Eigen::VectorXd grad_probe;

    for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
        if (success && p.dot(r) <= 0.0) {
            p = r; // not a descent direction; restart
        }
        const double p2 = p.squaredNorm();
        if (p2 == 0.0) {
            break;
        }
        if (success) {
            // Directional curvature from a finite difference of gradients.
            const double sigma_k = opt.sigma / std::sqrt(p2);
            loss(w + sigma_k * p, &grad_probe);
            delta = p.dot(grad_probe + r) / sigma_k;
        }
        delta += (lambda - lambda_bar) * p2;
        if (delta <= 0.0) {
            // Make the Hessian approximation positive definite.
            lambda_bar = 2.0 * (lambda - delta / p2);
            delta = -delta + lambda * p2;
            lambda = lambda_bar;
        }
        const double mu = p.dot(r);
        const double alpha = mu / delta;
        const Eigen::VectorXd w_new = w + alpha * p;
        const double e_new = loss(w_new, nullptr);
        const double comparison = 2.0 * delta * (e_w - e_new) / (mu * mu);

        if (comparison >= 0.0 && std::isfinite(e_new)) {
            w = w_new;
            e_w = loss(w, &grad);
            const Eigen::VectorXd r_new = -grad;
            lambda_bar = 0.0;
            success = true;
            ++successes;
            if (successes % n_params == 0) {
                p = r_new;
            } else {
                const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
                p = r_new + beta * p;
            }
            r = r_new;
            if (comparison >= 0.75) {
                lambda *= 0.25;
            }
        } else {
            lambda_bar = lambda;
            success = false;
        }
        if (!std::isfinite(comparison)) {
            lambda += delta / p2;
        } else if (comparison < 0.25) {
            lambda += delta * (1.0 - comparison) / p2;
        }
        // Guard against the damping collapsing to zero or blowing up.
        lambda = std::clamp(lambda, 1e-15, 1e100);

        res.report.train_mse.push_back(e_w);
        const double v = val_idx.empty() ? e_w : val_loss(w);
        res.report.validation_mse.push_back(v);
        if (v < best_val) {
            best_val = v;
            best_w = w;
            res.report.best_epoch = static_cast<std::size_t>(epoch);
        }
        if (r.squaredNorm() == 0.0) {
            break;
        }
    }

    model.unflatten(best_w);
    compute_metrics(model, data, res.report);
    return res;
}

// ---------------------------------------------------------------------------
// Model persistence

namespace {

constexpr const char* kModelMagic = "airwind-mlp";
constexpr int kModelVersion = 1;

class TokenReader {
public:
    explicit TokenReader(const std::string& text) : in_(text) {}

    std::string word(const std::string& section)
    {
        std::string tok;
        if (!(in_ >> tok)) {
            throw std::runtime_error("model file truncated: missing section '" + section + "'");
        }
        return tok;
    }

    void expect(const std::string& keyword, const std::string& section)
    {
        const std::string tok = word(section);
        if (tok != keyword) {
            throw std::runtime_error("model file: expected '" + keyword + "' in section '" +
                                     section + "', found '" + tok + "'");
        }
    }

    long integer(const std::string& section)
    {
        const std::string tok = word(section);
        long v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw std::runtime_error("model file: bad integer '" + tok + "' in section '" +
                                     section + "'");
        }
        return v;
    }

    double real(const std::string& section)
    {
        const std::string tok = word(section);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw std::runtime_error("model file: bad number '" + tok + "' in section '" +
                                     section + "'");
        }
        return v;
    }

private:
    std::istringstream in_;
};

void write_vector(std::ostringstream& os, const char* name, const Eigen::VectorXd& v)
{
    os << name << ' ' << v.size() << '\n';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        os << (i ? " " : "") << num(v(i));
    }
    os << '\n';
}

Eigen::VectorXd read_vector(TokenReader& in, const std::string& name, long expected)
{
    in.expect(name, name);
    const long n = in.integer(name);
    if (n != expected) {
        throw std::runtime_error("model file: '" + name + "' has length " + std::to_string(n) +
                                 ", expected " + std::to_string(expected));
    }
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) {
        v(i) = in.real(name);
    }
    return v;
}

} // namespace

std::string format_model(const MlpModel& model)
{
    model.validate();
    std::ostringstream os;
    os << kModelMagic << '\n' << "version " << kModelVersion << '\n' << "architecture";
    for (int w : kWidths) {
        os << ' ' << w;
    }
    os << "\nactivation sigmoid sigmoid sigmoid linear\n";
    write_vector(os, "input_shift", model.input_norm.shift);
    write_vector(os, "input_scale", model.input_norm.scale);
    write_vector(os, "output_shift", model.output_norm.shift);
    write_vector(os, "output_scale", model.output_norm.scale);
    for (std::size_t l = 0; l < kNnLayers; ++l) {
        const auto& W = model.weights[l];
        os << "layer " << l + 1 << " weights " << W.rows() << ' ' << W.cols() << '\n';
        for (Eigen::Index i = 0; i < W.rows(); ++i) {
            for (Eigen::Index j = 0; j < W.cols(); ++j) {
                os << (j ? " " : "") << num(W(i, j));
            }
            os << '\n';
        }
        write_vector(os, "bias", model.biases[l]);
    }
    os << "end\n";
    return os.str();
}

MlpModel parse_model(const std::string& text)
{
    TokenReader in(text);
    in.expect(kModelMagic, "header");
    in.expect("version", "version");
    const long version = in.integer("version");
    if (version != kModelVersion) {
        throw std::runtime_error("model file version " + std::to_string(version) +
                                 " not supported (expected " + std::to_string(kModelVersion) + ")");
    }
    in.expect("architecture", "architecture");
    for (std::size_t i = 0; i < kWidths.size(); ++i) {
        const long w = in.integer("architecture");
        if (w != kWidths[i]) {
            const std::string what = i == 0 ? "input width"
                                     : i + 1 == kWidths.size()
                                         ? "output width"
                                         : "hidden layer " + std::to_string(i) + " width";
            throw std::runtime_error("model file: " + what + " is " + std::to_string(w) +
                                     ", expected " + std::to_string(kWidths[i]));
        }
    }
    in.expect("activation", "activation");
    for (const char* act : {"sigmoid", "sigmoid", "sigmoid", "linear"}) {
        in.expect(act, "activation");
    }

    MlpModel m = MlpModel::zeros();
    m.input_norm.shift = read_vector(in, "input_shift", kNnInputs);
    m.input_norm.scale = read_vector(in, "input_scale", kNnInputs);
    m.output_norm.shift = read_vector(in, "output_shift", kNnOutputs);
    m.output_norm.scale = read_vector(in, "output_scale", kNnOutputs);
    for (std::size_t l = 0; l < kNnLayers; ++l) {
        const std::string section = "layer " + std::to_string(l + 1);
        in.expect("layer", section);
        if (in.integer(section) != static_cast<long>(l + 1)) {
            throw std::runtime_error("model file: layers out of order at '" + section + "'");
        }
        in.expect("weights", section);
        const long rows = in.integer(section);
        const long cols = in.integer(section);
        if (rows != kWidths[l + 1] || cols != kWidths[l]) {
            throw std::runtime_error("model file: " + section + " weights are " +
                                     std::to_string(rows) + "x" + std::to_string(cols) +
                                     ", expected " + std::to_string(kWidths[l + 1]) + "x" +
                                     std::to_string(kWidths[l]));
        }
        for (long i = 0; i < rows; ++i) {
            for (long j = 0; j < cols; ++j) {
                m.weights[l](i, j) = in.real(section);
            }
        }
        m.biases[l] = read_vector(in, "bias", kWidths[l + 1]);
    }
    in.expect("end", "end");
    m.validate();
    return m;
}

void save_model(const MlpModel& model, const std::string& path)
{
    const std::string text = format_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw std::runtime_error("cannot write model file '" + path + "'");
    }
}

MlpModel load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open model file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

// ---------------------------------------------------------------------------
// Dataset file

namespace {

constexpr const char* kDatasetHeader =
    "pitot_sq,vd_sq,vn,ve,ve_sq,vn_sq,pitot_cos_psi,pitot_sin_psi,v_nw,v_ew,c_f,scenario";

} // namespace

void save_dataset(const Dataset& data, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write dataset '" + path + "'");
    }
    out << kDatasetHeader << '\n';
    std::string line;
    for (Eigen::Index c = 0; c < data.inputs.cols(); ++c) {
        line.clear();
        for (int i = 0; i < kNnInputs; ++i) {
            line += num(data.inputs(i, c));
            line += ',';
        }
        for (int i = 0; i < kNnOutputs; ++i) {
            line += num(data.targets(i, c));
            line += ',';
        }
        line += std::to_string(data.scenario[static_cast<std::size_t>(c)]);
        out << line << '\n';
    }
    if (!out) {
        throw std::runtime_error("error writing dataset '" + path + "'");
    }
}

Dataset load_dataset(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open dataset '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != kDatasetHeader) {
        throw std::runtime_error("dataset '" + path + "': missing or unexpected header");
    }
    std::vector<double> values;
    std::vector<std::int64_t> ids;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const char* p = line.data();
        const char* end = line.data() + line.size();
        const auto bad = [&](const std::string& why) {
            throw std::runtime_error("dataset '" + path + "' row " + std::to_string(row) + ": " +
                                     why);
        };
        for (int k = 0; k < kNnInputs + kNnOutputs; ++k) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(p, end, v);
            if (ec != std::errc() || ptr == end || *ptr != ',' || !std::isfinite(v)) {
                bad("expected 12 comma-separated fields");
            }
            values.push_back(v);
            p = ptr + 1;
        }
        std::int64_t id = 0;
        const auto [ptr, ec] = std::from_chars(p, end, id);
        if (ec != std::errc() || ptr != end) {
            bad("bad scenario id");
        }
        ids.push_back(id);
    }
    Dataset d;
    const auto n = static_cast<Eigen::Index>(ids.size());
    const Eigen::Map<const Eigen::MatrixXd> all(values.data(), kNnInputs + kNnOutputs, n);
    d.inputs = all.topRows(kNnInputs);
    d.targets = all.bottomRows(kNnOutputs);
    d.scenario = std::move(ids);
    return d;
}

} // namespace airwind
