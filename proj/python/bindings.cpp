#include "airwind/evaluation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace airwind;

namespace {

py::array_t<double> states_array(const std::vector<WindState>& states)
{
    py::array_t<double> a({static_cast<py::ssize_t>(states.size()), py::ssize_t{3}});
    auto m = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < states.size(); ++i) {
        m(i, 0) = states[i].v_nw;
        m(i, 1) = states[i].v_ew;
        m(i, 2) = states[i].c_f;
    }
    return a;
}

py::dict run_log_dict(const RunLog& log)
{
    py::dict d;
    d["time"] = py::array_t<double>(static_cast<py::ssize_t>(log.time.size()), log.time.data());
    std::vector<WindState> truth;
    truth.reserve(log.truth.size());
    for (const auto& t : log.truth) {
        truth.push_back(t.wind);
    }
    d["truth"] = states_array(truth);
    py::dict est;
    py::dict skipped;
    for (const auto& s : log.series) {
        const std::string name(estimator_name(s.kind));
        est[name.c_str()] = states_array(s.states);
        skipped[name.c_str()] = s.skipped_updates;
    }
    d["estimates"] = est;
    d["skipped_updates"] = skipped;
    return d;
}

} // namespace

PYBIND11_MODULE(_airwind, m)
{
    m.doc() = "Wind and Pitot scale-factor estimation for a robotic airship";

    py::class_<EulerAttitude>(m, "EulerAttitude")
        .def(py::init<double, double, double>(), py::arg("phi") = 0.0, py::arg("theta") = 0.0,
             py::arg("psi") = 0.0)
        .def_readwrite("phi", &EulerAttitude::phi)
        .def_readwrite("theta", &EulerAttitude::theta)
        .def_readwrite("psi", &EulerAttitude::psi);

    m.def("rotation_body_to_ned", &rotation_body_to_ned, py::arg("att"));
    m.def("euler_rate_matrix", &euler_rate_matrix, py::arg("att"));
    m.def("wrap_angle", &wrap_angle, py::arg("angle"));

    py::class_<WindState>(m, "WindState")
        .def(py::init<double, double, double>(), py::arg("v_nw") = 0.0, py::arg("v_ew") = 0.0,
             py::arg("c_f") = 1.0)
        .def_readwrite("v_nw", &WindState::v_nw)
        .def_readwrite("v_ew", &WindState::v_ew)
        .def_readwrite("c_f", &WindState::c_f)
        .def("vec", &WindState::vec)
        .def("__repr__", [](const WindState& s) {
            std::ostringstream os;
            os << "WindState(v_nw=" << s.v_nw << ", v_ew=" << s.v_ew << ", c_f=" << s.c_f << ")";
            return os.str();
        });

    py::class_<MeasurementFrame>(m, "MeasurementFrame")
        .def(py::init([](double v_pitot, double v_n, double v_e, double v_d,
                         const EulerAttitude& att) {
                 return MeasurementFrame{v_pitot, v_n, v_e, v_d, att};
             }),
             py::arg("v_pitot"), py::arg("v_n"), py::arg("v_e"), py::arg("v_d") = 0.0,
             py::arg("att") = EulerAttitude{})
        .def_readwrite("v_pitot", &MeasurementFrame::v_pitot)
        .def_readwrite("v_n", &MeasurementFrame::v_n)
        .def_readwrite("v_e", &MeasurementFrame::v_e)
        .def_readwrite("v_d", &MeasurementFrame::v_d)
        .def_readwrite("att", &MeasurementFrame::att);

    py::enum_<MeasurementVariant>(m, "MeasurementVariant")
        .value("Cho2011", MeasurementVariant::Cho2011)
        .value("ThreeEq", MeasurementVariant::ThreeEq)
        .value("Hybrid", MeasurementVariant::Hybrid);

    m.def("observe", &observe, py::arg("state"), py::arg("frame"), py::arg("variant"),
          py::arg("nn_out") = std::nullopt, py::arg("cf_floor") = kDefaultScaleFactorFloor);
    m.def("jacobian", &jacobian, py::arg("state"), py::arg("frame"), py::arg("variant"),
          py::arg("cf_floor") = kDefaultScaleFactorFloor);

    py::class_<EstimatorConfig>(m, "EstimatorConfig")
        .def_readwrite("variant", &EstimatorConfig::variant)
        .def_readwrite("q", &EstimatorConfig::q)
        .def_readwrite("r", &EstimatorConfig::r)
        .def_readwrite("p0", &EstimatorConfig::p0)
        .def_readwrite("x0", &EstimatorConfig::x0)
        .def_readwrite("cf_floor", &EstimatorConfig::cf_floor)
        .def("validate", &EstimatorConfig::validate)
        .def("to_text", &format_config);
    m.def("default_config", &default_config, py::arg("variant"));
    m.def("parse_config", [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
    });

    py::class_<WindEkf>(m, "WindEkf")
        .def(py::init<EstimatorConfig>(), py::arg("config"))
        .def("reset", &WindEkf::reset)
        .def("step", &WindEkf::step, py::arg("frame"), py::arg("nn_out") = std::nullopt,
             py::return_value_policy::copy)
        .def_property_readonly("state", &WindEkf::state, py::return_value_policy::copy)
        .def_property_readonly("covariance", &WindEkf::covariance, py::return_value_policy::copy)
        .def_property_readonly("update_skipped",
                               [](const WindEkf& f) { return f.health().update_skipped; })
        .def_property_readonly("nis", [](const WindEkf& f) { return f.health().nis; });

    py::class_<LowPass>(m, "LowPass")
        .def(py::init<double, double>(), py::arg("tau") = 1.5, py::arg("ts") = 0.0625)
        .def("step", &LowPass::step)
        .def("reset", &LowPass::reset)
        .def_property_readonly("coefficient", &LowPass::coefficient);

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def_readwrite("name", &ScenarioSpec::name)
        .def_readwrite("airspeed", &ScenarioSpec::airspeed)
        .def_readwrite("eta", &ScenarioSpec::eta)
        .def_readwrite("duration", &ScenarioSpec::duration)
        .def("run_duration", &ScenarioSpec::run_duration)
        .def("zero_noise", [](ScenarioSpec& s) { s.noise = SensorNoise::zero(); })
        .def("reseed", [](ScenarioSpec& s, std::uint64_t base) { s.seeds = NoiseSeeds::derive(base); })
        .def("to_text", &format_scenario);
    m.def("reference_scenario", &reference_scenario, py::arg("which"));
    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("parse_scenario", [](const std::string& text) {
        std::istringstream in(text);
        return parse_scenario(in);
    });

    py::class_<MlpModel>(m, "MlpModel")
        .def_static("random", &MlpModel::random, py::arg("seed"))
        .def("parameter_count", &MlpModel::parameter_count)
        .def("forward", [](const MlpModel& mdl, const NnInput& x) { return forward(mdl, x); })
        .def("save", [](const MlpModel& mdl, const std::string& path) { save_model(mdl, path); });
    m.def("load_model", &load_model, py::arg("path"));
    m.def("remap_inputs", &remap_inputs, py::arg("frame"));

    m.def(
        "run_scenario",
        [](const ScenarioSpec& spec, const std::string& estimators,
           std::optional<std::string> model_path, std::optional<Vec3> oracle_bias) {
            RunOptions o;
            o.estimators = parse_estimator_list(estimators);
            if (oracle_bias) {
                o.nn = oracle_source(spec, *oracle_bias);
            } else if (model_path) {
                o.nn = mlp_source(std::make_shared<const MlpModel>(load_model(*model_path)));
            }
            RunLog log;
            {
                py::gil_scoped_release release;
                log = run_scenario(spec, o);
            }
            py::dict d = run_log_dict(log);
            py::dict rms;
            for (const auto& row : compute_rms(log).rows) {
                rms[row.estimator.c_str()] = py::make_tuple(row.rms_n, row.rms_e);
            }
            d["rms"] = rms;
            return d;
        },
        py::arg("spec"), py::arg("estimators") = "cho2011,ekf",
        py::arg("model_path") = std::nullopt, py::arg("oracle_bias") = std::nullopt);
}
