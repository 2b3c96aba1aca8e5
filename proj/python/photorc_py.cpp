#include "photorc/config.hpp"
#include "photorc/encoding.hpp"
#include "photorc/errors.hpp"
#include "photorc/experiment.hpp"
#include "photorc/features.hpp"
#include "photorc/optics.hpp"
#include "photorc/readout.hpp"
#include "photorc/report.hpp"
#include "photorc/reservoir.hpp"
#include "photorc/sweep.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace photorc;

namespace {

std::vector<double> bits_to_list(const BinaryPattern& p) { return {p.bits.begin(), p.bits.end()}; }

Sequence to_sequence(const Eigen::MatrixXd& frames) {
    // Rows are time steps.
    Sequence s;
    for (Eigen::Index t = 0; t < frames.rows(); ++t) s.push_back(frames.row(t).transpose());
    return s;
}

py::dict report_dict(const RunReport& r) {
    py::dict d;
    d["name"] = r.name;
    d["mean_accuracy"] = r.mean_accuracy;
    d["std_accuracy"] = r.std_accuracy;
    d["failed_folds"] = r.failed_folds();
    d["layer_neurons"] = r.layer_neurons;
    d["class_labels"] = r.class_labels;
    d["confusion"] = r.confusion.counts;
    d["config_digest"] = r.config_digest;
    d["notes"] = r.notes;
    py::list folds;
    for (const auto& f : r.folds) {
        py::dict fd;
        fd["split"] = f.split;
        fd["repetition"] = f.repetition;
        fd["optics_seed"] = f.optics_seed;
        fd["ok"] = f.ok;
        fd["error"] = f.error;
        fd["accuracy"] = f.accuracy;
        fd["lambda"] = f.lambda;
        folds.append(fd);
    }
    d["folds"] = folds;
    d["summary_json"] = summary_json(r);
    return d;
}

}  // namespace

PYBIND11_MODULE(_photorc, m) {
    m.doc() = "Deep binarized photonic reservoir computing simulator";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<ResourceError>(m, "ResourceError", base.ptr());
    py::register_exception<CalibrationError>(m, "CalibrationError", base.ptr());
    py::register_exception<AllocationError>(m, "AllocationError", base.ptr());
    py::register_exception<IllConditioned>(m, "IllConditioned", base.ptr());
    py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<StateError>(m, "StateError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    // Encoding.
    m.def("encode_scalar", [](double x, int n_bin) { return bits_to_list(encode_scalar(x, make_codec(n_bin))); },
          py::arg("x"), py::arg("n_bin") = 10);
    m.def("encode_vector", [](const std::vector<double>& v, int n_bin) { return bits_to_list(encode_vector(v, make_codec(n_bin))); },
          py::arg("values"), py::arg("n_bin") = 10);
    m.def("half_width", [](int n_bin) { return make_codec(n_bin).half_width(); }, py::arg("n_bin") = 10);
    m.def("quantize8", [](double v) { return quantize8(v); });

    // Reservoir schedules.
    m.def("allocate_neurons", [](int total, int depth, double gamma, const std::string& strategy) {
        return allocate_neurons(total, depth, gamma, parse_allocation(strategy));
    }, py::arg("total"), py::arg("depth"), py::arg("gamma") = 1.2, py::arg("strategy") = "decreasing");
    m.def("leakage_schedule", &leakage_schedule, py::arg("alpha_first"), py::arg("alpha_last"), py::arg("depth"));
    m.def("bias_fractions", [](const std::string& profile, int depth, double b, double inc) {
        return bias_fractions(parse_bias_profile(profile), depth, b, inc);
    }, py::arg("profile"), py::arg("depth"), py::arg("base") = 0.10, py::arg("increment") = 0.05);

    // Optics.
    m.def("propagate", [](const std::vector<std::uint8_t>& bits, std::uint64_t seed, int n_rows) {
        const auto model = build_transmission(seed, n_rows, static_cast<Eigen::Index>(bits.size()));
        const auto layer = make_layer_optics(0, n_rows, static_cast<Eigen::Index>(bits.size()), 0, 0, 0.0, 0);
        return propagate(BinaryPattern(bits), model, layer);
    }, py::arg("bits"), py::arg("seed"), py::arg("n_rows"),
       "Intensities |M p|^2 on n_rows camera pixels for a bare pattern (no bias region).");

    // Readout.
    py::class_<ReadoutModel>(m, "ReadoutModel")
        .def_readonly("weights", &ReadoutModel::weights)
        .def_readonly("lambda_", &ReadoutModel::lambda)
        .def_readonly("class_labels", &ReadoutModel::class_labels)
        .def("outputs", &ReadoutModel::outputs)
        .def("predict", [](const ReadoutModel& self, const Eigen::MatrixXd& states) {
            std::vector<int> out;
            for (Eigen::Index t = 0; t < states.cols(); ++t) out.push_back(predict(self, states.col(t)));
            return out;
        }, "Labels for each column of states.")
        .def("save", [](const ReadoutModel& self) {
            std::ostringstream os;
            save_readout(os, self);
            return py::bytes(os.str());
        })
        .def_static("load", [](const py::bytes& data) {
            std::istringstream is{static_cast<std::string>(data)};
            return load_readout(is);
        });
    m.def("train_ridge", [](const Eigen::MatrixXd& states, const std::vector<int>& labels, int n_classes, double lambda,
                            bool standardize) {
        return train_ridge(make_design(states, labels, n_classes), lambda, standardize);
    }, py::arg("states"), py::arg("labels"), py::arg("n_classes"), py::arg("lambda_"), py::arg("standardize") = false,
       "Ridge readout on states (features x samples) with one-hot targets.");
    m.def("select_lambda", [](const Eigen::MatrixXd& states, const std::vector<int>& labels, int n_classes,
                              const std::vector<double>& grid, int folds, bool standardize) {
        const auto sel = select_lambda(make_design(states, labels, n_classes), grid, folds, standardize);
        return py::make_tuple(sel.lambda, sel.mean_accuracy);
    }, py::arg("states"), py::arg("labels"), py::arg("n_classes"), py::arg("grid"), py::arg("folds") = 3,
       py::arg("standardize") = false);
    m.def("log_grid", &log_grid);

    // Features.
    m.def("hog", [](const Eigen::MatrixXd& image, int cell, int block, int bins, bool sgn) {
        HogParams p;
        p.cell_size = cell;
        p.block_size = block;
        p.n_orientations = bins;
        p.signed_orientation = sgn;
        return hog(image, p);
    }, py::arg("image"), py::arg("cell_size") = 7, py::arg("block_size") = 1, py::arg("n_orientations") = 9,
       py::arg("signed_orientation") = false);

    // Reservoir.
    py::class_<DeepConfig>(m, "DeepConfig")
        .def(py::init<>())
        .def_readwrite("depth", &DeepConfig::depth)
        .def_readwrite("total_neurons", &DeepConfig::total_neurons)
        .def_property("allocation", [](const DeepConfig& c) { return to_string(c.allocation); },
                      [](DeepConfig& c, const std::string& s) { c.allocation = parse_allocation(s); })
        .def_readwrite("gamma", &DeepConfig::gamma)
        .def_readwrite("alpha_first", &DeepConfig::alpha_first)
        .def_readwrite("alpha_last", &DeepConfig::alpha_last)
        .def_property("bias_profile", [](const DeepConfig& c) { return to_string(c.bias_profile); },
                      [](DeepConfig& c, const std::string& s) { c.bias_profile = parse_bias_profile(s); })
        .def_readwrite("bias_width", &DeepConfig::bias_width)
        .def_readwrite("n_bin", &DeepConfig::n_bin)
        .def_readwrite("optics_seed", &DeepConfig::optics_seed)
        .def_readwrite("bias_seed", &DeepConfig::bias_seed)
        .def_readwrite("calibration_percentile", &DeepConfig::calibration_percentile);

    py::class_<DeepReservoir>(m, "DeepReservoir")
        .def(py::init<const DeepConfig&, int>(), py::arg("config"), py::arg("input_dim"))
        .def_property_readonly("depth", &DeepReservoir::depth)
        .def_property_readonly("state_dim", &DeepReservoir::state_dim)
        .def_property_readonly("calibrated", &DeepReservoir::calibrated)
        .def("scales", &DeepReservoir::scales)
        .def("calibrate", [](DeepReservoir& self, const std::vector<Eigen::MatrixXd>& warmup, int iterations) {
            std::vector<Sequence> seqs;
            for (const auto& w : warmup) seqs.push_back(to_sequence(w));
            self.calibrate(seqs, iterations);
        }, py::arg("warmup"), py::arg("iterations") = 3, "Warm-up sequences are (steps x input_dim) arrays.")
        .def("run_sequence", [](const DeepReservoir& self, const Eigen::MatrixXd& frames, const std::string& aggregation) {
            return self.run_sequence(to_sequence(frames), parse_aggregation(aggregation));
        }, py::arg("frames"), py::arg("aggregation") = "final")
        .def("trajectory", [](const DeepReservoir& self, const Eigen::MatrixXd& frames) {
            Trajectory tr;
            self.run_sequence(to_sequence(frames), Aggregation::final_step, &tr);
            std::vector<std::vector<std::vector<int>>> out;
            for (const auto& step : tr) {
                auto& s = out.emplace_back();
                for (const auto& layer : step) s.emplace_back(layer.levels.begin(), layer.levels.end());
            }
            return out;
        }, py::arg("frames"), "Per-step, per-layer 8-bit levels.");

    // Harness.
    m.def("render_config", [](const std::string& text) { return render_config(parse_config(text)); },
          "Canonical rendering of a config text.");
    m.def("run_config", [](const std::string& text) {
        const auto config = parse_config(text);
        RunReport r;
        {
            py::gil_scoped_release release;
            r = run_experiment(config);
        }
        return report_dict(r);
    }, py::arg("text"), "Runs an experiment from config text and returns its report.");
    m.def("run_file", [](const std::filesystem::path& path, const std::optional<std::filesystem::path>& out) {
        const auto config = load_config(path);
        RunReport r;
        {
            py::gil_scoped_release release;
            r = run_experiment(config);
            if (out) write_run_outputs(*out, r);
        }
        return report_dict(r);
    }, py::arg("path"), py::arg("out") = std::nullopt);
    m.def("sweep_config", [](const std::string& text, const std::string& axis, const std::optional<std::filesystem::path>& out) {
        const auto config = parse_config(text);
        SweepResult s;
        {
            py::gil_scoped_release release;
            s = run_sweep(config, parse_sweep_axis(axis));
            if (out) write_sweep_outputs(*out, s);
        }
        py::list cells;
        for (const auto& c : s.cells) {
            py::dict d;
            d["series"] = c.cell.series;
            d["x"] = c.cell.x;
            d["ok"] = c.ok;
            d["error"] = c.error;
            d["mean_accuracy"] = c.report.mean_accuracy;
            d["std_accuracy"] = c.report.std_accuracy;
            cells.append(d);
        }
        return cells;
    }, py::arg("text"), py::arg("axis"), py::arg("out") = std::nullopt);
}
