// Copyright 2026 The evgrid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings: grid inspection, rotated-box geometry, evaluation and the
// dataset pipeline.

#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "evgrid/error.hpp"
#include "evgrid/eval.hpp"
#include "evgrid/grid_core.hpp"
#include "evgrid/grid_io.hpp"
#include "evgrid/pipeline.hpp"
#include "evgrid/rot_geom.hpp"
#include "evgrid/scenario_file.hpp"

namespace py = pybind11;
using namespace evgrid;

namespace
{

EncodeMode encode_mode(int channels)
{
  if (channels == 3) {
    return EncodeMode::kRgb;
  }
  if (channels == 5) {
    return EncodeMode::kRgbVelocity;
  }
  throw ConfigError("encode mode must be 3 or 5 channels");
}

py::array_t<float> tensor_array(const ChannelTensor & t)
{
  py::array_t<float> out({t.channels, t.rows, t.cols});
  std::copy(t.values.begin(), t.values.end(), out.mutable_data());
  return out;
}

/// (rows, cols, 6) masses in the order F, S, D, SD, FD, unknown.
py::array_t<float> mass_array(const DynamicGrid & g)
{
  py::array_t<float> out({g.rows(), g.cols(), 6});
  float * p = out.mutable_data();
  for (const auto & c : g.cells()) {
    const auto & m = c.masses;
    *p++ = m.free;
    *p++ = m.stat;
    *p++ = m.dyn;
    *p++ = m.occupied;
    *p++ = m.passable;
    *p++ = m.unknown;
  }
  return out;
}

py::array_t<float> velocity_array(const DynamicGrid & g)
{
  py::array_t<float> out({g.rows(), g.cols(), 2});
  float * p = out.mutable_data();
  for (const auto & c : g.cells()) {
    *p++ = c.v_mean[0];
    *p++ = c.v_mean[1];
  }
  return out;
}

std::vector<std::vector<Detection>> to_detections(
  const std::vector<std::vector<std::pair<RotatedBox, double>>> & frames)
{
  std::vector<std::vector<Detection>> out;
  out.reserve(frames.size());
  for (const auto & f : frames) {
    auto & dets = out.emplace_back();
    for (const auto & [box, score] : f) {
      dets.push_back({box, score});
    }
  }
  return out;
}

py::dict operating_point_dict(const OperatingPoint & op)
{
  py::dict d;
  d["threshold"] = op.threshold;
  d["precision"] = op.precision;
  d["precision_at_threshold"] = op.precision_at_threshold;
  d["recall_at_threshold"] = op.recall_at_threshold;
  return d;
}

}  // namespace

PYBIND11_MODULE(_evgrid, m)
{
  m.doc() = "Evidential dynamic occupancy grids: inspection, geometry, evaluation and dataset tools";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<DataError> data_error(m, "DataError", error.ptr());
  static py::exception<ValidationError> validation_error(m, "ValidationError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) {
        std::rethrow_exception(p);
      }
    } catch (const ConfigError & e) {
      config_error(e.what());
    } catch (const DataError & e) {
      data_error(e.what());
    } catch (const ValidationError & e) {
      validation_error(e.what());
    } catch (const Error & e) {
      error(e.what());
    }
  });

  // ---------------------------------------------------------------- masses
  py::class_<BeliefMasses>(m, "BeliefMasses")
    .def(py::init([](double f, double s, double d, double sd, double fd) { return BeliefMasses::from(f, s, d, sd, fd); }),
         py::arg("free") = 0.0, py::arg("stat") = 0.0, py::arg("dyn") = 0.0, py::arg("occupied") = 0.0,
         py::arg("passable") = 0.0, "Masses of {F}, {S}, {D}, {S,D}, {F,D}; the remainder goes to the unknown set")
    .def_readonly("free", &BeliefMasses::free)
    .def_readonly("stat", &BeliefMasses::stat)
    .def_readonly("dyn", &BeliefMasses::dyn)
    .def_readonly("occupied", &BeliefMasses::occupied)
    .def_readonly("passable", &BeliefMasses::passable)
    .def_readonly("unknown", &BeliefMasses::unknown)
    .def("sum", &BeliefMasses::sum)
    .def("occupancy", &BeliefMasses::occupancy)
    .def("__repr__", [](const BeliefMasses & b) {
      return "BeliefMasses(F=" + std::to_string(b.free) + ", S=" + std::to_string(b.stat) + ", D=" +
             std::to_string(b.dyn) + ", SD=" + std::to_string(b.occupied) + ", FD=" + std::to_string(b.passable) +
             ", U=" + std::to_string(b.unknown) + ")";
    });
  m.def("colorize", [](const BeliefMasses & b) {
    const Rgb c = colorize(b);
    return py::make_tuple(c.r, c.g, c.b);
  }, "RGB colour of a cell's masses, each channel in [0, 1]");
  m.def("validate_masses", [](const BeliefMasses & b) { return validate(b); },
        "None when the masses are valid, otherwise a description of the violation");

  // ---------------------------------------------------------------- geometry
  py::class_<RotatedBox>(m, "RotatedBox")
    .def(py::init([](double x, double y, double w, double h, double psi) { return RotatedBox{x, y, w, h, psi}; }),
         py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"), py::arg("psi_deg") = 0.0)
    .def_readwrite("x", &RotatedBox::x)
    .def_readwrite("y", &RotatedBox::y)
    .def_readwrite("w", &RotatedBox::w)
    .def_readwrite("h", &RotatedBox::h)
    .def_readwrite("psi_deg", &RotatedBox::psi_deg)
    .def("area", &RotatedBox::area)
    .def("canonical", [](const RotatedBox & b) { return canonicalize(b); })
    .def("corners", [](const RotatedBox & b) {
      std::vector<std::pair<double, double>> out;
      for (const Vec2 & c : corners(b)) {
        out.emplace_back(c.x, c.y);
      }
      return out;
    })
    .def("contains", [](const RotatedBox & b, double x, double y) { return contains(b, {x, y}); })
    .def(py::self == py::self)
    .def("__repr__", [](const RotatedBox & b) {
      return "RotatedBox(x=" + std::to_string(b.x) + ", y=" + std::to_string(b.y) + ", w=" + std::to_string(b.w) +
             ", h=" + std::to_string(b.h) + ", psi_deg=" + std::to_string(b.psi_deg) + ")";
    });
  m.def("rotated_iou", &rotated_iou, py::arg("a"), py::arg("b"));
  m.def("intersection_area", &intersection_area, py::arg("a"), py::arg("b"));

  // ---------------------------------------------------------------- grids
  py::class_<DynamicGrid>(m, "DynamicGrid")
    .def(py::init<int, int, double>(), py::arg("cols"), py::arg("rows"), py::arg("resolution"))
    .def_property_readonly("rows", &DynamicGrid::rows)
    .def_property_readonly("cols", &DynamicGrid::cols)
    .def_property_readonly("resolution", &DynamicGrid::resolution)
    .def_property_readonly("timestamp", &DynamicGrid::timestamp)
    .def("masses", &mass_array, "(rows, cols, 6) array ordered F, S, D, SD, FD, unknown")
    .def("velocity", &velocity_array, "(rows, cols, 2) mean cell velocity [m/s]")
    .def("cell", [](const DynamicGrid & g, int col, int row) {
      if (!g.inside(col, row)) {
        throw py::index_error("cell outside the grid");
      }
      return g.at(col, row).masses;
    }, py::arg("col"), py::arg("row"))
    .def("encode", [](const DynamicGrid & g, int channels, double v_max) {
      return tensor_array(encode_grid(g, encode_mode(channels), v_max));
    }, py::arg("channels") = 3, py::arg("v_max") = kDefaultVelocityScale,
       "(channels, rows, cols) detector input tensor");
  m.def("load_grid", &load_grid, py::arg("path"));
  m.def("load_tensor", [](const std::filesystem::path & p) { return tensor_array(load_tensor(p)); }, py::arg("path"));

  // ---------------------------------------------------------------- labels
  m.def("read_labels", [](const std::filesystem::path & p) {
    py::list out;
    for (const auto & r : read_labels(p)) {
      out.append(py::make_tuple(r.frame_id, r.box, r.score));
    }
    return out;
  }, py::arg("path"), "List of (frame_id, RotatedBox, score or None)");

  // ---------------------------------------------------------------- evaluation
  py::class_<PrCurve>(m, "PrCurve")
    .def_readonly("ap", &PrCurve::ap)
    .def_readonly("gt_count", &PrCurve::gt_count)
    .def_property_readonly("points", [](const PrCurve & c) {
      std::vector<std::tuple<double, double, double>> out;
      for (const auto & p : c.points) {
        out.emplace_back(p.threshold, p.precision, p.recall);
      }
      return out;
    }, "List of (threshold, precision, recall), thresholds descending")
    .def("interpolated_precision", &PrCurve::interpolated_precision, py::arg("recall"))
    .def("max_recall", &PrCurve::max_recall)
    .def("operating_point", [](const PrCurve & c, double r) { return operating_point_dict(operating_point(c, r)); },
         py::arg("target_recall"));
  m.def("pr_curve", [](const std::vector<std::vector<std::pair<RotatedBox, double>>> & predictions,
                       const std::vector<std::vector<RotatedBox>> & ground_truth, double iou_threshold,
                       const std::string & ap_mode) {
    return pr_curve(to_detections(predictions), ground_truth, iou_threshold, ap_mode_from_string(ap_mode));
  }, py::arg("predictions"), py::arg("ground_truth"), py::arg("iou_threshold") = kDefaultIouThreshold,
     py::arg("ap_mode") = "all-points",
     "Per-frame lists of (RotatedBox, score) predictions against per-frame ground-truth boxes");

  // ---------------------------------------------------------------- pipeline
  m.def("canned_scenarios", &canned_scenario_names);
  m.def("simulate", [](const std::vector<std::string> & scenarios, const std::filesystem::path & out,
                       std::uint64_t seed, std::size_t stride, int grid_cells, double resolution) {
    RunConfig c;
    c.scenarios = scenarios;
    c.out = out;
    c.seed = seed;
    c.stride = stride;
    c.grid_cells = grid_cells;
    c.resolution = resolution;
    const SimulateReport r = cmd_simulate(c);
    py::dict d;
    d["frames_fused"] = r.frames_fused;
    d["frames_written"] = r.frames_written;
    return d;
  }, py::arg("scenarios"), py::arg("out"), py::arg("seed") = 0, py::arg("stride") = 5,
     py::arg("grid_cells") = DynamicGrid::kDefaultCells, py::arg("resolution") = DynamicGrid::kDefaultResolution);
  m.def("detect_classic", [](const std::filesystem::path & dataset, const std::filesystem::path & out,
                             const std::string & score_mode) {
    RunConfig c;
    c.dataset = dataset;
    c.out = out;
    c.score_mode = score_mode_from_string(score_mode);
    return cmd_detect_classic(c);
  }, py::arg("dataset"), py::arg("out"), py::arg("score_mode") = "fixed");
  m.def("encode", [](const std::filesystem::path & dataset, const std::filesystem::path & out, int channels,
                     double v_max) {
    RunConfig c;
    c.dataset = dataset;
    c.out = out;
    c.encode = encode_mode(channels);
    c.v_max = v_max;
    return cmd_encode(c);
  }, py::arg("dataset"), py::arg("out"), py::arg("channels") = 3, py::arg("v_max") = kDefaultVelocityScale);
  m.def("evaluate", [](const std::filesystem::path & dataset, const std::filesystem::path & predictions,
                       const std::filesystem::path & out, double iou_threshold, const std::string & ap_mode) {
    RunConfig c;
    c.dataset = dataset;
    c.predictions = predictions;
    c.out = out;
    c.iou_threshold = iou_threshold;
    c.ap_mode = ap_mode_from_string(ap_mode);
    const EvalReport r = cmd_eval(c);
    py::dict d;
    d["curve"] = r.curve;
    d["precision"] = r.point.precision;
    d["recall"] = r.point.recall;
    d["frames"] = r.frames;
    d["predictions"] = r.predictions;
    return d;
  }, py::arg("dataset"), py::arg("predictions"), py::arg("out"), py::arg("iou_threshold") = kDefaultIouThreshold,
     py::arg("ap_mode") = "all-points");
}
