#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "legvio/pipeline.hpp"
#include "legvio/preint.hpp"

namespace py = pybind11;
using namespace legvio;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Columns: t [s], px, py, pz, qw, qx, qy, qz, vx, vy, vz.
RowMatrix to_array(const Trajectory& traj) {
  RowMatrix m(static_cast<Eigen::Index>(traj.size()), 11);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj[i];
    const auto r = static_cast<Eigen::Index>(i);
    m(r, 0) = s.t.seconds();
    m.block<1, 3>(r, 1) = s.pose.position.transpose();
    m(r, 4) = s.pose.orientation.w();
    m(r, 5) = s.pose.orientation.x();
    m(r, 6) = s.pose.orientation.y();
    m(r, 7) = s.pose.orientation.z();
    m.block<1, 3>(r, 8) = s.vel_world.transpose();
  }
  return m;
}

Trajectory from_array(const RowMatrix& m) {
  if (m.cols() != 11) throw std::invalid_argument("trajectory array must have 11 columns");
  Trajectory traj;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    TrajectorySample s;
    s.t = Timestamp::from_seconds(m(r, 0));
    s.pose.position = m.block<1, 3>(r, 1).transpose();
    s.pose.orientation = Rotation(m(r, 4), m(r, 5), m(r, 6), m(r, 7));
    s.vel_world = m.block<1, 3>(r, 8).transpose();
    traj.push_back(s);
  }
  return traj;
}

Variant variant_arg(const std::string& name) {
  const auto v = parse_variant(name);
  if (!v) throw py::value_error("unknown variant '" + name + "'");
  return *v;
}

py::dict report_dict(const RpeReport& rep) {
  py::dict out;
  auto stats = [](const RpeStats& s) {
    py::dict d;
    d["mean"] = s.mean;
    d["max"] = s.max;
    d["rmse"] = s.rmse;
    d["count"] = s.count;
    return d;
  };
  for (const RpeInterval& r : rep.intervals) {
    py::dict comps;
    for (int c = 0; c < kNumComponents; ++c) comps[kComponentNames[c]] = stats(r.stats[c]);
    out[py::float_(r.interval_s)] = comps;
  }
  py::dict all;
  for (int c = 0; c < kNumComponents; ++c) all[kComponentNames[c]] = stats(rep.all[c]);
  out["all"] = all;
  return out;
}

}  // namespace

PYBIND11_MODULE(_legvio, m) {
  m.doc() = "Leg odometry + VIO fusion core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<RunConfig>(m, "Config")
      .def_readwrite("name", &RunConfig::name)
      .def_readwrite("seeds", &RunConfig::seeds)
      .def_property_readonly("variants",
                             [](const RunConfig& c) {
                               std::vector<std::string> names;
                               for (Variant v : c.variants) names.emplace_back(variant_name(v));
                               return names;
                             })
      .def("set", &apply_override, py::arg("key"), py::arg("value"), "Override one scalar key.")
      .def("validate", &validate_config)
      .def("dump", &dump_config)
      .def("hash", &config_hash);

  m.def("default_config", &default_config);
  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
  m.def("load_config", [](const std::string& path) { return load_config(path); }, py::arg("path"));
  m.def("variants", [] {
    std::vector<std::string> names;
    for (Variant v : kAllVariants) names.emplace_back(variant_name(v));
    return names;
  });

  py::class_<SimRun>(m, "SimRun")
      .def_property_readonly("truth", [](const SimRun& r) { return to_array(r.truth); })
      .def_property_readonly("truth_contact",
                             [](const SimRun& r) {
                               Eigen::Matrix<bool, Eigen::Dynamic, 4, Eigen::RowMajor> c(
                                   static_cast<Eigen::Index>(r.truth_contact.size()), 4);
                               for (std::size_t i = 0; i < r.truth_contact.size(); ++i) {
                                 for (int k = 0; k < 4; ++k) c(static_cast<Eigen::Index>(i), k) = r.truth_contact[i][k];
                               }
                               return c;
                             })
      .def_property_readonly("num_imu", [](const SimRun& r) { return r.log.imu.size(); })
      .def_property_readonly("num_joints", [](const SimRun& r) { return r.log.joints.size(); })
      .def_property_readonly("num_vio", [](const SimRun& r) { return r.log.vio.size(); })
      .def_property_readonly("num_vicon", [](const SimRun& r) { return r.log.vicon.size(); })
      .def("write", [](const SimRun& r, const std::string& dir, const RunConfig& c,
                       std::uint64_t seed) { write_run(dir, r, c, seed); });

  m.def(
      "simulate", [](const RunConfig& c, std::uint64_t seed) {
        validate_config(c);
        py::gil_scoped_release release;
        return simulate(c.scenario, seed);
      },
      py::arg("config"), py::arg("seed") = 1);

  py::class_<EstimateResult>(m, "Estimate")
      .def_property_readonly("trajectory", [](const EstimateResult& e) { return to_array(e.trajectory); })
      .def_property_readonly("b_dz",
                             [](const EstimateResult& e) {
                               Eigen::VectorXd v(static_cast<Eigen::Index>(e.diagnostics.size()));
                               for (std::size_t i = 0; i < e.diagnostics.size(); ++i) {
                                 v(static_cast<Eigen::Index>(i)) = e.diagnostics[i].b_dz;
                               }
                               return v;
                             })
      .def_property_readonly("counters", [](const EstimateResult& e) {
        py::dict d;
        d["legvel_updates"] = e.counters.legvel_updates;
        d["legvel_rejections"] = e.counters.legvel_rejections;
        d["vio_updates"] = e.counters.vio_updates;
        d["vio_rejections"] = e.counters.vio_rejections;
        d["height_updates"] = e.counters.height_updates;
        d["height_rejections"] = e.counters.height_rejections;
        d["vicon_updates"] = e.counters.vicon_updates;
        d["vicon_rejections"] = e.counters.vicon_rejections;
        return d;
      });

  m.def(
      "estimate",
      [](const SimRun& run, const RunConfig& c, const std::string& variant) {
        const Variant v = variant_arg(variant);
        py::gil_scoped_release release;
        return run_estimator(run.log, c.scenario.robot, c.estimator, v, initial_sample(run.log, run.truth));
      },
      py::arg("run"), py::arg("config"), py::arg("variant"));

  m.def(
      "rpe",
      [](const RowMatrix& est, const RowMatrix& gt, std::optional<std::vector<double>> intervals,
         std::size_t stride) {
        RpeOptions opt;
        if (intervals) opt.intervals = *intervals;
        opt.stride = stride;
        return report_dict(rpe(from_array(est), from_array(gt), opt));
      },
      py::arg("estimate"), py::arg("truth"), py::arg("intervals") = py::none(), py::arg("stride") = 1);

  m.def(
      "yaw_gravity_decompose",
      [](const Mat3& R) {
        const YawGravity yg = yaw_gravity_decompose(Rotation(R));
        return py::make_tuple(yg.yaw_deg, yg.gravity_deg);
      },
      py::arg("R"), "(yaw_deg, gravity_deg) of a rotation error matrix");

  m.def("so3_exp", [](const Vec3& phi) { return so3_exp(phi).matrix(); }, py::arg("phi"));
  m.def("so3_log", [](const Mat3& R) { return so3_log(Rotation(R)); }, py::arg("R"));

  m.def(
      "fk_foot", [](int leg, const Vec3& q) { return fk_foot(RobotModel::solo12().legs.at(leg), q); },
      py::arg("leg"), py::arg("q"), "Solo12 foot position in the base frame");
  m.def(
      "jac_foot", [](int leg, const Vec3& q) { return jac_foot(RobotModel::solo12().legs.at(leg), q); },
      py::arg("leg"), py::arg("q"));

  m.def(
      "preintegrate",
      [](const RowMatrix& accel, const RowMatrix& gyro, double dt) {
        if (accel.cols() != 3 || gyro.cols() != 3 || accel.rows() != gyro.rows()) {
          throw py::value_error("accel and gyro must be N x 3 arrays of equal length");
        }
        PreintegratedDelta d;
        for (Eigen::Index i = 0; i < accel.rows(); ++i) {
          ImuSample s;
          s.accel = accel.row(i).transpose();
          s.gyro = gyro.row(i).transpose();
          d = preint_step(d, s, dt);
        }
        return py::make_tuple(d.dR.matrix(), d.dv, d.dp);
      },
      py::arg("accel"), py::arg("gyro"), py::arg("dt"), "(dR, dv, dp) over the samples, zero biases");
}
