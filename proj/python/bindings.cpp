#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "degenwave/experiments.hpp"
#include "degenwave/ops.hpp"
#include "degenwave/rays.hpp"
#include "degenwave/solver.hpp"
#include "degenwave/wavepacket.hpp"

namespace py = pybind11;
using namespace degenwave;

namespace {

py::array_t<double> field_to_numpy(const ScalarField& f) {
    const Grid& g = *f.grid();
    py::array_t<double> out({g.nx(), g.ny()});
    std::copy(f.phys().begin(), f.phys().end(), out.mutable_data());
    return out;
}

ScalarField field_from_numpy(const GridPtr& g, py::array_t<double, py::array::c_style> arr) {
    if (arr.ndim() != 2 || arr.shape(0) != g->nx() || arr.shape(1) != g->ny())
        throw ValidationError("array shape must be (nx, ny)");
    std::vector<double> v(arr.data(), arr.data() + g->size_phys());
    return ScalarField::from_physical(g, std::move(v));
}

}  // namespace

PYBIND11_MODULE(_degenwave, m) {
    m.doc() = "pseudo-spectral 2.5D electron/Hall MHD laboratory with degenerating wave packets";
    m.attr("__version__") = kVersion;

    py::class_<Grid, std::shared_ptr<Grid>>(m, "Grid")
        .def(py::init([](int nx, int ny, double lx, double ly) {
                 return std::const_pointer_cast<Grid>(Grid::make(nx, ny, lx, ly));
             }),
             py::arg("nx"), py::arg("ny"), py::arg("lx") = 2.0 * Grid::pi(),
             py::arg("ly") = 2.0 * Grid::pi())
        .def_property_readonly("nx", &Grid::nx)
        .def_property_readonly("ny", &Grid::ny)
        .def_property_readonly("lx", &Grid::lx)
        .def_property_readonly("ly", &Grid::ly);

    py::class_<ScalarField>(m, "ScalarField")
        .def_static("from_array",
                    [](const GridPtr& g, py::array_t<double, py::array::c_style> a) {
                        return field_from_numpy(g, a);
                    })
        .def("to_array", &field_to_numpy)
        .def("mean", &ScalarField::mean)
        .def("__add__", &ScalarField::operator+)
        .def("__sub__", &ScalarField::operator-)
        .def("__mul__", &ScalarField::operator*);

    m.def("deriv",
          [](const ScalarField& f, const std::string& axis, int order) {
              return deriv(f, axis == "x" ? Axis::X : Axis::Y, order);
          },
          py::arg("f"), py::arg("axis"), py::arg("order") = 1);
    m.def("laplacian", &laplacian);
    m.def("inv_laplacian", &inv_laplacian);
    m.def("frac_laplacian", &frac_laplacian);
    m.def("inv_dx", &inv_dx);
    m.def("dealias", &dealias);
    m.def("multiply_dealias", &multiply_dealias);
    m.def("perp_grad", [](const ScalarField& psi) {
        VectorField2 v = perp_grad(psi);
        return py::make_tuple(std::move(v.x), std::move(v.y));
    });
    m.def("lp_norm", &lp_norm);
    m.def("hs_norm", &hs_norm);
    m.def("inner", &inner);

    py::enum_<ProfileKind>(m, "ProfileKind")
        .value("translational", ProfileKind::Translational)
        .value("axisymmetric", ProfileKind::Axisymmetric);

    py::class_<BackgroundProfile, std::shared_ptr<BackgroundProfile>>(m, "BackgroundProfile")
        .def_property_readonly("y0", &BackgroundProfile::y0)
        .def_property_readonly("y1", &BackgroundProfile::y1)
        .def_property_readonly("c0", &BackgroundProfile::c0)
        .def_property_readonly("eta_min", &BackgroundProfile::eta_min)
        .def("f", &BackgroundProfile::f)
        .def("fp", &BackgroundProfile::fp)
        .def("eta_of_y", &BackgroundProfile::eta_of_y)
        .def("y_of_eta", &BackgroundProfile::y_of_eta)
        .def("g_of_eta", &BackgroundProfile::g_of_eta);

    m.def("make_profile",
          [](const std::string& kind, const std::string& shape, double y1) {
              return std::const_pointer_cast<BackgroundProfile>(make_profile(
                  kind == "axisymmetric" ? ProfileKind::Axisymmetric : ProfileKind::Translational,
                  ProfileShape::parse(shape), y1));
          },
          py::arg("kind"), py::arg("shape"), py::arg("y1"));
    m.def("make_profile_explicit",
          [](const std::string& kind, const std::string& shape, double y0, double y1) {
              return std::const_pointer_cast<BackgroundProfile>(make_profile_explicit(
                  kind == "axisymmetric" ? ProfileKind::Axisymmetric : ProfileKind::Translational,
                  ProfileShape::parse(shape), y0, y1));
          });

    py::class_<RayState>(m, "RayState")
        .def_property_readonly("t", [](const RayState& s) { return s.t; })
        .def_property_readonly("pos",
                               [](const RayState& s) {
                                   return py::make_tuple(s.pos.x, s.pos.y, s.pos.z);
                               })
        .def_property_readonly("freq", [](const RayState& s) {
            return py::make_tuple(s.freq.x, s.freq.y, s.freq.z);
        });
    m.def("explicit_ray_linear", &explicit_ray_linear, py::arg("lam"), py::arg("t"));
    m.def("integrate_ray_linear_shear",
          [](double lam, double t_end, double dt) {
              const RayField f = RayField::linear_shear();
              const RayTrajectory traj = integrate_ray(
                  f, {0.0, 1.0, 0.0}, {lam, -lam, 0.0}, t_end, dt,
                  std::max<int>(1, static_cast<int>(t_end / dt / 256)));
              py::list out;
              for (const auto& s : traj.samples) out.append(s);
              return out;
          },
          py::arg("lam"), py::arg("t_end"), py::arg("dt") = 1e-4);

    py::class_<WavePacket>(m, "WavePacket")
        .def_property_readonly("lam", &WavePacket::lambda)
        .def("support", &WavePacket::support)
        .def("bandwidth", &WavePacket::bandwidth)
        .def("evaluate",
             [](const WavePacket& p, const GridPtr& g, double t) {
                 PacketFields f = p.evaluate(g, t);
                 py::dict out;
                 out["bz"] = field_to_numpy(f.bz);
                 out["psi"] = field_to_numpy(f.psi);
                 out["bx"] = field_to_numpy(f.bx);
                 out["by"] = field_to_numpy(f.by);
                 return out;
             })
        .def("residual_native",
             [](const WavePacket& p, double t) {
                 const ResidualNorms r = p.residual_native(t);
                 return py::make_tuple(r.err_b_l2, r.grad_err_psi_l2);
             })
        .def("degeneration_exponent", [](const WavePacket& p, double p_norm, double t_max) {
            std::vector<double> times;
            for (int k = 1; k <= 8; ++k) times.push_back(t_max * k / 8.0);
            const DegenerationScan sc = p.degeneration_scan(times, {p_norm}, {});
            return sc.lp_fit.at(p_norm).slope;
        });
    m.def("build_packet",
          [](const ProfilePtr& prof, int lam) { return build_packet(prof, lam); });

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("experiment", &ExperimentConfig::experiment)
        .def_readwrite("nx", &ExperimentConfig::nx)
        .def_readwrite("ny", &ExperimentConfig::ny)
        .def_readwrite("lambdas", &ExperimentConfig::lambdas)
        .def_readwrite("t_end", &ExperimentConfig::t_end)
        .def_readwrite("output_dir", &ExperimentConfig::output_dir)
        .def_readwrite("threads", &ExperimentConfig::threads);
    m.def("parse_config_text", &parse_config_text);
    m.def("dump_config", &dump_config);
    m.def("run_experiment", [](const ExperimentConfig& cfg) {
        const ExperimentReport rep = run_experiment(cfg);
        py::dict out;
        out["pass"] = rep.pass();
        out["json"] = rep.to_json();
        return out;
    });
}
