#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "energymimo/asymptotic.hpp"
#include "energymimo/channel.hpp"
#include "energymimo/model.hpp"
#include "energymimo/oracle.hpp"
#include "energymimo/precoding.hpp"

namespace py = pybind11;
using namespace energymimo;

namespace {

ChannelRealization as_channel(const std::vector<CMatrix>& h) {
  ChannelRealization c;
  c.per_subcarrier = h;
  c.large_scale = RVector::Ones(h.empty() ? 0 : h.front().rows());
  return c;
}

QosTargets as_qos(const RVector& gamma, double noise_power, int subcarriers) {
  return {gamma, noise_power, subcarriers};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Energy-aware zero-forcing precoding for massive MIMO";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<SingularChannelError>(m, "SingularChannelError", error.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", error.ptr());
  py::register_exception<SizeError>(m, "SizeError", error.ptr());

  py::class_<PaModel>(m, "PaModel")
      .def(py::init<double, double, double>(), py::arg("p_max"), py::arg("eta_max"),
           py::arg("backoff") = 10.0)
      .def_property_readonly("p_max", &PaModel::p_max)
      .def_property_readonly("eta_max", &PaModel::eta_max)
      .def_property_readonly("backoff", &PaModel::backoff)
      .def_property_readonly("p_sat", &PaModel::p_sat)
      .def_property_readonly("eta_sat", &PaModel::eta_sat)
      .def_property_readonly("alpha", &PaModel::alpha);

  py::class_<BsModel>(m, "BsModel")
      .def(py::init([](double p_fix, double circuit, double threshold) {
             BsModel bs{p_fix, circuit, threshold};
             bs.validate();
             return bs;
           }),
           py::arg("p_fix") = 15.0, py::arg("circuit_per_antenna") = 0.7,
           py::arg("active_power_threshold") = 1e-9)
      .def_readonly("p_fix", &BsModel::p_fix)
      .def_readonly("circuit_per_antenna", &BsModel::circuit_per_antenna)
      .def_readonly("active_power_threshold", &BsModel::active_power_threshold);

  py::class_<PowerReport>(m, "PowerReport")
      .def_readonly("per_antenna", &PowerReport::per_antenna)
      .def_readonly("p_tx", &PowerReport::p_tx)
      .def_readonly("p_pas", &PowerReport::p_pas)
      .def_readonly("p_bs", &PowerReport::p_bs)
      .def_readonly("m_active", &PowerReport::m_active)
      .def_readonly("shares", &PowerReport::shares);

  py::class_<Gains>(m, "Gains").def_readonly("pas", &Gains::pas).def_readonly("bs", &Gains::bs);

  py::class_<PrecoderSolution>(m, "PrecoderSolution")
      .def_readonly("matrices", &PrecoderSolution::matrices)
      .def_readonly("powers", &PrecoderSolution::powers)
      .def_readonly("iterations", &PrecoderSolution::iterations)
      .def_readonly("converged", &PrecoderSolution::converged)
      .def_readonly("residual", &PrecoderSolution::residual)
      .def_readonly("residual_history", &PrecoderSolution::residual_history)
      .def_readonly("active_set", &PrecoderSolution::active_set);

  py::class_<AsymptoticPlan>(m, "AsymptoticPlan")
      .def_readonly("m_tilde", &AsymptoticPlan::m_tilde)
      .def_readonly("m_hat", &AsymptoticPlan::m_hat)
      .def_readonly("m_dagger", &AsymptoticPlan::m_dagger)
      .def_readonly("p_bar", &AsymptoticPlan::p_bar)
      .def_readonly("p_pas_bar", &AsymptoticPlan::p_pas_bar)
      .def_readonly("p_bs_bar", &AsymptoticPlan::p_bs_bar)
      .def_readonly("feasible", &AsymptoticPlan::feasible);

  // model
  m.def("per_antenna_powers",
        [](const std::vector<CMatrix>& w) { return per_antenna_powers(w); }, py::arg("precoders"));
  m.def("pa_consumed_power", py::overload_cast<const RVector&, const PaModel&>(&pa_consumed_power),
        py::arg("powers"), py::arg("pa"));
  m.def("pa_efficiency", &pa_efficiency, py::arg("p"), py::arg("pa"));
  m.def("bs_consumed_power", &bs_consumed_power, py::arg("powers"), py::arg("pa"), py::arg("bs"));
  m.def("gain_metrics", &gain_metrics, py::arg("reference"), py::arg("candidate"));
  m.def(
      "estimate_flops",
      [](const std::string& system, const std::string& solver, int users, int antennas,
         int subcarriers, int iterations) {
        SystemKind s = system == "wideband"     ? SystemKind::wideband
                       : system == "narrowband" ? SystemKind::narrowband
                       : system == "asymptotic" ? SystemKind::asymptotic
                                                : throw DomainError("unknown system " + system);
        SolverKind k = solver == "proposed"       ? SolverKind::proposed
                       : solver == "conventional" ? SolverKind::conventional
                                                  : throw DomainError("unknown solver " + solver);
        return estimate_flops(s, k, users, antennas, subcarriers, iterations);
      },
      py::arg("system"), py::arg("solver"), py::arg("users"), py::arg("antennas"),
      py::arg("subcarriers") = 1, py::arg("iterations") = 1);

  // channel
  m.def("large_scale_fading", &large_scale_fading, py::arg("distance_m"));
  m.def("target_sinr", &target_sinr, py::arg("beta"), py::arg("reference") = kSinrReferenceGain);
  m.def("trace_term", &trace_term, py::arg("beta"), py::arg("gamma"), py::arg("noise_power"));
  m.def(
      "draw_user_drop",
      [](int users, std::uint64_t seed, double u_min, double u_max) {
        Rng rng(seed);
        const UserDrop d = draw_user_drop(users, CellGeometry{u_min, u_max}, rng);
        return py::make_tuple(d.distances, d.beta, d.gamma);
      },
      py::arg("users"), py::arg("seed"), py::arg("u_min") = 35.0, py::arg("u_max") = 250.0);
  m.def(
      "draw_rayleigh_channel",
      [](int antennas, int users, int subcarriers, const RVector& beta, std::uint64_t seed) {
        Rng rng(seed);
        return draw_rayleigh_channel(antennas, users, subcarriers, beta, {}, rng).per_subcarrier;
      },
      py::arg("antennas"), py::arg("users"), py::arg("subcarriers"), py::arg("beta"),
      py::arg("seed"));

  // precoding
  m.def(
      "zf_precoder",
      [](const std::vector<CMatrix>& h, const RVector& gamma, double noise_power) {
        return zf_precoder(as_channel(h), as_qos(gamma, noise_power, static_cast<int>(h.size())));
      },
      py::arg("channel"), py::arg("gamma"), py::arg("noise_power"));
  m.def(
      "min_pa_precoder",
      [](const std::vector<CMatrix>& h, const RVector& gamma, double noise_power,
         double tolerance, int max_iterations) {
        FixedPointConfig cfg;
        cfg.tolerance = tolerance;
        cfg.max_iterations = max_iterations;
        py::gil_scoped_release release;
        return min_pa_precoder(as_channel(h), as_qos(gamma, noise_power, static_cast<int>(h.size())),
                               cfg);
      },
      py::arg("channel"), py::arg("gamma"), py::arg("noise_power"), py::arg("tolerance") = 1e-4,
      py::arg("max_iterations") = 2000);
  m.def("single_user_narrowband_precoder", &single_user_narrowband_precoder, py::arg("h"),
        py::arg("gamma"), py::arg("sigma"));
  m.def("single_user_saturating_precoder", &single_user_saturating_precoder, py::arg("h"),
        py::arg("gamma"), py::arg("sigma"), py::arg("p_max"));
  m.def(
      "max_zf_residual",
      [](const std::vector<CMatrix>& h, const RVector& gamma, double noise_power,
         const std::vector<CMatrix>& w) {
        return max_zf_residual(as_channel(h), as_qos(gamma, noise_power, static_cast<int>(h.size())),
                               w);
      },
      py::arg("channel"), py::arg("gamma"), py::arg("noise_power"), py::arg("precoders"));

  // asymptotic
  m.def("asymptotic_per_antenna_power", &asymptotic_per_antenna_power, py::arg("active_antennas"),
        py::arg("users"), py::arg("trace_term"));
  m.def("asymptotic_pa_power", &asymptotic_pa_power, py::arg("active_antennas"), py::arg("users"),
        py::arg("trace_term"), py::arg("pa"));
  m.def("asymptotic_bs_power", &asymptotic_bs_power, py::arg("active_antennas"), py::arg("users"),
        py::arg("trace_term"), py::arg("pa"), py::arg("bs"));
  m.def("solve_quartic_ma", &solve_quartic_ma, py::arg("users"), py::arg("t"), py::arg("circuit"));
  m.def("optimal_ma_unconstrained", &optimal_ma_unconstrained, py::arg("antennas"),
        py::arg("users"), py::arg("trace_term"), py::arg("pa"), py::arg("bs"));
  m.def("optimal_ma_constrained", &optimal_ma_constrained, py::arg("antennas"), py::arg("users"),
        py::arg("trace_term"), py::arg("pa"), py::arg("bs"));
  m.def("min_ma_power_constraint", &min_ma_power_constraint, py::arg("users"),
        py::arg("trace_term"), py::arg("p_max"));

  // oracle
  m.def(
      "solve_min_pa_bruteforce",
      [](const std::vector<CMatrix>& h, const RVector& gamma, double noise_power, double alpha,
         int starts, std::uint64_t seed) {
        oracle::BruteForceOptions opts;
        opts.starts = starts;
        opts.seed = seed;
        py::gil_scoped_release release;
        const auto r = oracle::solve_min_pa_bruteforce(
            as_channel(h), as_qos(gamma, noise_power, static_cast<int>(h.size())), alpha, opts);
        return std::make_pair(r.powers, r.objective);
      },
      py::arg("channel"), py::arg("gamma"), py::arg("noise_power"), py::arg("alpha"),
      py::arg("starts") = 8, py::arg("seed") = 0);
  m.def("grid_min_bs", &oracle::grid_min_bs, py::arg("antennas"), py::arg("users"),
        py::arg("trace_term"), py::arg("pa"), py::arg("bs"));
}
