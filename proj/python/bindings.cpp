#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ccmvlc/baseline_codecs.hpp"
#include "ccmvlc/bound_engine.hpp"
#include "ccmvlc/ccm_codec.hpp"
#include "ccmvlc/config.hpp"
#include "ccmvlc/conjugation.hpp"
#include "ccmvlc/conjugation_optimizer.hpp"
#include "ccmvlc/error.hpp"
#include "ccmvlc/led_model.hpp"
#include "ccmvlc/sim_harness.hpp"

namespace py = pybind11;
using namespace ccmvlc;

namespace {

CcmParams make_params(int q, const std::array<Bit, 6>& taps) { return CcmParams{taps, q}; }

std::vector<double> table_samples(const ConjugationTable& t) { return {t.samples().begin(), t.samples().end()}; }

py::dict report_dict(const OptimizeReport& r) {
  py::dict d;
  d["iterations"] = r.iterations;
  d["evaluations"] = r.evaluations;
  d["starts"] = r.starts;
  d["best_start"] = r.best_start;
  d["converged"] = r.converged;
  d["termination"] = r.termination;
  d["initial_objective"] = r.initial_objective;
  d["final_objective"] = r.final_objective;
  d["initial_exact"] = r.initial_exact;
  d["final_exact"] = r.final_exact;
  d["identity_min_d2"] = r.identity_min_d2;
  d["final_min_d2"] = r.final_min_d2;
  d["min_gap_margin"] = r.min_gap_margin;
  d["plateaus"] = r.plateaus;
  d["trace"] = r.trace;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ccmvlc, m) {
  m.doc() = "Chaos-coded modulation over nonlinear DCO-OFDM visible light links";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConstraintViolation>(m, "ConstraintViolation", PyExc_ValueError);

  py::class_<CcmParams>(m, "CcmParams")
      .def(py::init(&make_params), py::arg("q") = 6, py::arg("taps") = std::array<Bit, 6>{1, 1, 1, 1, 1, 1})
      .def_readwrite("q", &CcmParams::q)
      .def_readwrite("taps", &CcmParams::taps)
      .def("num_states", &CcmParams::num_states)
      .def("__repr__", [](const CcmParams& p) { return "CcmParams(q=" + std::to_string(p.q) + ")"; });

  m.def(
      "encode_block", [](const std::vector<Bit>& bits, const CcmParams& p) { return encode_block(bits, p); },
      py::arg("bits"), py::arg("params") = CcmParams{});
  m.def("perturbed_recursion_step", &perturbed_recursion_step, py::arg("z"), py::arg("bit"), py::arg("q"));
  m.def(
      "enumerate_loops",
      [](const CcmParams& p, int max_span) {
        std::vector<std::vector<Bit>> out;
        for (const auto& l : enumerate_loops(p, max_span)) out.push_back(l.e);
        return out;
      },
      py::arg("params") = CcmParams{}, py::arg("max_span") = 12);

  py::class_<ConjugationTable>(m, "ConjugationTable")
      .def(py::init([](std::vector<double> s) { return ConjugationTable::from_samples(std::move(s)); }),
           py::arg("samples"))
      .def_static("identity", &ConjugationTable::identity, py::arg("p") = 64)
      .def_static("read", py::overload_cast<const std::filesystem::path&>(&read_lut), py::arg("path"))
      .def("write", [](const ConjugationTable& t, const std::filesystem::path& p) { write_lut(p, t); })
      .def_property_readonly("p", &ConjugationTable::p)
      .def_property_readonly("samples", &table_samples)
      .def("__call__", &ConjugationTable::operator(), py::arg("z"))
      .def("plateau_count", &ConjugationTable::plateau_count, py::arg("flat_tolerance") = 2e-3);

  py::class_<LedTransfer>(m, "LedTransfer")
      .def_static("reference_cubic", &LedTransfer::reference_cubic)
      .def_static("reference_predistorted", &LedTransfer::reference_predistorted)
      .def_static("linear", &LedTransfer::linear, py::arg("beta_dc") = 0.0)
      .def_static("read", py::overload_cast<const std::filesystem::path&>(&read_led), py::arg("path"))
      .def("predistorted", &LedTransfer::predistorted)
      .def("__call__", &LedTransfer::operator(), py::arg("x"));

  py::class_<BussgangStats>(m, "BussgangStats")
      .def_readonly("gain", &BussgangStats::gain)
      .def_readonly("ez2", &BussgangStats::ez2)
      .def_readonly("sigma_eta_sq", &BussgangStats::sigma_eta_sq)
      .def_readonly("sigma_x_sq", &BussgangStats::sigma_x_sq)
      .def_readonly("mean", &BussgangStats::mean);

  m.def(
      "characterize",
      [](const LedTransfer& led, double ibo_db, int n) {
        const double sx2 = OfdmParams{n, static_cast<std::size_t>(n / 2 - 1)}.time_domain_power();
        return bussgang(recenter(led, ibo_to_rho(ibo_db, sx2)), sx2);
      },
      py::arg("led"), py::arg("ibo_db"), py::arg("n") = 256,
      "Bussgang gain and distortion variance of the LED at the given input back-off.");

  m.def(
      "bound",
      [](const ConjugationTable& lut, const LedTransfer& led, double ibo_db, double ebn0_db, bool predistorted,
         int max_span) {
        LinkConfig cfg;
        cfg.lut = lut;
        cfg.led = led;
        cfg.ibo_db = ibo_db;
        cfg.predistorted = predistorted;
        cfg.ebn0_db = {ebn0_db};
        const auto pt = bound_curve(cfg, max_span).front();
        return py::make_tuple(pt.bound, pt.min_d2);
      },
      py::arg("lut"), py::arg("led"), py::arg("ibo_db"), py::arg("ebn0_db"), py::arg("predistorted") = false,
      py::arg("max_span") = 0, "Exact union bound and minimum loop distance: (bound, min_d2).");

  m.def(
      "optimize",
      [](const LedTransfer& led, double ibo_db, double ebn0_db, int p, int restarts, std::size_t subsample) {
        OptimizeSpec spec;
        spec.led = led;
        spec.ibo_db = ibo_db;
        spec.ebn0_db = ebn0_db;
        spec.p = p;
        spec.restarts = restarts;
        spec.subsample_count = subsample;
        std::optional<OptimizeResult> r;
        {
          py::gil_scoped_release release;
          r = optimize_conjugation(spec);
        }
        return py::make_tuple(r->table, report_dict(r->report));
      },
      py::arg("led"), py::arg("ibo_db"), py::arg("ebn0_db") = 10.0, py::arg("p") = 64, py::arg("restarts") = 4,
      py::arg("subsample") = 4096, "Optimized conjugation table and a report dict.");

  py::class_<BerPoint>(m, "BerPoint")
      .def_readonly("ebn0_db", &BerPoint::ebn0_db)
      .def_readonly("bits", &BerPoint::bits)
      .def_readonly("errors", &BerPoint::errors)
      .def_readonly("ber", &BerPoint::ber)
      .def_readonly("equivalent_ebn0_db", &BerPoint::equivalent_ebn0_db)
      .def_readonly("flagged", &BerPoint::flagged);

  m.def(
      "simulate",
      [](const std::string& scheme, const LedTransfer& led, double ibo_db, const std::vector<double>& ebn0_db,
         std::optional<ConjugationTable> lut, bool predistorted, std::uint64_t seed, std::uint64_t min_errors,
         std::uint64_t max_bits) {
        LinkConfig cfg;
        cfg.scheme = parse_scheme(scheme);
        cfg.led = led;
        cfg.ibo_db = ibo_db;
        if (lut) cfg.lut = *lut;
        cfg.predistorted = predistorted;
        cfg.noise_seed = seed;
        cfg.stop = {min_errors, max_bits};
        BerCurve out;
        py::gil_scoped_release release;
        for (double e : ebn0_db) out.push_back(run_link(cfg, e));
        return out;
      },
      py::arg("scheme"), py::arg("led"), py::arg("ibo_db"), py::arg("ebn0_db"), py::arg("lut") = py::none(),
      py::arg("predistorted") = false, py::arg("seed") = 1, py::arg("min_errors") = 100,
      py::arg("max_bits") = 100'000'000, "Monte Carlo BER over the DCO-OFDM link.");

  m.def("required_ebn0", py::overload_cast<const BerCurve&, double>(&required_ebn0), py::arg("curve"),
        py::arg("target_ber"));

  m.def(
      "tcm_round_trip",
      [](const std::vector<Bit>& bits) { return tcm_decode(tcm_encode(bits), 1.0); }, py::arg("bits"));
}
