// Python module smartpark._core.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smartpark/analytics.hpp"
#include "smartpark/codec.hpp"
#include "smartpark/cruise.hpp"
#include "smartpark/errors.hpp"
#include "smartpark/http_server.hpp"
#include "smartpark/pipeline.hpp"
#include "smartpark/service.hpp"
#include "smartpark/sim.hpp"
#include "smartpark/thresholds.hpp"

namespace py = pybind11;
using namespace smartpark;

namespace {

using PairTuple = std::tuple<UnixSeconds, double, double>;

std::vector<analytics::OccupancyPair> to_pairs(const std::vector<PairTuple>& in) {
  std::vector<analytics::OccupancyPair> out;
  out.reserve(in.size());
  for (const auto& [t, rt, rw] : in) out.push_back({t, rt, rw});
  return out;
}

std::vector<PairTuple> from_pairs(const std::vector<analytics::OccupancyPair>& in) {
  std::vector<PairTuple> out;
  out.reserve(in.size());
  for (const auto& p : in) out.emplace_back(p.window_start, p.r_t, p.r_w);
  return out;
}

py::dict rates_dict(const thresholds::ErrorRates& r) {
  py::dict d;
  d["p_md1"] = r.p_md1.value();
  d["p_fa1"] = r.p_fa1.value();
  d["p_md2"] = r.p_md2.value();
  d["p_fa2"] = r.p_fa2.value();
  return d;
}

py::dict batch_dict(const codec::UplinkBatch& b) {
  py::list records;
  for (const auto& r : b.records) {
    records.append(py::make_tuple(r.sensor_id, r.offset_s, r.state, r.watchdog));
  }
  py::dict d;
  d["ap_id"] = b.ap_id;
  d["batch_epoch"] = b.batch_epoch;
  d["records"] = records;
  return d;
}

std::vector<cruise::Observation> to_obs(const std::vector<std::pair<double, double>>& in) {
  std::vector<cruise::Observation> out;
  for (const auto& [r, t] : in) out.push_back({r, t});
  return out;
}

py::bytes as_bytes(const std::vector<std::uint8_t>& v) {
  return {reinterpret_cast<const char*>(v.data()), v.size()};
}

std::span<const std::uint8_t> view(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parking occupancy pipeline: codec, simulator, analytics, thresholds, cruise model";

  // Leaked on purpose: the class lives as long as the interpreter.
  static py::handle error = py::exception<Error>(m, "SmartParkError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = error(e.what());
      inst.attr("kind") = e.kind();
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  m.def(
      "encode",
      [](std::uint16_t ap_id, std::uint32_t batch_epoch,
         const std::vector<std::tuple<int, int, bool, bool>>& records) {
        codec::UplinkBatch b{batch_epoch, ap_id, {}};
        for (const auto& [id, off, state, wd] : records) {
          if (id < 0 || off < 0 || id > 0xFFFF || off > 0xFF) {
            throw EncodingError("record field out of range");
          }
          b.records.push_back({static_cast<std::uint16_t>(id), static_cast<std::uint8_t>(off),
                               state, wd});
        }
        return as_bytes(codec::encode(b));
      },
      py::arg("ap_id"), py::arg("batch_epoch"), py::arg("records"),
      "Encode one frame; records are (sensor_id, offset_s, state, watchdog).");
  m.def(
      "decode", [](const std::string& data) { return batch_dict(codec::decode(view(data))); },
      py::arg("data"));
  m.def(
      "decode_stream",
      [](const std::string& data) {
        py::list out;
        for (const auto& b : codec::decode_stream(view(data))) out.append(batch_dict(b));
        return out;
      },
      py::arg("data"));

  m.def(
      "simulate_pairs",
      [](const std::string& scenario_path, const std::string& horizon,
         std::optional<std::uint64_t> seed) {
        auto s = sim::load_scenario(scenario_path);
        if (seed) s.demand.seed = *seed;
        return from_pairs(pipeline::simulate_pairs(s, parse_horizon(horizon)));
      },
      py::arg("scenario_path"), py::arg("horizon"), py::arg("seed") = py::none(),
      "Simulate, encode, decode and ingest; returns (window_start, r_t, r_w) tuples.");
  m.def(
      "restrict_to",
      [](const std::vector<PairTuple>& pairs, const std::string& window) {
        return from_pairs(analytics::restrict_to(to_pairs(pairs), parse_day_window(window)));
      },
      py::arg("pairs"), py::arg("window"));

  m.def(
      "fit_quantile_line",
      [](const std::vector<PairTuple>& pairs, double tau) {
        const auto l = analytics::fit_quantile_line(to_pairs(pairs), tau);
        py::dict d;
        d["slope"] = l.slope;
        d["intercept"] = l.intercept;
        d["tau"] = l.tau;
        return d;
      },
      py::arg("pairs"), py::arg("tau") = 0.95);
  m.def(
      "initial_thresholds",
      [](const std::vector<PairTuple>& pairs) {
        const auto th = analytics::initial_thresholds(to_pairs(pairs));
        return py::make_tuple(th.delta1, th.delta2);
      },
      py::arg("pairs"));

  m.def(
      "classify",
      [](double r_t, double delta1, double delta2) {
        return thresholds::to_string(thresholds::classify(r_t, {delta1, delta2}));
      },
      py::arg("r_t"), py::arg("delta1") = 0.12, py::arg("delta2") = 0.64);
  m.def(
      "error_rates",
      [](const std::vector<PairTuple>& pairs, double delta1, double delta2) {
        return rates_dict(thresholds::error_rates(to_pairs(pairs), delta1, delta2));
      },
      py::arg("pairs"), py::arg("delta1"), py::arg("delta2"));
  m.def(
      "optimize",
      [](const std::vector<PairTuple>& pairs, std::tuple<double, double, double, double> cost,
         std::pair<double, double> fa_tol, double step) {
        thresholds::CostSpec c;
        std::tie(c.c_md1, c.c_fa1, c.c_md2, c.c_fa2) = cost;
        std::tie(c.fa_tol1, c.fa_tol2) = fa_tol;
        const auto o = thresholds::optimize(to_pairs(pairs), c, step);
        py::dict d;
        d["delta1"] = o.scheme.delta1;
        d["delta2"] = o.scheme.delta2;
        d["objective"] = o.objective;
        d["rates"] = rates_dict(o.rates);
        d["candidates"] = o.candidates;
        d["feasible"] = o.feasible;
        return d;
      },
      py::arg("pairs"), py::arg("cost") = std::make_tuple(7.0, 4.0, 10.0, 5.0),
      py::arg("fa_tol") = std::make_pair(0.05, 0.05), py::arg("step") = 0.01);
  m.def(
      "evaluate_scheme",
      [](double delta1, double delta2, const std::vector<PairTuple>& pairs,
         const std::string& window) {
        const auto e = thresholds::evaluate_scheme({delta1, delta2}, to_pairs(pairs),
                                                   parse_day_window(window));
        return py::make_tuple(e.error_rate, e.windows, e.errors);
      },
      py::arg("delta1"), py::arg("delta2"), py::arg("pairs"), py::arg("window") = "08:30-10:30");

  m.def(
      "fit_cruise",
      [](const std::vector<std::pair<double, double>>& obs) {
        const auto model = cruise::fit(to_obs(obs));
        return py::make_tuple(model.alpha, model.beta);
      },
      py::arg("observations"), "Fit T = alpha / (1 - beta r) to (r, T_seconds) pairs.");
  m.def(
      "cross_validate",
      [](const std::vector<std::pair<double, double>>& obs, int folds, std::uint64_t seed) {
        const auto cv = cruise::cross_validate(to_obs(obs), folds, seed);
        return py::make_tuple(cv.train_mape, cv.test_mape, cv.excluded_zero);
      },
      py::arg("observations"), py::arg("folds") = 5, py::arg("seed") = 0);
  m.def(
      "predict_cruise",
      [](double alpha, double beta, double r) { return cruise::CruiseModel{alpha, beta}.predict(r); },
      py::arg("alpha"), py::arg("beta"), py::arg("r"));
  m.def(
      "display_minutes",
      [](double alpha, double beta) {
        const auto d = cruise::display_times(cruise::CruiseModel{alpha, beta});
        return py::make_tuple(d.minutes_low, d.minutes_high);
      },
      py::arg("alpha"), py::arg("beta"));

  py::class_<service::InfoService>(m, "InfoService")
      .def(py::init([](int spots, double delta1, double delta2, double alpha, double beta,
                       long long staleness_s) {
             service::ServiceConfig c;
             c.spot_count = spots;
             c.staleness_s = staleness_s;
             service::Bundle b;
             b.scheme = {delta1, delta2};
             b.model = {alpha, beta};
             return std::make_unique<service::InfoService>(c, b);
           }),
           py::arg("spots") = 103, py::arg("delta1") = 0.12, py::arg("delta2") = 0.64,
           py::arg("alpha") = 17.2678, py::arg("beta") = 0.9946, py::arg("staleness_s") = 300)
      .def(
          "ingest",
          [](service::InfoService& s, const std::string& data) {
            return service::ack_json(s.ingest(view(data)));
          },
          py::arg("data"), "Ingest concatenated frames; returns the ack as JSON text.")
      .def(
          "status",
          [](const service::InfoService& s, UnixSeconds now) {
            return service::status_json(s.status(now));
          },
          py::arg("now"), "Current status as JSON text.");
}
