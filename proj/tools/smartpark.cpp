// smartpark: command-line front end for simulation, ingestion, threshold
// analysis, optimization, cruise-model fitting, evaluation and serving.
#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "smartpark/analytics.hpp"
#include "smartpark/artifacts.hpp"
#include "smartpark/codec.hpp"
#include "smartpark/cruise.hpp"
#include "smartpark/errors.hpp"
#include "smartpark/http_server.hpp"
#include "smartpark/pipeline.hpp"
#include "smartpark/service.hpp"
#include "smartpark/sim.hpp"
#include "smartpark/store.hpp"
#include "smartpark/thresholds.hpp"

namespace fs = std::filesystem;
using namespace smartpark;

namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto field = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": not a number: '" + field + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.size() != expected) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(expected) + " values");
  }
  return out;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string horizon;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  auto sc = sim::load_scenario(a.scenario);
  if (a.seed) sc.demand.seed = *a.seed;
  const auto horizon = parse_horizon(a.horizon);
  fs::create_directories(a.out);

  std::vector<std::uint8_t> stream;
  std::size_t batches = 0;
  const auto truth = sim::simulate(sc.structure, sc.demand, horizon,
                                   [&](const codec::UplinkBatch& b) {
                                     codec::append_encoded(b, stream);
                                     ++batches;
                                   });
  artifacts::write_text(std::string(stream.begin(), stream.end()), a.out + "/uplink.apb");
  sim::write_windows_csv(truth, a.out + "/ground_truth.csv");
  sim::write_vehicles_csv(truth, a.out + "/vehicles.csv");
  sim::write_cruise_obs_csv(truth, a.out + "/cruise_obs.csv");
  std::printf("batches %zu\nbytes %zu\nwindows %zu\nvehicles %zu\n", batches, stream.size(),
              truth.windows.size(), truth.vehicles.size());
  return 0;
}

// --- ingest -----------------------------------------------------------------

struct IngestArgs {
  std::string frames;
  std::string store;
  std::optional<std::string> ground_truth;
  std::optional<std::string> series_out;
  std::optional<std::string> pairs_out;
  long long lateness{0};
  int spots{103};
};

int run_ingest(const IngestArgs& a) {
  const auto bytes = read_bytes(a.frames);
  const auto batches = codec::decode_stream(bytes);
  ingest::StoreOptions opts;
  opts.lateness_bound = a.lateness;
  opts.directory = a.store;
  if (fs::exists(fs::path(a.store) / "events.log")) {
    throw ConfigError(a.store + " already holds an event log; use a fresh store directory");
  }
  fs::create_directories(a.store);
  ingest::Store store(opts);
  const auto summary = pipeline::ingest_all(store, batches);
  std::printf("frames %zu\naccepted_records %zu\nduplicates %zu\nlate_dropped %zu\nevents %zu\n",
              summary.frames, summary.accepted_records, summary.duplicates, summary.late_dropped,
              summary.events);

  const auto spots = pipeline::spot_ids(a.spots);
  const auto series = pipeline::measured_series(store, spots);
  std::printf("windows %zu (%s .. %s)\n", series.windows.size(),
              format_iso(series.windows.front()).c_str(), format_iso(series.windows.back()).c_str());
  if (a.series_out) ingest::write_series_csv(series, *a.series_out);
  if (a.pairs_out) {
    if (!a.ground_truth) throw ConfigError("--pairs-out needs --ground-truth");
    const auto pairs = pipeline::join_pairs(series, pipeline::read_truth_csv(*a.ground_truth));
    analytics::write_pairs_csv(pairs, *a.pairs_out);
    std::printf("pairs %zu\n", pairs.size());
  }
  return 0;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string pairs;
  std::optional<std::string> window;
  std::optional<std::string> out_dir;
  double tau{0.95};
  int bins{20};
};

void write_timed(const std::vector<analytics::TimedValue>& v, const char* column,
                 const std::string& path) {
  std::string text = std::string("window_start,") + column + "\n";
  char buf[64];
  for (const auto& x : v) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g\n", static_cast<long long>(x.t), x.value);
    text += buf;
  }
  artifacts::write_text(text, path);
}

int run_thresholds(const AnalyzeArgs& a) {
  auto pairs = analytics::read_pairs_csv(a.pairs);
  if (a.window) pairs = analytics::restrict_to(pairs, parse_day_window(*a.window));
  const auto th = analytics::initial_thresholds(pairs);
  std::printf("delta1 %.6f (window %s)\ndelta2 %.6f (window %s)\n", th.delta1,
              format_iso(th.delta1_window).c_str(), th.delta2, format_iso(th.delta2_window).c_str());
  if (a.out_dir) {
    fs::create_directories(*a.out_dir);
    std::vector<analytics::TimedValue> ratio;
    std::vector<analytics::TimedValue> inc3;
    std::vector<analytics::TimedValue> grad;
    for (const auto& run : analytics::contiguous_runs(pairs)) {
      std::vector<analytics::OccupancyPair> nz;
      for (const auto& p : run) {
        if (p.r_w > 0.0) nz.push_back(p);
      }
      for (const auto& piece : analytics::contiguous_runs(nz)) {
        const auto r = analytics::ratio_curve(piece);
        ratio.insert(ratio.end(), r.begin(), r.end());
        if (r.size() >= 3) {
          const auto i = analytics::backward_increment(r, 3);
          inc3.insert(inc3.end(), i.begin(), i.end());
        }
      }
      if (run.size() >= 2) {
        std::vector<analytics::TimedValue> top;
        for (const auto& p : run) top.push_back({p.window_start, p.r_t});
        const auto g = analytics::backward_increment(top, 2);
        grad.insert(grad.end(), g.begin(), g.end());
      }
    }
    write_timed(ratio, "ratio", *a.out_dir + "/ratio.csv");
    write_timed(inc3, "increment3", *a.out_dir + "/ratio_increment.csv");
    write_timed(grad, "gradient", *a.out_dir + "/top_gradient.csv");
    std::vector<double> values;
    for (const auto& g : grad) values.push_back(g.value);
    if (!values.empty()) {
      std::string text = "lo,hi,count,density\n";
      char buf[128];
      for (const auto& b : analytics::kde_histogram(values, a.bins)) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g\n", b.lo, b.hi, b.count, b.density);
        text += buf;
      }
      artifacts::write_text(text, *a.out_dir + "/gradient_kde.csv");
    }
  }
  return 0;
}

int run_quantile(const AnalyzeArgs& a) {
  auto pairs = analytics::read_pairs_csv(a.pairs);
  if (a.window) pairs = analytics::restrict_to(pairs, parse_day_window(*a.window));
  const auto line = analytics::fit_quantile_line(pairs, a.tau);
  int above = 0;
  for (const auto& p : pairs) above += p.r_w > line.predict(p.r_t) ? 1 : 0;
  std::printf("tau %.4f\nslope %.6f\nintercept %.6f\npoints %zu\nabove %d (%.4f)\n", line.tau,
              line.slope, line.intercept, pairs.size(), above,
              static_cast<double>(above) / static_cast<double>(pairs.size()));
  return 0;
}

// --- optimize ---------------------------------------------------------------

struct OptimizeArgs {
  std::string pairs;
  std::string cost{"7,4,10,5"};
  std::string fa_tol{"0.05,0.05"};
  double grid{0.01};
  std::optional<std::string> window;
  double tau{0.95};
  std::string out{"scheme.json"};
};

int run_optimize(const OptimizeArgs& a) {
  auto pairs = analytics::read_pairs_csv(a.pairs);
  if (a.window) pairs = analytics::restrict_to(pairs, parse_day_window(*a.window));
  const auto c = parse_list(a.cost, 4, "--cost");
  const auto t = parse_list(a.fa_tol, 2, "--fa-tol");
  artifacts::OptimizeRecord rec;
  rec.cost = {c[0], c[1], c[2], c[3], t[0], t[1]};
  rec.grid_step = a.grid;
  rec.training_pairs = static_cast<int>(pairs.size());
  rec.optimum = thresholds::optimize(pairs, rec.cost, a.grid);
  if (pairs.size() >= 10) rec.quantile_line = analytics::fit_quantile_line(pairs, a.tau);
  artifacts::write_scheme(rec, a.out);
  const auto& o = rec.optimum;
  std::printf("delta1 %.2f\ndelta2 %.2f\nobjective %.6f\n", o.scheme.delta1, o.scheme.delta2,
              o.objective);
  std::printf("P_MD1 %" PRId64 "/%" PRId64 "\nP_MD2 %" PRId64 "/%" PRId64 "\n", o.rates.p_md1.num,
              o.rates.p_md1.den, o.rates.p_md2.num, o.rates.p_md2.den);
  std::printf("P_FA1 %" PRId64 "/%" PRId64 "\nP_FA2 %" PRId64 "/%" PRId64 "\n", o.rates.p_fa1.num,
              o.rates.p_fa1.den, o.rates.p_fa2.num, o.rates.p_fa2.den);
  return 0;
}

// --- fit-cruise -------------------------------------------------------------

struct FitArgs {
  std::string obs;
  int folds{5};
  std::uint64_t seed{1};
  std::string out{"model.json"};
  std::optional<std::string> curve_out;
};

int run_fit(const FitArgs& a) {
  const auto obs = cruise::read_observations_csv(a.obs);
  artifacts::ModelRecord rec;
  rec.model = cruise::fit(obs);
  rec.cv = cruise::cross_validate(obs, a.folds, a.seed);
  rec.model.train_mape = rec.cv.train_mape;
  rec.model.test_mape = rec.cv.test_mape;
  rec.display = cruise::display_times(rec.model);
  rec.observations = static_cast<int>(obs.size());
  artifacts::write_model(rec, a.out);
  std::printf("alpha %.4f\nbeta %.4f\ntrain_mape %.2f%%\ntest_mape %.2f%%\n", rec.model.alpha,
              rec.model.beta, rec.cv.train_mape, rec.cv.test_mape);
  std::printf("display %d min / %d min\n", rec.display.minutes_low, rec.display.minutes_high);
  if (a.curve_out) {
    std::string text = "r,T_seconds\n";
    char buf[64];
    const double r_end = rec.model.beta > 0.0 ? std::min(1.0, 0.99 / rec.model.beta) : 1.0;
    for (int i = 0; i <= 100; ++i) {
      const double r = r_end * i / 100.0;
      std::snprintf(buf, sizeof buf, "%.4f,%.17g\n", r, rec.model.predict(r));
      text += buf;
    }
    artifacts::write_text(text, *a.curve_out);
  }
  return 0;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string scheme;
  std::string pairs;
  std::string window{"08:30-10:30"};
  std::optional<std::string> out;
};

int run_eval(const EvalArgs& a) {
  const auto scheme = artifacts::read_scheme(a.scheme).scheme;
  const auto pairs = analytics::read_pairs_csv(a.pairs);
  const auto e = thresholds::evaluate_scheme(scheme, pairs, parse_day_window(a.window));
  std::printf("mse %.4f\nwindows %d\nerrors %d\n", e.error_rate, e.windows, e.errors);
  if (a.out) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\n  \"mse\": %.17g,\n  \"windows\": %d,\n  \"errors\": %d,\n"
                  "  \"window\": \"%s\",\n  \"delta1\": %.17g,\n  \"delta2\": %.17g\n}\n",
                  e.error_rate, e.windows, e.errors, a.window.c_str(), scheme.delta1,
                  scheme.delta2);
    artifacts::write_text(buf, *a.out);
  }
  return 0;
}

// --- serve ------------------------------------------------------------------

int run_serve(const std::optional<std::string>& config) {
  const auto cfg = service::load_config(config);
  service::InfoService svc(cfg);
  service::HttpServer server(svc);
  std::fprintf(stderr, "listening on %s:%d\n", cfg.host.c_str(), cfg.port);
  return server.listen(cfg.host, cfg.port) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parking occupancy sensing, analysis and information service"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the structure simulator");
  sim_cmd->add_option("--scenario", sim_args.scenario, "Scenario YAML")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "Override the scenario seed");
  sim_cmd->add_option("--horizon", sim_args.horizon, "start..end (ISO or unix seconds)")->required();
  sim_cmd->add_option("--out", sim_args.out, "Output directory")->required();

  IngestArgs ing_args;
  auto* ing_cmd = app.add_subcommand("ingest", "Decode an uplink stream into the event store");
  ing_cmd->add_option("--frames", ing_args.frames, "Concatenated frames (.apb)")->required();
  ing_cmd->add_option("--store", ing_args.store, "Event store directory")->required();
  ing_cmd->add_option("--ground-truth", ing_args.ground_truth, "ground_truth.csv from simulate");
  ing_cmd->add_option("--series-out", ing_args.series_out, "Measured top-floor series CSV");
  ing_cmd->add_option("--pairs-out", ing_args.pairs_out, "Joined (r_t, r_w) pairs CSV");
  ing_cmd->add_option("--lateness", ing_args.lateness, "Lateness bound in seconds");
  ing_cmd->add_option("--spots", ing_args.spots, "Top-floor spot sensors");

  AnalyzeArgs an_args;
  auto* an_cmd = app.add_subcommand("analyze", "Occupancy analytics");
  an_cmd->require_subcommand(1);
  auto* th_cmd = an_cmd->add_subcommand("thresholds", "Gradient-based initial thresholds");
  auto* q_cmd = an_cmd->add_subcommand("quantile", "Upper quantile line of r_w on r_t");
  for (auto* c : {th_cmd, q_cmd}) {
    c->add_option("--pairs", an_args.pairs, "Pairs CSV")->required();
    c->add_option("--window", an_args.window, "Daily window HH:MM-HH:MM");
  }
  th_cmd->add_option("--out-dir", an_args.out_dir, "Write ratio, increment and KDE CSVs here");
  th_cmd->add_option("--bins", an_args.bins, "Histogram bins");
  q_cmd->add_option("--tau", an_args.tau, "Quantile level");

  OptimizeArgs opt_args;
  auto* opt_cmd = app.add_subcommand("optimize", "Select display thresholds");
  opt_cmd->add_option("--pairs", opt_args.pairs, "Training pairs CSV")->required();
  opt_cmd->add_option("--cost", opt_args.cost, "C_MD1,C_FA1,C_MD2,C_FA2");
  opt_cmd->add_option("--fa-tol", opt_args.fa_tol, "False-alarm tolerances a1,a2");
  opt_cmd->add_option("--grid", opt_args.grid, "Grid step");
  opt_cmd->add_option("--window", opt_args.window, "Restrict training to a daily window");
  opt_cmd->add_option("--tau", opt_args.tau, "Quantile level for the inference line");
  opt_cmd->add_option("--out", opt_args.out, "Scheme JSON");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit-cruise", "Fit the cruising-time model");
  fit_cmd->add_option("--obs", fit_args.obs, "CSV r,T_seconds")->required();
  fit_cmd->add_option("--folds", fit_args.folds, "Cross-validation folds");
  fit_cmd->add_option("--seed", fit_args.seed, "Fold shuffle seed");
  fit_cmd->add_option("--out", fit_args.out, "Model JSON");
  fit_cmd->add_option("--curve-out", fit_args.curve_out, "Fitted curve CSV");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Error rate of a scheme over a daily window");
  eval_cmd->add_option("--scheme", eval_args.scheme, "Scheme JSON")->required();
  eval_cmd->add_option("--pairs", eval_args.pairs, "Test pairs CSV")->required();
  eval_cmd->add_option("--window", eval_args.window, "Daily window HH:MM-HH:MM");
  eval_cmd->add_option("--out", eval_args.out, "Evaluation JSON");

  std::optional<std::string> serve_config;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP information service");
  serve_cmd->add_option("--config", serve_config, "Service YAML");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (ing_cmd->parsed()) return run_ingest(ing_args);
    if (th_cmd->parsed()) return run_thresholds(an_args);
    if (q_cmd->parsed()) return run_quantile(an_args);
    if (opt_cmd->parsed()) return run_optimize(opt_args);
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (serve_cmd->parsed()) return run_serve(serve_config);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.kind().c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
