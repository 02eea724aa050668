#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_support.hpp"
#include "jjosc/config.hpp"
#include "jjosc/constants.hpp"
#include "jjosc/errors.hpp"
#include "jjosc/fidelity.hpp"
#include "jjosc/injection.hpp"
#include "jjosc/parallel.hpp"
#include "jjosc/sigproc.hpp"
#include "jjosc/steady_state.hpp"
#include "jjosc/time_domain.hpp"
#include "json.hpp"

#ifndef JJOSC_VERSION
#define JJOSC_VERSION "0.0.0"
#endif

using namespace jjosc;
using jjosc::cli::CsvTable;
using nlohmann::json;

namespace {

struct Output {
  explicit Output(CsvTable t, std::optional<std::uint64_t> s = std::nullopt) : table(std::move(t)), seed(s) {}

  CsvTable table;
  json results = json::object();
  std::optional<std::uint64_t> seed;
};

struct Loaded {
  DeviceConfig device;
  std::string path;
  std::string text;
};

std::optional<Loaded> g_config;

const DeviceConfig& load_device(const std::string& path) {
  if (path.empty()) fail(ErrorKind::ConfigParse, "--config is required for this command");
  const std::string text = cli::read_input(path);
  g_config = Loaded{device_config(ConfigDocument::parse(text, path)), path, text};
  return g_config->device;
}

struct SimFlags {
  std::optional<double> duration, output_dt, rel_tol, temperature, noise_scale, transient;
  std::optional<std::uint64_t> seed;
  std::optional<double> f_inj, p_inj, coupling;

  void attach(CLI::App* sub, bool with_injection) {
    sub->add_option("--duration", duration, "Simulated time (s)");
    sub->add_option("--output-dt", output_dt, "Output sample spacing (s)");
    sub->add_option("--rel-tol", rel_tol, "Integrator relative tolerance");
    sub->add_option("--temperature", temperature, "Shunt noise temperature (K)");
    sub->add_option("--noise-scale", noise_scale, "Multiplier on the shunt Johnson PSD");
    sub->add_option("--transient-fraction", transient, "Share of the record discarded by analyses");
    sub->add_option("--seed", seed, "Noise seed");
    if (with_injection) {
      sub->add_option("--f-inj", f_inj, "Injection frequency (Hz)");
      sub->add_option("--p-inj", p_inj, "Injection power at the sample (dBm)");
      sub->add_option("--coupling", coupling, "Injection coupling (A/sqrt(W))");
    }
  }

  SimConfig build(const DeviceConfig& d) const {
    SimConfig c = d.simulation;
    if (duration) c.duration = *duration;
    if (output_dt) c.output_dt = *output_dt;
    if (rel_tol) c.rel_tol = c.abs_tol = *rel_tol;
    if (temperature) c.noise_temperature = *temperature;
    if (noise_scale) c.noise_psd_scale = *noise_scale;
    if (transient) c.transient_fraction = *transient;
    if (seed) c.seed = *seed;
    if (f_inj || p_inj) {
      if (!f_inj || !p_inj) fail(ErrorKind::ConfigParse, "--f-inj and --p-inj go together");
      c.injection = InjectionSpec{*f_inj, *p_inj, coupling.value_or(d.injection_coupling)}.tone();
    }
    c.validate();
    return c;
  }
};

std::string region_name(BiasRegion r) { return std::string(to_string(r)); }

json spectrum_fit_json(const PeakFit& f) {
  return {{"shape", f.shape == LineShape::Gaussian ? "gaussian" : "lorentzian"},
          {"center_hz", f.center},
          {"fwhm_hz", f.fwhm},
          {"area_w", f.area},
          {"offset_w_per_hz", f.offset},
          {"center_sigma_hz", f.center_sigma},
          {"fwhm_sigma_hz", f.fwhm_sigma},
          {"area_sigma_w", f.area_sigma},
          {"reduced_chi2", f.reduced_chi2},
          {"points", f.points}};
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigParse:
    case ErrorKind::InvalidArgument:
    case ErrorKind::EmptyInput:
    case ErrorKind::NonMonotoneFrequencies:
      return 2;
    case ErrorKind::Io:
      return 4;
    default:
      return 3;
  }
}

void error_record(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << "\n";
}

int run(const std::vector<std::string>& args);

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Josephson-junction oscillator toolkit", "jjosc"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", JJOSC_VERSION);

  std::string config_path, out_path;
  std::optional<int> threads;
  app.add_option("--config", config_path, "Device configuration file");
  app.add_option("--out", out_path, "Output CSV (manifest written alongside); stdout if omitted");
  app.add_option("--threads", threads, "Worker thread cap (overrides JJOSC_THREADS)")->check(CLI::PositiveNumber);

  std::function<Output()> handler;
  std::string command;

  // operating-point
  double op_ib = 0.0;
  std::optional<std::string> shunt;
  auto* op = app.add_subcommand("operating-point", "Self-consistent oscillation at one bias");
  op->add_option("--ib", op_ib, "Bias current (A)")->required();
  op->add_option("--shunt", shunt, "decoupled or parallel");
  auto solver_for = [&](const DeviceConfig& d) {
    SolverOptions s = d.solver;
    if (shunt) s.shunt = shunt_model_from_string(*shunt);
    return s;
  };
  op->callback([&] {
    command = "operating-point";
    handler = [&] {
      const auto& d = load_device(config_path);
      const auto p = solve_operating_point(d.junction, d.resonator, op_ib, solver_for(d));
      Output o{CsvTable({"ib_a", "region", "f_emit_hz", "i1_a", "ij_dc_a", "phic_rad", "p_out_w", "p_dc_w",
                         "efficiency", "v_dc_v", "zj_re_ohm", "zj_im_ohm"})};
      o.table.row()
          .num(op_ib)
          .text(region_name(p.region))
          .num(p.frequency())
          .num(p.i1)
          .num(p.ij_dc)
          .num(p.phic)
          .num(p.p_out)
          .num(p.p_dc)
          .num(p.efficiency)
          .num(shapiro_voltage(p.omega))
          .num(p.zj.re)
          .num(p.zj.im);
      return o;
    };
  });

  // sweep-bias
  std::string sweep_ib;
  auto* sweep = app.add_subcommand("sweep-bias", "Region classification and operating points over a bias grid");
  sweep->add_option("--ib", sweep_ib, "Bias grid start:stop:step (A)")->required();
  sweep->add_option("--shunt", shunt, "decoupled or parallel");
  sweep->callback([&] {
    command = "sweep-bias";
    handler = [&] {
      const auto grid = parse_grid(sweep_ib, "--ib");
      const auto& d = load_device(config_path);
      const auto rows = bias_sweep(d.junction, d.resonator, grid, solver_for(d));
      Output o{CsvTable({"ib_a", "region", "f_emit_hz", "p_out_w", "i1_a", "v_dc_v", "status"})};
      std::optional<double> lo, hi;
      for (const auto& r : rows) {
        o.table.row().num(r.ib).text(region_name(r.region)).num(r.f_emit).num(r.p_out).num(r.i1).num(r.v_dc).text(
            r.status);
        if (r.region == BiasRegion::ShapiroStep) {
          if (!lo) lo = r.ib;
          hi = r.ib;
        }
      }
      o.results["step_low_a"] = lo ? json(*lo) : json(nullptr);
      o.results["step_high_a"] = hi ? json(*hi) : json(nullptr);
      return o;
    };
  });

  // iv
  std::string iv_ib;
  SimFlags iv_flags;
  auto* iv = app.add_subcommand("iv", "Time-domain IV curve with adiabatic continuation");
  iv->add_option("--ib", iv_ib, "Bias grid start:stop:step (A)")->required();
  iv_flags.attach(iv, false);
  iv->callback([&] {
    command = "iv";
    handler = [&] {
      const auto grid = parse_grid(iv_ib, "--ib");
      const auto& d = load_device(config_path);
      SimConfig cfg = iv_flags.build(d);
      const auto pts = iv_curve(d.junction, d.resonator, grid, cfg);
      Output o{CsvTable({"ib_a", "v_mean_v", "drift", "status"}), cfg.seed};
      for (const auto& p : pts) o.table.row().num(p.ib).num(p.v_mean).num(p.drift).text(p.status);
      return o;
    };
  });

  // simulate
  double sim_ib = 0.0;
  std::size_t every = 1;
  SimFlags sim_flags;
  auto* sim = app.add_subcommand("simulate", "Time-domain trace of the circuit");
  sim->add_option("--ib", sim_ib, "Bias current (A)")->required();
  sim->add_option("--every", every, "Write every n-th sample")->check(CLI::PositiveNumber);
  sim_flags.attach(sim, true);
  sim->callback([&] {
    command = "simulate";
    handler = [&] {
      const auto& d = load_device(config_path);
      const SimConfig cfg = sim_flags.build(d);
      const auto tr = simulate(d.junction, d.resonator, sim_ib, cfg);
      Output o{CsvTable({"t_s", "phi_rad", "v_v", "i_res_a", "q_res_c"}), cfg.seed};
      for (std::size_t k = 0; k < tr.size(); k += every) {
        const auto& s = tr.samples[k];
        o.table.row().num(tr.time(k)).num(s.phi).num(s.v).num(s.i_res).num(s.q_res);
      }
      o.results["accepted_steps"] = tr.accepted_steps;
      o.results["rejected_steps"] = tr.rejected_steps;
      try {
        const auto m = steady_state_metrics(tr);
        o.results["metrics"] = {{"v_dc_v", m.v_dc},
                                {"f_emit_hz", m.f_emit},
                                {"i1_a", m.i1},
                                {"v1_v", m.v1},
                                {"peak_to_median_db", m.peak_to_median_db}};
      } catch (const Error& e) {
        o.results["metrics_error"] = e.what();
      }
      return o;
    };
  });

  // spectrum
  double sp_ib = 0.0;
  std::string signal = "voltage", window = "hann", fit = "none";
  std::size_t segment = 0;
  std::optional<double> f_lo, f_hi;
  SimFlags sp_flags;
  auto* sp = app.add_subcommand("spectrum", "Welch PSD of a simulated trace, optionally with a line fit");
  sp->add_option("--ib", sp_ib, "Bias current (A)")->required();
  sp->add_option("--signal", signal, "voltage, resonator or output")
      ->check(CLI::IsMember({"voltage", "resonator", "output"}));
  sp->add_option("--window", window, "hann or rect")->check(CLI::IsMember({"hann", "rect"}));
  sp->add_option("--segment", segment, "Welch segment length (samples); 0 for one segment");
  sp->add_option("--fit", fit, "none, gaussian or lorentzian")->check(CLI::IsMember({"none", "gaussian", "lorentzian"}));
  sp->add_option("--f-lo", f_lo, "Lowest frequency written (Hz)");
  sp->add_option("--f-hi", f_hi, "Highest frequency written (Hz)");
  sp_flags.attach(sp, true);
  sp->callback([&] {
    command = "spectrum";
    handler = [&] {
      const auto& d = load_device(config_path);
      const SimConfig cfg = sp_flags.build(d);
      const auto tr = simulate(d.junction, d.resonator, sp_ib, cfg);
      PsdOptions po;
      po.segment_length = segment;
      po.window = window == "hann" ? Window::Hann : Window::Rectangular;
      const TraceSignal ts = signal == "voltage"     ? TraceSignal::Voltage
                             : signal == "resonator" ? TraceSignal::ResonatorCurrent
                                                     : TraceSignal::OutputPort;
      const auto s = power_spectral_density(tr, ts, po);
      const std::string col = signal == "voltage" ? "psd_v2_per_hz" : signal == "resonator" ? "psd_a2_per_hz"
                                                                                            : "psd_w_per_hz";
      Output o{CsvTable({"f_hz", col}), cfg.seed};
      for (std::size_t k = 0; k < s.f.size(); ++k) {
        if ((f_lo && s.f[k] < *f_lo) || (f_hi && s.f[k] > *f_hi)) continue;
        o.table.row().num(s.f[k]).num(s.psd[k]);
      }
      o.results["rbw_hz"] = s.rbw;
      o.results["averages"] = s.averages;
      if (fit != "none") {
        try {
          o.results["fit"] =
              spectrum_fit_json(fit_gaussian_peak(s, fit == "gaussian" ? LineShape::Gaussian : LineShape::Lorentzian));
        } catch (const Error& e) {
          o.results["fit_error"] = e.what();
        }
      }
      return o;
    };
  });

  // injection-map
  double im_ib = 0.0, im_p = 0.0;
  std::string im_f;
  LockOptions lock_opts;
  SimFlags im_flags;
  std::optional<double> im_coupling;
  auto* im = app.add_subcommand("injection-map", "Lock state over a grid of injection frequencies");
  im->add_option("--ib", im_ib, "Bias current (A)")->required();
  im->add_option("--f-inj", im_f, "Injection frequency grid start:stop:step (Hz)")->required();
  im->add_option("--p-inj", im_p, "Injection power at the sample (dBm)")->required();
  im->add_option("--coupling", im_coupling, "Injection coupling (A/sqrt(W))");
  im->add_option("--rbw", lock_opts.rbw, "Resolution bandwidth for lock detection (Hz)");
  im->add_option("--threshold", lock_opts.threshold, "Share of emission power near f_inj for lock");
  im_flags.attach(im, false);
  im->callback([&] {
    command = "injection-map";
    handler = [&] {
      const auto grid = parse_grid(im_f, "--f-inj");
      const auto& d = load_device(config_path);
      const SimConfig cfg = im_flags.build(d);
      const InjectionSpec spec{grid.front(), im_p, im_coupling.value_or(d.injection_coupling)};
      const double amp = spec.current_amplitude();
      const auto map = locking_map(d.junction, d.resonator, im_ib, grid, amp, cfg, lock_opts);
      Output o{CsvTable({"f_inj_hz", "locked", "pulled_frequency_hz", "sideband_fraction", "rbw_hz", "status"}),
               cfg.seed};
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& l = map.locks[k];
        const bool ok = map.status[k] == "ok";
        o.table.row()
            .num(grid[k])
            .flag(l.locked)
            .num(ok ? std::optional<double>(l.pulled_frequency) : std::nullopt)
            .num(ok ? std::optional<double>(l.sideband_fraction) : std::nullopt)
            .num(ok ? std::optional<double>(l.rbw) : std::nullopt)
            .text(map.status[k]);
      }
      o.results["p_inj_w"] = spec.power();
      o.results["amplitude_a"] = amp;
      o.results["lock_low_hz"] = map.lock_low ? json(*map.lock_low) : json(nullptr);
      o.results["lock_high_hz"] = map.lock_high ? json(*map.lock_high) : json(nullptr);
      o.results["delta_f_hz"] = map.delta_f;
      return o;
    };
  });

  // adler-fit
  std::string af_input, af_p;
  std::optional<double> af_ib, af_coupling;
  double af_span = 100e6, af_res = 0.01;
  SimFlags af_flags;
  auto* af = app.add_subcommand("adler-fit", "Fit delta_f = k sqrt(P_inj) to measured or simulated lock ranges");
  af->add_option("--input", af_input, "CSV of (p_inj_dbm, delta_f_hz)");
  af->add_option("--p-inj", af_p, "Simulate lock ranges over this power grid (dBm)");
  af->add_option("--ib", af_ib, "Bias current for simulated lock ranges (A)");
  af->add_option("--coupling", af_coupling, "Injection coupling (A/sqrt(W))");
  af->add_option("--span", af_span, "Largest detuning searched (Hz)");
  af->add_option("--resolution", af_res, "Relative resolution of the lock edges");
  af_flags.attach(af, false);
  af->callback([&] {
    command = "adler-fit";
    handler = [&] {
      if (af_input.empty() == af_p.empty()) fail(ErrorKind::ConfigParse, "give exactly one of --input or --p-inj");
      Output o{CsvTable({"p_inj_dbm", "p_inj_w", "delta_f_hz", "f_free_hz", "f_low_hz", "f_high_hz"})};
      std::vector<std::pair<double, double>> data;
      if (!af_input.empty()) {
        for (const auto& [dbm, df] : cli::read_two_columns(af_input)) {
          data.emplace_back(dbm_to_watts(dbm), df);
          o.table.row().num(dbm).num(dbm_to_watts(dbm)).num(df).num(std::nullopt).num(std::nullopt).num(std::nullopt);
        }
      } else {
        if (!af_ib) fail(ErrorKind::ConfigParse, "--p-inj needs --ib");
        const auto grid = parse_grid(af_p, "--p-inj");
        const auto& d = load_device(config_path);
        const SimConfig cfg = af_flags.build(d);
        o.seed = cfg.seed;
        for (double dbm : grid) {
          const InjectionSpec spec{1.0, dbm, af_coupling.value_or(d.injection_coupling)};
          const auto lr = find_lock_range(d.junction, d.resonator, *af_ib, spec.current_amplitude(), cfg, af_span, af_res);
          data.emplace_back(spec.power(), lr.width());
          o.table.row().num(dbm).num(spec.power()).num(lr.width()).num(lr.f_free).num(lr.low).num(lr.high);
        }
      }
      const auto f = fit_adler_constant(data);
      o.results["k_hz_per_sqrt_w"] = f.k;
      o.results["r2"] = f.r2;
      return o;
    };
  });

  // fidelity
  std::string pn_path, tau_spec, op_name = "all";
  DephasingOptions deph;
  auto* fid = app.add_subcommand("fidelity", "Phase-noise-limited infidelity of qubit operations");
  fid->add_option("--phase-noise", pn_path, "CSV of (f_off_hz, L_dbc_per_hz)")->required();
  fid->add_option("--tau", tau_spec, "Duration grid (s): start:stop:step, start:stop:N/dec or a,b,c")->required();
  fid->add_option("--op", op_name, "ramsey, echo, not or all")->check(CLI::IsMember({"ramsey", "echo", "not", "all"}));
  fid->add_option("--f-min", deph.f_min, "Lower integration limit (Hz)");
  fid->add_option("--f-max", deph.f_max, "Upper integration limit (Hz)");
  fid->add_option("--rel-tol", deph.rel_tol, "Grid refinement tolerance");
  fid->add_flag("--clip-floor", deph.clip_floor, "Drop the flat region above the last anchor");
  fid->callback([&] {
    command = "fidelity";
    handler = [&] {
      const auto taus = parse_grid(tau_spec, "--tau");
      const auto pts = cli::read_two_columns(pn_path);
      const auto model = phase_noise_from_points(pts);
      std::vector<QubitOperation> ops;
      if (op_name == "all")
        ops = {QubitOperation::Ramsey, QubitOperation::HahnEcho, QubitOperation::NotGate};
      else
        ops = {qubit_operation_from_string(op_name)};
      Output o{CsvTable({"tau_s", "op", "x_rad2", "infidelity"})};
      for (auto q : ops)
        for (const auto& p : infidelity_curve(model, q, taus, deph))
          o.table.row().num(p.tau).text(std::string(to_string(q))).num(p.x).num(p.infidelity);
      o.results["f_min_hz"] = deph.f_min;
      o.results["f_max_hz"] = deph.f_max;
      o.results["clip_floor"] = deph.clip_floor;
      o.results["anchors"] = pts.size();
      return o;
    };
  });

  // design-optimize
  double target_power = 0.0, design_f = 0.0;
  std::optional<double> design_cs;
  auto* des = app.add_subcommand("design-optimize", "Smallest critical current and optimal load for a target power");
  des->add_option("--target-power", target_power, "Output power (W)")->required();
  des->add_option("--freq", design_f, "Emission frequency (Hz)")->required();
  des->add_option("--cs", design_cs, "Shunt capacitance (F); defaults to the config's junction.cs_f");
  des->callback([&] {
    command = "design-optimize";
    handler = [&] {
      double cs = 0.0;
      if (design_cs)
        cs = *design_cs;
      else if (!config_path.empty())
        cs = load_device(config_path).junction.cs;
      else
        fail(ErrorKind::ConfigParse, "give --cs or --config");
      const auto dp = design_for_power(target_power, constants::two_pi * design_f, cs);
      Output o{CsvTable({"target_power_w", "f_hz", "cs_f", "ic_min_a", "r1_opt_ohm", "j1_peak"})};
      o.table.row().num(dp.target_power).num(design_f).num(dp.cs).num(dp.ic_min).num(dp.r1_opt).num(dp.j1_peak);
      return o;
    };
  });

  // rerun
  std::string manifest_path;
  auto* rr = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  rr->add_option("manifest", manifest_path, "Manifest JSON")->required();
  bool is_rerun = false;
  rr->callback([&] { is_rerun = true; });

  std::vector<const char*> argv{"jjosc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), const_cast<char**>(argv.data()));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return 0;
    error_record("ConfigParse", e.what(), 2);
    return 2;
  }
  if (threads) setenv("JJOSC_THREADS", std::to_string(*threads).c_str(), 1);

  if (is_rerun) {
    json m;
    try {
      m = json::parse(cli::read_file(manifest_path));
    } catch (const json::exception& e) {
      fail(ErrorKind::ConfigParse, manifest_path + ": " + e.what());
    }
    if (!m.contains("argv") || !m.contains("inputs")) fail(ErrorKind::ConfigParse, manifest_path + ": not a manifest");
    for (const auto& [path, entry] : m["inputs"].items()) cli::set_input_override(path, entry["contents"]);
    std::vector<std::string> again;
    const auto old = m["argv"].get<std::vector<std::string>>();
    for (std::size_t k = 0; k < old.size(); ++k) {
      if (old[k] == "--out") {
        ++k;
        continue;
      }
      if (old[k].rfind("--out=", 0) == 0) continue;
      again.push_back(old[k]);
    }
    if (!out_path.empty()) {
      again.push_back("--out");
      again.push_back(out_path);
    }
    return run(again);
  }

  const std::string started = cli::utc_timestamp();
  Output o = handler();
  const std::string csv = o.table.str();
  if (out_path.empty()) {
    std::cout << csv;
    if (!o.results.empty()) std::cerr << json{{"results", o.results}}.dump() << "\n";
    return 0;
  }
  cli::write_atomic(out_path, csv);
  json inputs = json::object();
  for (const auto& [path, contents] : cli::inputs_read())
    inputs[path] = {{"fnv1a", fnv1a_hex(contents)}, {"contents", contents}};
  json manifest = {{"tool", "jjosc"},
                   {"version", JJOSC_VERSION},
                   {"command", command},
                   {"argv", args},
                   {"config", g_config ? json(g_config->path) : json(nullptr)},
                   {"config_hash", g_config ? json(fnv1a_hex(g_config->text)) : json(nullptr)},
                   {"inputs", inputs},
                   {"seed", o.seed ? json(*o.seed) : json(nullptr)},
                   {"threads", worker_count()},
                   {"started_utc", started},
                   {"finished_utc", cli::utc_timestamp()},
                   {"output", out_path},
                   {"output_fnv1a", fnv1a_hex(csv)},
                   {"rows", o.table.rows()},
                   {"results", o.results}};
  cli::write_atomic(out_path + ".manifest.json", manifest.dump(2) + "\n");
  return 0;
}

int run(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    error_record(std::string(to_string(e.kind())), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    error_record("Internal", e.what(), 3);
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}
