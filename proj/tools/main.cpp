// sipmlink: command-line front end for the link simulator.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sipmlink/experiments.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using namespace sipmlink;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string out = ".";
  bool plot = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_mode) {
  cmd->add_option("--config", o.config, "JSON LinkConfig file (missing keys keep preset values)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  if (with_mode) {
    cmd->add_option("--mode", o.mode, "Simulation mode")
        ->check(CLI::IsMember({"ideal", "waveform", "ideal-counts", "full-waveform"}));
  }
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_flag("--plot", o.plot, "Also write an SVG plot per table");
}

LinkConfig resolve(const CommonOptions& o, const LinkConfig& preset) {
  LinkConfig cfg = o.config.empty() ? preset : load_link_config(o.config, preset);
  if (o.seed) cfg.master_seed = RngSeed{*o.seed};
  if (!o.mode.empty()) cfg.mode = parse_sim_mode(o.mode);
  cfg.validate();
  return cfg;
}

std::vector<double> range(double from, double to, double step) {
  if (!(step > 0.0) || to < from) throw std::invalid_argument("bad grid range");
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
  for (long i = 0; i <= n; ++i) v.push_back(from + static_cast<double>(i) * step);
  return v;
}

std::vector<double> dbm_grid_to_watts(const std::vector<double>& dbm) {
  std::vector<double> w;
  for (double d : dbm) w.push_back(dbm_to_watts(d));
  return w;
}

void emit(const CommonOptions& o, const std::string& name, const CsvTable& table,
          std::optional<tools::PlotSpec> plot = std::nullopt) {
  fs::create_directories(o.out);
  const fs::path csv = fs::path(o.out) / (name + ".csv");
  table.save(csv);
  std::cout << csv.string() << "\n";
  if (o.plot && plot) {
    const fs::path svg = fs::path(o.out) / (name + ".svg");
    tools::write_svg_plot(table, *plot, svg);
    std::cout << svg.string() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-counting SiPM OOK link simulator"};
  app.require_subcommand(1);

  // theory
  CommonOptions theory_opt;
  double target_pe = 1e-3;
  double pde = 0.036;
  double wavelength = constants::kDefaultWavelength;
  std::vector<double> lambda_b_grid;
  std::vector<double> dark_rates{28e3, 30e3, 35e3, 48e3};
  std::vector<double> theory_rates{1e4, 3e4, 1e5, 3e5, 1e6};
  auto* theory = app.add_subcommand("theory", "Power-penalty tables (pure theory)");
  theory->add_option("--out", theory_opt.out, "Output directory")->capture_default_str();
  theory->add_flag("--plot", theory_opt.plot, "Also write SVG plots");
  theory->add_option("--target-pe", target_pe, "Target probability of error")->capture_default_str();
  theory->add_option("--pde", pde, "Effective photon detection efficiency")->capture_default_str();
  theory->add_option("--wavelength", wavelength, "Wavelength in metres")->capture_default_str();
  theory->add_option("--lambda-b", lambda_b_grid, "Background photons per bit grid")
      ->delimiter(',');
  theory->add_option("--dark-rates", dark_rates, "Dark count rates (cps)")->delimiter(',');
  theory->add_option("--data-rates", theory_rates, "Data rates (bit/s)")->delimiter(',');

  // simulate
  CommonOptions sim_opt;
  std::optional<double> sim_power_dbm;
  std::optional<double> sim_rate;
  std::optional<std::size_t> sim_bits;
  std::optional<int> sim_nt;
  auto* simulate = app.add_subcommand("simulate", "One BER run");
  add_common(simulate, sim_opt, true);
  simulate->add_option("--power-dbm", sim_power_dbm, "Average optical power (dBm)");
  simulate->add_option("--data-rate", sim_rate, "Data rate (bit/s)");
  simulate->add_option("--bits", sim_bits, "Number of bits");
  simulate->add_option("--n-t", sim_nt, "Fixed decision threshold");

  // sweep
  CommonOptions sweep_opt;
  std::string sweep_kind;
  std::vector<double> sweep_grid;
  std::string overrides;
  auto* sweep = app.add_subcommand("sweep", "Dynamic range, threshold, bathtub or other sweeps");
  add_common(sweep, sweep_opt, true);
  sweep->add_option("--kind", sweep_kind, "What to sweep")
      ->required()
      ->check(CLI::IsMember({"dynamic-range", "vth", "bathtub", "data-rate", "gbp"}));
  sweep->add_option("--grid", sweep_grid,
                    "Grid values (dBm for dynamic-range, volts for vth, thresholds for bathtub, "
                    "bit/s for data-rate, Hz for gbp)")
      ->delimiter(',');
  sweep->add_option("--set", overrides, "JSON object merged over the config for this sweep");

  // ber
  CommonOptions ber_opt;
  std::vector<double> ber_powers;
  std::vector<double> ber_rates{1e4, 1e5, 1e6};
  double collection_time = 0.0;
  auto* ber = app.add_subcommand("ber", "BER versus optical power for several data rates");
  add_common(ber, ber_opt, true);
  ber->add_option("--powers-dbm", ber_powers, "Average optical powers (dBm)")->delimiter(',');
  ber->add_option("--data-rates", ber_rates, "Data rates (bit/s)")->delimiter(',');
  ber->add_option("--collection-time", collection_time,
                  "Seconds of traffic per point (bits = rate * time); 0 uses n_bits")
      ->capture_default_str();

  // gbp
  CommonOptions gbp_opt;
  std::vector<double> gbp_powers;
  std::size_t gbp_pulses = 1000;
  auto* gbp = app.add_subcommand("gbp", "Gain-bandwidth study: pulse statistics, counts, required power");
  add_common(gbp, gbp_opt, false);
  gbp->add_option("--powers-dbm", gbp_powers, "Continuous optical powers (dBm)")->delimiter(',');
  gbp->add_option("--pulses", gbp_pulses, "Single-photon pulses per configuration")
      ->capture_default_str();

  // config
  std::string preset = "experimental";
  auto* config = app.add_subcommand("config", "Print a preset as a full JSON config");
  config->add_option("--preset", preset, "Preset name")
      ->check(CLI::IsMember({"experimental", "gbp"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*theory) {
      if (lambda_b_grid.empty()) lambda_b_grid = range(0.0, 1.0, 0.02);
      std::sort(lambda_b_grid.begin(), lambda_b_grid.end());
      const auto t =
          run_power_penalty(lambda_b_grid, dark_rates, theory_rates, target_pe, pde, wavelength);
      emit(theory_opt, "power_penalty", power_penalty_table(t.outer),
           tools::PlotSpec{"Required detected photons per bit", "lambda_b", {"lambda_s"}});
      emit(theory_opt, "power_penalty_inset", power_penalty_inset_table(t.inset),
           tools::PlotSpec{"Required average power", "data_rate_bps", {"avg_power_dbm"}, true,
                           false, "dark_rate_cps"});
    } else if (*simulate) {
      LinkConfig cfg = resolve(sim_opt, LinkConfig::experimental());
      if (sim_power_dbm) cfg.link.avg_optical_power = dbm_to_watts(*sim_power_dbm);
      if (sim_rate) cfg.link.data_rate = *sim_rate;
      if (sim_bits) cfg.n_bits = *sim_bits;
      if (sim_nt) cfg.n_t = *sim_nt;
      cfg.validate();
      const auto r = simulate_link(cfg);
      emit(sim_opt, "link_report", link_report_table(cfg, r));
      emit(sim_opt, "bathtub", bathtub_table(r.bathtub),
           tools::PlotSpec{"Bathtub", "n_t", {"ber"}, false, true});
    } else if (*sweep) {
      const LinkConfig cfg = resolve(sweep_opt, LinkConfig::experimental());
      SweepSpec spec;
      spec.overrides = overrides;
      tools::PlotSpec plot;
      std::string name;
      if (sweep_kind == "dynamic-range") {
        spec.variable = SweepVariable::kOpticalPower;
        spec.grid = dbm_grid_to_watts(sweep_grid.empty() ? range(-95.0, -40.0, 2.5) : sweep_grid);
        spec.grid.insert(spec.grid.begin(), 0.0);
        name = "dynamic_range";
        plot = {"Dynamic range", "avg_power_w", {"counts_per_s", "theory_counts_per_s"}, true, true};
      } else if (sweep_kind == "vth") {
        spec.variable = SweepVariable::kVth;
        spec.grid = sweep_grid.empty() ? range(2e-3, 40e-3, 1e-3) : sweep_grid;
        name = "vth_sweep";
        plot = {"Threshold sweep", "v_th_volts", {"counts_per_second"}, false, true};
      } else if (sweep_kind == "bathtub") {
        spec.variable = SweepVariable::kNt;
        spec.grid = sweep_grid.empty() ? range(0.0, 15.0, 1.0) : sweep_grid;
        name = "bathtub";
        plot = {"Bathtub", "n_t", {"ber"}, false, true};
      } else if (sweep_kind == "data-rate") {
        spec.variable = SweepVariable::kDataRate;
        spec.grid = sweep_grid.empty() ? std::vector<double>{1e4, 1e5, 1e6} : sweep_grid;
        name = "data_rate_sweep";
        plot = {"BER versus data rate", "data_rate_bps", {"ber", "theory_pe"}, true, true};
      } else {
        spec.variable = SweepVariable::kGbp;
        spec.grid = sweep_grid.empty() ? std::vector<double>{80e6, 120e6, 500e6} : sweep_grid;
        name = "gbp_sweep";
        plot = {"Single-photon peak versus GBP", "gbp_hz", {"peak_mean_v"}, true, false};
      }
      std::sort(spec.grid.begin(), spec.grid.end());
      emit(sweep_opt, name, run_sweep(cfg, spec), plot);
    } else if (*ber) {
      const LinkConfig cfg = resolve(ber_opt, LinkConfig::experimental());
      const auto powers = dbm_grid_to_watts(ber_powers.empty() ? range(-84.0, -70.0, 1.0) : ber_powers);
      const auto rows = run_ber_vs_power(cfg, powers, ber_rates, collection_time);
      emit(ber_opt, "ber_vs_power", ber_table(rows),
           tools::PlotSpec{"BER versus power", "avg_power_dbm", {"ber", "theory_pe"}, false, true,
                           "data_rate_bps"});
    } else if (*gbp) {
      const LinkConfig cfg = resolve(gbp_opt, LinkConfig::gbp_study({10.0, 50e6}));
      GbpStudySpec spec = GbpStudySpec::standard();
      spec.n_pulses = gbp_pulses;
      if (!gbp_powers.empty()) {
        std::sort(gbp_powers.begin(), gbp_powers.end());
        spec.power_grid = dbm_grid_to_watts(gbp_powers);
      }
      const auto r = run_gbp_study(cfg, spec);
      emit(gbp_opt, "gbp_pulse_stats", pulse_stats_table(r.pulse_stats));
      emit(gbp_opt, "gbp_counts", gbp_counts_table(r.counts),
           tools::PlotSpec{"Counts versus power", "avg_power_w", {"counts_per_s"}, true, true,
                           "gbp_hz"});
      emit(gbp_opt, "gbp_required_power", required_power_table(r.required_power),
           tools::PlotSpec{"Required power at the target BER", "data_rate_bps",
                           {"required_avg_power_dbm"}, true, false, "gain"});
    } else if (*config) {
      const LinkConfig cfg =
          preset == "gbp" ? LinkConfig::gbp_study({10.0, 50e6}) : LinkConfig::experimental();
      std::cout << dump_link_config(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "sipmlink: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
