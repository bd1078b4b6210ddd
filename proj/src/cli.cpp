#include "scatterlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "scatterlab/config.hpp"
#include "scatterlab/datastore.hpp"
#include "scatterlab/ergodic.hpp"
#include "scatterlab/inverse.hpp"
#include "scatterlab/parallel.hpp"
#include "scatterlab/specband.hpp"
#include "scatterlab/svg.hpp"

namespace scatterlab::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PreconditionError("cannot write " + path.string());
  out << text;
}

struct RunRecord {
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;
};

config::ExperimentConfig load_config(const std::string& path) {
  return path.empty() ? config::ExperimentConfig{} : config::parse_config(path);
}

std::shared_ptr<const gridfield::StrengthField> strength_of(const config::ExperimentConfig& cfg) {
  return std::make_shared<const gridfield::StrengthField>(gridfield::strength_preset(
      gridfield::parse_preset(cfg.field_preset), cfg.grid(), cfg.field_amplitude, cfg.field_radius));
}

std::vector<double> frequencies_from(const std::vector<double>& list, double kmin, double kmax, double kstep) {
  if (!list.empty()) {
    auto f = list;
    require(std::is_sorted(f.begin(), f.end()), "--k values must be ascending");
    return f;
  }
  require(kmin > 0.0 && kmax >= kmin && kstep > 0.0, "need --k or a valid --kmin/--kmax/--kstep");
  return frequency_grid(kmin, kmax, kstep);
}

FarFieldDataset sweep(const gridfield::PotentialRealization& V, const std::vector<Vec3>& dirs,
                      const std::vector<double>& freqs, const std::string& model, double tol) {
  require(model == "born0" || model == "full", "--model must be born0 or full");
  if (model == "born0") return born0_sweep(V, dirs, freqs);
  forward::SolverOptions opt;
  opt.tol = tol;
  return backscatter_sweep(V, dirs, freqs, opt);
}

std::string dataset_csv(const FarFieldDataset& ds) {
  std::ostringstream os;
  os << "direction,theta_x,theta_y,theta_z,k,re,im\n";
  for (std::size_t d = 0; d < ds.n_dir(); ++d)
    for (std::size_t f = 0; f < ds.n_freq(); ++f) {
      auto t = ds.directions[d];
      os << d << ',' << fmt(t.x) << ',' << fmt(t.y) << ',' << fmt(t.z) << ',' << fmt(ds.frequencies[f]) << ','
         << fmt(ds.at(d, f).real()) << ',' << fmt(ds.at(d, f).imag()) << '\n';
    }
  return os.str();
}

void write_manifest(const fs::path& path, const std::string& sub, const std::vector<std::string>& args,
                    const RunRecord& rec, double wall) {
  json m = {{"subcommand", sub},          {"arguments", args},   {"config_hash", rec.config_hash},
            {"seeds", rec.seeds},         {"tool_version", kToolVersion}, {"wall_time_s", wall},
            {"outputs", rec.outputs}};
  write_file(path, m.dump(2) + "\n");
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random Schroedinger potential scattering: synthesis, forward sweeps, reconstruction"};
  app.name("scatterlab");
  app.require_subcommand(1);
  std::string manifest_path;
  int threads = 0;
  app.add_option("--manifest", manifest_path, "run manifest path (default: <first output>.manifest.json)");
  app.add_option("--threads", threads, "worker count (SCATTERLAB_THREADS takes precedence)")->check(CLI::NonNegativeNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "sample one potential realization");
  std::string synth_cfg, synth_out;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--config", synth_cfg, "experiment config (JSON)");
  synth->add_option("--seed", synth_seed, "realization seed (default seeds.base)");
  synth->add_option("--out", synth_out, "output FFPK file")->required();

  // forward
  auto* fwd = app.add_subcommand("forward", "backscatter sweep for one potential or a seeded ensemble");
  std::string fwd_pot, fwd_cfg, fwd_out, fwd_csv, fwd_ens, fwd_model;
  std::vector<double> fwd_k;
  double fwd_kmin = 0, fwd_kmax = 0, fwd_kstep = 0.05, fwd_tol = 0;
  int fwd_dirs = 0, fwd_R = 0;
  fwd->add_option("--potential", fwd_pot, "potential FFPK from synth");
  fwd->add_option("--config", fwd_cfg, "experiment config (ensemble mode, or defaults)");
  fwd->add_option("--k", fwd_k, "explicit frequency list");
  fwd->add_option("--kmin", fwd_kmin);
  fwd->add_option("--kmax", fwd_kmax);
  fwd->add_option("--kstep", fwd_kstep);
  fwd->add_option("--directions", fwd_dirs, "number of standard directions (default directions.n)");
  fwd->add_option("--model", fwd_model, "born0 or full (default solver.model)");
  fwd->add_option("--tol", fwd_tol, "GMRES tolerance (default solver.tol)");
  fwd->add_option("--out", fwd_out, "output FFPK dataset");
  fwd->add_option("--csv", fwd_csv, "optional CSV table of the dataset");
  fwd->add_option("--ensemble-dir", fwd_ens, "write an ensemble of seeded datasets here");
  fwd->add_option("--realizations", fwd_R, "ensemble size (default ensemble.R)");

  // resolvent
  auto* res = app.add_subcommand("resolvent", "norm of chi R0(lambda) chi along a frequency list");
  int res_n = 32;
  double res_L = 0.5, res_trunc = 0, res_imag = 0, res_chi = 0;
  int res_iter = 30;
  std::vector<double> res_k{4, 8, 16, 32};
  std::string res_out, res_svg;
  res->add_option("--grid-n", res_n);
  res->add_option("--L", res_L, "box half width");
  res->add_option("--truncation", res_trunc, "kernel truncation (default 2L)");
  res->add_option("--chi-radius", res_chi, "cut-off radius (default truncation/2)");
  res->add_option("--k", res_k, "real parts of lambda");
  res->add_option("--imag", res_imag, "common imaginary part of lambda");
  res->add_option("--iterations", res_iter);
  res->add_option("--out", res_out, "output CSV")->required();
  res->add_option("--svg", res_svg);

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "low-pass reconstruction of the strength h");
  std::string rec_ds, rec_out, rec_csv, rec_svg, rec_ref;
  int rec_ntau = 8, rec_ntheta = 0;
  double rec_band = 0, rec_taumax = 0.45;
  rec->add_option("--dataset", rec_ds, "backscatter FFPK from forward")->required();
  rec->add_option("--n-tau", rec_ntau);
  rec->add_option("--n-theta", rec_ntheta, "directions used (default all)");
  rec->add_option("--band-k", rec_band, "band [k, 2k] (default highest covered)");
  rec->add_option("--tau-max", rec_taumax);
  rec->add_option("--reference", rec_ref, "potential FFPK whose strength is the reference");
  rec->add_option("--out", rec_out, "output FFPK with h_rec")->required();
  rec->add_option("--csv", rec_csv, "x-axis slice through the origin");
  rec->add_option("--svg", rec_svg);

  // ergodic
  auto* erg = app.add_subcommand("ergodic", "band statistics and exceedance sweep over an ensemble");
  std::string erg_dir, erg_out, erg_svg;
  double erg_eps = 0.2, erg_tau = 0.25, erg_kstep = 0.25;
  std::size_t erg_dir_index = 0;
  std::vector<double> erg_kt;
  erg->add_option("--ensemble-dir", erg_dir)->required();
  erg->add_option("--eps", erg_eps);
  erg->add_option("--ktilde-list", erg_kt)->required();
  erg->add_option("--tau", erg_tau);
  erg->add_option("--direction", erg_dir_index, "direction index within the datasets");
  erg->add_option("--k-step", erg_kstep, "spacing of the k grid for Y_k");
  erg->add_option("--out", erg_out)->required();
  erg->add_option("--svg", erg_svg);

  // experiment
  auto* exp = app.add_subcommand("experiment", "stability experiment over seeds and bands");
  std::string exp_cfg, exp_out, exp_svg;
  exp->add_option("--config", exp_cfg)->required();
  exp->add_option("--out", exp_out)->required();
  exp->add_option("--svg", exp_svg);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kConfigError;
  }

  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (threads > 0 && !std::getenv("SCATTERLAB_THREADS")) set_thread_count(threads);

    if (sub == "synth") {
      auto cfg = load_config(synth_cfg);
      if (cfg.threads > 0 && threads == 0 && !std::getenv("SCATTERLAB_THREADS")) set_thread_count(cfg.threads);
      std::uint64_t seed = synth_seed.value_or(cfg.seeds_base);
      auto V = gridfield::synthesize_potential(strength_of(cfg), cfg.field_m, seed);
      datastore::save_potential(synth_out, V);
      record = {config::config_hash(cfg), {seed}, {synth_out}};
    } else if (sub == "forward") {
      auto cfg = load_config(fwd_cfg);
      auto freqs = frequencies_from(fwd_k, fwd_kmin, fwd_kmax, fwd_kstep);
      auto dirs = standard_directions(fwd_dirs > 0 ? fwd_dirs : cfg.directions_n);
      std::string model = fwd_model.empty() ? cfg.solver_model : fwd_model;
      double tol = fwd_tol > 0 ? fwd_tol : cfg.solver_tol;
      record.config_hash = config::config_hash(cfg);
      if (!fwd_ens.empty()) {
        int R = fwd_R > 0 ? fwd_R : cfg.ensemble_R;
        auto h = strength_of(cfg);
        std::vector<FarFieldDataset> ens(static_cast<std::size_t>(R));
        for (int r = 0; r < R; ++r) {
          std::uint64_t seed = cfg.seeds_base + static_cast<std::uint64_t>(r);
          auto V = gridfield::synthesize_potential(h, cfg.field_m, seed);
          ens[static_cast<std::size_t>(r)] = sweep(V, dirs, freqs, model, tol);
          record.seeds.push_back(seed);
        }
        datastore::write_ensemble(fwd_ens, ens);
        record.outputs.push_back((fs::path(fwd_ens) / "index.json").string());
      } else {
        require(!fwd_pot.empty(), "forward needs --potential or --ensemble-dir");
        require(!fwd_out.empty(), "forward needs --out");
        auto V = datastore::load_potential(fwd_pot);
        auto ds = sweep(V, dirs, freqs, model, tol);
        datastore::save_dataset(fwd_out, ds);
        record.seeds.push_back(V.seed);
        record.outputs.push_back(fwd_out);
        if (!fwd_csv.empty()) {
          write_file(fwd_csv, dataset_csv(ds));
          record.outputs.push_back(fwd_csv);
        }
      }
    } else if (sub == "resolvent") {
      auto grid = make_grid(res_n, res_L);
      double L = res_trunc > 0 ? res_trunc : 2.0 * res_L;
      std::vector<cdouble> lambdas;
      for (double k : res_k) lambdas.emplace_back(k, res_imag);
      auto probe = specband::probe_resolvent(lambdas, grid, L, res_chi, res_iter);
      std::ostringstream os;
      os << "lambda_re,lambda_im,norm,norm_times_1p_abs_lambda,bound_shape\n";
      svg::Series s1{"norm x (1+|lambda|)", {}, {}};
      for (std::size_t i = 0; i < lambdas.size(); ++i) {
        double scaled = probe.norms[i] * (1.0 + std::abs(lambdas[i]));
        os << fmt(lambdas[i].real()) << ',' << fmt(lambdas[i].imag()) << ',' << fmt(probe.norms[i]) << ','
           << fmt(scaled) << ',' << fmt(probe.bound_shape[i]) << '\n';
        s1.x.push_back(std::abs(lambdas[i]));
        s1.y.push_back(scaled);
      }
      write_file(res_out, os.str());
      record.outputs.push_back(res_out);
      if (!res_svg.empty()) {
        write_file(res_svg, svg::line_chart({s1}, {"resolvent norm law", "|lambda|", "norm (1+|lambda|)", true, true}));
        record.outputs.push_back(res_svg);
      }
    } else if (sub == "reconstruct") {
      auto ds = datastore::load_dataset(rec_ds);
      int ntheta = rec_ntheta > 0 ? rec_ntheta : static_cast<int>(ds.n_dir());
      auto hh = inverse::estimate_hhat(ds, rec_ntau, ntheta, rec_band, rec_taumax);
      std::vector<double> ref;
      inverse::BandSpectrum ref_spectrum;
      if (!rec_ref.empty()) {
        auto V = datastore::load_potential(rec_ref);
        require(V.strength != nullptr, "reference potential carries no strength");
        require(V.grid == ds.grid, "reference grid differs from the dataset grid");
        auto h = V.strength;
        auto hhat = [&](Vec3 xi) { return inverse::analytic_hhat(*h, xi); };
        ref = inverse::band_limited_projection(hhat, ds.grid);
        ref_spectrum = inverse::band_spectrum(hhat);
      }
      auto r = inverse::reconstruct_strength(hh, ds.grid, ref.empty() ? nullptr : &ref_spectrum);
      const auto n = static_cast<std::uint64_t>(ds.grid.n_per_axis);
      std::vector<datastore::Array> arrays{datastore::Array::real("h_rec", {n, n, n}, r.h_rec)};
      if (!ref.empty()) arrays.push_back(datastore::Array::real("h_band_limited", {n, n, n}, ref));
      json meta = {{"kind", "reconstruction"},      {"grid", datastore::grid_to_json(ds.grid)},
                   {"band_K", r.band_K},            {"l2_error", r.l2_error},
                   {"imaginary_residue", r.imaginary_residue}, {"seed", ds.seed}};
      datastore::write_container(rec_out, meta, arrays);
      record.seeds.push_back(ds.seed);
      record.outputs.push_back(rec_out);
      out << "band_K=" << fmt(r.band_K) << " l2_error=" << fmt(r.l2_error) << "\n";
      if (!rec_csv.empty() || !rec_svg.empty()) {
        const int c = ds.grid.n_per_axis / 2;
        std::ostringstream os;
        os << "x,h_rec" << (ref.empty() ? "" : ",h_band_limited") << "\n";
        svg::Series sr{"h_rec", {}, {}}, sb{"P_B h", {}, {}};
        for (int i = 0; i < ds.grid.n_per_axis; ++i) {
          auto idx = ds.grid.index(i, c, c);
          os << fmt(ds.grid.coord(i)) << ',' << fmt(r.h_rec[idx]);
          sr.x.push_back(ds.grid.coord(i));
          sr.y.push_back(r.h_rec[idx]);
          if (!ref.empty()) {
            os << ',' << fmt(ref[idx]);
            sb.x.push_back(ds.grid.coord(i));
            sb.y.push_back(ref[idx]);
          }
          os << '\n';
        }
        if (!rec_csv.empty()) {
          write_file(rec_csv, os.str());
          record.outputs.push_back(rec_csv);
        }
        if (!rec_svg.empty()) {
          std::vector<svg::Series> series{sr};
          if (!ref.empty()) series.push_back(sb);
          write_file(rec_svg, svg::line_chart(series, {"reconstruction along x", "x", "h"}));
          record.outputs.push_back(rec_svg);
        }
      }
    } else if (sub == "ergodic") {
      auto ens = datastore::read_ensemble(erg_dir);
      require(!ens.empty(), "ensemble is empty");
      require(!erg_kt.empty() && std::is_sorted(erg_kt.begin(), erg_kt.end()), "--ktilde-list must be ascending");
      require(erg_kstep > 0.0, "--k-step must be positive");
      const double top = (ens.front().frequencies.back() - erg_tau) / 2.0;
      std::vector<double> kgrid;
      for (double k = erg_kt.front(); k <= top + 1e-12; k += erg_kstep) kgrid.push_back(k);
      require(!kgrid.empty() && erg_kt.back() <= kgrid.back(), "ensemble frequencies do not cover the k-tilde sweep");
      auto table = ergodic::worst_case_table(ens, erg_dir_index, erg_tau, erg_eps, kgrid);
      auto sweep_res = ergodic::exceedance_sweep(table, erg_kt);
      std::ostringstream os;
      os << "k_tilde,probability,half_width,fitted_power,bounded_product\n";
      for (std::size_t i = 0; i < erg_kt.size(); ++i)
        os << fmt(erg_kt[i]) << ',' << fmt(sweep_res.probability[i]) << ',' << fmt(sweep_res.half_width[i]) << ','
           << fmt(sweep_res.fitted_power) << ',' << fmt(sweep_res.bounded_product) << '\n';
      write_file(erg_out, os.str());
      record.outputs.push_back(erg_out);
      for (const auto& ds : ens) record.seeds.push_back(ds.seed);
      if (!erg_svg.empty()) {
        write_file(erg_svg, svg::line_chart({{"P(max |Y_k| >= 1)", erg_kt, sweep_res.probability}},
                                            {"exceedance probability", "k_tilde", "probability", true, false}));
        record.outputs.push_back(erg_svg);
      }
    } else if (sub == "experiment") {
      auto cfg = config::parse_config(exp_cfg);
      if (cfg.threads > 0 && threads == 0 && !std::getenv("SCATTERLAB_THREADS")) set_thread_count(cfg.threads);
      auto rep = inverse::stability_experiment(config::stability_config(cfg));
      write_file(exp_out, inverse::stability_csv(rep));
      record.config_hash = config::config_hash(cfg);
      for (int r = 0; r < cfg.ensemble_R; ++r) record.seeds.push_back(cfg.seeds_base + static_cast<std::uint64_t>(r));
      record.outputs.push_back(exp_out);
      for (std::size_t b = 0; b < rep.bands.size(); ++b)
        out << "K=" << fmt(rep.bands[b]) << " success_fraction=" << fmt(rep.success_fraction[b])
            << " median_error=" << fmt(rep.median_error[b]) << "\n";
      if (!exp_svg.empty()) {
        write_file(exp_svg, svg::line_chart({{"median relative L2 error", rep.bands, rep.median_error},
                                             {"success fraction", rep.bands, rep.success_fraction}},
                                            {"stability experiment", "K", "value", true, false}));
        record.outputs.push_back(exp_svg);
      }
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const PreconditionError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fs::path mpath = manifest_path;
  if (mpath.empty() && !record.outputs.empty()) mpath = record.outputs.front() + ".manifest.json";
  if (!mpath.empty()) {
    try {
      write_manifest(mpath, sub, args, record, wall);
    } catch (const std::exception& e) {
      err << "config error: " << e.what() << "\n";
      return kConfigError;
    }
  }
  return kOk;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace scatterlab::cli
