#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "noisespec/errors.hpp"
#include "noisespec/estimation.hpp"
#include "noisespec/fisher.hpp"
#include "noisespec/io.hpp"
#include "noisespec/rng.hpp"
#include "noisespec/scan.hpp"
#include "noisespec/synthesis.hpp"
#include "noisespec/validation.hpp"

namespace noisespec::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
  std::string format;
  std::string spectrum;
  std::string samples;
  std::string gamma_csv;
  int n_samples = 0;
};

struct Outputs {
  fs::path dir;
  bool csv = true;
  bool json = true;
};

Outputs resolve_outputs(const Options& o, const OutputSpec* spec) {
  Outputs r;
  if (spec) {
    r.dir = spec->directory;
    r.csv = spec->csv;
    r.json = spec->json;
  } else {
    r.dir = ".";
  }
  if (!o.out.empty()) r.dir = o.out;
  if (o.format == "csv") {
    r.csv = true;
    r.json = false;
  } else if (o.format == "json") {
    r.csv = false;
    r.json = true;
  }
  std::error_code ec;
  fs::create_directories(r.dir, ec);
  if (ec) throw IoError("cannot create output directory " + r.dir.string() + ": " + ec.message());
  return r;
}

RunConfig require_config(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required for this command");
  return load_run_config(o.config);
}

Json envelope(const RunConfig* rc) {
  Json j;
  j["version"] = std::string(version());
  if (rc) j["config"] = to_json(*rc);
  return j;
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

AveragedSpectrum read_spectrum(const fs::path& path) {
  const auto text = read_text_file(path);
  if (path.extension() == ".json") {
    try {
      return spectrum_from_json(Json::parse(text));
    } catch (const Json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return spectrum_from_csv(text);
}

void print_params(std::ostream& out, const Vec4& v) {
  static constexpr const char* kNames[] = {"s_ph [uV^2/Hz]", "nu_l [Hz]", "s_at [uV^2/Hz]", "delta_nu [Hz]"};
  for (int i = 0; i < 4; ++i) out << "  " << std::left << std::setw(16) << kNames[i] << format_double(v[i]) << '\n';
}

void print_matrix(std::ostream& out, const char* name, const Mat4& m) {
  out << name << '\n';
  for (int i = 0; i < 4; ++i) {
    out << ' ';
    for (int j = 0; j < 4; ++j) out << ' ' << std::right << std::setw(13) << std::setprecision(5) << m(i, j);
    out << '\n';
  }
}

int cmd_synth(const Options& o, std::ostream& out) {
  const auto rc = require_config(o);
  const auto v = rc.model_params();
  const std::uint64_t seed = o.seed.value_or(rc.master_seed);
  const auto sp = rc.synthesis == SynthesisPath::Exact ? sample_periodogram_exact(v, rc.acquisition, seed)
                                                       : acquire_timeseries(v, rc.acquisition, seed);
  const auto dst = resolve_outputs(o, &rc.output);
  if (dst.csv) write_text_file(dst.dir / "spectrum.csv", spectrum_to_csv(sp));
  if (dst.json) {
    Json j = envelope(&rc);
    j["seed"] = seed;
    j["synthesis"] = std::string(to_string(rc.synthesis));
    j["bin_spacing_hz"] = rc.acquisition.bin_spacing();
    j.update(to_json(sp));
    write_json(dst.dir / "spectrum.json", j);
  }
  out << "synthesized " << sp.size() << " bins (n_eff " << sp.n_eff << ", seed " << seed << ") into "
      << dst.dir.string() << '\n';
  return kExitOk;
}

int cmd_fit(const Options& o, std::ostream& out) {
  if (o.spectrum.empty()) throw ConfigError("--spectrum is required for fit");
  const auto rc = require_config(o);
  const auto sp = read_spectrum(o.spectrum);
  const auto fit = mle_fit(sp, rc.acquisition.window);
  out << "fit over [" << format_double(fit.window.lo_hz) << ", " << format_double(fit.window.hi_hz) << "] Hz\n";
  print_params(out, fit.v_hat.as_vector());
  out << "  chi2            " << format_double(fit.chi2) << "\n  iterations      " << fit.n_iter
      << "\n  converged       " << (fit.converged ? "yes" : "no") << '\n';
  const auto dst = resolve_outputs(o, &rc.output);
  Json j = to_json(fit);
  j.update(envelope(&rc));
  j["spectrum"] = o.spectrum;
  write_json(dst.dir / "fit.json", j);
  return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const auto rc = require_config(o);
  ValidationConfig vc;
  vc.truth = rc.model_params();
  vc.acquisition = rc.acquisition;
  vc.n_trials = rc.n_trials;
  vc.master_seed = o.seed.value_or(rc.master_seed);
  vc.synthesis = rc.synthesis;
  vc.crb_method = rc.crb_method;
  vc.threads = o.threads;
  const auto rep = run_validation(vc);

  out << "trials " << rep.n_trials << ", failed " << rep.n_failed << ", not converged " << rep.n_not_converged
      << "\n";
  print_matrix(out, "gamma_exp", rep.gamma_exp);
  print_matrix(out, "gamma_th", rep.gamma_th);
  print_matrix(out, "normalized deviation", rep.deviation);
  out << "max deviation " << format_double(rep.max_deviation) << " at (" << rep.max_row + 1 << ","
      << rep.max_col + 1 << ")\n";

  const auto dst = resolve_outputs(o, &rc.output);
  if (dst.json) {
    Json j = envelope(&rc);
    j["master_seed"] = vc.master_seed;
    j["crb_method"] = std::string(to_string(vc.crb_method));
    j["report"] = to_json(rep);
    write_json(dst.dir / "validation.json", j);
  }
  if (dst.csv) {
    write_text_file(dst.dir / "gamma_exp.csv", matrix_to_csv(rep.gamma_exp));
    write_text_file(dst.dir / "gamma_th.csv", matrix_to_csv(rep.gamma_th));
    write_text_file(dst.dir / "sigma_th.csv", matrix_to_csv(rep.sigma_th));
    write_text_file(dst.dir / "deviation.csv", matrix_to_csv(rep.deviation));
  }
  return kExitOk;
}

int cmd_crb(const Options& o, std::ostream& out) {
  if (!o.gamma_csv.empty()) {
    // Wishart spread of an externally supplied covariance.
    std::optional<RunConfig> rc;
    if (!o.config.empty()) rc = load_run_config(o.config);
    const int n = o.n_samples > 0 ? o.n_samples : (rc ? rc->n_trials : 0);
    if (n < 1) throw ConfigError("--n-samples (or monte_carlo.n_trials in --config) is required with --gamma-csv");
    const Mat4 gamma = matrix_from_csv(read_text_file(o.gamma_csv));
    const Mat4 sigma = wishart_std(gamma, n);
    print_matrix(out, "sigma_th", sigma);
    const auto dst = resolve_outputs(o, rc ? &rc->output : nullptr);
    if (dst.csv) write_text_file(dst.dir / "sigma_th.csv", matrix_to_csv(sigma));
    if (dst.json) {
      Json j = envelope(rc ? &*rc : nullptr);
      j["n_samples"] = n;
      j["gamma_th"] = to_json(gamma);
      j["sigma_th"] = to_json(sigma);
      write_json(dst.dir / "wishart.json", j);
    }
    return kExitOk;
  }

  const auto rc = require_config(o);
  const auto v = rc.model_params();
  const auto fr = fisher_for_window(v, rc.acquisition, rc.crb_method);
  out << "method " << to_string(fr.method) << ", rank " << fr.rank << ", n_eff " << format_double(fr.n_eff) << '\n';
  print_params(out, v.as_vector());
  if (fr.gamma_th) print_matrix(out, "gamma_th", *fr.gamma_th);
  else out << "Fisher matrix is singular; gamma_th undefined\n";

  const auto dst = resolve_outputs(o, &rc.output);
  if (dst.json) {
    Json j = to_json(fr);
    j.update(envelope(&rc));
    j["params"] = to_json(v);
    write_json(dst.dir / "crb.json", j);
  }
  if (dst.csv && fr.gamma_th) write_text_file(dst.dir / "gamma_th.csv", matrix_to_csv(*fr.gamma_th));
  return kExitOk;
}

Json optima_json(const ScanGrid& sg) {
  Json arr = Json::array();
  for (int p = 1; p <= 4; ++p) {
    try {
      arr.push_back(to_json(find_optimum(sg, p)));
    } catch (const std::invalid_argument&) {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

int cmd_scan(const Options& o, std::ostream& out) {
  const auto rc = require_config(o);
  if (!rc.scan) throw ConfigError("scan: missing required section");
  if (!rc.instrument) throw ConfigError("model.instrument: scan needs conditions + instrument");
  const auto& spec = *rc.scan;
  const auto sg = scan_grid(spec.grid, *rc.instrument, rc.acquisition, spec.xi2, o.threads);

  Json report = envelope(&rc);
  report["xi2"] = spec.xi2;
  report["optima"] = optima_json(sg);
  for (const auto& opt : report["optima"])
    if (!opt.is_null())
      out << "gamma" << opt["param_index"].get<int>() << opt["param_index"].get<int>() << " min "
          << format_double(opt["gamma_min"].get<double>()) << " at n=" << format_double(opt["n_opt"].get<double>())
          << " cm^-3, P=" << format_double(opt["p_opt"].get<double>()) << " W"
          << (opt["interior"].get<bool>() ? "" : " (grid edge)") << '\n';

  const auto dst = resolve_outputs(o, &rc.output);
  if (dst.csv) write_text_file(dst.dir / "surface.csv", surface_to_csv(sg));

  if (spec.xi2_compare) {
    const auto sg_b = scan_grid(spec.grid, *rc.instrument, rc.acquisition, *spec.xi2_compare, o.threads);
    const auto base = find_optimum(sg, 4);
    const ExperimentConditions at{base.n_opt, base.p_opt, spec.xi2};
    const Vec4 gain = squeezing_gain(at, *rc.instrument, rc.acquisition, spec.xi2, *spec.xi2_compare);
    report["squeezing"] = {{"xi2_a", spec.xi2},
                           {"xi2_b", *spec.xi2_compare},
                           {"n_per_cm3", at.n_per_cm3},
                           {"p_w", at.p_w},
                           {"gamma_ratio", to_json(gain)},
                           {"optima_b", optima_json(sg_b)}};
    out << "squeezing " << format_double(spec.xi2) << " -> " << format_double(*spec.xi2_compare)
        << ": gamma44 ratio " << format_double(gain[3]) << " at the gamma44 optimum\n";
    if (dst.csv) write_text_file(dst.dir / "surface_compare.csv", surface_to_csv(sg_b));
  }
  if (dst.json) write_json(dst.dir / "optimum.json", report);
  return kExitOk;
}

int cmd_kstats(const Options& o, std::ostream& out) {
  if (o.samples.empty()) throw ConfigError("--samples is required for kstats");
  const auto x = samples_from_text(read_text_file(o.samples));
  Json j = envelope(nullptr);
  j["n"] = x.size();
  j["k2"] = k2(x);
  j["k4"] = x.size() >= 4 ? Json(k4(x)) : Json(nullptr);
  j["var_k2"] = x.size() >= 4 ? Json(var_k2(x)) : Json(nullptr);
  out << j.dump(2) << '\n';
  if (!o.out.empty()) {
    const auto dst = resolve_outputs(o, nullptr);
    write_json(dst.dir / "kstats.json", j);
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noise spectroscopy sensitivity toolkit", "noisespec"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "run configuration (JSON)");
    if (needs_config) c->required();
    sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
    sub->add_option("--out", o.out, "output directory (overrides output.directory)");
    sub->add_option("--format", o.format, "write only this format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { o.seed = s; }, "override monte_carlo.master_seed");
  };

  auto* synth = app.add_subcommand("synth", "synthesize one averaged spectrum");
  add_common(synth, true);
  add_seed(synth);

  auto* fit = app.add_subcommand("fit", "maximum-likelihood fit of a spectrum file");
  add_common(fit, true);
  fit->add_option("--spectrum", o.spectrum, "spectrum CSV or JSON")->required();

  auto* validate = app.add_subcommand("validate", "Monte Carlo fits against the Cramer-Rao bound");
  add_common(validate, true);
  add_seed(validate);

  auto* crb = app.add_subcommand("crb", "Fisher information and Cramer-Rao covariance");
  add_common(crb, false);
  crb->add_option("--gamma-csv", o.gamma_csv, "4x4 covariance CSV; report its Wishart standard deviations");
  crb->add_option("--n-samples", o.n_samples, "sample count for --gamma-csv")->check(CLI::PositiveNumber);

  auto* scan = app.add_subcommand("scan", "covariance surfaces over (n, P)");
  add_common(scan, true);

  auto* kstats = app.add_subcommand("kstats", "k-statistics of a sample file");
  kstats->add_option("--samples", o.samples, "numbers separated by commas or whitespace")->required();
  kstats->add_option("--out", o.out, "also write kstats.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth) return cmd_synth(o, out);
    if (*fit) return cmd_fit(o, out);
    if (*validate) return cmd_validate(o, out);
    if (*crb) return cmd_crb(o, out);
    if (*scan) return cmd_scan(o, out);
    if (*kstats) return cmd_kstats(o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace noisespec::cli
