#include "noisespec/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "noisespec/errors.hpp"

namespace noisespec {

namespace {

constexpr double kMilli = 1e-3;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return x;
}

// Comma-separated numeric rows after a fixed header. Blank lines are skipped.
std::vector<std::vector<double>> parse_csv_table(std::string_view text, std::string_view header, std::size_t columns) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size() || trim(lines[i]) != header)
    throw ConfigError("csv: expected header '" + std::string(header) + "'");
  std::vector<std::vector<double>> rows;
  for (++i; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    if (line.empty()) continue;
    std::vector<double> row;
    while (true) {
      const auto comma = line.find(',');
      const auto value = parse_double(line.substr(0, comma));
      if (!value) throw ConfigError("csv line " + std::to_string(i + 1) + ": not a number");
      row.push_back(*value);
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (row.size() != columns)
      throw ConfigError("csv line " + std::to_string(i + 1) + ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

// Matrix entries as JSON; NaN and infinities become null.
Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double number_from_json(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

// Reads one object of the config, tracking which keys were consumed so that
// misspelt keys are reported instead of silently ignored.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T required(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key) + ": missing required field");
    return get<T>(key);
  }

  template <class T>
  T optional(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  Section child(const std::string& key) {
    used_.insert(key);
    return Section(j_.at(key), field(key));
  }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.contains(key)) throw ConfigError(field(key) + ": unknown field");
  }

  [[nodiscard]] std::string field(const std::string& key) const { return path_ + "." + key; }

 private:
  template <class T>
  T get(const std::string& key) {
    used_.insert(key);
    const Json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned())
            throw ConfigError(field(key) + ": expected a non-negative integer");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
      }
      return v.get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(field(key) + ": " + e.what());
    }
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class Fn>
void check(const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

std::string_view version() { return NOISESPEC_VERSION; }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
}

// ---- CSV ------------------------------------------------------------------

std::string spectrum_to_csv(const AveragedSpectrum& sp) {
  std::string out(kSpectrumCsvHeader);
  out += '\n';
  for (std::size_t i = 0; i < sp.size(); ++i) out += format_double(sp.nu[i]) + ',' + format_double(sp.s_bar[i]) + '\n';
  return out;
}

AveragedSpectrum spectrum_from_csv(std::string_view text) {
  AveragedSpectrum sp;
  for (const auto& row : parse_csv_table(text, kSpectrumCsvHeader, 2)) {
    sp.nu.push_back(row[0]);
    sp.s_bar.push_back(row[1]);
  }
  for (std::size_t i = 1; i < sp.nu.size(); ++i)
    if (!(sp.nu[i] > sp.nu[i - 1])) throw ConfigError("csv: frequencies must be strictly increasing");
  return sp;
}

std::string surface_to_csv(const ScanGrid& sg) {
  std::string out(kSurfaceCsvHeader);
  out += '\n';
  for (std::size_t i = 0; i < sg.n_values.size(); ++i)
    for (std::size_t j = 0; j < sg.p_values.size(); ++j) {
      out += format_double(sg.n_values[i]) + ',' + format_double(sg.p_values[j]);
      for (int d = 0; d < 4; ++d) out += ',' + format_double(sg.at(d, i, j));
      out += '\n';
    }
  return out;
}

ScanGrid surface_from_csv(std::string_view text) {
  const auto rows = parse_csv_table(text, kSurfaceCsvHeader, 6);
  ScanGrid sg;
  // Rows are n-major: p values repeat within each n block.
  for (const auto& row : rows) {
    if (sg.n_values.empty() || sg.n_values.back() != row[0]) sg.n_values.push_back(row[0]);
    if (sg.n_values.size() == 1) sg.p_values.push_back(row[1]);
  }
  if (rows.size() != sg.n_values.size() * sg.p_values.size()) throw ConfigError("csv: surface is not a full grid");
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r][1] != sg.p_values[r % sg.p_values.size()]) throw ConfigError("csv: surface is not a full grid");
  for (int d = 0; d < 4; ++d) {
    auto& s = sg.surfaces[static_cast<std::size_t>(d)];
    s.reserve(rows.size());
    for (const auto& row : rows) s.push_back(row[static_cast<std::size_t>(2 + d)]);
  }
  return sg;
}

std::string matrix_to_csv(const Mat4& m) {
  std::string out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out += (j ? "," : "") + format_double(m(i, j));
    out += '\n';
  }
  return out;
}

Mat4 matrix_from_csv(std::string_view text) {
  Mat4 m;
  int row = 0;
  for (auto line : split_lines(text)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (row == 4) throw ConfigError("matrix csv: more than 4 rows");
    int col = 0;
    while (true) {
      const auto comma = line.find(',');
      const auto value = parse_double(line.substr(0, comma));
      if (!value || col == 4) throw ConfigError("matrix csv: row " + std::to_string(row + 1) + " is malformed");
      m(row, col++) = *value;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (col != 4) throw ConfigError("matrix csv: row " + std::to_string(row + 1) + " needs 4 values");
    ++row;
  }
  if (row != 4) throw ConfigError("matrix csv: expected 4 rows");
  return m;
}

std::vector<double> samples_from_text(std::string_view text) {
  std::vector<double> out;
  int line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t\r,", pos);
      if (start == std::string_view::npos) break;
      auto end = line.find_first_of(" \t\r,", start);
      if (end == std::string_view::npos) end = line.size();
      const auto value = parse_double(line.substr(start, end - start));
      if (!value) throw ConfigError("samples line " + std::to_string(line_no) + ": not a number");
      out.push_back(*value);
      pos = end;
    }
  }
  return out;
}

// ---- JSON -----------------------------------------------------------------

Json to_json(const Mat4& m) {
  Json rows = Json::array();
  for (int i = 0; i < 4; ++i) {
    Json row = Json::array();
    for (int j = 0; j < 4; ++j) row.push_back(number_or_null(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vec4& v) { return Json::array({v[0], v[1], v[2], v[3]}); }

Json to_json(const SpectralParams& v) {
  return {{"s_ph", v.s_ph}, {"nu_l", v.nu_l}, {"s_at", v.s_at}, {"delta_nu", v.delta_nu}};
}

Json to_json(const FitWindow& w) { return Json::array({w.lo_hz, w.hi_hz}); }

Json to_json(const FitResult& r) {
  Json j = to_json(r.v_hat);
  j["chi2"] = r.chi2;
  j["converged"] = r.converged;
  j["n_iter"] = r.n_iter;
  j["window"] = to_json(r.window);
  return j;
}

Json to_json(const FisherResult& r) {
  return {{"method", std::string(to_string(r.method))},
          {"n_eff", r.n_eff},
          {"nu_t", r.nu_t},
          {"window", to_json(r.window)},
          {"rank", r.rank},
          {"info", to_json(r.info)},
          {"gamma_th", r.gamma_th ? to_json(*r.gamma_th) : Json(nullptr)}};
}

Json to_json(const OptimumReport& r) {
  return {{"param_index", r.param_index},
          {"n_opt", r.n_opt},
          {"p_opt", r.p_opt},
          {"gamma_min", r.gamma_min},
          {"interior", r.interior},
          {"n_refined", r.n_refined ? Json(*r.n_refined) : Json(nullptr)},
          {"p_refined", r.p_refined ? Json(*r.p_refined) : Json(nullptr)}};
}

Json to_json(const ValidationReport& r) {
  return {{"n_trials", r.n_trials},
          {"n_failed", r.n_failed},
          {"n_not_converged", r.n_not_converged},
          {"truth", to_json(r.truth)},
          {"mean", to_json(r.mean)},
          {"gamma_exp", to_json(r.gamma_exp)},
          {"gamma_th", to_json(r.gamma_th)},
          {"sigma_th", to_json(r.sigma_th)},
          {"deviation", to_json(r.deviation)},
          {"max_deviation", number_or_null(r.max_deviation)},
          {"max_deviation_index", Json::array({r.max_row + 1, r.max_col + 1})},
          {"gamma_exp_diag_std_error", to_json(r.diag_std_error)}};
}

Json to_json(const AveragedSpectrum& sp) {
  return {{"n_eff", sp.n_eff}, {"nu_hz", sp.nu}, {"psd_uv2_per_hz", sp.s_bar}};
}

Mat4 mat4_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("matrix: expected 4 rows");
  Mat4 m;
  for (int i = 0; i < 4; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.size() != 4) throw ConfigError("matrix: expected 4 columns");
    for (int k = 0; k < 4; ++k) m(i, k) = number_from_json(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

FitResult fit_result_from_json(const Json& j) {
  try {
    FitResult r;
    r.v_hat = {j.at("s_ph").get<double>(), j.at("nu_l").get<double>(), j.at("s_at").get<double>(),
               j.at("delta_nu").get<double>()};
    r.chi2 = j.at("chi2").get<double>();
    r.converged = j.at("converged").get<bool>();
    r.n_iter = j.at("n_iter").get<int>();
    r.window = {j.at("window").at(0).get<double>(), j.at("window").at(1).get<double>()};
    return r;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("fit result: ") + e.what());
  }
}

FisherResult fisher_result_from_json(const Json& j) {
  try {
    FisherResult r;
    const auto method = j.at("method").get<std::string>();
    if (method == to_string(FisherMethod::DiscreteSum))
      r.method = FisherMethod::DiscreteSum;
    else if (method == to_string(FisherMethod::Integral))
      r.method = FisherMethod::Integral;
    else
      throw ConfigError("fisher result: unknown method '" + method + "'");
    r.n_eff = j.at("n_eff").get<double>();
    r.nu_t = j.at("nu_t").get<double>();
    r.window = {j.at("window").at(0).get<double>(), j.at("window").at(1).get<double>()};
    r.rank = j.at("rank").get<int>();
    r.info = mat4_from_json(j.at("info"));
    if (!j.at("gamma_th").is_null()) r.gamma_th = mat4_from_json(j.at("gamma_th"));
    return r;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("fisher result: ") + e.what());
  }
}

AveragedSpectrum spectrum_from_json(const Json& j) {
  try {
    AveragedSpectrum sp;
    sp.n_eff = j.at("n_eff").get<int>();
    sp.nu = j.at("nu_hz").get<std::vector<double>>();
    sp.s_bar = j.at("psd_uv2_per_hz").get<std::vector<double>>();
    if (sp.nu.size() != sp.s_bar.size()) throw ConfigError("spectrum: nu_hz and psd_uv2_per_hz differ in length");
    return sp;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("spectrum: ") + e.what());
  }
}

// ---- run configuration ----------------------------------------------------

SpectralParams RunConfig::model_params() const {
  if (spectral) return *spectral;
  return params_from_conditions(*conditions, *instrument);
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  const std::string src(source);
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(src + ": " + e.what());
  }

  RunConfig rc;
  Section root(doc, src);

  {
    if (!root.has("model")) throw ConfigError(root.field("model") + ": missing required field");
    auto model = root.child("model");
    const bool has_spectral = model.has("spectral");
    const bool has_physical = model.has("conditions") || model.has("instrument");
    if (has_spectral == has_physical)
      throw ConfigError(model.field("spectral") + ": give either spectral or conditions + instrument");
    if (has_spectral) {
      auto s = model.child("spectral");
      SpectralParams v{s.required<double>("s_ph_uv2_per_hz"), s.required<double>("nu_l_hz"),
                       s.required<double>("s_at_uv2_per_hz"), s.required<double>("delta_nu_hz")};
      s.reject_unknown();
      check(model.field("spectral"), [&] { v.validate(); });
      rc.spectral = v;
    } else {
      if (!model.has("conditions")) throw ConfigError(model.field("conditions") + ": missing required field");
      if (!model.has("instrument")) throw ConfigError(model.field("instrument") + ": missing required field");
      auto c = model.child("conditions");
      ExperimentConditions ec{c.required<double>("n_per_cm3"), c.required<double>("p_mw") * kMilli,
                              c.optional<double>("xi2", 1.0)};
      c.reject_unknown();
      check(model.field("conditions"), [&] { ec.validate(); });

      auto k = model.child("instrument");
      InstrumentConstants ic;
      ic.gain_v_per_a = k.optional("gain_v_per_a", ic.gain_v_per_a);
      ic.electron_charge_c = k.optional("electron_charge_c", ic.electron_charge_c);
      ic.quantum_efficiency = k.required<double>("quantum_efficiency");
      ic.photon_energy_j = k.optional("photon_energy_j", ic.photon_energy_j);
      ic.kappa2 = k.required<double>("kappa2");
      ic.a_eff_cm2 = k.optional("a_eff_cm2", ic.a_eff_cm2);
      ic.l_cell_cm = k.optional("l_cell_cm", ic.l_cell_cm);
      ic.isotope_fraction = k.optional("isotope_fraction", ic.isotope_fraction);
      ic.gamma0_per_s = k.required<double>("gamma0_per_s");
      ic.alpha_cm3_per_s = k.optional("alpha_cm3_per_s", ic.alpha_cm3_per_s);
      ic.beta_per_s_per_w = k.optional("beta_per_s_per_w", ic.beta_per_s_per_w);
      ic.nu_l_hz = k.optional("nu_l_hz", ic.nu_l_hz);
      k.reject_unknown();
      check(model.field("instrument"), [&] { ic.validate(); });
      rc.conditions = ec;
      rc.instrument = ic;
    }
    model.reject_unknown();
  }

  {
    if (!root.has("acquisition")) throw ConfigError(root.field("acquisition") + ": missing required field");
    auto a = root.child("acquisition");
    auto& cfg = rc.acquisition;
    cfg.delta_s = a.optional("delta_s", cfg.delta_s);
    cfg.t_total_s = a.optional("t_total_s", cfg.t_total_s);
    cfg.n_ave = a.optional("n_ave", cfg.n_ave);
    cfg.n_bin = a.optional("n_bin", cfg.n_bin);
    cfg.window = {a.required<double>("fit_lo_hz"), a.required<double>("fit_hi_hz")};
    a.reject_unknown();
    check(root.field("acquisition"), [&] { cfg.validate(); });
  }

  if (root.has("monte_carlo")) {
    auto mc = root.child("monte_carlo");
    rc.n_trials = mc.optional("n_trials", rc.n_trials);
    rc.master_seed = mc.optional<std::uint64_t>("master_seed", rc.master_seed);
    const auto synth = mc.optional<std::string>("synthesis", std::string(to_string(rc.synthesis)));
    if (synth == to_string(SynthesisPath::Exact))
      rc.synthesis = SynthesisPath::Exact;
    else if (synth == to_string(SynthesisPath::TimeSeries))
      rc.synthesis = SynthesisPath::TimeSeries;
    else
      throw ConfigError(mc.field("synthesis") + ": expected \"exact\" or \"timeseries\"");
    mc.reject_unknown();
    if (rc.n_trials < 1) throw ConfigError(mc.field("n_trials") + ": must be >= 1");
  }

  if (root.has("crb")) {
    auto c = root.child("crb");
    const auto method = c.optional<std::string>("method", std::string(to_string(rc.crb_method)));
    if (method == to_string(FisherMethod::DiscreteSum))
      rc.crb_method = FisherMethod::DiscreteSum;
    else if (method == to_string(FisherMethod::Integral))
      rc.crb_method = FisherMethod::Integral;
    else
      throw ConfigError(c.field("method") + ": expected \"discrete-sum\" or \"integral\"");
    c.reject_unknown();
  }

  if (root.has("scan")) {
    auto s = root.child("scan");
    ScanSpec spec;
    spec.grid = GridSpec::linear(s.required<double>("n_min_per_cm3"), s.required<double>("n_max_per_cm3"),
                                 s.required<std::size_t>("n_count"), s.required<double>("p_min_mw") * kMilli,
                                 s.required<double>("p_max_mw") * kMilli, s.required<std::size_t>("p_count"));
    spec.xi2 = s.optional("xi2", 1.0);
    if (s.has("xi2_compare")) spec.xi2_compare = s.required<double>("xi2_compare");
    s.reject_unknown();
    check(root.field("scan"), [&] {
      spec.grid.validate();
      if (!(spec.xi2 > 0) || (spec.xi2_compare && !(*spec.xi2_compare > 0)))
        throw std::invalid_argument("xi2 must be > 0");
    });
    rc.scan = spec;
  }

  if (root.has("output")) {
    auto o = root.child("output");
    rc.output.directory = o.optional<std::string>("directory", rc.output.directory.string());
    if (o.has("formats")) {
      const Json& f = o.raw("formats");
      if (!f.is_array() || f.empty()) throw ConfigError(o.field("formats") + ": expected a non-empty list");
      rc.output.csv = rc.output.json = false;
      for (const auto& item : f) {
        if (item == "csv")
          rc.output.csv = true;
        else if (item == "json")
          rc.output.json = true;
        else
          throw ConfigError(o.field("formats") + ": entries must be \"csv\" or \"json\"");
      }
    }
    o.reject_unknown();
  }

  root.reject_unknown();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text_file(path), path.string());
}

Json to_json(const RunConfig& rc) {
  Json model;
  if (rc.spectral) {
    model["spectral"] = {{"s_ph_uv2_per_hz", rc.spectral->s_ph},
                         {"nu_l_hz", rc.spectral->nu_l},
                         {"s_at_uv2_per_hz", rc.spectral->s_at},
                         {"delta_nu_hz", rc.spectral->delta_nu}};
  } else {
    const auto& c = *rc.conditions;
    const auto& k = *rc.instrument;
    model["conditions"] = {{"n_per_cm3", c.n_per_cm3}, {"p_mw", c.p_w / kMilli}, {"xi2", c.xi2}};
    model["instrument"] = {{"gain_v_per_a", k.gain_v_per_a},
                           {"electron_charge_c", k.electron_charge_c},
                           {"quantum_efficiency", k.quantum_efficiency},
                           {"photon_energy_j", k.photon_energy_j},
                           {"kappa2", k.kappa2},
                           {"a_eff_cm2", k.a_eff_cm2},
                           {"l_cell_cm", k.l_cell_cm},
                           {"isotope_fraction", k.isotope_fraction},
                           {"gamma0_per_s", k.gamma0_per_s},
                           {"alpha_cm3_per_s", k.alpha_cm3_per_s},
                           {"beta_per_s_per_w", k.beta_per_s_per_w},
                           {"nu_l_hz", k.nu_l_hz}};
  }
  const auto& a = rc.acquisition;
  Json j = {{"model", model},
            {"acquisition",
             {{"delta_s", a.delta_s},
              {"t_total_s", a.t_total_s},
              {"n_ave", a.n_ave},
              {"n_bin", a.n_bin},
              {"fit_lo_hz", a.window.lo_hz},
              {"fit_hi_hz", a.window.hi_hz}}},
            {"monte_carlo",
             {{"n_trials", rc.n_trials},
              {"master_seed", rc.master_seed},
              {"synthesis", std::string(to_string(rc.synthesis))}}},
            {"crb", {{"method", std::string(to_string(rc.crb_method))}}}};
  if (rc.scan) {
    const auto& g = rc.scan->grid;
    Json s = {{"n_min_per_cm3", g.n_values.front()}, {"n_max_per_cm3", g.n_values.back()},
              {"n_count", g.n_values.size()},        {"p_min_mw", g.p_values.front() / kMilli},
              {"p_max_mw", g.p_values.back() / kMilli}, {"p_count", g.p_values.size()},
              {"xi2", rc.scan->xi2}};
    if (rc.scan->xi2_compare) s["xi2_compare"] = *rc.scan->xi2_compare;
    j["scan"] = std::move(s);
  }
  Json formats = Json::array();
  if (rc.output.csv) formats.push_back("csv");
  if (rc.output.json) formats.push_back("json");
  j["output"] = {{"directory", rc.output.directory.string()}, {"formats", formats}};
  return j;
}

}  // namespace noisespec
