#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "noisespec/errors.hpp"
#include "noisespec/io.hpp"
#include "test_support.hpp"

using namespace noisespec;

namespace {

const char* kMinimalConfig = R"({
  "model": {"spectral": {"s_ph_uv2_per_hz": 1, "nu_l_hz": 42600, "s_at_uv2_per_hz": 4, "delta_nu_hz": 1000}},
  "acquisition": {"fit_lo_hz": 33000, "fit_hi_hz": 52000}
})";

std::string config_error(std::string_view text) {
  try {
    (void)parse_run_config(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, i % 40 - 20);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(42600), "42600");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(SpectrumCsv, RoundTrip) {
  AveragedSpectrum sp{{2, 4, 6}, {0.1, 1.0 / 3, 7e-12}, 50};
  const auto text = spectrum_to_csv(sp);
  EXPECT_EQ(text.substr(0, text.find('\n')), "nu_hz,psd_uv2_per_hz");
  const auto back = spectrum_from_csv(text);
  EXPECT_EQ(back.nu, sp.nu);
  EXPECT_EQ(back.s_bar, sp.s_bar);
}

TEST(SpectrumCsv, SchemaErrors) {
  EXPECT_THROW((void)spectrum_from_csv("nu,psd\n1,2\n"), ConfigError);
  EXPECT_THROW((void)spectrum_from_csv("nu_hz,psd_uv2_per_hz\n1,2,3\n"), ConfigError);
  EXPECT_THROW((void)spectrum_from_csv("nu_hz,psd_uv2_per_hz\n1,abc\n"), ConfigError);
  EXPECT_THROW((void)spectrum_from_csv("nu_hz,psd_uv2_per_hz\n2,1\n1,1\n"), ConfigError);
  EXPECT_EQ(spectrum_from_csv("nu_hz,psd_uv2_per_hz\r\n1,2\r\n\r\n").s_bar, (std::vector<double>{2}));
}

TEST(SurfaceCsv, RoundTripWithMissingValues) {
  ScanGrid sg;
  sg.n_values = {1e12, 2e12};
  sg.p_values = {1e-3, 2e-3, 3e-3};
  for (auto& s : sg.surfaces)
    for (int i = 0; i < 6; ++i) s.push_back(i * 1.5 + 0.25);
  sg.surfaces[1][4] = std::numeric_limits<double>::quiet_NaN();
  const auto back = surface_from_csv(surface_to_csv(sg));
  EXPECT_EQ(back.n_values, sg.n_values);
  EXPECT_EQ(back.p_values, sg.p_values);
  for (int d = 0; d < 4; ++d)
    for (std::size_t c = 0; c < 6; ++c) {
      const double a = sg.surfaces[d][c], b = back.surfaces[d][c];
      EXPECT_TRUE(a == b || (std::isnan(a) && std::isnan(b)));
    }
  EXPECT_THROW((void)surface_from_csv("n_cm3,p_w,gamma11,gamma22,gamma33,gamma44\n1,1,1,1,1,1\n1,2,1,1,1,1\n2,1,1,1,1,1\n"),
               ConfigError);
}

TEST(MatrixCsv, RoundTripAndFixtures) {
  const Mat4 m = fixtures::load_matrix("reference_gamma_th.csv");
  EXPECT_EQ(m(3, 3), 17000);
  EXPECT_EQ(m(0, 1), 0.13);
  EXPECT_EQ(matrix_from_csv(matrix_to_csv(m)), m);
  EXPECT_THROW((void)matrix_from_csv("1,2,3,4\n"), ConfigError);
  EXPECT_THROW((void)matrix_from_csv("1,2,3\n1,2,3\n1,2,3\n1,2,3\n"), ConfigError);
}

TEST(Samples, Separators) {
  EXPECT_EQ(samples_from_text("1, 2\n3\t4 # tail\n# only comment\n5"), (std::vector<double>{1, 2, 3, 4, 5}));
  EXPECT_THROW((void)samples_from_text("1 2 x"), ConfigError);
}

TEST(Json, FitResultRoundTrip) {
  FitResult r;
  r.v_hat = {1.02, 42601.5, 4.1, 998.0};
  r.chi2 = 190.25;
  r.n_iter = 9;
  r.converged = true;
  r.window = {33e3, 52e3};
  const Json j = to_json(r);
  for (const char* key : {"s_ph", "nu_l", "s_at", "delta_nu", "chi2", "converged", "n_iter", "window"})
    EXPECT_TRUE(j.contains(key)) << key;
  const auto back = fit_result_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.v_hat, r.v_hat);
  EXPECT_EQ(back.chi2, r.chi2);
  EXPECT_EQ(back.n_iter, r.n_iter);
  EXPECT_EQ(back.converged, r.converged);
  EXPECT_EQ(back.window, r.window);
}

TEST(Json, FisherResultRoundTrip) {
  FisherResult fr;
  fr.info = fixtures::load_matrix("reference_gamma_exp.csv");
  fr.gamma_th = fixtures::load_matrix("reference_gamma_th.csv");
  fr.rank = 4;
  fr.n_eff = 50;
  fr.nu_t = 100;
  fr.window = {33e3, 52e3};
  fr.method = FisherMethod::Integral;
  const auto back = fisher_result_from_json(Json::parse(to_json(fr).dump()));
  EXPECT_EQ(back.info, fr.info);
  EXPECT_EQ(*back.gamma_th, *fr.gamma_th);
  EXPECT_EQ(back.rank, 4);
  EXPECT_EQ(back.method, FisherMethod::Integral);
  fr.gamma_th.reset();
  EXPECT_TRUE(fisher_result_from_json(to_json(fr)).singular());
}

TEST(Json, SpectrumRoundTrip) {
  AveragedSpectrum sp{{2, 4}, {0.5, 0.25}, 20};
  const auto back = spectrum_from_json(Json::parse(to_json(sp).dump()));
  EXPECT_EQ(back.nu, sp.nu);
  EXPECT_EQ(back.s_bar, sp.s_bar);
  EXPECT_EQ(back.n_eff, 20);
}

TEST(RunConfig, MinimalSpectralModel) {
  const auto rc = parse_run_config(kMinimalConfig);
  ASSERT_TRUE(rc.spectral);
  EXPECT_FALSE(rc.conditions);
  EXPECT_EQ(rc.model_params(), (SpectralParams{1, 42600, 4, 1000}));
  EXPECT_EQ(rc.acquisition.record_length(), 100000u);
  EXPECT_EQ(rc.n_trials, 100);
  EXPECT_EQ(rc.crb_method, FisherMethod::DiscreteSum);
  EXPECT_FALSE(rc.scan);
}

TEST(RunConfig, ShippedProfilesRoundTrip) {
  for (const char* name : {"calibrated.json", "validation_anchor.json", "desk_validation.json"}) {
    const auto rc = fixtures::load_profile(name);
    const auto again = parse_run_config(to_json(rc).dump(2), name);
    EXPECT_EQ(to_json(again), to_json(rc)) << name;
    EXPECT_TRUE(rc.model_params().valid()) << name;
  }
  const auto cal = fixtures::load_profile("calibrated.json");
  ASSERT_TRUE(cal.conditions && cal.instrument && cal.scan);
  EXPECT_DOUBLE_EQ(cal.conditions->p_w, 2e-3);
  EXPECT_EQ(cal.scan->grid.n_values.size(), 50u);
  EXPECT_DOUBLE_EQ(cal.scan->grid.p_values.back(), 15e-3);
  EXPECT_EQ(cal.scan->xi2_compare, 0.55);
}

TEST(RunConfig, ErrorsNameTheField) {
  EXPECT_NE(config_error(R"({"acquisition": {"fit_lo_hz": 1, "fit_hi_hz": 2}})").find("cfg.model"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"model": {"spectral": {"s_ph_uv2_per_hz": 1, "nu_l_hz": 42600, "s_at_uv2_per_hz": 4}},
                             "acquisition": {"fit_lo_hz": 1, "fit_hi_hz": 2}})")
                .find("cfg.model.spectral.delta_nu_hz: missing required field"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"model": {"spectral": {"s_ph_uv2_per_hz": 1, "nu_l_hz": 42600, "s_at_uv2_per_hz": 4,
                             "delta_nu_hz": 1}}, "acquisition": {"fit_lo_hz": 1}})")
                .find("fit_hi_hz"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"model": {"spectral": {"s_ph_uv2_per_hz": 1, "nu_l_hz": 42600, "s_at_uv2_per_hz": 4,
                             "delta_nu_hz": 1}}, "acquisition": {"fit_lo_hz": 1, "fit_hi_hz": 2, "n_avg": 3}})")
                .find("cfg.acquisition.n_avg: unknown field"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"model": {"spectral": {"s_ph_uv2_per_hz": "one", "nu_l_hz": 42600,
                             "s_at_uv2_per_hz": 4, "delta_nu_hz": 1}}, "acquisition": {"fit_lo_hz": 1, "fit_hi_hz": 2}})")
                .find("expected a number"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"model": {"spectral": {"s_ph_uv2_per_hz": -1, "nu_l_hz": 42600,
                             "s_at_uv2_per_hz": 4, "delta_nu_hz": 1}}, "acquisition": {"fit_lo_hz": 1, "fit_hi_hz": 2}})")
                .find("s_ph must be > 0"),
            std::string::npos);
}

TEST(RunConfig, ExactlyOneModelSource) {
  const std::string both = R"({"model": {"spectral": {}, "conditions": {}}, "acquisition": {}})";
  EXPECT_NE(config_error(both).find("either spectral or conditions"), std::string::npos);
  const std::string none = R"({"model": {}, "acquisition": {}})";
  EXPECT_NE(config_error(none).find("either spectral or conditions"), std::string::npos);
  const std::string half = R"({"model": {"conditions": {"n_per_cm3": 1e12, "p_mw": 2}}, "acquisition": {}})";
  EXPECT_NE(config_error(half).find("cfg.model.instrument: missing required field"), std::string::npos);
}

TEST(RunConfig, SyntaxErrorsCarryLine) {
  const auto msg = config_error("{\n  \"model\": {\n    \"spectral\": [1, 2,,]\n  }\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(RunConfig, MonteCarloAndOutputSections) {
  const std::string text = R"({
    "model": {"spectral": {"s_ph_uv2_per_hz": 1, "nu_l_hz": 42600, "s_at_uv2_per_hz": 4, "delta_nu_hz": 1000}},
    "acquisition": {"fit_lo_hz": 33000, "fit_hi_hz": 52000, "n_ave": 5, "n_bin": 20},
    "monte_carlo": {"n_trials": 7, "master_seed": 18446744073709551615, "synthesis": "timeseries"},
    "crb": {"method": "integral"},
    "output": {"directory": "somewhere", "formats": ["json"]}
  })";
  const auto rc = parse_run_config(text);
  EXPECT_EQ(rc.n_trials, 7);
  EXPECT_EQ(rc.master_seed, 18446744073709551615ull);
  EXPECT_EQ(rc.synthesis, SynthesisPath::TimeSeries);
  EXPECT_EQ(rc.crb_method, FisherMethod::Integral);
  EXPECT_EQ(rc.acquisition.n_eff(), 100);
  EXPECT_FALSE(rc.output.csv);
  EXPECT_TRUE(rc.output.json);
  EXPECT_EQ(rc.output.directory, "somewhere");
  EXPECT_THROW((void)parse_run_config(R"({"model": {"spectral": {"s_ph_uv2_per_hz": 1, "nu_l_hz": 42600,
      "s_at_uv2_per_hz": 4, "delta_nu_hz": 1000}}, "acquisition": {"fit_lo_hz": 33000, "fit_hi_hz": 52000},
      "monte_carlo": {"n_trials": 0}})"),
               ConfigError);
  EXPECT_THROW((void)parse_run_config(R"({"model": {"spectral": {"s_ph_uv2_per_hz": 1, "nu_l_hz": 42600,
      "s_at_uv2_per_hz": 4, "delta_nu_hz": 1000}}, "acquisition": {"fit_lo_hz": 33000, "fit_hi_hz": 52000},
      "output": {"formats": ["xml"]}})"),
               ConfigError);
}

TEST(Files, MissingFileIsIoError) {
  EXPECT_THROW((void)read_text_file("/nonexistent/dir/file.json"), IoError);
  EXPECT_THROW(write_text_file("/nonexistent/dir/file.json", "x"), IoError);
}
