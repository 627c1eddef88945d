#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "noisespec/estimation.hpp"
#include "noisespec/fisher.hpp"
#include "noisespec/scan.hpp"
#include "noisespec/spectral_model.hpp"
#include "noisespec/synthesis.hpp"
#include "noisespec/validation.hpp"

namespace noisespec {

using Json = nlohmann::ordered_json;

[[nodiscard]] std::string_view version();

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double x);

/// Throws IoError.
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// ---- CSV ------------------------------------------------------------------

inline constexpr std::string_view kSpectrumCsvHeader = "nu_hz,psd_uv2_per_hz";
inline constexpr std::string_view kSurfaceCsvHeader = "n_cm3,p_w,gamma11,gamma22,gamma33,gamma44";

[[nodiscard]] std::string spectrum_to_csv(const AveragedSpectrum& sp);
/// n_eff of the result is 1: the CSV schema does not carry it.
/// Throws ConfigError on a header or row that does not match the schema.
[[nodiscard]] AveragedSpectrum spectrum_from_csv(std::string_view text);

[[nodiscard]] std::string surface_to_csv(const ScanGrid& sg);
[[nodiscard]] ScanGrid surface_from_csv(std::string_view text);

/// Four comma-separated rows of four numbers.
[[nodiscard]] std::string matrix_to_csv(const Mat4& m);
[[nodiscard]] Mat4 matrix_from_csv(std::string_view text);

/// Numbers separated by commas, whitespace or newlines; '#' starts a comment.
[[nodiscard]] std::vector<double> samples_from_text(std::string_view text);

// ---- JSON -----------------------------------------------------------------

[[nodiscard]] Json to_json(const Mat4& m);
[[nodiscard]] Json to_json(const Vec4& v);
[[nodiscard]] Json to_json(const SpectralParams& v);
[[nodiscard]] Json to_json(const FitWindow& w);
[[nodiscard]] Json to_json(const FitResult& r);
[[nodiscard]] Json to_json(const FisherResult& r);
[[nodiscard]] Json to_json(const OptimumReport& r);
[[nodiscard]] Json to_json(const ValidationReport& r);
[[nodiscard]] Json to_json(const AveragedSpectrum& sp);

[[nodiscard]] Mat4 mat4_from_json(const Json& j);
[[nodiscard]] FitResult fit_result_from_json(const Json& j);
[[nodiscard]] FisherResult fisher_result_from_json(const Json& j);
[[nodiscard]] AveragedSpectrum spectrum_from_json(const Json& j);

// ---- run configuration ----------------------------------------------------

struct ScanSpec {
  GridSpec grid;
  double xi2 = 1.0;
  /// Second squeezing factor for a gain comparison; none when absent.
  std::optional<double> xi2_compare;
};

struct OutputSpec {
  std::filesystem::path directory = ".";
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  std::optional<SpectralParams> spectral;
  std::optional<ExperimentConditions> conditions;
  std::optional<InstrumentConstants> instrument;
  AcquisitionConfig acquisition;
  int n_trials = 100;
  std::uint64_t master_seed = 1;
  SynthesisPath synthesis = SynthesisPath::Exact;
  FisherMethod crb_method = FisherMethod::DiscreteSum;
  std::optional<ScanSpec> scan;
  OutputSpec output;

  /// Spectral parameters of the model, through the forward model if needed.
  [[nodiscard]] SpectralParams model_params() const;
};

/// Parses and validates a configuration document. `source` prefixes error
/// messages. Throws ConfigError naming the offending field; syntax errors
/// carry the line and column.
[[nodiscard]] RunConfig parse_run_config(std::string_view text, std::string_view source = "config");
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical form of a configuration; parse_run_config accepts it back.
[[nodiscard]] Json to_json(const RunConfig& rc);

}  // namespace noisespec
