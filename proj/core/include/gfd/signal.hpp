#ifndef GFD_SIGNAL_HPP
#define GFD_SIGNAL_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gfd {

// Multichannel time series, row-major [rows x channels].
struct SignalRecord {
  std::vector<double> samples;
  std::size_t rows = 0;
  std::size_t channels = 0;
  double sample_rate_hz = 0.0;
  int label = -1;
  std::map<std::string, std::string> meta;

  double at(std::size_t r, std::size_t c) const { return samples[r * channels + c]; }
  std::vector<double> channel(std::size_t c) const;
};

// Contiguous run of rows inside a SignalRecord. Non-owning.
struct SegmentView {
  const double* data = nullptr;  // first row, stride == channels
  std::size_t rows = 0;
  std::size_t channels = 0;

  double at(std::size_t r, std::size_t c) const { return data[r * channels + c]; }
  std::vector<double> channel(std::size_t c) const;
};

struct DatasetManifest {
  std::vector<SignalRecord> records;
  std::vector<std::string> class_names;  // index == label
};

enum class SignalFormat { csv, raw_float };

// CSV: one row per sample, exactly `channels` comma-separated numeric fields,
// one optional non-numeric header row. raw_float: little-endian float64,
// channel-interleaved, described by a one-line "<path>.meta" sidecar
// (channels=<int> sample_rate_hz=<float>); the explicit arguments win when
// there is no sidecar.
SignalRecord load_signal(const std::filesystem::path& path, SignalFormat format,
                         std::size_t channels, double sample_rate_hz, int label);

void write_signal_csv(const SignalRecord& rec, const std::filesystem::path& path);
void write_signal_raw(const SignalRecord& rec, const std::filesystem::path& path);

// Manifest JSON: {"class_names": [...], "records": [{"path", "label",
// "sample_rate_hz"}]}. Relative record paths resolve against the manifest's
// directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& ds, const std::filesystem::path& manifest_path,
                   const std::vector<std::string>& record_paths);

struct SynthClassSpec {
  std::string name;
  double impulse_rate_hz = 0.0;   // 0 together with amplitude 0 => noise only
  double impulse_amplitude = 0.0;
  double resonance_hz = 0.0;
  double decay_rate = 0.0;        // 1/s, ring-down e^(-decay_rate * t)
};

struct SynthSpec {
  std::vector<SynthClassSpec> classes;
  double duration_s = 1.0;
  double sample_rate_hz = 8192.0;
  std::size_t channels = 1;
  double noise_std = 0.1;
  std::size_t records_per_class = 1;
};

// Faulty classes are periodic impulse trains convolved with a decaying sinusoid
// plus white Gaussian noise; a class with amplitude 0 is noise only. Fully
// deterministic for a given (spec, seed).
DatasetManifest synth_dataset(const SynthSpec& spec, std::uint64_t seed);

}  // namespace gfd

#endif
