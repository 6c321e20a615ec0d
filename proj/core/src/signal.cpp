#include "gfd/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gfd/errors.hpp"
#include "gfd/rng.hpp"

namespace gfd {

namespace {

using nlohmann::json;

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_double(const std::string& field, double& value) {
  const char* b = field.data();
  const char* e = b + field.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
  if (b == e) return false;
  auto res = std::from_chars(b, e, value);
  return res.ec == std::errc() && res.ptr == e;
}

SignalRecord load_csv(const std::filesystem::path& path, std::size_t channels,
                      double sample_rate_hz, int label) {
  std::ifstream in(path);
  if (!in) throw DataError("load_signal: cannot open " + path.string());

  SignalRecord rec;
  rec.channels = channels;
  rec.sample_rate_hz = sample_rate_hz;
  rec.label = label;

  std::string line;
  std::size_t lineno = 0;
  bool saw_data = false;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_double(fields[i], row[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (!saw_data && !skipped_header) {
        skipped_header = true;  // single leading header row is allowed
        continue;
      }
      throw MalformedRow(path.string() + ":" + std::to_string(lineno) +
                         ": non-numeric field");
    }
    if (fields.size() != channels) {
      throw MalformedRow(path.string() + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(channels) + " fields, got " +
                         std::to_string(fields.size()));
    }
    for (double v : row) {
      if (!std::isfinite(v))
        throw NonFiniteSample(path.string() + ":" + std::to_string(lineno));
    }
    rec.samples.insert(rec.samples.end(), row.begin(), row.end());
    saw_data = true;
  }
  if (!saw_data) throw EmptyFile(path.string());
  rec.rows = rec.samples.size() / channels;
  return rec;
}

SignalRecord load_raw(const std::filesystem::path& path, std::size_t channels,
                      double sample_rate_hz, int label) {
  auto sidecar = path;
  sidecar += ".meta";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream meta(sidecar);
    std::string tok;
    while (meta >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      auto key = tok.substr(0, eq);
      auto val = tok.substr(eq + 1);
      if (key == "channels") channels = static_cast<std::size_t>(std::stoul(val));
      if (key == "sample_rate_hz") sample_rate_hz = std::stod(val);
    }
  }
  if (channels == 0) throw MalformedRow(path.string() + ": channel count unknown");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_signal: cannot open " + path.string());
  in.seekg(0, std::ios::end);
  auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (bytes == 0) throw EmptyFile(path.string());
  if (bytes % (sizeof(double) * channels) != 0)
    throw MalformedRow(path.string() + ": size not a whole number of frames");

  SignalRecord rec;
  rec.channels = channels;
  rec.sample_rate_hz = sample_rate_hz;
  rec.label = label;
  rec.samples.resize(bytes / sizeof(double));
  in.read(reinterpret_cast<char*>(rec.samples.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw DataError("load_signal: short read on " + path.string());
  rec.rows = rec.samples.size() / channels;
  for (double v : rec.samples) {
    if (!std::isfinite(v)) throw NonFiniteSample(path.string());
  }
  return rec;
}

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::vector<double> SignalRecord::channel(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = samples[r * channels + c];
  return out;
}

std::vector<double> SegmentView::channel(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = data[r * channels + c];
  return out;
}

SignalRecord load_signal(const std::filesystem::path& path, SignalFormat format,
                         std::size_t channels, double sample_rate_hz, int label) {
  if (format == SignalFormat::csv) return load_csv(path, channels, sample_rate_hz, label);
  return load_raw(path, channels, sample_rate_hz, label);
}

void write_signal_csv(const SignalRecord& rec, const std::filesystem::path& path) {
  std::ostringstream out;
  char buf[64];
  for (std::size_t r = 0; r < rec.rows; ++r) {
    for (std::size_t c = 0; c < rec.channels; ++c) {
      // 17 significant digits: doubles round-trip exactly
      int len = std::snprintf(buf, sizeof buf, "%.17g", rec.at(r, c));
      if (c) out << ',';
      out.write(buf, len);
    }
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_signal_raw(const SignalRecord& rec, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(rec.samples.data()),
              static_cast<std::streamsize>(rec.samples.size() * sizeof(double)));
  }
  std::filesystem::rename(tmp, path);

  std::ostringstream meta;
  meta << "channels=" << rec.channels << " sample_rate_hz=";
  char buf[64];
  int len = std::snprintf(buf, sizeof buf, "%.17g", rec.sample_rate_hz);
  meta.write(buf, len);
  meta << '\n';
  auto sidecar = path;
  sidecar += ".meta";
  atomic_write_text(sidecar, meta.str());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_manifest: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw MalformedRow(path.string() + ": " + e.what());
  }

  DatasetManifest ds;
  for (const auto& name : doc.at("class_names")) ds.class_names.push_back(name);
  const auto base = path.parent_path();
  for (const auto& r : doc.at("records")) {
    std::filesystem::path p = r.at("path").get<std::string>();
    if (p.is_relative()) p = base / p;
    int label = r.at("label").get<int>();
    double fs = r.at("sample_rate_hz").get<double>();
    auto fmt = p.extension() == ".csv" ? SignalFormat::csv : SignalFormat::raw_float;
    std::size_t channels = 0;
    if (fmt == SignalFormat::csv) {
      // channel count comes from the first data row
      std::ifstream probe(p);
      if (!probe) throw DataError("load_manifest: cannot open " + p.string());
      std::string line;
      while (std::getline(probe, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line);
        double v;
        if (!fields.empty() && parse_double(fields[0], v)) {
          channels = fields.size();
          break;
        }
        channels = fields.size();  // header row has one field per channel
        break;
      }
      if (channels == 0) throw EmptyFile(p.string());
    }
    ds.records.push_back(load_signal(p, fmt, channels, fs, label));
  }
  return ds;
}

void save_manifest(const DatasetManifest& ds, const std::filesystem::path& manifest_path,
                   const std::vector<std::string>& record_paths) {
  if (record_paths.size() != ds.records.size())
    throw LengthMismatch("save_manifest: one path per record required");
  json doc;
  doc["class_names"] = ds.class_names;
  doc["records"] = json::array();
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    doc["records"].push_back({{"path", record_paths[i]},
                              {"label", ds.records[i].label},
                              {"sample_rate_hz", ds.records[i].sample_rate_hz}});
  }
  atomic_write_text(manifest_path, doc.dump(2) + "\n");
}

DatasetManifest synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.classes.empty()) throw InvalidSpec("synth_dataset: no classes");
  if (spec.duration_s <= 0) throw InvalidSpec("synth_dataset: duration_s must be positive");
  if (spec.sample_rate_hz <= 0) throw InvalidSpec("synth_dataset: sample_rate_hz must be positive");
  if (spec.channels == 0) throw InvalidSpec("synth_dataset: channels must be positive");
  if (spec.noise_std < 0) throw InvalidSpec("synth_dataset: noise_std must be non-negative");
  if (spec.records_per_class == 0) throw InvalidSpec("synth_dataset: records_per_class must be positive");
  for (const auto& c : spec.classes) {
    if (c.impulse_amplitude != 0.0) {
      if (c.impulse_rate_hz <= 0 || c.impulse_rate_hz >= spec.sample_rate_hz / 2)
        throw InvalidSpec("synth_dataset: impulse_rate_hz out of range for " + c.name);
      if (c.resonance_hz <= 0 || c.resonance_hz >= spec.sample_rate_hz / 2)
        throw InvalidSpec("synth_dataset: resonance_hz out of range for " + c.name);
      if (c.decay_rate <= 0)
        throw InvalidSpec("synth_dataset: decay_rate must be positive for " + c.name);
    }
  }

  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate_hz));
  if (n == 0) throw InvalidSpec("synth_dataset: empty record");
  const double fs = spec.sample_rate_hz;

  DatasetManifest ds;
  for (const auto& c : spec.classes) ds.class_names.push_back(c.name);

  for (std::size_t cls = 0; cls < spec.classes.size(); ++cls) {
    const auto& cs = spec.classes[cls];

    // shared deterministic impulse response and train for the class
    std::vector<double> base(n, 0.0);
    if (cs.impulse_amplitude != 0.0) {
      const double period = fs / cs.impulse_rate_hz;  // samples between impulses
      // ring-down until it has decayed to 1e-4 of the initial amplitude
      auto kernel_len = static_cast<std::size_t>(std::ceil(std::log(1e4) / cs.decay_rate * fs));
      kernel_len = std::min(kernel_len, n);
      std::vector<double> kernel(kernel_len);
      for (std::size_t j = 0; j < kernel_len; ++j) {
        double t = static_cast<double>(j) / fs;
        kernel[j] = cs.impulse_amplitude * std::exp(-cs.decay_rate * t) *
                    std::sin(2.0 * 3.14159265358979323846 * cs.resonance_hz * t);
      }
      for (double pos = 0.0; pos < static_cast<double>(n); pos += period) {
        auto start = static_cast<std::size_t>(pos);
        for (std::size_t j = 0; j < kernel_len && start + j < n; ++j)
          base[start + j] += kernel[j];
      }
    }

    for (std::size_t r = 0; r < spec.records_per_class; ++r) {
      SignalRecord rec;
      rec.rows = n;
      rec.channels = spec.channels;
      rec.sample_rate_hz = fs;
      rec.label = static_cast<int>(cls);
      rec.meta["class"] = cs.name;
      rec.meta["record"] = std::to_string(r);
      rec.samples.resize(n * spec.channels);

      Rng rng(derive_seed(seed, "synth." + std::to_string(cls) + "." + std::to_string(r)));
      for (std::size_t ch = 0; ch < spec.channels; ++ch) {
        for (std::size_t i = 0; i < n; ++i) {
          rec.samples[i * spec.channels + ch] = base[i] + spec.noise_std * rng.gaussian();
        }
      }
      ds.records.push_back(std::move(rec));
    }
  }
  return ds;
}

}  // namespace gfd
