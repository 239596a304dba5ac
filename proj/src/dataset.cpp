#include "surf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "surf/errors.hpp"

namespace surf {

int WindowConfig::stride_samples() const {
  const double stride = stride_seconds > 0.0 ? stride_seconds : window_seconds;
  const double exact = stride * rate_hz;
  const long long n = std::llround(exact);
  if (n < 1 || std::fabs(exact - static_cast<double>(n)) > 1e-6)
    throw ParameterError("stride must be a whole number of samples at 20 Hz");
  return static_cast<int>(n);
}

void WindowConfig::validate() const {
  if (window_seconds < 1) throw ParameterError("window_seconds must be >= 1");
  if (rate_hz != kWindowRateHz) throw ParameterError("dataset rate must be 20 Hz");
  (void)stride_samples();
}

std::pair<std::size_t, std::size_t> Dataset::class_balance() const {
  std::size_t zeros = 0;
  for (const LabeledWindow& w : examples) zeros += w.y == 0;
  return {zeros, examples.size() - zeros};
}

std::vector<LabeledWindow> partition_windows(const LeveledSeries& s, int label,
                                             const WindowConfig& cfg) {
  cfg.validate();
  if (label != 0 && label != 1) throw ParameterError("label must be 0 or 1");
  if (std::fabs(s.rate_hz - cfg.rate_hz) > 0.01 * cfg.rate_hz)
    throw ParameterError("series rate does not match the window config");

  const int win = cfg.window_samples();
  const int stride = cfg.stride_samples();
  std::vector<LabeledWindow> out;
  const std::size_t n = s.size();
  if (n < static_cast<std::size_t>(win)) return out;

  for (std::size_t start = 0; start + win <= n; start += stride) {
    LabeledWindow w;
    w.rows = win;
    w.y = label;
    w.x.resize(static_cast<std::size_t>(win) * kChannels);
    for (int t = 0; t < win; ++t) {
      const ImuSample& smp = s.samples[start + t];
      double* row = w.x.data() + static_cast<std::size_t>(t) * kChannels;
      row[0] = smp.accel[0];
      row[1] = smp.accel[1];
      row[2] = smp.accel[2];
      row[3] = smp.gyro[0];
      row[4] = smp.gyro[1];
      row[5] = smp.gyro[2];
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::pair<Dataset, Dataset> split_train_val(const std::vector<Drive>& drives,
                                            const std::vector<std::string>& val_ids,
                                            const WindowConfig& cfg) {
  cfg.validate();
  for (const std::string& id : val_ids) {
    const bool known = std::any_of(drives.begin(), drives.end(),
                                   [&](const Drive& d) { return d.id == id; });
    if (!known) throw ParameterError("validation selector names unknown drive: " + id);
  }

  Dataset train, val;
  train.config = val.config = cfg;
  for (const Drive& d : drives) {
    const bool in_val =
        std::find(val_ids.begin(), val_ids.end(), d.id) != val_ids.end();
    Dataset& dst = in_val ? val : train;
    for (LabeledWindow& w : partition_windows(d.series, d.label, cfg)) {
      dst.examples.push_back(std::move(w));
      dst.provenance.push_back(d.id);
    }
  }
  if (train.examples.empty()) throw ParameterError("train split is empty");
  if (val.examples.empty()) throw ParameterError("validation split is empty");
  return {std::move(train), std::move(val)};
}

void save_dataset(const Dataset& d, const std::string& path) {
  if (d.examples.empty()) throw ParameterError("refusing to save an empty dataset");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("cannot open " + path + " for writing");
  std::fprintf(f, "SURFDS v1, S=%d, rate=20\n", d.config.window_seconds);
  std::string current_drive;
  for (std::size_t i = 0; i < d.examples.size(); ++i) {
    const std::string& drive =
        i < d.provenance.size() ? d.provenance[i] : std::string();
    if (drive != current_drive && !drive.empty()) {
      std::fprintf(f, "# drive %s\n", drive.c_str());
      current_drive = drive;
    }
    const LabeledWindow& w = d.examples[i];
    std::fprintf(f, "%d", w.y);
    for (double v : w.x) std::fprintf(f, ",%.17g", v);
    std::fputc('\n', f);
  }
  std::fclose(f);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw FormatError(path + ": empty file");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  int s_value = 0;
  if (std::sscanf(header.c_str(), "SURFDS v1, S=%d, rate=20", &s_value) != 1 ||
      header.rfind("SURFDS v1,", 0) != 0)
    throw FormatError(path + ": bad dataset header '" + header + "'");
  if (s_value < 1) throw FormatError(path + ": invalid S in header");

  Dataset d;
  d.config.window_seconds = s_value;
  const std::size_t values_per_row = static_cast<std::size_t>(s_value) * 20 * kChannels;

  std::string line;
  std::string drive;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string word;
      ls >> word;
      if (word == "drive") {
        ls >> std::ws;
        std::getline(ls, drive);
      }
      continue;
    }

    LabeledWindow w;
    w.rows = s_value * 20;
    w.x.reserve(values_per_row);
    const char* p = line.c_str();
    char* end = nullptr;
    const long label = std::strtol(p, &end, 10);
    if (end == p || (label != 0 && label != 1))
      throw FormatError(path + ": bad label at line " + std::to_string(line_no));
    w.y = static_cast<int>(label);
    p = end;
    while (*p == ',') {
      ++p;
      const double v = std::strtod(p, &end);
      if (end == p)
        throw FormatError(path + ": bad value at line " + std::to_string(line_no));
      if (!std::isfinite(v))
        throw FormatError(path + ": non-finite value at line " + std::to_string(line_no));
      w.x.push_back(v);
      p = end;
    }
    if (*p != '\0')
      throw FormatError(path + ": trailing garbage at line " + std::to_string(line_no));
    if (w.x.size() != values_per_row)
      throw FormatError(path + ": row has " + std::to_string(w.x.size()) +
                        " values, header S=" + std::to_string(s_value) +
                        " implies " + std::to_string(values_per_row));
    d.examples.push_back(std::move(w));
    d.provenance.push_back(drive);
  }
  if (d.examples.empty()) throw FormatError(path + ": dataset has no examples");
  return d;
}

}  // namespace surf
