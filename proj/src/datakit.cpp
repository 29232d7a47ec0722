// Copyright 2026 The evgrid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "evgrid/datakit.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "evgrid/error.hpp"
#include "evgrid/grid_io.hpp"

namespace evgrid
{

const char * to_string(Provenance p)
{
  switch (p) {
    case Provenance::kManual:
      return "manual";
    case Provenance::kAuto:
      return "auto";
    case Provenance::kNegative:
      return "negative";
  }
  return "manual";
}

Provenance provenance_from_string(const std::string & s)
{
  if (s == "manual") {
    return Provenance::kManual;
  }
  if (s == "auto") {
    return Provenance::kAuto;
  }
  if (s == "negative") {
    return Provenance::kNegative;
  }
  throw DataError("unknown provenance '" + s + "'");
}

// ---------------------------------------------------------------- labels

std::string format_labels(const std::vector<LabelRecord> & records)
{
  std::string out;
  char line[192];
  for (const auto & r : records) {
    const auto & b = r.box;
    int n = std::snprintf(
      line, sizeof(line), "%llu %.6f %.6f %.6f %.6f %.6f", static_cast<unsigned long long>(r.frame_id), b.x,
      b.y, b.w, b.h, b.psi_deg);
    out.append(line, static_cast<std::size_t>(n));
    if (r.score) {
      n = std::snprintf(line, sizeof(line), " %.6f", *r.score);
      out.append(line, static_cast<std::size_t>(n));
    }
    out += '\n';
  }
  return out;
}

namespace
{

std::vector<std::string_view> split_ws(std::string_view line)
{
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
      ++i;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
      ++i;
    }
    if (i > start) {
      tokens.push_back(line.substr(start, i - start));
    }
  }
  return tokens;
}

template <typename T>
bool parse_number(std::string_view token, T & value)
{
  const char * end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<LabelRecord> parse_labels(std::string_view text)
{
  std::vector<LabelRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') {
      continue;
    }
    const auto fail = [&](const std::string & why) {
      throw DataError("label line " + std::to_string(line_no) + ": " + why);
    };
    if (tokens.size() != 6 && tokens.size() != 7) {
      fail("expected 6 or 7 fields, got " + std::to_string(tokens.size()));
    }
    LabelRecord r;
    if (!parse_number(tokens[0], r.frame_id)) {
      fail("bad frame id '" + std::string(tokens[0]) + "'");
    }
    double v[6] = {};
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      if (!parse_number(tokens[k], v[k - 1]) || !std::isfinite(v[k - 1])) {
        fail("bad number '" + std::string(tokens[k]) + "'");
      }
    }
    if (!(v[2] > 0.0 && v[3] > 0.0)) {
      fail("box extents must be positive");
    }
    r.box = RotatedBox{v[0], v[1], v[2], v[3], v[4]};
    if (tokens.size() == 7) {
      if (v[5] < 0.0 || v[5] > 1.0) {
        fail("score outside [0,1]");
      }
      r.score = v[5];
    }
    out.push_back(r);
  }
  return out;
}

void write_labels(const std::filesystem::path & path, const std::vector<LabelRecord> & records)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw DataError("cannot write " + path.string());
  }
  os << format_labels(records);
}

std::vector<LabelRecord> read_labels(const std::filesystem::path & path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw DataError("cannot open label file " + path.string());
  }
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_labels(ss.str());
  } catch (const DataError & e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- dataset ops

std::vector<FrameRecord> subsample(const std::vector<FrameRecord> & frames, std::size_t stride)
{
  if (stride == 0) {
    throw ConfigError("subsample stride must be at least 1");
  }
  std::vector<FrameRecord> out;
  for (std::size_t i = 0; i < frames.size(); i += stride) {
    out.push_back(frames[i]);
  }
  return out;
}

double static_overlap(const DynamicGrid & grid, const RotatedBox & box)
{
  double min_x = box.x;
  double max_x = box.x;
  double min_y = box.y;
  double max_y = box.y;
  for (const auto & c : corners(box)) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  const double res = grid.resolution();
  const double half_w = grid.cols() * res / 2.0;
  const double half_h = grid.rows() * res / 2.0;
  const int c0 = std::max(0, static_cast<int>(std::floor((min_x + half_w) / res)));
  const int c1 = std::min(grid.cols() - 1, static_cast<int>(std::floor((max_x + half_w) / res)));
  const int r0 = std::max(0, static_cast<int>(std::floor((min_y + half_h) / res)));
  const int r1 = std::min(grid.rows() - 1, static_cast<int>(std::floor((max_y + half_h) / res)));
  std::size_t inside = 0;
  std::size_t dominant = 0;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (!contains(box, grid.cell_center(c, r))) {
        continue;
      }
      ++inside;
      const auto & m = grid.at(c, r).masses;
      const float others = std::max({m.free, m.dyn, m.occupied, m.passable, m.unknown});
      if (m.stat > others) {
        ++dominant;
      }
    }
  }
  return inside == 0 ? 0.0 : static_cast<double>(dominant) / static_cast<double>(inside);
}

std::vector<FrameRecord> autolabel(
  const std::vector<FrameRecord> & frames, const ClusterParams & params, const QaRules & qa)
{
  params.validate();
  std::vector<FrameRecord> out;
  for (const auto & f : frames) {
    if (!f.grid) {
      throw DataError("autolabel: frame " + frame_key(f.scenario, f.frame_id) + " has no grid");
    }
    const auto dets = classic_detect_clusters(*f.grid, params);
    bool pass = true;
    for (const auto & d : dets) {
      const auto & b = d.detection.box;
      if (b.area() > qa.max_box_area || std::hypot(d.mean_velocity.x, d.mean_velocity.y) > qa.max_speed ||
          static_overlap(*f.grid, b) > qa.max_static_overlap) {
        pass = false;
        break;
      }
    }
    if (!pass) {
      continue;
    }
    FrameRecord r = f;
    r.boxes.clear();
    if (f.provenance == Provenance::kNegative) {
      out.push_back(std::move(r));
      continue;
    }
    if (dets.empty()) {
      continue;
    }
    for (const auto & d : dets) {
      r.boxes.push_back(d.detection.box);
    }
    r.provenance = Provenance::kAuto;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<FrameRecord> mine_negatives(const std::vector<FrameRecord> & frames)
{
  std::vector<FrameRecord> out;
  for (const auto & f : frames) {
    if (f.scenario_movers != 0) {
      continue;
    }
    FrameRecord r = f;
    r.boxes.clear();
    r.provenance = Provenance::kNegative;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------- splits

std::string frame_key(const std::string & scenario, std::uint64_t frame_id)
{
  return scenario + "/" + frame_file_stem(frame_id);
}

std::string frame_file_stem(std::uint64_t frame_id)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(frame_id));
  return buf;
}

SubsetSplit split_counts(std::size_t n, const SplitRatios & ratios)
{
  const auto cut = [n](double fraction) {
    return std::min(n, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  };
  const std::size_t a = cut(ratios.train);
  const std::size_t b = std::max(a, cut(ratios.train + ratios.val));
  SubsetSplit s;
  s.train.resize(a);
  s.val.resize(b - a);
  s.test.resize(n - b);
  return s;
}

SplitManifest make_splits(
  const std::vector<FrameRecord> & frames, const SplitRatios & ratios, std::uint64_t seed)
{
  if (ratios.train < 0.0 || ratios.val < 0.0 || ratios.test < 0.0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  std::map<std::string, std::vector<std::string>> by_subset;
  for (const auto & f : frames) {
    by_subset[to_string(f.provenance)].push_back(frame_key(f.scenario, f.frame_id));
  }
  SplitManifest m;
  for (auto & [subset, keys] : by_subset) {
    std::sort(keys.begin(), keys.end());
    // Fisher-Yates with an explicitly specified engine: identical on every platform
    std::uint64_t subset_seed = seed;
    for (char ch : subset) {
      subset_seed = subset_seed * 1099511628211ULL + static_cast<unsigned char>(ch);
    }
    std::mt19937_64 rng(subset_seed);
    for (std::size_t i = keys.size(); i > 1; --i) {
      std::swap(keys[i - 1], keys[rng() % i]);
    }
    SubsetSplit s = split_counts(keys.size(), ratios);
    auto it = keys.begin();
    for (auto * part : {&s.train, &s.val, &s.test}) {
      const auto n = static_cast<std::ptrdiff_t>(part->size());
      part->assign(it, it + n);
      std::sort(part->begin(), part->end());
      it += n;
    }
    m.subsets[subset] = std::move(s);
  }
  return m;
}

SubsetSplit SplitManifest::totals() const
{
  SubsetSplit t;
  for (const auto & [name, s] : subsets) {
    t.train.insert(t.train.end(), s.train.begin(), s.train.end());
    t.val.insert(t.val.end(), s.val.begin(), s.val.end());
    t.test.insert(t.test.end(), s.test.begin(), s.test.end());
  }
  return t;
}

void SplitManifest::validate() const
{
  std::set<std::string> seen;
  for (const auto & [name, s] : subsets) {
    for (const auto * part : {&s.train, &s.val, &s.test}) {
      for (const auto & key : *part) {
        if (!seen.insert(key).second) {
          throw DataError("manifest lists frame " + key + " twice");
        }
      }
    }
  }
}

std::string format_manifest(const SplitManifest & manifest)
{
  std::ostringstream os;
  os << "# split manifest: subset <name> <train> <val> <test>, then one line per frame\n";
  for (const auto & [name, s] : manifest.subsets) {
    os << "subset " << name << ' ' << s.train.size() << ' ' << s.val.size() << ' ' << s.test.size() << '\n';
  }
  const SubsetSplit t = manifest.totals();
  os << "total " << t.train.size() << ' ' << t.val.size() << ' ' << t.test.size() << '\n';
  for (const auto & [name, s] : manifest.subsets) {
    const std::pair<const char *, const std::vector<std::string> *> parts[] = {
      {"train", &s.train}, {"val", &s.val}, {"test", &s.test}};
    for (const auto & [split, keys] : parts) {
      for (const auto & key : *keys) {
        os << split << ' ' << name << ' ' << key << '\n';
      }
    }
  }
  return os.str();
}

SplitManifest parse_manifest(std::string_view text)
{
  SplitManifest m;
  std::map<std::string, std::array<std::size_t, 3>> declared;
  std::optional<std::array<std::size_t, 3>> total;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') {
      continue;
    }
    const auto fail = [&](const std::string & why) {
      throw DataError("manifest line " + std::to_string(line_no) + ": " + why);
    };
    const std::string_view head = tokens[0];
    if (head == "subset" || head == "total") {
      const std::size_t base = head == "subset" ? 2 : 1;
      if (tokens.size() != base + 3) {
        fail("malformed count line");
      }
      std::array<std::size_t, 3> counts{};
      for (std::size_t k = 0; k < 3; ++k) {
        if (!parse_number(tokens[base + k], counts[k])) {
          fail("bad count");
        }
      }
      if (head == "subset") {
        declared[std::string(tokens[1])] = counts;
        m.subsets[std::string(tokens[1])];
      } else {
        total = counts;
      }
      continue;
    }
    if (tokens.size() != 3) {
      fail("expected '<split> <subset> <frame>'");
    }
    auto & s = m.subsets[std::string(tokens[1])];
    if (head == "train") {
      s.train.emplace_back(tokens[2]);
    } else if (head == "val") {
      s.val.emplace_back(tokens[2]);
    } else if (head == "test") {
      s.test.emplace_back(tokens[2]);
    } else {
      fail("unknown split '" + std::string(head) + "'");
    }
  }
  for (const auto & [name, s] : m.subsets) {
    const auto it = declared.find(name);
    if (it == declared.end() ||
        it->second != std::array<std::size_t, 3>{s.train.size(), s.val.size(), s.test.size()}) {
      throw DataError("manifest counts for subset '" + name + "' do not match its frame lists");
    }
  }
  const SubsetSplit t = m.totals();
  if (total && *total != std::array<std::size_t, 3>{t.train.size(), t.val.size(), t.test.size()}) {
    throw DataError("manifest totals do not match the subset counts");
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------- disk layout

void write_scenario_frames(const std::filesystem::path & root, const std::vector<FrameRecord> & frames)
{
  namespace fs = std::filesystem;
  std::map<std::string, std::string> index;
  for (const auto & f : frames) {
    const fs::path dir = root / "scenario" / f.scenario;
    fs::create_directories(dir / "frames");
    fs::create_directories(dir / "labels");
    const std::string stem = frame_file_stem(f.frame_id);
    if (!f.grid) {
      throw DataError("frame " + frame_key(f.scenario, f.frame_id) + " has no grid snapshot");
    }
    save_grid(dir / "frames" / (stem + ".evgr"), *f.grid);
    std::vector<LabelRecord> labels;
    for (const auto & b : f.boxes) {
      labels.push_back(LabelRecord{f.frame_id, b, std::nullopt});
    }
    write_labels(dir / "labels" / (stem + ".txt"), labels);
    char line[160];
    std::snprintf(
      line, sizeof(line), "%s %.6f %.6f %.6f %.6f %s\n", stem.c_str(), f.timestamp, f.ego.x, f.ego.y,
      rad2deg(f.ego.yaw), to_string(f.provenance));
    auto & text = index[f.scenario];
    if (text.empty()) {
      text = "# frame_id timestamp ego_x ego_y ego_yaw_deg provenance\n";
    }
    text += line;
  }
  for (const auto & [scenario, text] : index) {
    std::ofstream os(root / "scenario" / scenario / "index.txt", std::ios::binary);
    if (!os) {
      throw DataError("cannot write index for scenario " + scenario);
    }
    os << text;
  }
}

std::vector<DatasetFrame> list_dataset(const std::filesystem::path & root)
{
  namespace fs = std::filesystem;
  const fs::path base = root / "scenario";
  if (!fs::is_directory(base)) {
    throw DataError("not a dataset (missing " + base.string() + ")");
  }
  std::vector<DatasetFrame> out;
  std::vector<fs::path> scenarios;
  for (const auto & e : fs::directory_iterator(base)) {
    if (e.is_directory()) {
      scenarios.push_back(e.path());
    }
  }
  std::sort(scenarios.begin(), scenarios.end());
  for (const auto & dir : scenarios) {
    const fs::path frames = dir / "frames";
    if (!fs::is_directory(frames)) {
      continue;
    }
    std::vector<DatasetFrame> here;
    for (const auto & e : fs::directory_iterator(frames)) {
      if (e.path().extension() != ".evgr") {
        continue;
      }
      DatasetFrame f;
      f.scenario = dir.filename().string();
      const std::string stem = e.path().stem().string();
      if (!parse_number(std::string_view(stem), f.frame_id)) {
        throw DataError("unexpected frame file name " + e.path().string());
      }
      f.grid_path = e.path();
      f.label_path = dir / "labels" / (stem + ".txt");
      here.push_back(std::move(f));
    }
    std::sort(here.begin(), here.end(), [](const DatasetFrame & a, const DatasetFrame & b) {
      return a.frame_id < b.frame_id;
    });
    out.insert(out.end(), here.begin(), here.end());
  }
  return out;
}

}  // namespace evgrid
