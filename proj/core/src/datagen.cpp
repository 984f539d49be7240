#include "kcover/datagen.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kcover/errors.hpp"
#include "kcover/parallel.hpp"

namespace kcover {

using nlohmann::ordered_json;

namespace {

int draw_between(Rng& rng, int lo, int hi) {
  if (hi <= lo) return lo;
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

void fill_rect(BinaryMask& mask, int x0, int y0, int w, int h) {
  for (int y = y0; y < std::min(mask.height(), y0 + h); ++y)
    for (int x = x0; x < std::min(mask.width(), x0 + w); ++x) mask(x, y) = 1;
}

// Alternating street / block intervals along one axis, starting with a street.
std::vector<std::pair<int, int>> block_spans(int length, Rng& rng, const UrbanParams& p) {
  std::vector<std::pair<int, int>> spans;
  int pos = draw_between(rng, p.min_street, p.max_street);
  while (pos < length) {
    const int size = std::min(draw_between(rng, p.min_block, p.max_block), length - pos);
    spans.emplace_back(pos, size);
    pos += size + draw_between(rng, p.min_street, p.max_street);
  }
  return spans;
}

}  // namespace

BinaryMask urban_mask(int width, int height, Rng& rng, const UrbanParams& params) {
  if (width < 2 || height < 2) throw DomainError("mask must be at least 2x2");
  if (params.min_block < 1 || params.max_block < params.min_block || params.min_street < 1 ||
      params.max_street < params.min_street || params.min_building < 1)
    throw ConfigError("invalid urban generator parameters");

  BinaryMask mask(width, height, 0);
  const auto rows = block_spans(height, rng, params);
  const auto cols = block_spans(width, rng, params);
  for (const auto& [by, bh] : rows) {
    for (const auto& [bx, bw] : cols) {
      if (uniform_unit(rng) < params.empty_lot) continue;
      for (int b = 0; b < params.buildings_per_block; ++b) {
        const int w = draw_between(rng, std::min(params.min_building, bw), bw);
        const int h = draw_between(rng, std::min(params.min_building, bh), bh);
        const int x = bx + draw_between(rng, 0, bw - w);
        const int y = by + draw_between(rng, 0, bh - h);
        fill_rect(mask, x, y, w, h);
      }
    }
  }
  return mask;
}

HeightField flood_fill_heights(const BinaryMask& mask, Rng& rng, double h_min, double h_max,
                               double cell_size) {
  if (!(0.0 <= h_min && h_min < h_max && h_max <= 1.0))
    throw ConfigError("building heights need 0 <= h_min < h_max <= 1");
  Grid<double> heights(mask.width(), mask.height(), 0.0);
  Grid<std::uint8_t> seen(mask.width(), mask.height(), 0);
  std::vector<Cell> stack;
  for (int j = 0; j < mask.height(); ++j) {
    for (int i = 0; i < mask.width(); ++i) {
      if (!mask(i, j) || seen(i, j)) continue;
      double u = uniform_unit(rng);
      while (u == 0.0) u = uniform_unit(rng);
      const double level = h_min + (h_max - h_min) * u;
      stack.push_back({i, j});
      seen(i, j) = 1;
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        heights[c] = level;
        const Cell next[4] = {{c.i + 1, c.j}, {c.i - 1, c.j}, {c.i, c.j + 1}, {c.i, c.j - 1}};
        for (const Cell n : next) {
          if (mask.contains(n) && mask[n] && !seen[n]) {
            seen[n] = 1;
            stack.push_back(n);
          }
        }
      }
    }
  }
  return HeightField(std::move(heights), cell_size);
}

Crop random_crop(const BinaryMask& source, int size, Rng& rng) {
  if (size < 2) throw DomainError("crop size must be >= 2");
  if (source.width() < size || source.height() < size)
    throw DomainError("crop source is smaller than the requested window");
  Crop crop;
  crop.offset_x = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(source.width() - size + 1)));
  crop.offset_y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(source.height() - size + 1)));
  crop.mask = BinaryMask(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) crop.mask(x, y) = source(crop.offset_x + x, crop.offset_y + y);
  return crop;
}

// ---------------------------------------------------------------------------
// Samples and the on-disk container

std::vector<std::string> DatasetManifest::channel_names() const {
  std::vector<std::string> names{"obs"};
  for (int l = 1; l <= k; ++l) names.push_back("c" + std::to_string(l));
  names.push_back("gain");
  return names;
}

std::span<const float> Sample::layer(int l) const {
  if (l < 1 || l > k) throw DomainError("layer index out of range");
  const std::size_t cells = obs.size();
  return std::span<const float>(cumvis).subspan(static_cast<std::size_t>(l - 1) * cells, cells);
}

std::vector<float> Sample::flatten() const {
  std::vector<float> out;
  out.reserve(obs.size() + cumvis.size() + gain.size());
  out.insert(out.end(), obs.begin(), obs.end());
  out.insert(out.end(), cumvis.begin(), cumvis.end());
  out.insert(out.end(), gain.begin(), gain.end());
  return out;
}

Sample make_sample(const Environment& env, const CumulativeVisibility& before, const GainMap& gains,
                   SampleMeta meta) {
  Sample s;
  s.width = env.width();
  s.height = env.height();
  s.k = before.k();
  s.meta = std::move(meta);
  const double z_ceil = env.z_ceil();
  const std::size_t cells = env.terrain().values().size();
  s.obs.reserve(cells);
  for (double f : env.terrain().values().values())
    s.obs.push_back(static_cast<float>(std::clamp(f / z_ceil, 0.0, 1.0)));
  s.cumvis.reserve(cells * static_cast<std::size_t>(s.k));
  for (int l = 1; l <= s.k; ++l)
    for (double c : before.layer(l).values())
      s.cumvis.push_back(static_cast<float>(std::clamp(c / z_ceil, 0.0, 1.0)));
  const double peak = gains.max_valid().value_or(0.0);
  s.gain.assign(cells, 0.0f);
  if (peak > 0.0) {
    for (std::size_t n = 0; n < cells; ++n) {
      const Cell c = gains.values().cell(n);
      if (gains.valid(c)) s.gain[n] = static_cast<float>(std::clamp(gains[c] / peak, 0.0, 1.0));
    }
  }
  return s;
}

std::string sample_file_name(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "%08zu.bin", index);
  return name;
}

void write_sample_file(const std::filesystem::path& path, const Sample& sample) {
  std::string bytes;
  bytes.reserve((sample.obs.size() + sample.cumvis.size() + sample.gain.size()) * 4);
  const std::vector<float> values = sample.flatten();
  bytes.resize(values.size() * 4);
  for (std::size_t n = 0; n < values.size(); ++n) {
    const auto bits = std::bit_cast<std::uint32_t>(values[n]);
    for (int b = 0; b < 4; ++b) bytes[4 * n + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("cannot write " + path.string());
}

namespace {

std::vector<float> read_floats(const std::filesystem::path& path, std::size_t expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() != expected * 4)
    throw IoError(path.string() + ": expected " + std::to_string(expected * 4) + " bytes, found " +
                  std::to_string(bytes.size()));
  std::vector<float> out(expected);
  for (std::size_t n = 0; n < expected; ++n) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * n + b])) << (8 * b);
    out[n] = std::bit_cast<float>(bits);
  }
  return out;
}

ordered_json meta_to_json(const SampleMeta& m) {
  ordered_json j;
  j["map"] = m.map_id;
  j["step"] = m.step;
  j["epsilon"] = m.epsilon;
  j["seed"] = m.seed;
  j["chosen"] = {m.chosen.i, m.chosen.j};
  if (!m.origin.empty()) j["origin"] = m.origin;
  return j;
}

SampleMeta meta_from_json(const nlohmann::json& j) {
  SampleMeta m;
  m.map_id = j.at("map").get<int>();
  m.step = j.at("step").get<int>();
  m.epsilon = j.at("epsilon").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.chosen = {j.at("chosen").at(0).get<int>(), j.at("chosen").at(1).get<int>()};
  if (j.contains("origin")) m.origin = j.at("origin").get<std::string>();
  return m;
}

ordered_json run_to_json(const RunRecord& r) {
  ordered_json j;
  j["map"] = r.map_id;
  j["seed"] = r.seed;
  j["source"] = r.source;
  j["crop"] = {r.crop_x, r.crop_y};
  j["first_sensor"] = {r.first_sensor.i, r.first_sensor.j};
  j["sensors"] = r.sensors;
  j["status"] = r.status;
  j["first_sample"] = r.first_sample;
  j["length"] = r.length;
  j["complete"] = r.complete;
  return j;
}

RunRecord run_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.map_id = j.at("map").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.source = j.at("source").get<std::string>();
  r.crop_x = j.at("crop").at(0).get<int>();
  r.crop_y = j.at("crop").at(1).get<int>();
  r.first_sensor = {j.at("first_sensor").at(0).get<int>(), j.at("first_sensor").at(1).get<int>()};
  r.sensors = j.at("sensors").get<int>();
  r.status = j.at("status").get<std::string>();
  r.first_sample = j.at("first_sample").get<std::size_t>();
  r.length = j.at("length").get<std::size_t>();
  r.complete = j.at("complete").get<bool>();
  return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os << text;
  if (!os) throw IoError("cannot write " + path.string());
}

std::vector<double> distinct_epsilons(const std::vector<SampleMeta>& samples) {
  std::set<double> values;
  for (const auto& s : samples) values.insert(s.epsilon);
  return {values.begin(), values.end()};
}

// Removes what a failed generate/merge created, leaving pre-existing content.
class OutputGuard {
 public:
  explicit OutputGuard(std::filesystem::path out) : out_(std::move(out)) {
    namespace fs = std::filesystem;
    created_root_ = !fs::exists(out_);
    fs::create_directories(out_ / "samples");
    if (fs::exists(out_ / "manifest.json"))
      throw IoError(out_.string() + " already holds a dataset");
  }
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    std::filesystem::remove(out_ / "manifest.json", ec);
    std::filesystem::remove_all(out_ / "samples", ec);
    if (created_root_) std::filesystem::remove(out_, ec);
  }
  void commit() { committed_ = true; }

 private:
  std::filesystem::path out_;
  bool created_root_ = false;
  bool committed_ = false;
};

}  // namespace

std::string manifest_to_json(const DatasetManifest& m) {
  ordered_json j;
  j["format"] = "kcover-dataset";
  j["version"] = 1;
  j["N"] = m.count;
  j["grid"] = {m.width, m.height};
  j["k"] = m.k;
  if (m.epsilons.size() == 1)
    j["epsilon"] = m.epsilons.front();
  else
    j["epsilon"] = m.epsilons;
  j["seed"] = m.seed;
  j["sources"] = m.sources;
  j["dtype"] = "f32le";
  j["layout"] = "row-major";
  j["channels"] = m.channel_names();
  j["generator"] = m.generator.empty() ? ordered_json::object() : ordered_json::parse(m.generator);
  j["runs"] = ordered_json::array();
  for (const auto& r : m.runs) j["runs"].push_back(run_to_json(r));
  j["samples"] = ordered_json::array();
  for (const auto& s : m.samples) j["samples"].push_back(meta_to_json(s));
  return j.dump(1) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("dtype") != "f32le" || j.at("layout") != "row-major")
      throw IoError("unsupported dataset encoding");
    m.count = j.at("N").get<std::size_t>();
    m.width = j.at("grid").at(0).get<int>();
    m.height = j.at("grid").at(1).get<int>();
    m.k = j.at("k").get<int>();
    if (j.at("epsilon").is_array())
      m.epsilons = j.at("epsilon").get<std::vector<double>>();
    else
      m.epsilons = {j.at("epsilon").get<double>()};
    m.seed = j.at("seed").get<std::uint64_t>();
    m.sources = j.at("sources").get<std::vector<std::string>>();
    if (j.contains("generator")) m.generator = nlohmann::ordered_json(j.at("generator")).dump();
    for (const auto& r : j.at("runs")) m.runs.push_back(run_from_json(r));
    for (const auto& s : j.at("samples")) m.samples.push_back(meta_from_json(s));
    if (j.at("channels").get<std::vector<std::string>>() != m.channel_names())
      throw IoError("unexpected channel order in manifest");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed dataset manifest: ") + e.what());
  }
  if (m.samples.size() != m.count) throw IoError("manifest sample count does not match N");
  return m;
}

DatasetReader::DatasetReader(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::ifstream is(dir_ / "manifest.json");
  if (!is) throw IoError("no manifest.json in " + dir_.string());
  std::stringstream ss;
  ss << is.rdbuf();
  manifest_ = manifest_from_json(ss.str());
}

std::filesystem::path DatasetReader::sample_path(std::size_t index) const {
  return dir_ / "samples" / sample_file_name(index);
}

Sample DatasetReader::read(std::size_t index) const {
  if (index >= manifest_.count) throw DomainError("sample index out of range");
  const std::vector<float> values = read_floats(sample_path(index), manifest_.floats_per_sample());
  const std::size_t cells = static_cast<std::size_t>(manifest_.width) * manifest_.height;
  Sample s;
  s.width = manifest_.width;
  s.height = manifest_.height;
  s.k = manifest_.k;
  s.meta = manifest_.samples[index];
  s.obs.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(cells));
  s.cumvis.assign(values.begin() + static_cast<std::ptrdiff_t>(cells),
                  values.begin() + static_cast<std::ptrdiff_t>(cells * (1 + manifest_.k)));
  s.gain.assign(values.end() - static_cast<std::ptrdiff_t>(cells), values.end());
  return s;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

struct MapOutcome {
  bool usable = false;
  RunRecord run;
  std::vector<Sample> samples;
};

MapOutcome generate_map(std::span<const MaskSource> sources, const GenerateOptions& opts,
                        int map_id, int inner_jobs) {
  MapOutcome outcome;
  const std::uint64_t map_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(map_id));
  Rng rng(map_seed);
  const std::size_t src_index = uniform_index(rng, sources.size());
  const MaskSource& src = sources[src_index];
  Crop crop = random_crop(src.mask, opts.grid, rng);
  HeightField terrain = flood_fill_heights(crop.mask, rng, opts.h_min, opts.h_max);
  const Environment env(std::move(terrain), opts.env);
  try {
    (void)candidate_cells(env);
  } catch (const ConfigError&) {
    return outcome;  // all buildings; nothing to place
  }

  PlannerConfig cfg = opts.planner;
  cfg.first = FirstSensor::random();
  cfg.seed = derive_seed(map_seed, 1);
  cfg.jobs = inner_jobs;

  const PlacementResult result = run_placement(env, cfg, [&](const StepObservation& obs) {
    SampleMeta meta;
    meta.map_id = map_id;
    meta.step = obs.index;
    meta.epsilon = cfg.epsilon;
    meta.seed = cfg.seed;
    meta.chosen = obs.chosen;
    outcome.samples.push_back(make_sample(env, obs.before, obs.gains, meta));
  });

  outcome.usable = true;
  outcome.run.map_id = map_id;
  outcome.run.seed = map_seed;
  outcome.run.source = src.id;
  outcome.run.crop_x = crop.offset_x;
  outcome.run.crop_y = crop.offset_y;
  outcome.run.first_sensor = result.sensors[0].cell;
  outcome.run.sensors = static_cast<int>(result.sensors.size());
  outcome.run.status = to_string(result.status);
  outcome.run.length = outcome.samples.size();
  return outcome;
}

std::string generator_json(const GenerateOptions& opts) {
  ordered_json g;
  g["grid"] = opts.grid;
  g["k"] = opts.planner.k;
  g["delta"] = opts.planner.delta;
  g["epsilon"] = opts.planner.epsilon;
  g["p"] = opts.planner.p;
  g["gain"] = opts.planner.gain == GainKind::naive ? "naive" : "distance_weighted";
  g["field_method"] = opts.planner.field_method == FieldMethod::exact ? "exact" : "sweep";
  g["max_sensors"] = opts.planner.max_sensors;
  g["first_sensor"] = "random";
  g["h_min"] = opts.h_min;
  g["h_max"] = opts.h_max;
  g["z_ceil"] = opts.env.z_ceil;
  g["sensor_height"] = opts.env.sensor_height;
  g["ground_threshold"] = opts.env.ground_threshold;
  return g.dump();
}

}  // namespace

DatasetManifest generate_dataset(std::span<const MaskSource> sources, const GenerateOptions& opts,
                                 const std::filesystem::path& out) {
  if (opts.planner.k < 1) throw ConfigError("k must be >= 1");
  if (sources.empty()) throw ConfigError("dataset generation needs at least one mask source");
  if (opts.count == 0) throw ConfigError("sample count must be positive");
  PlannerConfig check = opts.planner;
  check.first = FirstSensor::random();
  check.validate();

  DatasetManifest manifest;
  manifest.width = opts.grid;
  manifest.height = opts.grid;
  manifest.k = opts.planner.k;
  manifest.seed = opts.seed;
  for (const auto& s : sources) manifest.sources.push_back(s.id);
  manifest.generator = generator_json(opts);

  OutputGuard guard(out);
  const int jobs = opts.jobs > 0 ? opts.jobs : default_jobs();
  const int batch = std::max(1, jobs);
  const int inner_jobs = batch > 1 ? 1 : jobs;

  int next_map = 0;
  int barren_streak = 0;
  while (manifest.count < opts.count) {
    std::vector<MapOutcome> outcomes(static_cast<std::size_t>(batch));
    const int base = next_map;
    parallel_for(outcomes.size(), jobs, [&](std::size_t b) {
      outcomes[b] = generate_map(sources, opts, base + static_cast<int>(b), inner_jobs);
    });
    next_map += batch;

    // Single writer, map order: output does not depend on scheduling.
    for (auto& outcome : outcomes) {
      if (manifest.count >= opts.count) break;
      if (!outcome.usable || outcome.samples.empty()) {
        if (++barren_streak > 1000) throw ConfigError("sources yield no usable maps");
        continue;
      }
      barren_streak = 0;
      RunRecord run = outcome.run;
      run.first_sample = manifest.count;
      const std::size_t room = opts.count - manifest.count;
      const std::size_t take = std::min(room, outcome.samples.size());
      run.complete = take == outcome.samples.size();
      run.length = take;
      for (std::size_t n = 0; n < take; ++n) {
        write_sample_file(out / "samples" / sample_file_name(manifest.count), outcome.samples[n]);
        manifest.samples.push_back(outcome.samples[n].meta);
        ++manifest.count;
      }
      manifest.runs.push_back(run);
    }
  }
  manifest.epsilons = distinct_epsilons(manifest.samples);
  write_text(out / "manifest.json", manifest_to_json(manifest));
  guard.commit();
  return manifest;
}

DatasetManifest merge_datasets(std::span<const MergePart> parts, const std::filesystem::path& out) {
  if (parts.empty()) throw ConfigError("merge needs at least one dataset");
  std::vector<DatasetReader> readers;
  for (const auto& p : parts) {
    readers.emplace_back(p.dir);
    const auto& m = readers.back().manifest();
    if (p.take > m.count)
      throw ConfigError("cannot take " + std::to_string(p.take) + " samples from " + p.dir.string() +
                        " which holds " + std::to_string(m.count));
    const auto& first = readers.front().manifest();
    if (m.width != first.width || m.height != first.height || m.k != first.k)
      throw ConfigError("merged datasets must share grid size and order");
  }

  DatasetManifest merged;
  merged.width = readers.front().manifest().width;
  merged.height = readers.front().manifest().height;
  merged.k = readers.front().manifest().k;
  merged.seed = readers.front().manifest().seed;
  ordered_json mix = ordered_json::array();

  OutputGuard guard(out);
  int map_offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const DatasetReader& reader = readers[p];
    const DatasetManifest& m = reader.manifest();
    const std::string origin = parts[p].dir.filename().empty()
                                   ? parts[p].dir.parent_path().filename().string()
                                   : parts[p].dir.filename().string();
    ordered_json part;
    part["dataset"] = parts[p].dir.string();
    part["take"] = parts[p].take;
    part["of"] = m.count;
    part["generator"] = m.generator.empty() ? ordered_json::object() : ordered_json::parse(m.generator);
    mix.push_back(part);
    for (const auto& s : m.sources) merged.sources.push_back(origin + ":" + s);

    int max_map = -1;
    for (const RunRecord& run : m.runs) {
      if (run.first_sample >= parts[p].take) break;
      RunRecord copy = run;
      copy.map_id += map_offset;
      copy.first_sample = merged.count + 0;
      const std::size_t take = std::min(run.length, parts[p].take - run.first_sample);
      copy.complete = run.complete && take == run.length;
      copy.length = take;
      for (std::size_t n = 0; n < take; ++n) {
        const std::size_t src = run.first_sample + n;
        std::filesystem::copy_file(reader.sample_path(src),
                                   out / "samples" / sample_file_name(merged.count),
                                   std::filesystem::copy_options::overwrite_existing);
        SampleMeta meta = m.samples[src];
        meta.map_id += map_offset;
        meta.origin = origin;
        merged.samples.push_back(meta);
        ++merged.count;
      }
      max_map = std::max(max_map, run.map_id);
      merged.runs.push_back(copy);
    }
    map_offset += max_map + 1;
  }
  merged.epsilons = distinct_epsilons(merged.samples);
  ordered_json generator;
  generator["merge"] = mix;
  merged.generator = generator.dump();
  write_text(out / "manifest.json", manifest_to_json(merged));
  guard.commit();
  return merged;
}

}  // namespace kcover
