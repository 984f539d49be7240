#include "kcover_cli/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <kcover/datagen.hpp>
#include <kcover/errors.hpp>
#include <kcover/geometry_analysis.hpp>
#include <kcover/parallel.hpp>
#include <kcover/provider_process.hpp>
#include <kcover/render.hpp>

#include "kcover_cli/benchmark.hpp"
#include "kcover_cli/maps.hpp"

namespace kcover::cli {

namespace {

using nlohmann::ordered_json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw IoError("cannot write " + path.string());
}

ordered_json read_json(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  try {
    return ordered_json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

Cell parse_cell(const std::string& text) {
  const auto comma = text.find(',');
  Cell c;
  if (comma == std::string::npos) throw ConfigError("expected a cell as i,j: " + text);
  const std::string a = text.substr(0, comma);
  const std::string b = text.substr(comma + 1);
  const auto r1 = std::from_chars(a.data(), a.data() + a.size(), c.i);
  const auto r2 = std::from_chars(b.data(), b.data() + b.size(), c.j);
  if (r1.ec != std::errc() || r1.ptr != a.data() + a.size() || r2.ec != std::errc() ||
      r2.ptr != b.data() + b.size())
    throw ConfigError("expected a cell as i,j: " + text);
  return c;
}

// Options shared by every subcommand that builds an environment.
struct EnvFlags {
  double z_ceil = 1.0;
  double sensor_height = 0.02;
  double ground_threshold = 0.0;

  void add(CLI::App* app) {
    app->add_option("--z-ceil", z_ceil, "Domain ceiling altitude")->capture_default_str();
    app->add_option("--sensor-height", sensor_height, "Mounting offset above terrain")->capture_default_str();
    app->add_option("--ground-threshold", ground_threshold, "Highest terrain that still hosts sensors")
        ->capture_default_str();
  }
  EnvironmentParams params() const { return {z_ceil, sensor_height, ground_threshold}; }
  void to_json(ordered_json& j) const {
    j["z_ceil"] = z_ceil;
    j["sensor_height"] = sensor_height;
    j["ground_threshold"] = ground_threshold;
  }
};

struct PlannerFlags {
  int k = 2;
  double delta = 0.95;
  double epsilon = 0.0;
  double p = 2.0;
  std::uint64_t seed = 0;
  std::string gain = "distance";
  std::string field = "sweep";
  std::string tie_break = "uniform";
  int max_sensors = 0;

  void add(CLI::App* app) {
    app->add_option("--k", k, "Target order of visibility")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--delta", delta, "Termination fraction of k * free volume (assumed default)")
        ->capture_default_str();
    app->add_option("--epsilon", epsilon, "Selection slack: pool is gain >= (1 - epsilon) * max")
        ->capture_default_str();
    app->add_option("--p", p, "Norm exponent of the distance factor")->capture_default_str();
    app->add_option("--seed", seed, "RNG seed")->capture_default_str();
    app->add_option("--gain", gain, "distance | naive")->capture_default_str()->check(CLI::IsMember({"distance", "naive"}));
    app->add_option("--field", field, "Visibility field method: sweep | exact")
        ->capture_default_str()
        ->check(CLI::IsMember({"sweep", "exact"}));
    app->add_option("--tie-break", tie_break, "uniform | lowest")
        ->capture_default_str()
        ->check(CLI::IsMember({"uniform", "lowest"}));
    app->add_option("--max-sensors", max_sensors, "Step cap; 0 means 4 * k * max(W, H)")->capture_default_str();
  }

  PlannerConfig config() const {
    PlannerConfig c;
    c.k = k;
    c.delta = delta;
    c.epsilon = epsilon;
    c.p = p;
    c.seed = seed;
    c.gain = gain == "naive" ? GainKind::naive : GainKind::distance_weighted;
    c.field_method = field == "exact" ? FieldMethod::exact : FieldMethod::sweep;
    c.tie_break = tie_break == "lowest" ? TieBreak::lowest_index : TieBreak::uniform;
    c.max_sensors = max_sensors;
    return c;
  }

  void to_json(ordered_json& j) const {
    j["k"] = k;
    j["delta"] = delta;
    j["epsilon"] = epsilon;
    j["p"] = p;
    j["seed"] = seed;
    j["gain"] = gain;
    j["field"] = field;
    j["tie_break"] = tie_break;
    j["max_sensors"] = max_sensors;
  }
};

// ---------------------------------------------------------------- place

struct PlaceFlags {
  std::string map;
  std::string first = "0,0";
  std::string provider = "exact";
  std::string strategy = "greedy";
  std::string out = "trace.json";
  std::string render;
  double render_altitude = 0.5;
  int jobs = 0;
  EnvFlags env;
  PlannerFlags planner;
};

ordered_json trace_json(const PlaceFlags& f, const Environment& env, const PlacementResult& r) {
  ordered_json j;
  ordered_json config;
  config["command"] = "place";
  config["map"] = f.map;
  config["strategy"] = f.strategy;
  config["first"] = f.first;
  config["provider"] = f.provider;
  f.planner.to_json(config);
  f.env.to_json(config);
  j["config"] = config;
  j["grid"] = {env.width(), env.height()};
  j["free_volume"] = r.free_volume;
  j["target"] = r.target;
  j["status"] = to_string(r.status);
  j["sensor_count"] = r.sensors.size();
  const int k = f.planner.k;
  j["steps"] = ordered_json::array();
  for (const StepRecord& s : r.steps) {
    ordered_json e;
    e["index"] = s.index;
    e["cell"] = {s.cell.i, s.cell.j};
    e["position"] = {s.position.x, s.position.y, s.position.z};
    e["psi_k"] = s.psi_k;
    e["psi_fraction"] = r.free_volume > 0.0 ? s.psi_k / (k * r.free_volume) : 0.0;
    e["k_covered"] = s.k_covered;
    e["k_covered_fraction"] = r.free_volume > 0.0 ? s.k_covered / r.free_volume : 0.0;
    e["max_gain"] = s.max_gain ? ordered_json(*s.max_gain) : ordered_json(nullptr);
    e["pool_size"] = s.pool_size;
    j["steps"].push_back(e);
  }
  return j;
}

std::filesystem::path timing_path(const std::filesystem::path& trace) {
  std::filesystem::path p = trace;
  p.replace_extension(".timing.json");
  return p;
}

int cmd_place(const PlaceFlags& f, std::ostream& out) {
  const Environment env = load_map(f.map, f.env.params());
  PlannerConfig cfg = f.planner.config();
  cfg.jobs = f.jobs;
  cfg.first = f.first == "random" ? FirstSensor::random() : FirstSensor::at(parse_cell(f.first));
  cfg.validate();

  const PlacementResult result = [&] {
    if (f.strategy == "random") return random_placement(env, cfg);
    if (f.provider == "exact") return run_placement(env, cfg);
    if (f.provider.rfind("surrogate:", 0) == 0) {
      ProcessGainProvider provider(f.provider.substr(10), env, cfg.k);
      return run_placement(env, cfg, provider);
    }
    throw ConfigError("unknown provider: " + f.provider);
  }();

  write_text(f.out, trace_json(f, env, result).dump(1) + "\n");
  ordered_json timing;
  timing["jobs"] = f.jobs > 0 ? f.jobs : default_jobs();
  timing["wall_seconds"] = ordered_json::array();
  double total = 0.0;
  for (const auto& s : result.steps) {
    timing["wall_seconds"].push_back(s.wall_seconds);
    total += s.wall_seconds;
  }
  timing["total_seconds"] = total;
  write_text(timing_path(f.out), timing.dump(1) + "\n");

  if (!f.render.empty()) {
    const Rendering img = render_placement(env, result.sensors, result.cumvis, f.render_altitude);
    write_rgb_png(f.render, img.image);
  }

  out << to_string(result.status) << ": " << result.sensors.size() << " sensors, psi_k "
      << result.steps.back().psi_k << " / target " << result.target << "\n";
  switch (result.status) {
    case PlacementStatus::reached: return kOk;
    case PlacementStatus::stalled: return kStalled;
    case PlacementStatus::budget_exhausted: return kBudgetExhausted;
  }
  return kOk;
}

// ---------------------------------------------------------------- gendata

std::vector<MaskSource> load_sources(const std::vector<std::string>& specs, int grid, std::uint64_t seed) {
  std::vector<MaskSource> out;
  if (specs.empty()) {
    Rng rng(derive_seed(seed, 0x5eed));
    out.push_back({"urban:" + std::to_string(4 * grid), urban_mask(4 * grid, 4 * grid, rng)});
    return out;
  }
  for (const auto& s : specs) {
    if (s.rfind("urban:", 0) == 0) {
      // urban:SIZE:SEED
      const auto second = s.find(':', 6);
      if (second == std::string::npos) throw ConfigError("expected urban:SIZE:SEED, got " + s);
      const int size = std::stoi(s.substr(6, second - 6));
      Rng rng(std::stoull(s.substr(second + 1)));
      out.push_back({s, urban_mask(size, size, rng)});
    } else {
      out.push_back({s, load_mask_png(s)});
    }
  }
  return out;
}

struct GendataFlags {
  std::size_t n = 0;
  int grid = 128;
  std::vector<std::string> sources;
  std::string out;
  double h_min = 0.1;
  double h_max = 0.9;
  int jobs = 0;
  EnvFlags env;
  PlannerFlags planner;
  // merge submode
  std::vector<std::string> parts;
  std::vector<std::size_t> takes;
};

int cmd_gendata(const GendataFlags& f, std::ostream& out) {
  GenerateOptions opts;
  opts.count = f.n;
  opts.grid = f.grid;
  opts.planner = f.planner.config();
  opts.seed = f.planner.seed;
  opts.h_min = f.h_min;
  opts.h_max = f.h_max;
  opts.env = f.env.params();
  opts.jobs = f.jobs;
  const auto sources = load_sources(f.sources, f.grid, f.planner.seed);
  const DatasetManifest m = generate_dataset(sources, opts, f.out);
  out << "wrote " << m.count << " samples from " << m.runs.size() << " maps to " << f.out << "\n";
  return kOk;
}

int cmd_merge(const GendataFlags& f, std::ostream& out) {
  if (f.parts.size() != f.takes.size()) throw ConfigError("give one --take per --in");
  std::vector<MergePart> parts;
  for (std::size_t n = 0; n < f.parts.size(); ++n) parts.push_back({f.parts[n], f.takes[n]});
  const DatasetManifest m = merge_datasets(parts, f.out);
  out << "merged " << m.count << " samples into " << f.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------- benchmark

struct BenchFlags {
  int maps = 20;
  int grid = 64;
  std::string surrogate;
  std::vector<std::string> sources;
  std::string out = "benchmark.json";
  std::string plot;
  int jobs = 0;
  EnvFlags env;
  PlannerFlags planner;
};

int cmd_benchmark(const BenchFlags& f, std::ostream& out) {
  BenchmarkOptions opts;
  opts.maps = f.maps;
  opts.grid = f.grid;
  opts.planner = f.planner.config();
  opts.seed = f.planner.seed;
  if (!f.surrogate.empty()) opts.surrogate = f.surrogate;
  opts.env = f.env.params();
  opts.jobs = f.jobs;
  if (!f.sources.empty()) opts.sources = load_sources(f.sources, f.grid, f.planner.seed);

  const BenchmarkReport report = run_benchmark(opts);
  ordered_json config;
  config["command"] = "benchmark";
  config["maps"] = f.maps;
  config["grid"] = f.grid;
  config["surrogate"] = f.surrogate;
  config["sources"] = f.sources;
  f.planner.to_json(config);
  f.env.to_json(config);
  write_text(f.out, benchmark_to_json(report, config.dump()));
  if (!f.plot.empty()) write_histogram(f.plot, report);

  for (std::size_t s = 0; s < report.strategies.size(); ++s)
    out << report.strategies[s] << ": mean " << report.mean(s) << " sensors over " << report.counts(s).size()
        << " maps\n";
  out << "sign test greedy < random: " << report.greedy_vs_random.wins << " wins, "
      << report.greedy_vs_random.losses << " losses, p = " << report.greedy_vs_random.p_value << "\n";
  return kOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeFlags {
  std::vector<std::string> datasets;
  std::string rows = "gain";
  std::size_t count = 20;
  std::string out = "spectra.json";
  std::string plot;
  bool log_y = false;
};

int cmd_analyze(const AnalyzeFlags& f, std::ostream& out) {
  const RowSource source = f.rows == "inputs" ? RowSource::inputs : RowSource::gain;
  std::vector<NamedSlice> slices;
  for (const auto& d : f.datasets) {
    const auto eq = d.find('=');
    const std::string name = eq == std::string::npos ? std::filesystem::path(d).filename().string() : d.substr(0, eq);
    const std::string dir = eq == std::string::npos ? d : d.substr(eq + 1);
    slices.push_back({name, extract_final_stage(DatasetReader(dir), source)});
  }

  SpectrumComparison cmp;
  if (slices.size() >= 2) {
    cmp = compare_spectra(slices, f.count);
  } else {
    cmp.count = f.count;
    cmp.source = source;
    cmp.names.push_back(slices[0].name);
    cmp.spectra.push_back(singular_values(slices[0].slice, f.count));
    cmp.sample_counts.push_back(static_cast<std::size_t>(slices[0].slice.rows.rows()));
  }
  ordered_json j = ordered_json::parse(comparison_to_json(cmp));
  j["rule"] = slices[0].slice.rule;
  write_text(f.out, j.dump(1) + "\n");
  if (!f.plot.empty()) write_spectrum_plot(f.plot, cmp, f.log_y);
  for (std::size_t d = 0; d < cmp.names.size(); ++d)
    out << cmp.names[d] << ": " << cmp.sample_counts[d] << " rows, participation ratio "
        << cmp.spectra[d].participation_ratio << ", 95% energy rank " << cmp.spectra[d].energy95_rank << "\n";
  return kOk;
}

// ---------------------------------------------------------------- render

struct RenderFlags {
  std::string trace;
  std::string map;
  std::vector<std::string> sensors;
  int k = 2;
  std::string field = "sweep";
  std::string axis = "horizontal";
  double altitude = 0.5;
  int index = 0;
  int samples = 64;
  int scale = 8;
  std::string colormap = "discrete";
  bool no_sensors = false;
  bool contour = false;
  std::string out = "slice.png";
  EnvFlags env;
};

int cmd_render(RenderFlags f, std::ostream& out) {
  std::vector<Cell> cells;
  if (!f.trace.empty()) {
    const ordered_json t = read_json(f.trace);
    const auto& c = t.at("config");
    if (f.map.empty()) f.map = c.at("map").get<std::string>();
    f.k = c.at("k").get<int>();
    f.field = c.at("field").get<std::string>();
    f.env.z_ceil = c.at("z_ceil").get<double>();
    f.env.sensor_height = c.at("sensor_height").get<double>();
    f.env.ground_threshold = c.at("ground_threshold").get<double>();
    for (const auto& s : t.at("steps")) cells.push_back({s.at("cell")[0].get<int>(), s.at("cell")[1].get<int>()});
  }
  for (const auto& s : f.sensors) cells.push_back(parse_cell(s));
  if (f.map.empty()) throw ConfigError("render needs --trace or --map");

  const Environment env = load_map(f.map, f.env.params());
  const FieldMethod method = f.field == "exact" ? FieldMethod::exact : FieldMethod::sweep;
  SensorSet placed;
  CumulativeVisibility cumvis(env, f.k);
  for (Cell c : cells) {
    placed.add(env, c);
    cumvis.insert(visibility_field(env, env.mount_point(c), method));
  }

  SliceSpec spec;
  spec.axis = f.axis == "row" ? SliceAxis::row : f.axis == "column" ? SliceAxis::column : SliceAxis::horizontal;
  spec.altitude = f.altitude;
  spec.index = f.index;
  spec.altitude_samples = f.samples;
  spec.scale = f.scale;
  spec.colormap = f.colormap;
  spec.sensors = !f.no_sensors;
  spec.terrain_contour = f.contour;
  const Rendering img = render_order_slice(env, cumvis, spec, &placed);
  if (std::filesystem::path(f.out).has_parent_path())
    std::filesystem::create_directories(std::filesystem::path(f.out).parent_path());
  write_rgb_png(f.out, img.image);
  out << "wrote " << f.out << " (" << img.image.width() << "x" << img.image.height() << ", " << img.markers
      << " markers)\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-coverage sensor placement on heightfield environments", "kcover"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  PlaceFlags place;
  auto* p = app.add_subcommand("place", "Run one placement and write a trace");
  p->add_option("--map", place.map, "Map spec (see README)")->required();
  p->add_option("--first", place.first, "First sensor: i,j or random")->capture_default_str();
  p->add_option("--provider", place.provider, "exact | surrogate:COMMAND")->capture_default_str();
  p->add_option("--strategy", place.strategy, "greedy | random")
      ->capture_default_str()
      ->check(CLI::IsMember({"greedy", "random"}));
  p->add_option("--out", place.out, "Trace JSON path")->capture_default_str();
  p->add_option("--render", place.render, "Optional top-down PNG of the final placement");
  p->add_option("--render-altitude", place.render_altitude, "Altitude of the rendered slice")->capture_default_str();
  p->add_option("--jobs", place.jobs, "Worker threads (0: KCOVER_JOBS or all cores)")->capture_default_str();
  place.env.add(p);
  place.planner.add(p);

  GendataFlags gen;
  auto* g = app.add_subcommand("gendata", "Generate or merge training datasets");
  g->add_option("--n", gen.n, "Sample count");
  g->add_option("--grid", gen.grid, "Map side length in cells")->capture_default_str();
  g->add_option("--sources", gen.sources, "Footprint mask PNGs or urban:SIZE:SEED (default: one procedural)");
  g->add_option("--h-min", gen.h_min)->capture_default_str();
  g->add_option("--h-max", gen.h_max)->capture_default_str();
  g->add_option("--jobs", gen.jobs)->capture_default_str();
  g->add_option("--out", gen.out, "Output dataset directory");
  gen.env.add(g);
  gen.planner.add(g);  // --seed lands in planner.seed and doubles as the master seed
  auto* merge = g->add_subcommand("merge", "Concatenate prefixes of existing datasets");
  merge->add_option("--in", gen.parts, "Dataset directory (repeat)")->required();
  merge->add_option("--take", gen.takes, "Samples taken from the matching --in (repeat)")->required();
  merge->add_option("--out", gen.out, "Output dataset directory")->required();

  BenchFlags bench;
  auto* b = app.add_subcommand("benchmark", "Compare greedy, random and surrogate sensor counts");
  b->add_option("--maps", bench.maps)->capture_default_str();
  b->add_option("--grid", bench.grid)->capture_default_str();
  b->add_option("--surrogate", bench.surrogate, "Gain provider command for the surrogate strategy");
  b->add_option("--sources", bench.sources, "Footprint mask PNGs to crop (default: procedural maps)");
  b->add_option("--out", bench.out)->capture_default_str();
  b->add_option("--plot", bench.plot, "Histogram PNG");
  b->add_option("--jobs", bench.jobs)->capture_default_str();
  bench.env.add(b);
  bench.planner.add(b);

  AnalyzeFlags an;
  auto* a = app.add_subcommand("analyze", "Final-stage PCA spectra of one or more datasets");
  a->add_option("--dataset", an.datasets, "NAME=DIR or DIR (repeat)")->required();
  a->add_option("--rows", an.rows, "gain | inputs")->capture_default_str()->check(CLI::IsMember({"gain", "inputs"}));
  a->add_option("--count", an.count)->capture_default_str();
  a->add_option("--out", an.out)->capture_default_str();
  a->add_option("--plot", an.plot, "Spectrum PNG");
  a->add_flag("--log-y", an.log_y);

  RenderFlags rf;
  auto* r = app.add_subcommand("render", "Render an order-of-visibility slice");
  r->add_option("--trace", rf.trace, "Trace written by place");
  r->add_option("--map", rf.map, "Map spec (overrides the trace's)");
  r->add_option("--sensor", rf.sensors, "Extra sensor cell i,j (repeat)");
  r->add_option("--k", rf.k)->capture_default_str();
  r->add_option("--field", rf.field)->capture_default_str()->check(CLI::IsMember({"sweep", "exact"}));
  r->add_option("--axis", rf.axis, "horizontal | row | column")
      ->capture_default_str()
      ->check(CLI::IsMember({"horizontal", "row", "column"}));
  r->add_option("--altitude", rf.altitude)->capture_default_str();
  r->add_option("--index", rf.index, "Row or column of a vertical slice")->capture_default_str();
  r->add_option("--samples", rf.samples, "Altitude samples of a vertical slice")->capture_default_str();
  r->add_option("--scale", rf.scale, "Pixels per cell")->capture_default_str();
  r->add_option("--colormap", rf.colormap, "discrete | gray")->capture_default_str();
  r->add_flag("--no-sensors", rf.no_sensors);
  r->add_flag("--contour", rf.contour, "Shade building cells");
  r->add_option("--out", rf.out)->capture_default_str();
  rf.env.add(r);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageOrIo;
  }

  try {
    if (p->parsed()) return cmd_place(place, out);
    if (merge->parsed()) return cmd_merge(gen, out);
    if (g->parsed()) {
      if (gen.n == 0 || gen.out.empty()) throw ConfigError("gendata needs --n and --out");
      return cmd_gendata(gen, out);
    }
    if (b->parsed()) return cmd_benchmark(bench, out);
    if (a->parsed()) return cmd_analyze(an, out);
    if (r->parsed()) return cmd_render(rf, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageOrIo;
  }
  return kUsageOrIo;
}

}  // namespace kcover::cli
