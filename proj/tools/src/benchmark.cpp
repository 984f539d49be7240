#include "kcover_cli/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include <kcover/errors.hpp>
#include <kcover/image_io.hpp>
#include <kcover/parallel.hpp>
#include <kcover/provider_process.hpp>

namespace kcover::cli {

std::vector<int> BenchmarkReport::counts(std::size_t strategy) const {
  std::vector<int> out;
  for (const auto& m : maps)
    if (m.runs[strategy].status != "error") out.push_back(m.runs[strategy].sensors);
  return out;
}

double BenchmarkReport::mean(std::size_t strategy) const {
  const auto c = counts(strategy);
  if (c.empty()) return 0.0;
  return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

double sign_test_p(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0) return 1.0;
  // Sum in log space; n stays small, but lgamma keeps it safe for any n.
  double p = 0.0;
  for (int i = wins; i <= n; ++i)
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
  return std::min(1.0, p);
}

namespace {

StrategyRun attempt(const std::function<PlacementResult()>& run) {
  StrategyRun out;
  try {
    const PlacementResult r = run();
    out.sensors = static_cast<int>(r.sensors.size());
    out.status = to_string(r.status);
  } catch (const std::exception& e) {
    out.status = "error";
    out.error = e.what();
  }
  return out;
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkOptions& opts) {
  if (opts.maps < 1) throw ConfigError("benchmark needs at least one map");
  opts.planner.validate();

  BenchmarkReport report;
  report.strategies = {"greedy", "random"};
  if (opts.surrogate) report.strategies.push_back("surrogate");
  report.maps.resize(static_cast<std::size_t>(opts.maps));

  const int jobs = opts.jobs > 0 ? opts.jobs : default_jobs();
  const int inner_jobs = opts.maps > 1 && jobs > 1 ? 1 : jobs;

  parallel_for(report.maps.size(), jobs, [&](std::size_t m) {
    MapRuns& out = report.maps[m];
    out.map_id = static_cast<int>(m);
    out.seed = derive_seed(opts.seed, m);
    Rng rng(out.seed);
    BinaryMask mask = opts.sources.empty()
                          ? urban_mask(opts.grid, opts.grid, rng)
                          : random_crop(opts.sources[uniform_index(rng, opts.sources.size())].mask, opts.grid, rng).mask;
    const Environment env(flood_fill_heights(mask, rng), opts.env);
    out.free_volume = free_volume(env);

    std::vector<Cell> candidates;
    try {
      candidates = candidate_cells(env);
    } catch (const ConfigError& e) {
      out.runs.assign(report.strategies.size(), StrategyRun{0, "error", e.what()});
      return;
    }
    out.first = candidates[uniform_index(rng, candidates.size())];

    PlannerConfig cfg = opts.planner;
    cfg.first = FirstSensor::at(out.first);
    cfg.jobs = inner_jobs;

    cfg.seed = derive_seed(out.seed, 1);
    out.runs.push_back(attempt([&] { return run_placement(env, cfg); }));
    cfg.seed = derive_seed(out.seed, 2);
    out.runs.push_back(attempt([&] { return random_placement(env, cfg); }));
    if (opts.surrogate) {
      cfg.seed = derive_seed(out.seed, 1);
      out.runs.push_back(attempt([&] {
        ProcessGainProvider provider(*opts.surrogate, env, cfg.k);
        return run_placement(env, cfg, provider);
      }));
    }
  });

  SignTest& t = report.greedy_vs_random;
  for (const auto& m : report.maps) {
    const auto& g = m.runs[0];
    const auto& r = m.runs[1];
    if (g.status == "error" || r.status == "error") continue;
    if (g.sensors < r.sensors) ++t.wins;
    else if (g.sensors > r.sensors) ++t.losses;
    else ++t.ties;
  }
  t.p_value = sign_test_p(t.wins, t.losses);
  return report;
}

std::string benchmark_to_json(const BenchmarkReport& report, const std::string& config_json) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["config"] = ordered_json::parse(config_json);
  ordered_json strategies = ordered_json::object();
  for (std::size_t s = 0; s < report.strategies.size(); ++s) {
    ordered_json e;
    e["counts"] = report.counts(s);
    e["mean"] = report.mean(s);
    int failures = 0;
    for (const auto& m : report.maps) failures += m.runs[s].status == "error";
    e["failures"] = failures;
    strategies[report.strategies[s]] = e;
  }
  j["strategies"] = strategies;
  ordered_json sign;
  sign["wins"] = report.greedy_vs_random.wins;
  sign["losses"] = report.greedy_vs_random.losses;
  sign["ties"] = report.greedy_vs_random.ties;
  sign["p_value"] = report.greedy_vs_random.p_value;
  j["sign_test_greedy_vs_random"] = sign;
  j["maps"] = ordered_json::array();
  for (const auto& m : report.maps) {
    ordered_json e;
    e["map"] = m.map_id;
    e["seed"] = m.seed;
    e["first"] = {m.first.i, m.first.j};
    e["free_volume"] = m.free_volume;
    for (std::size_t s = 0; s < report.strategies.size(); ++s) {
      ordered_json r;
      r["sensors"] = m.runs[s].sensors;
      r["status"] = m.runs[s].status;
      if (!m.runs[s].error.empty()) r["error"] = m.runs[s].error;
      e[report.strategies[s]] = r;
    }
    j["maps"].push_back(e);
  }
  return j.dump(1) + "\n";
}

void write_histogram(const std::filesystem::path& path, const BenchmarkReport& report) {
  constexpr int width = 640;
  constexpr int height = 360;
  constexpr int margin = 30;
  static const Rgb palette[] = {{31, 119, 180}, {214, 39, 40}, {44, 160, 44}};

  int lo = std::numeric_limits<int>::max();
  int hi = 0;
  for (std::size_t s = 0; s < report.strategies.size(); ++s)
    for (int c : report.counts(s)) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  if (lo > hi) lo = hi = 0;

  // at most 40 bins of equal integer width
  const int span = hi - lo + 1;
  const int bin = std::max(1, (span + 39) / 40);
  const int bins = (span + bin - 1) / bin;
  std::vector<std::vector<int>> hist(report.strategies.size(), std::vector<int>(static_cast<std::size_t>(bins), 0));
  int tallest = 1;
  for (std::size_t s = 0; s < report.strategies.size(); ++s)
    for (int c : report.counts(s)) tallest = std::max(tallest, ++hist[s][static_cast<std::size_t>((c - lo) / bin)]);

  Image img(width, height, Rgb{255, 255, 255});
  const int plot_w = width - 2 * margin;
  const int plot_h = height - 2 * margin;
  const int slot = std::max(1, plot_w / bins);
  const int bar = std::max(1, slot / static_cast<int>(report.strategies.size() + 1));
  for (int b = 0; b < bins; ++b) {
    for (std::size_t s = 0; s < report.strategies.size(); ++s) {
      const int bar_h = hist[s][static_cast<std::size_t>(b)] * plot_h / tallest;
      const int x0 = margin + b * slot + static_cast<int>(s) * bar;
      for (int y = height - margin - bar_h; y < height - margin; ++y)
        for (int x = x0; x < x0 + bar; ++x)
          if (img.contains({x, y})) img(x, y) = palette[s % 3];
    }
  }
  for (int x = margin; x < width - margin; ++x) img(x, height - margin) = Rgb{0, 0, 0};
  for (int y = margin; y <= height - margin; ++y) img(margin - 1, y) = Rgb{0, 0, 0};
  write_rgb_png(path, img);
}

}  // namespace kcover::cli
