#include "kcover_cli/maps.hpp"

#include <charconv>
#include <vector>

#include <kcover/datagen.hpp>
#include <kcover/errors.hpp>

namespace kcover::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

template <class T>
T parse_number(const std::string& text, const std::string& spec) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad number '" + text + "' in map spec " + spec);
  return value;
}

std::pair<int, int> parse_size(const std::string& text, const std::string& spec) {
  const auto x = text.find('x');
  if (x == std::string::npos) {
    const int m = parse_number<int>(text, spec);
    return {m, m};
  }
  return {parse_number<int>(text.substr(0, x), spec), parse_number<int>(text.substr(x + 1), spec)};
}

}  // namespace

Environment load_map(const std::string& spec, const EnvironmentParams& params) {
  const auto parts = split(spec, ':');
  const std::string& kind = parts.front();

  if (kind == "flat" && parts.size() == 2) {
    const auto [w, h] = parse_size(parts[1], spec);
    return Environment(flat_heightfield(w, h), params);
  }
  if (kind == "const" && parts.size() == 3) {
    const auto [w, h] = parse_size(parts[1], spec);
    const double level = parse_number<double>(parts[2], spec);
    return Environment(HeightField(Grid<double>(w, h, level)), params);
  }
  if (kind == "urban" && parts.size() == 3) {
    const auto [w, h] = parse_size(parts[1], spec);
    Rng rng(parse_number<std::uint64_t>(parts[2], spec));
    const BinaryMask mask = urban_mask(w, h, rng);
    return Environment(flood_fill_heights(mask, rng), params);
  }
  if (kind == "mask" && (parts.size() == 2 || parts.size() == 3)) {
    Rng rng(parts.size() == 3 ? parse_number<std::uint64_t>(parts[2], spec) : 0);
    return Environment(flood_fill_heights(load_mask_png(parts[1]), rng), params);
  }
  if (kind == "dataset" && parts.size() == 3) {
    const DatasetReader reader(parts[1]);
    const Sample s = reader.read(parse_number<std::size_t>(parts[2], spec));
    Grid<double> heights(s.width, s.height, 0.0);
    for (std::size_t n = 0; n < s.obs.size(); ++n)
      heights[heights.cell(n)] = static_cast<double>(s.obs[n]) * params.z_ceil;
    return Environment(HeightField(std::move(heights)), params);
  }
  if (parts.size() == 1) return Environment(load_heightmap_png(spec, params.z_ceil), params);
  throw ConfigError("unrecognized map spec: " + spec);
}

}  // namespace kcover::cli
