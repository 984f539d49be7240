#include "kcover/geometry_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <json.hpp>

#include "kcover/errors.hpp"
#include "kcover/image_io.hpp"

namespace kcover {

std::size_t final_stage_count(std::size_t length) {
  if (length >= 20) return 10;
  return (length + 1) / 2;
}

StageSlice extract_final_stage(const DatasetReader& dataset, RowSource source) {
  const DatasetManifest& m = dataset.manifest();
  const bool any_complete =
      std::any_of(m.runs.begin(), m.runs.end(), [](const RunRecord& r) { return r.complete; });

  std::vector<std::size_t> picked;
  for (const RunRecord& run : m.runs) {
    if (any_complete && !run.complete) continue;
    const std::size_t keep = final_stage_count(run.length);
    for (std::size_t n = run.length - keep; n < run.length; ++n) picked.push_back(run.first_sample + n);
  }
  if (picked.empty()) throw DomainError("final-stage selection is empty");

  const std::size_t cells = static_cast<std::size_t>(m.width) * static_cast<std::size_t>(m.height);
  const std::size_t row_length = source == RowSource::gain ? cells : cells * static_cast<std::size_t>(1 + m.k);
  StageSlice slice;
  slice.dataset = dataset.dir().string();
  slice.rule = "last 10 samples of runs with >= 20 samples, else last ceil(L/2)";
  slice.source = source;
  slice.rows.resize(static_cast<Eigen::Index>(picked.size()), static_cast<Eigen::Index>(row_length));
  for (std::size_t r = 0; r < picked.size(); ++r) {
    const Sample s = dataset.read(picked[r]);
    std::vector<float> row;
    if (source == RowSource::gain) {
      row = s.gain;
    } else {
      row = s.obs;
      row.insert(row.end(), s.cumvis.begin(), s.cumvis.end());
    }
    for (std::size_t c = 0; c < row_length; ++c)
      slice.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return slice;
}

std::vector<double> symmetric_eigenvalues(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DomainError("matrix must be square");
  const double scale = a.norm();
  if (scale > 0.0) {
    for (int sweep = 0; sweep < 100; ++sweep) {
      double off = 0.0;
      for (Eigen::Index p = 0; p < n; ++p)
        for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
      if (std::sqrt(off) <= 1e-15 * scale) break;

      for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (std::abs(apq) <= 1e-300) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          // A <- J^T A J with J the rotation in the (p, q) plane.
          for (Eigen::Index r = 0; r < n; ++r) {
            const double arp = a(r, p);
            const double arq = a(r, q);
            a(r, p) = c * arp - s * arq;
            a(r, q) = s * arp + c * arq;
          }
          for (Eigen::Index r = 0; r < n; ++r) {
            const double apr = a(p, r);
            const double aqr = a(q, r);
            a(p, r) = c * apr - s * aqr;
            a(q, r) = s * apr + c * aqr;
          }
          a(p, q) = 0.0;
          a(q, p) = 0.0;
        }
      }
    }
  }
  std::vector<double> eig(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

Spectrum singular_values(const Eigen::MatrixXd& rows, std::size_t count, SvdRoute route) {
  if (rows.rows() < 2) throw DomainError("singular values need at least two rows");
  const Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();

  std::vector<double> all;
  if (route == SvdRoute::gram) {
    const Eigen::MatrixXd gram = centered.rows() <= centered.cols()
                                     ? Eigen::MatrixXd(centered * centered.transpose())
                                     : Eigen::MatrixXd(centered.transpose() * centered);
    for (double lambda : symmetric_eigenvalues(gram)) all.push_back(std::sqrt(std::max(lambda, 0.0)));
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered);
    const auto& sv = svd.singularValues();
    all.assign(sv.data(), sv.data() + sv.size());
  }
  std::sort(all.begin(), all.end(), std::greater<>());

  // Centering removes one degree of freedom.
  const std::size_t rank_bound = std::min<std::size_t>(static_cast<std::size_t>(rows.rows()) - 1,
                                                       static_cast<std::size_t>(rows.cols()));
  if (all.size() > rank_bound) all.resize(rank_bound);

  Spectrum out;
  out.computed = std::min(count, all.size());
  out.values.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(out.computed));
  out.padded = out.computed < count;
  out.values.resize(count, 0.0);

  double energy = 0.0;
  double energy_sq = 0.0;
  for (double s : all) {
    energy += s * s;
    energy_sq += s * s * s * s;
  }
  out.participation_ratio = energy_sq > 0.0 ? energy * energy / energy_sq : 0.0;
  double running = 0.0;
  out.energy95_rank = 0;
  if (energy > 0.0) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      running += all[i] * all[i];
      if (running >= 0.95 * energy) {
        out.energy95_rank = i + 1;
        break;
      }
    }
  }
  return out;
}

SpectrumComparison compare_spectra(const std::vector<NamedSlice>& slices, std::size_t count) {
  if (slices.size() < 2) throw DomainError("comparison needs at least two datasets");
  SpectrumComparison out;
  out.count = count;
  out.source = slices.front().slice.source;
  for (const auto& s : slices) {
    out.names.push_back(s.name);
    out.spectra.push_back(singular_values(s.slice, count));
    out.sample_counts.push_back(static_cast<std::size_t>(s.slice.rows.rows()));
  }
  return out;
}

std::string comparison_to_json(const SpectrumComparison& c) {
  nlohmann::ordered_json j;
  j["count"] = c.count;
  j["rows"] = c.source == RowSource::gain ? "gain" : "inputs";
  j["datasets"] = nlohmann::ordered_json::array();
  for (std::size_t d = 0; d < c.names.size(); ++d) {
    nlohmann::ordered_json e;
    e["name"] = c.names[d];
    e["samples"] = c.sample_counts[d];
    e["singular_values"] = c.spectra[d].values;
    e["computed"] = c.spectra[d].computed;
    e["padded"] = c.spectra[d].padded;
    e["participation_ratio"] = c.spectra[d].participation_ratio;
    e["energy95_rank"] = c.spectra[d].energy95_rank;
    j["datasets"].push_back(e);
  }
  // Tail comparison: mean of the second half of each spectrum relative to its
  // leading value, a rough measure of how spread out the data is.
  nlohmann::ordered_json tail = nlohmann::ordered_json::object();
  for (std::size_t d = 0; d < c.names.size(); ++d) {
    const auto& v = c.spectra[d].values;
    const double lead = v.empty() ? 0.0 : v.front();
    double sum = 0.0;
    const std::size_t half = v.size() / 2;
    for (std::size_t i = half; i < v.size(); ++i) sum += v[i];
    const double mean = v.size() > half ? sum / static_cast<double>(v.size() - half) : 0.0;
    tail[c.names[d]] = lead > 0.0 ? mean / lead : 0.0;
  }
  j["tail_over_lead"] = tail;
  return j.dump(1) + "\n";
}

namespace {

void plot_point(Image& img, int x, int y, Rgb color, int radius = 0) {
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (img.contains({x + dx, y + dy})) img(x + dx, y + dy) = color;
}

void plot_line(Image& img, int x0, int y0, int x1, int y1, Rgb color) {
  const int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
  for (int s = 0; s <= steps; ++s) {
    const double t = steps == 0 ? 0.0 : static_cast<double>(s) / steps;
    plot_point(img, static_cast<int>(std::lround(x0 + t * (x1 - x0))),
               static_cast<int>(std::lround(y0 + t * (y1 - y0))), color);
  }
}

}  // namespace

void write_spectrum_plot(const std::filesystem::path& path, const SpectrumComparison& c, bool log_y) {
  constexpr int width = 640;
  constexpr int height = 400;
  constexpr int margin = 40;
  static const Rgb palette[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44},
                                {214, 39, 40},  {148, 103, 189}, {140, 86, 75}};
  Image img(width, height, Rgb{255, 255, 255});

  double top = 0.0;
  double bottom = std::numeric_limits<double>::infinity();
  for (const auto& s : c.spectra) {
    for (std::size_t i = 0; i < s.computed; ++i) {
      top = std::max(top, s.values[i]);
      if (s.values[i] > 0.0) bottom = std::min(bottom, s.values[i]);
    }
  }
  if (top <= 0.0) top = 1.0;
  if (!std::isfinite(bottom)) bottom = top * 1e-6;
  auto to_y = [&](double v) {
    double frac;
    if (log_y) {
      const double lo = std::log10(bottom);
      const double hi = std::log10(top);
      frac = hi > lo ? (std::log10(std::max(v, bottom)) - lo) / (hi - lo) : 1.0;
    } else {
      frac = v / top;
    }
    return static_cast<int>(std::lround(height - margin - frac * (height - 2 * margin)));
  };
  auto to_x = [&](std::size_t i) {
    const double span = c.count > 1 ? static_cast<double>(c.count - 1) : 1.0;
    return static_cast<int>(std::lround(margin + static_cast<double>(i) / span * (width - 2 * margin)));
  };

  const Rgb axis{0, 0, 0};
  plot_line(img, margin, height - margin, width - margin, height - margin, axis);
  plot_line(img, margin, margin, margin, height - margin, axis);
  for (std::size_t i = 0; i < c.count; ++i) plot_line(img, to_x(i), height - margin, to_x(i), height - margin + 4, axis);

  for (std::size_t d = 0; d < c.spectra.size(); ++d) {
    const Rgb color = palette[d % std::size(palette)];
    const auto& s = c.spectra[d];
    for (std::size_t i = 0; i < s.computed; ++i) {
      plot_point(img, to_x(i), to_y(s.values[i]), color, 2);
      if (i + 1 < s.computed)
        plot_line(img, to_x(i), to_y(s.values[i]), to_x(i + 1), to_y(s.values[i + 1]), color);
    }
    // legend swatch
    const int ly = margin / 2 + static_cast<int>(d) * 8;
    plot_line(img, width - margin - 30, ly, width - margin, ly, color);
  }
  write_rgb_png(path, img);
}

}  // namespace kcover
