#include "kcover/coverage.hpp"

#include <algorithm>
#include <utility>

#include "kcover/errors.hpp"

namespace kcover {
namespace {

void check_shape(const Environment& env, const CumulativeVisibility& cumvis) {
  if (cumvis.width() != env.width() || cumvis.height() != env.height())
    throw DomainError("cumulative visibility does not match the environment grid");
}

}  // namespace

CumulativeVisibility::CumulativeVisibility(int width, int height, int k, double z_ceil)
    : sentinel_(z_ceil) {
  if (k < 1) throw ConfigError("target order k must be >= 1");
  layers_.assign(static_cast<std::size_t>(k), Grid<double>(width, height, z_ceil));
}

const Grid<double>& CumulativeVisibility::layer(int l) const {
  if (l < 1 || l > k()) throw DomainError("layer index out of range");
  return layers_[static_cast<std::size_t>(l - 1)];
}

void CumulativeVisibility::insert(const VisibilityField& field) {
  if (!field.values.same_shape(layers_.front()))
    throw DomainError("visibility field does not match cumulative visibility grid");
  const std::size_t cells = field.values.size();
  for (std::size_t n = 0; n < cells; ++n) {
    double v = std::min(field.values.values()[n], sentinel_);
    for (auto& layer : layers_) {
      double& slot = layer.values()[n];
      if (v < slot) std::swap(v, slot);
    }
  }
  ++sensors_;
}

CumulativeVisibility update_cumvis(CumulativeVisibility cumvis, const VisibilityField& field) {
  cumvis.insert(field);
  return cumvis;
}

double psi_k(const Environment& env, const CumulativeVisibility& cumvis) {
  check_shape(env, cumvis);
  const auto f = env.terrain().values().values();
  double total = 0.0;
  for (int l = 1; l <= cumvis.k(); ++l) {
    const auto level = cumvis.layer(l).values();
    for (std::size_t n = 0; n < f.size(); ++n)
      total += column_free_above(env.z_ceil(), level[n], f[n]);
  }
  return total * env.cell_area();
}

double k_covered_volume(const Environment& env, const CumulativeVisibility& cumvis) {
  check_shape(env, cumvis);
  const auto f = env.terrain().values().values();
  const auto level = cumvis.layer(cumvis.k()).values();
  double total = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) total += column_free_above(env.z_ceil(), level[n], f[n]);
  return total * env.cell_area();
}

}  // namespace kcover
