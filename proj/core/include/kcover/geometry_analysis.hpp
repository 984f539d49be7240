#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kcover/datagen.hpp"

namespace kcover {

enum class RowSource {
  /// Flattened normalized gain map.
  gain,
  /// Concatenated input channels (obs, c1..ck).
  inputs,
};

/// Final-stage samples stacked as matrix rows.
struct StageSlice {
  Eigen::MatrixXd rows;
  std::string dataset;
  std::string rule;
  RowSource source = RowSource::gain;
};

/// Number of trailing samples kept from a run of `length` samples: the last
/// 10 when the run has at least 20, otherwise the last ceil(length / 2).
std::size_t final_stage_count(std::size_t length);

/// Applies final_stage_count to every complete run and stacks the selected
/// samples. Truncated runs are skipped unless the dataset has no complete
/// run. Throws DomainError when nothing is selected.
StageSlice extract_final_stage(const DatasetReader& dataset, RowSource source = RowSource::gain);

enum class SvdRoute {
  /// Eigenvalues of the smaller Gram matrix (cyclic Jacobi).
  gram,
  /// Singular values of the centered matrix itself (Eigen BDCSVD).
  direct,
};

struct Spectrum {
  /// Exactly `count` values, nonincreasing; zero-padded past the rank bound.
  std::vector<double> values;
  /// How many leading values are computed rather than padding.
  std::size_t computed = 0;
  bool padded = false;
  /// Effective-rank summaries over every computed singular value, not only
  /// the first `count`.
  double participation_ratio = 0.0;
  std::size_t energy95_rank = 0;
};

/// Eigenvalues of a symmetric matrix, descending, by cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(Eigen::MatrixXd a);

/// Leading singular values of the column-centered matrix.
Spectrum singular_values(const Eigen::MatrixXd& rows, std::size_t count = 20,
                         SvdRoute route = SvdRoute::gram);

inline Spectrum singular_values(const StageSlice& slice, std::size_t count = 20,
                                SvdRoute route = SvdRoute::gram) {
  return singular_values(slice.rows, count, route);
}

struct NamedSlice {
  std::string name;
  StageSlice slice;
};

struct SpectrumComparison {
  std::vector<std::string> names;
  std::vector<Spectrum> spectra;
  std::vector<std::size_t> sample_counts;
  std::size_t count = 20;
  RowSource source = RowSource::gain;
};

/// Spectra of at least two slices, aligned by index. Diagnostic only.
SpectrumComparison compare_spectra(const std::vector<NamedSlice>& slices, std::size_t count = 20);

std::string comparison_to_json(const SpectrumComparison& comparison);

/// Line plot of value against index, one colored series per dataset.
void write_spectrum_plot(const std::filesystem::path& path, const SpectrumComparison& comparison,
                         bool log_y = false);

}  // namespace kcover
