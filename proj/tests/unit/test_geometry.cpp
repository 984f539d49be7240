#include <doctest.h>

#include <random>

#include <kcover/errors.hpp>
#include <kcover/geometry_analysis.hpp>

using namespace kcover;

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

std::vector<double> direct_svd(const Eigen::MatrixXd& rows) {
  const Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

}  // namespace

TEST_CASE("final_stage_count follows the boundary rules") {
  CHECK(final_stage_count(25) == 10);
  CHECK(final_stage_count(20) == 10);
  CHECK(final_stage_count(19) == 10);
  CHECK(final_stage_count(8) == 4);
  CHECK(final_stage_count(7) == 4);
  CHECK(final_stage_count(1) == 1);
}

TEST_CASE("symmetric_eigenvalues") {
  Eigen::MatrixXd a(3, 3);
  a << 2, 1, 0, 1, 2, 0, 0, 0, 5;
  const auto e = symmetric_eigenvalues(a);
  CHECK(e[0] == doctest::Approx(5.0));
  CHECK(e[1] == doctest::Approx(3.0));
  CHECK(e[2] == doctest::Approx(1.0));
  CHECK(symmetric_eigenvalues(Eigen::MatrixXd::Zero(4, 4)) == std::vector<double>(4, 0.0));
  CHECK_THROWS_AS(symmetric_eigenvalues(Eigen::MatrixXd::Zero(2, 3)), DomainError);
}

TEST_CASE("singular_values: identical rows are all zero") {
  Eigen::MatrixXd m(5, 7);
  for (int i = 0; i < 5; ++i) m.row(i) = Eigen::RowVectorXd::LinSpaced(7, 0.0, 3.0);
  for (auto route : {SvdRoute::gram, SvdRoute::direct}) {
    const Spectrum s = singular_values(m, 20, route);
    CHECK(s.values.size() == 20);
    CHECK(s.padded);
    for (double v : s.values) CHECK(v == doctest::Approx(0.0));
  }
}

TEST_CASE("singular_values: two opposite rows") {
  Eigen::MatrixXd m(2, 6);
  m.row(0) << 1, -2, 3, 0.5, 0, 4;
  m.row(1) = -m.row(0);
  const auto oracle = direct_svd(m);
  const Spectrum s = singular_values(m, 20);
  CHECK(s.computed == 1);
  CHECK(s.values[0] == doctest::Approx(m.row(0).norm() * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s.values[0] == doctest::Approx(oracle[0]).epsilon(1e-12));
  CHECK(oracle[1] == doctest::Approx(0.0));
  CHECK(s.values[1] == 0.0);
}

TEST_CASE("Gram route matches a dense SVD") {
  for (auto [rows, cols] : {std::pair{50, 100}, std::pair{30, 8}, std::pair{80, 400}}) {
    const Eigen::MatrixXd m = gaussian(rows, cols, static_cast<std::uint64_t>(rows * cols));
    const auto oracle = direct_svd(m);
    const Spectrum gram = singular_values(m, 20, SvdRoute::gram);
    const Spectrum direct = singular_values(m, 20, SvdRoute::direct);
    for (std::size_t n = 0; n < gram.computed; ++n) {
      CHECK(std::abs(gram.values[n] - oracle[n]) <= 1e-8 * oracle[n]);
      CHECK(std::abs(direct.values[n] - oracle[n]) <= 1e-8 * oracle[n]);
    }
    for (std::size_t n = 1; n < gram.values.size(); ++n) CHECK(gram.values[n] <= gram.values[n - 1]);
  }
}

TEST_CASE("centering invariance") {
  Eigen::MatrixXd m = gaussian(40, 60, 3);
  const Spectrum a = singular_values(m, 20);
  const Eigen::RowVectorXd shift = Eigen::RowVectorXd::LinSpaced(60, -50.0, 80.0);
  m.rowwise() += shift;
  const Spectrum b = singular_values(m, 20);
  for (std::size_t n = 0; n < 20; ++n) CHECK(std::abs(a.values[n] - b.values[n]) <= 1e-9 * a.values[0]);
}

TEST_CASE("singular_values: degenerate input") {
  CHECK_THROWS_AS(singular_values(Eigen::MatrixXd::Ones(1, 5)), DomainError);
}

TEST_CASE("effective rank summaries") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 3);
  m(0, 0) = 1;
  m(1, 0) = -1;
  m(2, 1) = 1;
  m(3, 1) = -1;
  const Spectrum s = singular_values(m, 3);
  CHECK(s.values[0] == doctest::Approx(s.values[1]));
  CHECK(s.participation_ratio == doctest::Approx(2.0));
  CHECK(s.energy95_rank == 2);
}

TEST_CASE("compare_spectra and reports") {
  StageSlice a;
  a.rows = gaussian(12, 30, 1);
  StageSlice b = a;
  const auto cmp = compare_spectra({{"a", a}, {"b", b}}, 8);
  CHECK(cmp.spectra[0].values == cmp.spectra[1].values);
  CHECK_THROWS_AS(compare_spectra({{"a", a}}), DomainError);
  const std::string json = comparison_to_json(cmp);
  CHECK(json.find("\"participation_ratio\"") != std::string::npos);
  CHECK(json.find("\"tail_over_lead\"") != std::string::npos);
  const auto png = std::filesystem::temp_directory_path() / "kcover_spectra.png";
  write_spectrum_plot(png, cmp, true);
  CHECK(std::filesystem::file_size(png) > 100);
  std::filesystem::remove(png);
}
