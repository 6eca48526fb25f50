#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "csdesign/errors.hpp"
#include "csdesign/io.hpp"
#include "test_util.hpp"

using csd::RngStream;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("csd_io_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("format9 keeps nine significant digits and round-trips") {
  CHECK(csd::format9(20.0) == "20");
  CHECK(csd::format9(0.1) == "0.1");
  CHECK(csd::format9(1.0 / 3.0) == "0.333333333");
  for (double v : {1.2345678949e-7, -3.0, 240.0, 12345.6789}) {
    const double parsed = csd::parse_double(csd::format9(v));
    CHECK(csd::format9(parsed) == csd::format9(v));
  }
  CHECK_THROWS_AS(csd::parse_double("banana"), csd::IoError);
}

TEST_CASE("prior JSON round trip preserves every entry") {
  RngStream rng(3);
  std::vector<csd::MixtureComponent> comps = {
      {0.25, testutil::random_pd(4, rng)}, {0.75, testutil::random_pd(4, rng)}};
  const csd::MixturePrior prior(4, comps);
  const csd::MixturePrior back = csd::prior_from_json(csd::prior_to_json(prior));
  REQUIRE(back.count() == 2);
  CHECK(back.components()[0].weight == 0.25);
  for (int k = 0; k < 2; ++k) {
    CHECK((back.components()[k].cov.entries() - comps[k].cov.entries())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(csd::prior_from_json(nlohmann::json{{"dim", 3}}),
                  csd::InvalidInputError);
}

TEST_CASE("problem JSON accepts matrices or priors") {
  RngStream rng(5);
  const csd::DesignProblem problem{testutil::random_pd(3, rng),
                                   testutil::random_pd(3, rng), 2, 1.5, 25,
                                   1e-9};
  const csd::DesignProblem back =
      csd::problem_from_json(csd::problem_to_json(problem));
  CHECK(back.m == 2);
  CHECK(back.alphaSq == 1.5);
  CHECK(back.iterations == 25);
  CHECK(back.ridge == 1e-9);
  CHECK((back.sigmaX.entries() - problem.sigmaX.entries()).norm() == 0.0);

  // prior variant: sigma becomes the weighted average
  nlohmann::json doc = csd::problem_to_json(problem);
  doc.erase("sigmaX");
  doc["priorX"] = csd::prior_to_json(
      csd::MixturePrior(3, {{1.0, problem.sigmaX}}));
  const csd::DesignProblem fromPrior = csd::problem_from_json(doc);
  CHECK((fromPrior.sigmaX.entries() - problem.sigmaX.entries())
            .cwiseAbs()
            .maxCoeff() < 1e-15);

  doc.erase("priorX");
  CHECK_THROWS_AS(csd::problem_from_json(doc), csd::InvalidInputError);
}

TEST_CASE("binary matrix format round-trips bit for bit") {
  const auto dir = temp_dir("bin");
  RngStream rng(7);
  const Eigen::MatrixXd m = testutil::random_gaussian(5, 9, rng);
  csd::write_matrix_binary(dir / "m.mat", m);
  const Eigen::MatrixXd back = csd::read_matrix_binary(dir / "m.mat");
  REQUIRE(back.rows() == 5);
  REQUIRE(back.cols() == 9);
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("binary reader rejects garbage") {
  const auto dir = temp_dir("bad");
  std::ofstream(dir / "junk.mat") << "this is not a matrix";
  CHECK_THROWS_AS(csd::read_matrix_binary(dir / "junk.mat"), csd::IoError);
  CHECK_THROWS_AS(csd::read_matrix_binary(dir / "missing.mat"), csd::IoError);
}

TEST_CASE("csv matrix export uses the 9-digit format") {
  const auto dir = temp_dir("csv");
  Eigen::MatrixXd m(1, 2);
  m << 0.5, 1.0 / 3.0;
  csd::write_matrix_csv(dir / "m.csv", m);
  std::ifstream in(dir / "m.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "0.5,0.333333333");
}
