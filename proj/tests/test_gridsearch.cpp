#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>

#include "soilspec/evaluation.hpp"
#include "soilspec/rng.hpp"

using namespace soilspec;
namespace fs = std::filesystem;

namespace {

struct Imbalanced {
  Eigen::MatrixXd X;
  std::vector<int> labels;
};

// Two separable classes with heavy imbalance; the minority sits far out on
// the first feature.
Imbalanced imbalanced_blobs(int majority, int minority, std::uint64_t seed) {
  Rng rng(seed);
  Imbalanced out;
  const int n = majority + minority;
  out.X.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    const int c = i < majority ? 0 : 1;
    out.X(i, 0) = (c == 0 ? 0.0 : 5.0) + 0.8 * rng.normal();
    out.X(i, 1) = rng.normal();
    out.labels.push_back(c);
  }
  return out;
}

std::vector<double> iota_values(int lo, int hi) {
  std::vector<double> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST_CASE("grid cardinalities match the published experiment sizes") {
  // 3 classes, 6 off-diagonal cells, values {1..7}: 7^6 = 117,649 points
  const GridSearchSpec g3 = GridSearchSpec::uniform(3, iota_values(1, 7));
  CHECK(g3.cell_values.size() == 6);
  CHECK(g3.n_points() == 117649ULL);

  // 2 classes, 2 cells, values {1..150}: 150^2 = 22,500 points
  const GridSearchSpec g2 = GridSearchSpec::uniform(2, iota_values(1, 150));
  CHECK(g2.cell_values.size() == 2);
  CHECK(g2.n_points() == 22500ULL);

  // enumeration is lexicographic in the cost vector
  CHECK(g2.point(0) == std::vector<double>{1.0, 1.0});
  CHECK(g2.point(1) == std::vector<double>{1.0, 2.0});
  CHECK(g2.point(150) == std::vector<double>{2.0, 1.0});
  CHECK(g2.point(22499) == std::vector<double>{150.0, 150.0});

  CHECK_THROWS_AS(GridSearchSpec::uniform(2, {}), std::invalid_argument);
}

TEST_CASE("cost vector to matrix layout is row-major over off-diagonal cells") {
  const CostMatrix cm = cost_matrix_from_vector(3, {1, 2, 3, 4, 5, 6});
  CHECK(cm.costs(0, 1) == 1.0);
  CHECK(cm.costs(0, 2) == 2.0);
  CHECK(cm.costs(1, 0) == 3.0);
  CHECK(cm.costs(1, 2) == 4.0);
  CHECK(cm.costs(2, 0) == 5.0);
  CHECK(cm.costs(2, 1) == 6.0);
  CHECK(cm.costs.diagonal().isZero());
  CHECK_THROWS_AS(cost_matrix_from_vector(3, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("singleton grid reproduces the uniform-cost CV MCC exactly") {
  const Imbalanced data = imbalanced_blobs(90, 10, 3);
  ClassifierConfig config;
  config.family = ClassifierFamily::Tree;
  config.tree_max_splits = 4;

  const auto cv = kfold_cv_classification(config, CostMatrix::uniform(2), data.X, data.labels, 2,
                                          5, 21);

  GridSearchSpec grid;
  grid.cell_values = {{1.0}, {1.0}};
  GridSearchOptions opts;
  opts.folds = 5;
  opts.seed = 21;
  const auto res = cost_grid_search(config, data.X, data.labels, 2, grid, opts);
  CHECK(res.best_mcc == cv.metrics.mcc);
  CHECK(res.per_point.size() == 1);
  CHECK(res.per_point[0].confusion.counts == cv.aggregate.counts);
}

TEST_CASE("grid search dominance: best is at least the uniform point") {
  const Imbalanced data = imbalanced_blobs(85, 15, 7);
  ClassifierConfig config;
  config.family = ClassifierFamily::KernelNaiveBayes;

  const GridSearchSpec grid = GridSearchSpec::uniform(2, {1.0, 2.0, 4.0});
  GridSearchOptions opts;
  opts.folds = 5;
  opts.seed = 9;
  const auto res = cost_grid_search(config, data.X, data.labels, 2, grid, opts);
  REQUIRE(res.per_point.size() == 9);

  double uniform_mcc = 0.0;
  bool found = false;
  for (const auto& p : res.per_point) {
    if (p.cost_vector == std::vector<double>{1.0, 1.0}) {
      uniform_mcc = p.mcc;
      found = true;
    }
  }
  REQUIRE(found);
  CHECK(res.best_mcc >= uniform_mcc);
}

TEST_CASE("grid search is deterministic and job-count independent") {
  const Imbalanced data = imbalanced_blobs(60, 12, 11);
  ClassifierConfig config;
  config.family = ClassifierFamily::Tree;
  config.tree_max_splits = 4;
  const GridSearchSpec grid = GridSearchSpec::uniform(2, {1.0, 3.0, 5.0});

  GridSearchOptions opts1;
  opts1.folds = 4;
  opts1.seed = 13;
  opts1.jobs = 1;
  GridSearchOptions opts4 = opts1;
  opts4.jobs = 4;

  const auto r1 = cost_grid_search(config, data.X, data.labels, 2, grid, opts1);
  const auto r4 = cost_grid_search(config, data.X, data.labels, 2, grid, opts4);
  CHECK(r1.best_mcc == r4.best_mcc);
  CHECK(r1.best_index == r4.best_index);
  REQUIRE(r1.per_point.size() == r4.per_point.size());
  for (std::size_t i = 0; i < r1.per_point.size(); ++i) {
    CHECK(r1.per_point[i].mcc == r4.per_point[i].mcc);
    CHECK(r1.per_point[i].confusion.counts == r4.per_point[i].confusion.counts);
  }
}

TEST_CASE("ties resolve to the lexicographically smallest cost vector") {
  // a dataset whose classifier output never changes across the grid: every
  // point has identical MCC, so the first point must win
  Eigen::MatrixXd X(8, 1);
  X << -4, -4.1, -3.9, -4.2, 4.0, 4.1, 3.9, 4.2;
  const std::vector<int> labels = {0, 0, 0, 0, 1, 1, 1, 1};
  ClassifierConfig config;
  config.family = ClassifierFamily::Knn;
  config.knn_k = 1;
  const GridSearchSpec grid = GridSearchSpec::uniform(2, {1.0, 2.0});
  GridSearchOptions opts;
  opts.folds = 4;
  opts.seed = 5;
  const auto res = cost_grid_search(config, X, labels, 2, grid, opts);
  CHECK(res.per_point[res.best_index].cost_vector == std::vector<double>{1.0, 1.0});
}

TEST_CASE("checkpointing resumes without recomputing finished points") {
  const Imbalanced data = imbalanced_blobs(40, 10, 17);
  ClassifierConfig config;
  config.family = ClassifierFamily::Tree;
  config.tree_max_splits = 4;
  const GridSearchSpec grid = GridSearchSpec::uniform(2, {1.0, 2.0, 3.0});

  const auto dir = fs::temp_directory_path() / "soilspec_ckpt_test";
  fs::create_directories(dir);
  const std::string ckpt = (dir / "checkpoint.jsonl").string();
  fs::remove(ckpt);

  GridSearchOptions opts;
  opts.folds = 5;
  opts.seed = 23;
  opts.checkpoint_path = ckpt;
  opts.checkpoint_interval = 4;

  const auto full = cost_grid_search(config, data.X, data.labels, 2, grid, opts);
  CHECK(full.points_evaluated == 9);
  CHECK(full.points_resumed == 0);

  // truncate the checkpoint to the first chunk and resume
  {
    std::ifstream in(ckpt);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 9);
    std::ofstream out(ckpt, std::ios::trunc);
    for (int i = 0; i < 4; ++i) out << lines[i] << '\n';
  }
  const auto resumed = cost_grid_search(config, data.X, data.labels, 2, grid, opts);
  CHECK(resumed.points_resumed == 4);
  CHECK(resumed.points_evaluated == 5);
  CHECK(resumed.best_mcc == full.best_mcc);
  CHECK(resumed.best_index == full.best_index);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(resumed.per_point[i].mcc == full.per_point[i].mcc);
  }
  fs::remove_all(dir);
}
