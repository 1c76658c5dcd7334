#include "soilspec/folds.hpp"

#include <stdexcept>

#include "soilspec/rng.hpp"

namespace soilspec {

std::vector<int> fold_assignment(int n, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("need at least 2 folds");
  if (folds > n) throw std::invalid_argument("more folds than samples");
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  std::vector<int> fold_of(n);
  for (int i = 0; i < n; ++i) fold_of[idx[i]] = i % folds;
  return fold_of;
}

std::vector<int> stratified_fold_assignment(const std::vector<int>& labels,
                                            int n_classes, int folds,
                                            std::uint64_t seed,
                                            std::vector<std::string>* warnings) {
  const int n = static_cast<int>(labels.size());
  if (folds < 2) throw std::invalid_argument("need at least 2 folds");
  if (folds > n) throw std::invalid_argument("more folds than samples");

  std::vector<std::vector<int>> by_class(n_classes);
  for (int i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) {
      throw std::invalid_argument("label out of range");
    }
    by_class[labels[i]].push_back(i);
  }

  for (const auto& members : by_class) {
    if (!members.empty() && static_cast<int>(members.size()) < folds) {
      if (warnings) {
        warnings->push_back(
            "a class has fewer samples than folds; falling back to plain random folds");
      }
      return fold_assignment(n, folds, seed);
    }
  }

  Rng rng(seed);
  std::vector<int> fold_of(n);
  int cursor = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (int idx : members) {
      fold_of[idx] = cursor % folds;
      ++cursor;
    }
  }
  return fold_of;
}

}  // namespace soilspec
