#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace soilspec {

// Fold id per sample index, balanced sizes (first n % folds folds get one
// extra). Deterministic in seed.
std::vector<int> fold_assignment(int n, int folds, std::uint64_t seed);

// Stratified variant: within each class, samples are dealt round-robin with a
// running cursor so fold sizes stay balanced. Falls back to plain folds (with
// a warning) when any present class has fewer samples than folds.
std::vector<int> stratified_fold_assignment(const std::vector<int>& labels,
                                            int n_classes, int folds,
                                            std::uint64_t seed,
                                            std::vector<std::string>* warnings = nullptr);

}  // namespace soilspec
