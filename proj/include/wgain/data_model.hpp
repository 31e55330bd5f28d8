#pragma once

#include "wgain/types.hpp"

#include <cstdint>

namespace wgain {

// Shuffle-then-chunk fold assignment: a seeded permutation of 0..n-1 split
// into L contiguous chunks, remainders going to the first folds.  Identical
// inputs produce byte-identical assignments.
FoldPlan make_fold_plan(Eigen::Index n, int fold_count, std::uint64_t seed);

// Checks every Observation/Dataset invariant: finite values, d in {0,1},
// both treatment arms nonempty.  Throws data_error naming the offending row.
void validate_dataset(const Dataset& ds);

}  // namespace wgain
