#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "core/levelsets.hpp"

namespace rivlab {

/// Monte Carlo estimate of the mask's volume fraction inside the periodic
/// ball B(x0, r): uniform samples in the ball, each resolved to the voxel
/// whose cell contains it. Independent of the voxel-counting route used by
/// sparseness_ratio.
double mc_sparseness_oracle(const BinaryMask& mask, const std::array<double, 3>& x0, double r,
                            size_t samples, uint64_t seed);

/// One validation check outcome.
struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ValidateOptions {
    std::string only;        // run just the named check when non-empty
    bool break_pruning = false;  // fault injection: force the pruner to skip everything
};

/// Runs the oracle cross-check suite at small sizes:
///   transform   round-trip contract
///   taylor-green  IMEX order check against the closed-form solution
///   sparseness  voxel counting vs Monte Carlo and analytic values
///   distance    BVH distances vs brute-force triangle scans
///   inscribed   inscribed spheres vs analytic shapes and the voxel oracle
///   pruning     pruned vs exhaustive RIV search
std::vector<CheckResult> run_validation(const ValidateOptions& opts = {});

}  // namespace rivlab
