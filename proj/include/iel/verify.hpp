#pragma once

#include <string>
#include <vector>

namespace iel::verify {

struct SuiteResult {
    std::string name;
    bool pass = true;
    std::vector<std::string> lines;
};

// Property suites, each a self-contained sweep with pinned sizes, seeds and
// tolerances. The CLI exposes them under `verify --suite`; the acceptance
// binary reuses them.
SuiteResult energy();         // inverse step never lowers the Dirichlet energy
SuiteResult merge();          // merged single layer == stacked layers
SuiteResult adjoint();        // stencil matrix form, self-adjointness, conv adjoint
SuiteResult gradcheck();      // finite-difference checks, ops and full model
SuiteResult theorem2();       // quadratic residual decay + noisy-label bound chain
SuiteResult convex_oracle();  // concavity detector == brute-force evaluation

const std::vector<std::string>& suite_names();
SuiteResult run_suite(const std::string& name);  // throws on unknown name

struct MergeBench {
    double sequential_ms = 0.0;
    double merged_ms = 0.0;
    double max_rel_diff = 0.0;
};

/// Times n stacked inverse steps against the merged closed form on one
/// random field (median of `reps` timed repetitions of each path).
MergeBench bench_merge(int layers, float dt, int size, int reps = 5);

}  // namespace iel::verify
