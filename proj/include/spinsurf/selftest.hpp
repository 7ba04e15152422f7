#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace spinsurf {

struct SuiteResult {
    std::string name;
    std::size_t samples = 0;
    double max_residual = 0;
    double limit = 0;
    bool pass = false;
};

inline constexpr std::uint64_t selftest_seed = 20240607;

// Random-sample identity sweeps of the Clifford layer over several
// signatures: associativity, the Clifford relation, reversal, symmetry and
// self-adjointness of the pairing, Spin equivariance, the skew-operator
// bivector identity, the complexified-quaternion model and the two star-map
// intertwining rules. `samples` draws per identity.
std::vector<SuiteResult> algebra_suites(std::uint64_t seed = selftest_seed, int samples = 1000);

// Per group kind: Jacobi, torsion, metric compatibility, and the connection
// tables compared entry by entry against closed forms.
std::vector<SuiteResult> catalog_suites();

// Runs the skew-operator suite with one product-table sign flipped; passes
// when the flipped table is detected.
SuiteResult mutation_suite(std::uint64_t seed = selftest_seed);

// Every suite above plus a small Killing solve on a flat chart and an
// in-process rerun that must reproduce the report bytes.
nlohmann::json selftest_report(std::uint64_t seed = selftest_seed);

nlohmann::json suite_json(const SuiteResult& r);

}  // namespace spinsurf
