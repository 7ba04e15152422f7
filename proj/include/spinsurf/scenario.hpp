#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinsurf/spinor_field.hpp"
#include "spinsurf/surface_chart.hpp"

namespace spinsurf {

// Malformed or inconsistent scenario input (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Tolerances {
    double min_order = 1.9;
    double unit = 1e-6;        // unit-constraint drift of solved fields
    double algebraic = 1e-10;  // identities that hold up to rounding
    double ratio = 3;          // residual ratios (Lawson, Killing => Dirac)
    double exact = 1e-10;      // below this a refinement study counts as exact
    double indicator = 1e-12;  // indicator preservation under the Lawson rotation
};

// One batch job. Levels use (n - 1) 2^k + 1 nodes per direction, k < refinements.
struct Scenario {
    std::string name;
    SpaceKind space;
    std::string family;
    FamilyParams params;
    int n = 17;
    int refinements = 1;
    // verify | solve | reconstruct | correspond-lawson | correspond-calabi |
    // correspond-weierstrass | dirac-killing
    std::string pipeline;
    std::optional<KillingForm> form;
    std::optional<double> shape_scale;  // prescribed S = scale id instead of the extracted S
    double tau = 0;
    int branch = 1;
    std::string weierstrass = "catenoid";
    Tolerances tol;
};

std::vector<std::string> pipeline_names();

// Throws ConfigError with the offending key.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const Scenario& s);

struct ScenarioResult {
    nlohmann::json report;  // deterministic: sorted keys, values from fixed computations
    bool pass = false;
    // Finest-level scene (chart, geometry, spinor, immersion), for exporters.
    std::optional<nlohmann::json> scene;
};

// Runs every level of the pipeline. Library exceptions propagate: invalid
// arguments mean an inconsistent scenario, runtime errors a numerical failure.
ScenarioResult run_scenario(const Scenario& s);

// Fixed textual form of a report (two-space indentation, trailing newline).
std::string report_text(const nlohmann::json& report);

}  // namespace spinsurf
