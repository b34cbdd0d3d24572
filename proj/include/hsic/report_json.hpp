#pragma once

#include "hsic/nulldist.hpp"
#include "hsic/simulate.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hsic {

using Json = nlohmann::json;

/// {method, n, statistic, hsic_estimate, p_value, sigma2_x, sigma2_y, detail}
Json to_json(const TestResult& r);

/// {"generator": "sim2_null" | "sim2_alt" | "sim3", ...parameters}
Json to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);

Json to_json(const StudyReport& r);
StudyReport study_report_from_json(const Json& j);

/// Fixed columns, one row per scenario; a trailing "# ARE,<value>" line
/// when the report carries one.
std::string study_report_csv(const StudyReport& r);

inline constexpr const char* kStudyCsvHeader =
    "generator,model,f,m,n,p,k,rho,delta,method,runs,rejections,fallbacks,empirical_rate";

/// A parsed study specification file.
struct StudyPlan {
    std::vector<StudyEntry> entries;
    StudyOptions options;
};

/// Study file layout:
///
///   {
///     "runs": 2000, "alpha": 0.05, "seed": 1, "permutations": 200,
///     "method": "new",                // or "methods": ["new", "gamma"]
///     "scenarios": [
///       {"generator": "sim2_null", "model": "normal", "n": 100, "p": 100, "rho": 0.5},
///       {"generator": "sim2_alt", "n": 50, "p": 50, "rho": 0.5, "delta": [0.6, 0.8]},
///       {"generator": "sim3", "f": "square", "m": [3, 5], "n": 100, "k": 201}
///     ]
///   }
///
/// Any scenario parameter may be a list; lists expand to their Cartesian
/// product, with keys taken in alphabetical order and later keys varying
/// fastest. A scenario may carry its own "method"/"methods". Unknown keys
/// are rejected with InputError.
StudyPlan parse_study_spec(const Json& j);

}  // namespace hsic
