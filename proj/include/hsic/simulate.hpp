#pragma once

#include "hsic/kernel.hpp"
#include "hsic/nulldist.hpp"
#include "hsic/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hsic {

/// Innovation laws, each standardized to mean 0 and variance 1:
/// N(0,1), t_4 / sqrt(2), and (chi^2_1 - 1) / sqrt(2).
enum class InnovationModel { normal, t4_scaled, chisq1_scaled };

/// Link between x and y basis coefficients in the functional model.
enum class LinkFunction { cube, square, u_sin_u, u_cos_u };

std::string_view to_string(InnovationModel m) noexcept;
std::string_view to_string(LinkFunction f) noexcept;
InnovationModel parse_innovation_model(std::string_view name);
LinkFunction parse_link_function(std::string_view name);

double apply_link(LinkFunction f, double u) noexcept;
double draw_innovation(RandomStream& stream, InnovationModel model);

/// Independent high-dimensional pair x_i = G z1_i, y_i = G z2_i with
/// G G^T = Sigma / tr(Sigma^2) and Sigma[s][t] = rho^|s-t|.
struct Sim2NullSpec {
    InnovationModel model = InnovationModel::normal;
    int n = 50;
    int p = 50;
    double rho = 0.5;
    std::uint64_t seed = 0;
};

/// Dependent pair: x as in the null model with normal innovations, and
/// y_ij = delta (x_ij + x_ij^2) + z2_ij with raw t_4/sqrt(2) noise.
struct Sim2AltSpec {
    int n = 50;
    int p = 50;
    double rho = 0.5;
    double delta = 1.0;
    std::uint64_t seed = 0;
};

/// Curves x_i(t) = sum_{j=1}^{50} z1_ij sqrt(2) cos(j pi t) and likewise y_i
/// with z2_ij = f(z1_ij) for j <= m and fresh innovations otherwise, on the
/// grid t_r = (r-1)/(k-1). m = 0 is the null.
struct Sim3Spec {
    LinkFunction f = LinkFunction::square;
    int m = 0;
    int n = 50;
    int k = 201;
    InnovationModel model = InnovationModel::normal;
    std::uint64_t seed = 0;
};

inline constexpr int kSim3BasisSize = 50;

struct SamplePair {
    Sample x;
    Sample y;
};

/// Lower Cholesky factor of the AR(1) matrix divided by sqrt(tr(Sigma^2)).
/// Cached per (p, rho); safe to call concurrently.
const Matrix& ar1_mixing(int p, double rho);

SamplePair gen_sim2_null(const Sim2NullSpec& spec);
SamplePair gen_sim2_alt(const Sim2AltSpec& spec);
SamplePair gen_sim3(const Sim3Spec& spec);

using Scenario = std::variant<Sim2NullSpec, Sim2AltSpec, Sim3Spec>;

/// Throws InputError when the scenario violates its parameter ranges.
void validate(const Scenario& s);

/// Canonical text of the scenario parameters, seed excluded.
std::string scenario_key(const Scenario& s);

/// 64-bit FNV-1a hash of scenario_key, so identical scenarios share run seeds.
std::uint64_t scenario_id(const Scenario& s);

bool is_null(const Scenario& s);

/// Copy of `s` with its seed replaced; generates one data set.
SamplePair generate(const Scenario& s, std::uint64_t seed);

struct StudyEntry {
    Scenario scenario;
    Method method = Method::new_chi_sq;
};

struct StudyOptions {
    int runs = 2000;
    double alpha = 0.05;
    std::uint64_t master_seed = 0;
    int permutations = 200;
    unsigned threads = 1;
};

struct ScenarioResult {
    Scenario scenario;
    Method method = Method::new_chi_sq;
    int runs = 0;
    int rejections = 0;
    int fallbacks = 0;  // NEW-method runs that used the Gamma fallback
    double empirical_rate = 0.0;
};

struct StudyReport {
    std::vector<ScenarioResult> rows;
    std::optional<double> are;  // present when every scenario is a null scenario
    double alpha = 0.05;
    std::uint64_t master_seed = 0;
    int variate_version = 0;
};

/// Run seed for run r of a scenario: derive_seed({master_seed, scenario_id, r}).
std::uint64_t run_seed(std::uint64_t master_seed, const Scenario& s, int run);

/// Average relative error 100/M * sum_j |rate_j - alpha| / alpha.
double average_relative_error(std::span<const double> rates, double alpha);

/// Monte Carlo study. Every run generates data from its run seed, applies
/// the entry's test with data-selected kernel widths and rejects when
/// p <= alpha. The report does not depend on `threads`.
StudyReport run_study(const std::vector<StudyEntry>& entries, const StudyOptions& opts);
StudyReport run_study(const std::vector<Scenario>& scenarios, Method method, const StudyOptions& opts);

}  // namespace hsic
