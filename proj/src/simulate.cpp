#include "hsic/simulate.hpp"

#include "hsic/error.hpp"
#include "hsic/parallel.hpp"
#include "hsic/rng.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace hsic {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RowMatrix draw_matrix(RandomStream& stream, int rows, int cols, InnovationModel model) {
    RowMatrix z(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            z(i, j) = draw_innovation(stream, model);
        }
    }
    return z;
}

void check_sim2(int n, int p, double rho) {
    if (n < 3) throw InputError("simulation needs n >= 3");
    if (p < 1) throw InputError("simulation needs p >= 1");
    if (!(rho >= 0.0 && rho < 1.0)) throw InputError("rho must lie in [0, 1)");
}

}  // namespace

std::string_view to_string(InnovationModel m) noexcept {
    switch (m) {
        case InnovationModel::normal: return "normal";
        case InnovationModel::t4_scaled: return "t4_scaled";
        case InnovationModel::chisq1_scaled: return "chisq1_scaled";
    }
    return "normal";
}

std::string_view to_string(LinkFunction f) noexcept {
    switch (f) {
        case LinkFunction::cube: return "cube";
        case LinkFunction::square: return "square";
        case LinkFunction::u_sin_u: return "u_sin_u";
        case LinkFunction::u_cos_u: return "u_cos_u";
    }
    return "square";
}

InnovationModel parse_innovation_model(std::string_view name) {
    if (name == "normal" || name == "1") return InnovationModel::normal;
    if (name == "t4_scaled" || name == "2") return InnovationModel::t4_scaled;
    if (name == "chisq1_scaled" || name == "3") return InnovationModel::chisq1_scaled;
    throw InputError("unknown innovation model '" + std::string(name) + "'");
}

LinkFunction parse_link_function(std::string_view name) {
    if (name == "cube") return LinkFunction::cube;
    if (name == "square") return LinkFunction::square;
    if (name == "u_sin_u") return LinkFunction::u_sin_u;
    if (name == "u_cos_u") return LinkFunction::u_cos_u;
    throw InputError("unknown link function '" + std::string(name) + "'");
}

double apply_link(LinkFunction f, double u) noexcept {
    switch (f) {
        case LinkFunction::cube: return u * u * u;
        case LinkFunction::square: return u * u;
        case LinkFunction::u_sin_u: return u * std::sin(u);
        case LinkFunction::u_cos_u: return u * std::cos(u);
    }
    return u;
}

double draw_innovation(RandomStream& stream, InnovationModel model) {
    switch (model) {
        case InnovationModel::normal: return stream.normal();
        case InnovationModel::t4_scaled: return stream.student_t4() / std::numbers::sqrt2;
        case InnovationModel::chisq1_scaled: return (stream.chi_sq1() - 1.0) / std::numbers::sqrt2;
    }
    return 0.0;
}

const Matrix& ar1_mixing(int p, double rho) {
    static std::mutex mutex;
    static std::map<std::pair<int, double>, std::unique_ptr<const Matrix>> cache;

    std::lock_guard lock(mutex);
    auto& slot = cache[{p, rho}];
    if (!slot) {
        Matrix sigma(p, p);
        for (int s = 0; s < p; ++s) {
            for (int t = 0; t < p; ++t) {
                sigma(s, t) = std::pow(rho, std::abs(s - t));
            }
        }
        const double tr_sq = sigma.squaredNorm();  // tr(Sigma^2), Sigma symmetric
        Eigen::LLT<Matrix> llt(sigma);
        if (llt.info() != Eigen::Success) {
            throw NumericError("Cholesky factorization of the AR(1) matrix failed");
        }
        slot = std::make_unique<const Matrix>(Matrix(llt.matrixL()) / std::sqrt(tr_sq));
    }
    return *slot;
}

SamplePair gen_sim2_null(const Sim2NullSpec& spec) {
    check_sim2(spec.n, spec.p, spec.rho);
    const Matrix& gamma = ar1_mixing(spec.p, spec.rho);
    RandomStream stream(spec.seed);
    const RowMatrix z1 = draw_matrix(stream, spec.n, spec.p, spec.model);
    const RowMatrix z2 = draw_matrix(stream, spec.n, spec.p, spec.model);
    // Rows are observations, so x_i = G z_i becomes X = Z G^T.
    RowMatrix x = z1 * gamma.transpose();
    RowMatrix y = z2 * gamma.transpose();
    return {Sample::vectors(std::move(x)), Sample::vectors(std::move(y))};
}

SamplePair gen_sim2_alt(const Sim2AltSpec& spec) {
    check_sim2(spec.n, spec.p, spec.rho);
    if (!(spec.delta > 0.0) || !std::isfinite(spec.delta)) {
        throw InputError("delta must be positive and finite");
    }
    const Matrix& gamma = ar1_mixing(spec.p, spec.rho);
    RandomStream stream(spec.seed);
    const RowMatrix z1 = draw_matrix(stream, spec.n, spec.p, InnovationModel::normal);
    const RowMatrix z2 = draw_matrix(stream, spec.n, spec.p, InnovationModel::t4_scaled);
    RowMatrix x = z1 * gamma.transpose();
    RowMatrix y = (spec.delta * (x.array() + x.array().square()) + z2.array()).matrix();
    return {Sample::vectors(std::move(x)), Sample::vectors(std::move(y))};
}

SamplePair gen_sim3(const Sim3Spec& spec) {
    if (spec.n < 3) throw InputError("simulation needs n >= 3");
    if (spec.k < 2) throw InputError("functional simulation needs k >= 2");
    if (spec.m < 0 || spec.m > kSim3BasisSize) throw InputError("m must lie in [0, 50]");

    const int k = spec.k;
    Matrix basis_t(kSim3BasisSize, k);  // basis_t(j, r) = sqrt(2) cos((j+1) pi t_r)
    for (int r = 0; r < k; ++r) {
        const double t = static_cast<double>(r) / static_cast<double>(k - 1);
        for (int j = 0; j < kSim3BasisSize; ++j) {
            basis_t(j, r) = std::numbers::sqrt2 * std::cos((j + 1) * std::numbers::pi * t);
        }
    }

    RandomStream stream(spec.seed);
    const RowMatrix z1 = draw_matrix(stream, spec.n, kSim3BasisSize, spec.model);
    RowMatrix z2(spec.n, kSim3BasisSize);
    for (int i = 0; i < spec.n; ++i) {
        for (int j = 0; j < kSim3BasisSize; ++j) {
            z2(i, j) = j < spec.m ? apply_link(spec.f, z1(i, j)) : draw_innovation(stream, spec.model);
        }
    }
    RowMatrix x = z1 * basis_t;
    RowMatrix y = z2 * basis_t;
    return {Sample::curves_on_unit_grid(std::move(x)), Sample::curves_on_unit_grid(std::move(y))};
}

void validate(const Scenario& s) {
    std::visit(overloaded{
                   [](const Sim2NullSpec& v) { check_sim2(v.n, v.p, v.rho); },
                   [](const Sim2AltSpec& v) {
                       check_sim2(v.n, v.p, v.rho);
                       if (!(v.delta > 0.0) || !std::isfinite(v.delta)) {
                           throw InputError("delta must be positive and finite");
                       }
                   },
                   [](const Sim3Spec& v) {
                       if (v.n < 3) throw InputError("simulation needs n >= 3");
                       if (v.k < 2) throw InputError("functional simulation needs k >= 2");
                       if (v.m < 0 || v.m > kSim3BasisSize) throw InputError("m must lie in [0, 50]");
                   },
               },
               s);
}

std::string scenario_key(const Scenario& s) {
    return std::visit(
        overloaded{
            [](const Sim2NullSpec& v) {
                return "sim2_null|model=" + std::string(to_string(v.model)) + "|n=" + std::to_string(v.n) +
                       "|p=" + std::to_string(v.p) + "|rho=" + format_real(v.rho);
            },
            [](const Sim2AltSpec& v) {
                return "sim2_alt|n=" + std::to_string(v.n) + "|p=" + std::to_string(v.p) +
                       "|rho=" + format_real(v.rho) + "|delta=" + format_real(v.delta);
            },
            [](const Sim3Spec& v) {
                return "sim3|f=" + std::string(to_string(v.f)) + "|m=" + std::to_string(v.m) +
                       "|n=" + std::to_string(v.n) + "|k=" + std::to_string(v.k) +
                       "|model=" + std::string(to_string(v.model));
            },
        },
        s);
}

std::uint64_t scenario_id(const Scenario& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : scenario_key(s)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool is_null(const Scenario& s) {
    return std::visit(overloaded{
                          [](const Sim2NullSpec&) { return true; },
                          [](const Sim2AltSpec&) { return false; },
                          [](const Sim3Spec& v) { return v.m == 0; },
                      },
                      s);
}

SamplePair generate(const Scenario& s, std::uint64_t seed) {
    return std::visit(
        [seed](auto spec) {
            spec.seed = seed;
            using T = decltype(spec);
            if constexpr (std::is_same_v<T, Sim2NullSpec>) {
                return gen_sim2_null(spec);
            } else if constexpr (std::is_same_v<T, Sim2AltSpec>) {
                return gen_sim2_alt(spec);
            } else {
                return gen_sim3(spec);
            }
        },
        s);
}

std::uint64_t run_seed(std::uint64_t master_seed, const Scenario& s, int run) {
    return derive_seed({master_seed, scenario_id(s), static_cast<std::uint64_t>(run)});
}

double average_relative_error(std::span<const double> rates, double alpha) {
    if (rates.empty()) {
        throw InputError("ARE needs at least one empirical size");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("alpha must lie in (0, 1)");
    }
    double acc = 0.0;
    for (double r : rates) acc += std::abs(r - alpha) / alpha;
    return 100.0 * acc / static_cast<double>(rates.size());
}

StudyReport run_study(const std::vector<StudyEntry>& entries, const StudyOptions& opts) {
    if (opts.runs < 1) throw InputError("runs must be at least 1");
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    for (const auto& e : entries) validate(e.scenario);

    const std::size_t runs = static_cast<std::size_t>(opts.runs);
    const std::size_t tasks = entries.size() * runs;
    std::vector<unsigned char> rejected(tasks, 0);
    std::vector<unsigned char> fallback(tasks, 0);

    parallel_for(tasks, opts.threads, [&](std::size_t task) {
        const StudyEntry& entry = entries[task / runs];
        const int run = static_cast<int>(task % runs);
        const std::uint64_t seed = run_seed(opts.master_seed, entry.scenario, run);
        try {
            const SamplePair data = generate(entry.scenario, seed);
            TestOptions test;
            test.method = entry.method;
            test.permutations = opts.permutations;
            test.seed = mix64(seed);
            const TestResult result = independence_test(data.x, data.y, test);
            rejected[task] = result.p_value <= opts.alpha;
            if (const auto* nd = std::get_if<NewDetail>(&result.detail)) {
                fallback[task] = nd->fallback.has_value();
            }
        } catch (const DegenerateError& e) {
            throw DegenerateError(scenario_key(entry.scenario) + " run " + std::to_string(run) + ": " + e.what());
        } catch (const NumericError& e) {
            throw NumericError(scenario_key(entry.scenario) + " run " + std::to_string(run) + ": " + e.what());
        } catch (const InputError& e) {
            throw InputError(scenario_key(entry.scenario) + " run " + std::to_string(run) + ": " + e.what());
        }
    });

    StudyReport report;
    report.alpha = opts.alpha;
    report.master_seed = opts.master_seed;
    report.variate_version = kVariateVersion;
    bool all_null = !entries.empty();
    std::vector<double> rates;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        ScenarioResult row;
        row.scenario = entries[e].scenario;
        row.method = entries[e].method;
        row.runs = opts.runs;
        for (std::size_t r = 0; r < runs; ++r) {
            row.rejections += rejected[e * runs + r];
            row.fallbacks += fallback[e * runs + r];
        }
        row.empirical_rate = static_cast<double>(row.rejections) / static_cast<double>(row.runs);
        rates.push_back(row.empirical_rate);
        all_null = all_null && is_null(row.scenario);
        report.rows.push_back(std::move(row));
    }
    if (all_null) {
        report.are = average_relative_error(rates, opts.alpha);
    }
    return report;
}

StudyReport run_study(const std::vector<Scenario>& scenarios, Method method, const StudyOptions& opts) {
    std::vector<StudyEntry> entries;
    entries.reserve(scenarios.size());
    for (const auto& s : scenarios) entries.push_back({s, method});
    return run_study(entries, opts);
}

}  // namespace hsic
