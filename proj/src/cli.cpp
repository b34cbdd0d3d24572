#include "hsic/cli.hpp"

#include "hsic/error.hpp"
#include "hsic/parallel.hpp"
#include "hsic/report_json.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace hsic::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool blank(std::string_view s) { return trim(s).empty(); }

std::string fmt(const char* spec, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

KernelConfig parse_width(const std::string& text, const char* flag) {
    if (text == "auto") return KernelConfig::automatic();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !(value > 0.0)) {
        throw InputError(std::string(flag) + " must be 'auto' or a positive number, got '" + text + "'");
    }
    return KernelConfig::fixed(value);
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

struct TestArgs {
    std::string x_path;
    std::string y_path;
    std::string method = "new";
    std::string kind = "vector";
    std::string grid = "uniform";
    std::string width_x = "auto";
    std::string width_y = "auto";
    int perms = 200;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    std::string format = "json";
    bool header = false;
    int threads = 0;
};

struct SimulateArgs {
    std::string spec;
    int runs = 0;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string format = "json";
};

OutputFormat parse_format(const std::string& s) {
    if (s == "json") return OutputFormat::json;
    if (s == "csv") return OutputFormat::csv;
    return OutputFormat::text;
}

int run_test(const TestArgs& a, std::ostream& out) {
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw InputError("--alpha must lie in (0, 1)");
    const SampleKind kind = a.kind == "functional" ? SampleKind::functional : SampleKind::vector;
    const GridSource grid = a.grid == "first-row" ? GridSource::first_row : GridSource::uniform;

    TestOptions opts;
    opts.method = parse_method(a.method);
    opts.kernel_x = parse_width(a.width_x, "--width-x");
    opts.kernel_y = parse_width(a.width_y, "--width-y");
    opts.permutations = a.perms;
    opts.seed = a.seed;
    opts.threads = resolve_threads(a.threads);

    const Sample x = load_sample(a.x_path, kind, grid, a.header);
    const Sample y = load_sample(a.y_path, kind, grid, a.header);
    const TestResult result = independence_test(x, y, opts);
    out << format_result(result, parse_format(a.format), a.alpha);
    return kExitOk;
}

int run_simulate(const SimulateArgs& a, bool runs_given, bool seed_given, std::ostream& out) {
    StudyPlan plan = parse_study_spec(read_json_file(a.spec));
    if (runs_given) {
        if (a.runs < 1) throw InputError("--runs must be at least 1");
        plan.options.runs = a.runs;
    }
    if (seed_given) plan.options.master_seed = a.seed;
    plan.options.threads = resolve_threads(a.threads);

    const StudyReport report = run_study(plan.entries, plan.options);
    if (a.format == "csv") {
        out << study_report_csv(report);
    } else {
        out << to_json(report).dump(2) << '\n';
    }
    return kExitOk;
}

}  // namespace

RowMatrix parse_csv(std::istream& in, const std::string& source, bool skip_header) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = skip_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::vector<double> row;
        std::string_view rest(line);
        std::size_t col = 0;
        for (;;) {
            ++col;
            const std::size_t comma = rest.find(',');
            const std::string_view cell = trim(rest.substr(0, comma));
            double value = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, value);
            if (cell.empty() || ec != std::errc() || ptr != last) {
                throw InputError(source + ":" + std::to_string(line_no) + ":" + std::to_string(col) +
                                 ": non-numeric cell '" + std::string(cell) + "'");
            }
            row.push_back(value);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InputError(source + ":" + std::to_string(line_no) + ": ragged row with " +
                             std::to_string(row.size()) + " cells, expected " +
                             std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw InputError(source + ": no data rows");
    }
    RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

Sample load_sample(const std::string& path, SampleKind kind, GridSource grid, bool skip_header) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    RowMatrix table = parse_csv(in, path, skip_header);
    if (kind == SampleKind::vector) {
        return Sample::vectors(std::move(table));
    }
    if (grid == GridSource::uniform) {
        return Sample::curves_on_unit_grid(std::move(table));
    }
    if (table.rows() < 2) {
        throw InputError(path + ": first-row grid needs at least one curve after the grid row");
    }
    Vector times = table.row(0).transpose();
    RowMatrix curves = table.bottomRows(table.rows() - 1);
    try {
        return Sample::curves(std::move(curves), std::move(times));
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

std::string format_result(const TestResult& r, OutputFormat format, double alpha) {
    const bool reject = r.p_value <= alpha;
    if (format == OutputFormat::json) {
        Json j = to_json(r);
        j["alpha"] = alpha;
        j["reject"] = reject;
        return j.dump(2) + "\n";
    }
    const double estimate = r.statistic / static_cast<double>(r.n);
    std::ostringstream out;
    if (format == OutputFormat::csv) {
        out << "method,n,statistic,hsic_estimate,p_value,sigma2_x,sigma2_y,alpha,reject\n"
            << to_string(r.method) << ',' << r.n << ',' << fmt("%.10g", r.statistic) << ','
            << fmt("%.10g", estimate) << ',' << fmt("%.6g", r.p_value) << ',' << fmt("%.10g", r.sigma2_x) << ','
            << fmt("%.10g", r.sigma2_y) << ',' << fmt("%.6g", alpha) << ',' << (reject ? "true" : "false")
            << '\n';
        return out.str();
    }
    out << "method         " << to_string(r.method) << '\n'
        << "n              " << r.n << '\n'
        << "statistic      " << fmt("%.10g", r.statistic) << '\n'
        << "hsic estimate  " << fmt("%.10g", estimate) << '\n'
        << "p-value        " << fmt("%.6g", r.p_value) << '\n'
        << "kernel widths  " << fmt("%.6g", r.sigma2_x) << ", " << fmt("%.6g", r.sigma2_y) << '\n';
    if (const auto* d = std::get_if<NewDetail>(&r.detail)) {
        if (d->match) {
            out << "chi2 match     beta0=" << fmt("%.6g", d->match->beta0) << " beta1=" << fmt("%.6g", d->match->beta1)
                << " d=" << fmt("%.6g", d->match->d) << '\n';
        } else if (d->fallback) {
            out << "gamma fallback shape=" << fmt("%.6g", d->fallback->shape)
                << " scale=" << fmt("%.6g", d->fallback->scale) << '\n';
        }
    } else if (const auto* g = std::get_if<GammaDetail>(&r.detail)) {
        out << "gamma fit      shape=" << fmt("%.6g", g->fit.shape) << " scale=" << fmt("%.6g", g->fit.scale) << '\n';
    } else if (const auto* p = std::get_if<PermutationDetail>(&r.detail)) {
        out << "permutations   " << p->permutations << " (" << p->exceed_count << " at or above observed)\n";
    }
    out << "decision       " << (reject ? "reject" : "do not reject") << " independence at alpha "
        << fmt("%.6g", alpha) << '\n';
    return out.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kernel (HSIC) independence tests for vector and functional data"};
    app.name("hsictest");
    app.require_subcommand(1);
    app.footer(std::string("Environment: ") + kThreadCapEnv +
               " caps the number of worker threads.\n"
               "Exit codes: 0 success, 2 input error, 3 statistical degeneracy, 4 numeric failure.");

    TestArgs t;
    auto* test = app.add_subcommand("test", "Test independence of two paired samples stored as CSV");
    test->add_option("--x", t.x_path, "CSV file with the x sample, one observation per row")->required();
    test->add_option("--y", t.y_path, "CSV file with the y sample, one observation per row")->required();
    test->add_option("--method", t.method, "new (chi-square match), gamma, or perm")
        ->check(CLI::IsMember({"new", "gamma", "perm"}))
        ->capture_default_str();
    test->add_option("--kind", t.kind, "vector or functional")
        ->check(CLI::IsMember({"vector", "functional"}))
        ->capture_default_str();
    test->add_option("--grid", t.grid, "functional grid: first-row of each file, or uniform on [0,1]")
        ->check(CLI::IsMember({"first-row", "uniform"}))
        ->capture_default_str();
    test->add_option("--width-x", t.width_x, "kernel width sigma^2 for x: auto or a positive number")
        ->capture_default_str();
    test->add_option("--width-y", t.width_y, "kernel width sigma^2 for y: auto or a positive number")
        ->capture_default_str();
    test->add_option("--perms", t.perms, "number of permutations (perm method)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    test->add_option("--seed", t.seed, "permutation seed")->capture_default_str();
    test->add_option("--alpha", t.alpha, "significance level in (0,1)")->capture_default_str();
    test->add_option("--format", t.format, "json, csv, or text")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    test->add_flag("--header", t.header, "skip the first row of each CSV file");
    test->add_option("--threads", t.threads, "worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    SimulateArgs s;
    auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo size/power study from a JSON spec");
    sim->add_option("--spec", s.spec, "JSON study specification")->required();
    auto* runs_opt = sim->add_option("--runs", s.runs, "override the number of runs per scenario");
    auto* seed_opt = sim->add_option("--seed", s.seed, "override the master seed");
    sim->add_option("--threads", s.threads, "worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sim->add_option("--format", s.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (test->parsed()) return run_test(t, out);
        return run_simulate(s, runs_opt->count() > 0, seed_opt->count() > 0, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DegenerateError& e) {
        err << "degenerate: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace hsic::cli
