// Copyright 2026 The qpmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Batch front-end: sweep | check | frontier | sample | posterior.
// Kept header-only so the command layer can be driven in-process by tests;
// tools/qpmeas.cpp is a thin main() around run_cli().

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpmeas/qpmeas.hpp"

namespace qpmeas::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

/// Raised for invalid configurations; mapped to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double hbar = 1.0;
    double sigma1 = 1.0;
    double q1 = 0.0;
    double p1 = 0.0;
    ModelFamily family = ModelFamily::Y0;
    std::vector<double> nu_grid;
    std::uint64_t seed = 42;
    std::size_t n = 100000;
    std::string format = "csv";
    std::string out;
    std::string summary_out;
    std::string joint = "meters";
    std::optional<std::array<double, 2>> y;
    std::optional<OutcomeRegion> region;

    MinUncertaintyParams psi() const { return {q1, p1, sigma1, hbar}; }
};

/// 99 points 0.01, 0.02, ..., 0.99.
inline std::vector<double> default_nu_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 99; ++i) g.push_back(i / 100.0);
    return g;
}

inline void validate(const RunConfig& c) {
    try {
        c.psi().validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    if (c.nu_grid.empty()) throw UsageError("nu grid is empty");
    for (double nu : c.nu_grid) {
        if (!(nu > 0.0 && nu < 1.0)) {
            throw UsageError("nu values must lie in (0,1), got " + std::to_string(nu));
        }
    }
    if (c.format != "csv" && c.format != "json") throw UsageError("--format must be csv or json");
}

inline double single_nu(const RunConfig& c) {
    if (c.nu_grid.size() != 1) throw UsageError("this command needs exactly one nu (use --nu)");
    return c.nu_grid.front();
}

/// Rectangular numeric table with named columns.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline std::string to_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_number(row[i]);
        s += '\n';
    }
    return s;
}

inline nlohmann::json number_or_null(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const Table& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (double x : row) r.push_back(number_or_null(x));
        rows.push_back(std::move(r));
    }
    return {{"columns", t.columns}, {"rows", rows}};
}

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v[i]));
    return a;
}

inline nlohmann::json to_json(const Eigen::MatrixXd& m) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
    return a;
}

// ---------------------------------------------------------------- sweep

inline constexpr double kSweepResidualTolerance = 1e-8;

inline Table sweep_table(const RunConfig& c) {
    validate(c);
    if (c.family == ModelFamily::ArthursKelly) {
        throw UsageError("sweep runs the minimum trade-off families X, Y2, Y0, Z");
    }
    const auto psi = c.psi();
    Table t{{"nu", "eps_q", "eps_p", "bo_lhs", "bo_residual", "heisenberg_product", "ozawa_residual"}, {}};
    for (double nu : c.nu_grid) {
        const auto e = qrms_errors(build_model(c.family, nu, psi), psi);
        t.rows.push_back({nu, e.eps_q, e.eps_p, branciard_ozawa_lhs(e, psi), branciard_ozawa_residual(e, psi),
                          heisenberg_product(e), ozawa_inequality_residual(e, psi)});
    }
    return t;
}

inline bool sweep_all_pass(const Table& t) {
    for (const auto& row : t.rows) {
        if (!(std::abs(row[4]) <= kSweepResidualTolerance)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- check

inline nlohmann::json to_json(const TheoremReport& r) {
    return {{"a21", r.a21},
            {"b31", r.b31},
            {"cond_i_residuals", r.cond_i_residuals},
            {"cond_ii_residuals", r.cond_ii_residuals},
            {"cond_iii_residual", r.cond_iii_residual},
            {"pass", {{"i", r.pass_i}, {"ii", r.pass_ii}, {"iii", r.pass_iii}}},
            {"all_pass", r.all_pass()},
            {"bo_residual", r.bo_residual},
            {"tolerance", r.tolerance}};
}

inline nlohmann::json check_report(const RunConfig& c) {
    const auto psi = c.psi();
    nlohmann::json j;
    TheoremReport r;
    if (c.family == ModelFamily::ArthursKelly) {
        try {
            psi.validate();
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
        r = check_theorem_conditions(make_arthurs_kelly(make_symmetric_probe(c.hbar)), psi);
        j["probe"] = "symmetric";
    } else {
        validate(c);
        const double nu = single_nu(c);
        r = check_theorem_conditions(build_model(c.family, nu, psi), psi);
        j["nu"] = nu;
    }
    j.update(to_json(r));
    j["family"] = std::string(to_string(c.family));
    return j;
}

// ---------------------------------------------------------------- frontier

/// Parametric minimum trade-off curve in error coordinates, with the
/// Heisenberg hyperbola eps_q eps_p = hbar/2 and the hbar/4 reference
/// evaluated at the same eps_q.
inline Table frontier_table(const RunConfig& c) {
    validate(c);
    const auto psi = c.psi();
    Table t{{"nu", "eps_q", "eps_p_bo", "eps_p_heisenberg", "eps_p_quarter"}, {}};
    for (double nu : c.nu_grid) {
        const double eq = std::sqrt(1.0 - nu) * psi.sigma1;
        const double ep = std::sqrt(nu) * psi.sigma_p();
        t.rows.push_back({nu, eq, ep, psi.hbar / 2.0 / eq, psi.hbar / 4.0 / eq});
    }
    return t;
}

// ---------------------------------------------------------------- sample

struct SampleRun {
    JointGaussian joint;
    Eigen::MatrixXd samples;
    nlohmann::json summary;
};

/// Outcome law selected by name: meters (Q2(tau), P3(tau)), q-pair
/// (Q1(0), Q2(tau)) or p-pair (P1(0), P3(tau)).
inline JointGaussian named_joint(const std::string& which, ModelFamily family, double nu,
                                 const MinUncertaintyParams& psi) {
    const auto m = build_model(family, nu, psi);
    const auto state = joint_initial_state(m, psi);
    if (which == "meters") return joint_distribution({m.meter_q, m.meter_p}, state, {"Q2(tau)", "P3(tau)"});
    if (which == "q-pair") return joint_distribution({Q1, m.meter_q}, state, {"Q1(0)", "Q2(tau)"});
    if (which == "p-pair") return joint_distribution({P1, m.meter_p}, state, {"P1(0)", "P3(tau)"});
    throw UsageError("unknown joint '" + which + "' (expected meters, q-pair or p-pair)");
}

inline constexpr std::size_t kLowConfidenceSamples = 100;

inline SampleRun sample_run(const RunConfig& c) {
    validate(c);
    if (c.family == ModelFamily::ArthursKelly) throw UsageError("sample needs a minimum trade-off family");
    if (c.n < 1) throw UsageError("--n must be at least 1");
    const double nu = single_nu(c);
    const auto psi = c.psi();
    SampleRun run{named_joint(c.joint, c.family, nu, psi), {}, {}};
    run.samples = sample(run.joint, c.n, c.seed);

    const auto n = static_cast<double>(c.n);
    const Eigen::VectorXd emp_mean = run.samples.colwise().mean().transpose();
    Eigen::MatrixXd emp_cov = Eigen::MatrixXd::Constant(run.joint.dim(), run.joint.dim(),
                                                        std::numeric_limits<double>::quiet_NaN());
    if (c.n > 1) {
        const Eigen::MatrixXd centered = run.samples.rowwise() - emp_mean.transpose();
        emp_cov = centered.transpose() * centered / (n - 1.0);
    }
    Eigen::VectorXd z(run.joint.dim());
    for (int i = 0; i < run.joint.dim(); ++i) {
        z[i] = (emp_mean[i] - run.joint.mean[i]) / std::sqrt(run.joint.cov(i, i) / n);
    }
    auto& s = run.summary;
    s["joint"] = c.joint;
    s["labels"] = run.joint.labels;
    s["family"] = std::string(to_string(c.family));
    s["nu"] = nu;
    s["n"] = c.n;
    s["seed"] = c.seed;
    s["low_confidence"] = c.n < kLowConfidenceSamples;
    s["empirical"] = {{"mean", to_json(emp_mean)}, {"cov", to_json(emp_cov)}};
    s["analytic"] = {{"mean", to_json(run.joint.mean)}, {"cov", to_json(run.joint.cov)}};
    s["mean_z_scores"] = to_json(z);

    if (c.joint != "meters") {
        // Gauss' error estimate sqrt(mean d^2), d = x - y; delta-method standard error.
        const Eigen::VectorXd d2 = (run.samples.col(0) - run.samples.col(1)).array().square();
        const double m2 = d2.mean();
        const double est = std::sqrt(m2);
        double se = std::numeric_limits<double>::quiet_NaN();
        if (c.n > 1) {
            const double sd = std::sqrt((d2.array() - m2).square().sum() / (n - 1.0));
            se = sd / std::sqrt(n) / (2.0 * est);
        }
        const double analytic = gauss_error(run.joint, 0, 1);
        const auto errs = qrms_errors(build_model(c.family, nu, psi), psi);
        s["gauss_error"] = {{"analytic", analytic},
                            {"empirical", number_or_null(est)},
                            {"standard_error", number_or_null(se)},
                            {"z_score", number_or_null((est - analytic) / se)},
                            {"qrms_error", c.joint == "q-pair" ? errs.eps_q : errs.eps_p}};
    }
    return run;
}

inline Table samples_table(const SampleRun& run) {
    Table t{run.joint.labels, {}};
    t.rows.reserve(static_cast<std::size_t>(run.samples.rows()));
    for (Eigen::Index i = 0; i < run.samples.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(run.samples.cols()));
        for (Eigen::Index k = 0; k < run.samples.cols(); ++k) row[static_cast<std::size_t>(k)] = run.samples(i, k);
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------- posterior

inline nlohmann::json posterior_report(const RunConfig& c) {
    validate(c);
    try {
        check_posterior_family(c.family);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    if (c.y.has_value() == c.region.has_value()) {
        throw UsageError("posterior needs exactly one of --y or --region");
    }
    const double nu = single_nu(c);
    const auto psi = c.psi();
    const double h2 = psi.hbar * psi.hbar / 4.0;
    nlohmann::json j{{"family", std::string(to_string(c.family))}, {"nu", nu}, {"hbar_sq_over_4", h2}};
    if (c.y) {
        const auto post = posterior_state({nu, psi}, (*c.y)[0], (*c.y)[1]);
        const double product = post.cov()(0, 0) * post.cov()(1, 1);
        j["mode"] = "outcome";
        j["y"] = *c.y;
        j["mean"] = to_json(post.mean());
        j["var_q"] = post.cov()(0, 0);
        j["var_p"] = post.cov()(1, 1);
        j["uncertainty_product"] = product;
        j["minimum_uncertainty"] = std::abs(product - h2) <= 1e-12 * std::max(1.0, h2);
        return j;
    }
    RegionMixture mix = [&] {
        try {
            return region_mixture_moments(c.family, nu, psi, *c.region);
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
    }();
    const auto& r = *c.region;
    const double product = mix.state.cov()(0, 0) * mix.state.cov()(1, 1);
    j["mode"] = "region";
    j["region"] = {number_or_null(r.z_lo), number_or_null(r.z_hi), number_or_null(r.w_lo),
                   number_or_null(r.w_hi)};
    j["probability"] = mix.probability;
    j["mean"] = to_json(mix.state.mean());
    j["cov"] = to_json(Eigen::MatrixXd(mix.state.cov()));
    j["uncertainty_product"] = product;
    j["minimum_uncertainty"] = std::abs(product - h2) <= 1e-12 * std::max(1.0, h2);

    // Unconditioned reference: moments of Q1(tau), P1(tau) in psi (x) xi.
    const auto m = build_model(c.family, nu, psi);
    const auto state = joint_initial_state(m, psi);
    const auto mq = moments(state, position_at(*m.transform, 1));
    const auto mp = moments(state, momentum_at(*m.transform, 1));
    j["heisenberg_marginals"] = {{"mean", {mq.mean, mp.mean}}, {"var_q", mq.variance}, {"var_p", mp.variance}};
    return j;
}

// ---------------------------------------------------------------- driver

inline std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        item = item.substr(b, item.find_last_not_of(" \t") - b + 1);
        std::size_t pos = 0;
        double x;
        try {
            x = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw UsageError("not a number: '" + item + "'");
        }
        if (pos != item.size()) throw UsageError("not a number: '" + item + "'");
        v.push_back(x);
    }
    return v;
}

/// --out resolved against $QPMEAS_OUTPUT_DIR when relative.
inline std::filesystem::path resolve_output(const std::string& out) {
    std::filesystem::path p(out);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("QPMEAS_OUTPUT_DIR"); dir && *dir) return std::filesystem::path(dir) / p;
    }
    return p;
}

inline void emit(const std::string& text, const std::string& out, std::ostream& stdout_stream) {
    if (out.empty()) {
        stdout_stream << text;
        return;
    }
    const auto path = resolve_output(out);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + path.string());
    f << text;
}

inline std::string render(const Table& t, const std::string& format) {
    return format == "json" ? to_json(t).dump(2) + "\n" : to_csv(t);
}

/// Runs one CLI invocation; args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simultaneous position-momentum measurement simulator", "qpmeas"};
    app.require_subcommand(1);

    RunConfig c;
    std::string family = "Y0";
    std::optional<double> nu;
    std::optional<std::string> nu_grid;
    std::optional<std::string> y;
    std::optional<std::string> region;

    // Shared flags live on the root so a flat config file can set them; the
    // subcommands fall through, so the flags may follow the subcommand name.
    app.set_config("--config", "", "TOML config file; command-line flags override its values");
    app.add_option("--family", family, "X, Y2, Y0, Z or AK");
    app.add_option("--nu", nu, "single nu in (0,1)");
    app.add_option("--nu-grid", nu_grid, "comma-separated nu values");
    app.add_option("--hbar", c.hbar);
    app.add_option("--sigma1", c.sigma1);
    app.add_option("--q1", c.q1);
    app.add_option("--p1", c.p1);
    app.add_option("--seed", c.seed);
    app.add_option("--n", c.n, "sample count");
    app.add_option("--format", c.format, "csv or json");
    app.add_option("--out", c.out, "output path (stdout when omitted)");
    auto* sweep = app.add_subcommand("sweep", "errors and bounds over a nu grid");
    auto* check = app.add_subcommand("check", "minimum trade-off conditions for one model");
    auto* frontier = app.add_subcommand("frontier", "trade-off boundary and reference curves");
    auto* samp = app.add_subcommand("sample", "Monte Carlo draws of an outcome law");
    auto* post = app.add_subcommand("posterior", "posterior state or region mixture");
    for (auto* sub : {sweep, check, frontier, samp, post}) sub->fallthrough();
    samp->add_option("--joint", c.joint, "meters, q-pair or p-pair");
    samp->add_option("--summary", c.summary_out, "summary JSON path (stdout when omitted)");
    post->add_option("--y", y, "meter outcome z,w");
    post->add_option("--region", region, "outcome rectangle z_lo,z_hi,w_lo,w_hi (inf allowed)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "qpmeas: " << e.what() << "\n";
        return kUsage;
    }

    try {
        const auto fam = parse_family(family);
        if (!fam) throw UsageError("unknown family '" + family + "'");
        c.family = *fam;
        if (nu && nu_grid) throw UsageError("use either --nu or --nu-grid, not both");
        if (nu) c.nu_grid = {*nu};
        else if (nu_grid) c.nu_grid = parse_number_list(*nu_grid);
        else c.nu_grid = default_nu_grid();
        if (y) {
            const auto v = parse_number_list(*y);
            if (v.size() != 2) throw UsageError("--y needs two values z,w");
            c.y = std::array<double, 2>{v[0], v[1]};
        }
        if (region) {
            const auto v = parse_number_list(*region);
            if (v.size() != 4) throw UsageError("--region needs four values z_lo,z_hi,w_lo,w_hi");
            c.region = OutcomeRegion{v[0], v[1], v[2], v[3]};
        }

        if (sweep->parsed()) {
            const auto t = sweep_table(c);
            emit(render(t, c.format), c.out, out);
            if (!sweep_all_pass(t)) {
                err << "qpmeas: minimum trade-off residual above " << kSweepResidualTolerance << "\n";
                return kCheckFailed;
            }
            return kOk;
        }
        if (check->parsed()) {
            const auto j = check_report(c);
            emit(j.dump(2) + "\n", c.out, out);
            return j["all_pass"].get<bool>() ? kOk : kCheckFailed;
        }
        if (frontier->parsed()) {
            emit(render(frontier_table(c), c.format), c.out, out);
            return kOk;
        }
        if (samp->parsed()) {
            const auto run = sample_run(c);
            if (!c.out.empty()) emit(to_csv(samples_table(run)), c.out, out);
            emit(run.summary.dump(2) + "\n", c.summary_out, out);
            return kOk;
        }
        if (post->parsed()) {
            emit(posterior_report(c).dump(2) + "\n", c.out, out);
            return kOk;
        }
    } catch (const UsageError& e) {
        err << "qpmeas: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "qpmeas: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace qpmeas::cli
