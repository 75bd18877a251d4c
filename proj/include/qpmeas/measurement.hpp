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

// Simultaneous position-momentum measurement models: noise-operator errors,
// error trade-off bounds, the minimum trade-off conditions and the four
// exactly solvable model families (plus the Arthurs-Kelly comparator).

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "qpmeas/dynamics.hpp"
#include "qpmeas/errors.hpp"
#include "qpmeas/quadrature.hpp"

namespace qpmeas {

enum class ModelFamily { X, Y2, Y0, Z, ArthursKelly };

inline constexpr std::array<ModelFamily, 4> kMinimumTradeoffFamilies = {
    ModelFamily::X, ModelFamily::Y2, ModelFamily::Y0, ModelFamily::Z};

inline std::string_view to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::X: return "X";
        case ModelFamily::Y2: return "Y2";
        case ModelFamily::Y0: return "Y0";
        case ModelFamily::Z: return "Z";
        case ModelFamily::ArthursKelly: return "AK";
    }
    return "?";
}

/// Accepts X, Y2, Y0, Z, AK (case-insensitive) and "arthurs-kelly".
inline std::optional<ModelFamily> parse_family(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    if (s == "X") return ModelFamily::X;
    if (s == "Y2") return ModelFamily::Y2;
    if (s == "Y0") return ModelFamily::Y0;
    if (s == "Z") return ModelFamily::Z;
    if (s == "AK" || s == "ARTHURS-KELLY" || s == "ARTHURSKELLY") return ModelFamily::ArthursKelly;
    return std::nullopt;
}

inline void check_nu(double nu) {
    if (!(nu > 0.0 && nu < 1.0)) {
        throw InvalidArgument("nu must lie in the open interval (0,1), got " + std::to_string(nu));
    }
}

/// Measuring process with meters Q2(tau) -> Q1 and P3(tau) -> P1 (or, for the
/// Arthurs-Kelly comparator, its explicit meter maps). Build through the
/// make_* factories, which check that the meters commute.
struct LinearSimultaneousMeasurement {
    std::optional<SolvableGenerator> generator;
    std::optional<PropagatedTransform> transform;
    GaussianState probe;
    LinearObservable meter_q;
    LinearObservable meter_p;
    std::optional<ModelFamily> family;
};

namespace detail {

inline void validate_measurement(const LinearSimultaneousMeasurement& m) {
    if (m.probe.modes() != std::vector<int>{2, 3}) {
        throw InvalidArgument("probe state must live on modes {2,3}");
    }
    const double c = commutator_coeff(m.meter_q, m.meter_p);
    const double scale = std::max(1.0, m.meter_q.coefficient_norm() * m.meter_p.coefficient_norm());
    if (std::abs(c) > 1e-12 * scale) throw NonCommuting(0, 1, c);
}

}  // namespace detail

inline LinearSimultaneousMeasurement make_linear_measurement(const PropagatedTransform& tr,
                                                             GaussianState probe) {
    LinearSimultaneousMeasurement m{std::nullopt, tr, std::move(probe), position_at(tr, 2),
                                    momentum_at(tr, 3), std::nullopt};
    detail::validate_measurement(m);
    return m;
}

inline LinearSimultaneousMeasurement make_linear_measurement(const SolvableGenerator& gen,
                                                             GaussianState probe) {
    auto m = make_linear_measurement(propagate(gen), std::move(probe));
    m.generator = gen;
    return m;
}

/// Arthurs-Kelly: after unit coupling time the meters read
/// Q1 + Q2 + P3/2 and P1 - P2/2 + Q3.
inline LinearSimultaneousMeasurement make_arthurs_kelly(GaussianState probe) {
    LinearSimultaneousMeasurement m{std::nullopt, std::nullopt, std::move(probe),
                                    Q1 + Q2 + 0.5 * P3, P1 - 0.5 * P2 + Q3,
                                    ModelFamily::ArthursKelly};
    detail::validate_measurement(m);
    return m;
}

/// Zero-mean probe with Var(Q) = Var(P) = hbar/2 in both modes.
inline GaussianState make_symmetric_probe(double hbar) {
    Eigen::Vector4d diag = Eigen::Vector4d::Constant(hbar / 2.0);
    return GaussianState({2, 3}, Eigen::Vector4d::Zero(), Eigen::MatrixXd(diag.asDiagonal()), hbar);
}

/// psi (x) xi on modes {1,2,3}.
inline GaussianState joint_initial_state(const LinearSimultaneousMeasurement& m,
                                         const MinUncertaintyParams& psi) {
    return tensor_product(make_min_uncertainty_state(psi), m.probe);
}

struct NoiseOperators {
    LinearObservable q;  // meter_q - Q1
    LinearObservable p;  // meter_p - P1
};

inline NoiseOperators noise_operators(const LinearSimultaneousMeasurement& m) {
    return {m.meter_q - Q1, m.meter_p - P1};
}

struct ErrorPair {
    double eps_q;
    double eps_p;
};

/// <N^2> in psi (x) xi from the product structure: with N = s + r, s acting on
/// the system and r on the probe,
///   <N^2> = Var_psi(s) + Var_xi(r) + (<s>_psi + <r>_xi)^2.
/// For the linear class this is (a21-1)^2 sigma(Q1)^2 + sigma(a22 Q2 + a23 Q3)^2
/// + ((a21-1)<Q1> + a22<Q2> + a23<Q3>)^2 and its momentum counterpart.
inline double qrms_error_sq_formula(const LinearObservable& noise, const GaussianState& probe,
                                    const MinUncertaintyParams& psi) {
    const GaussianState sys = make_min_uncertainty_state(psi);
    const auto s = moments(sys, noise.restricted_to({1}));
    const auto r = moments(probe, noise.restricted_to({2, 3}));
    const double mean = s.mean + r.mean + noise.offset;
    return s.variance + r.variance + mean * mean;
}

/// <N^2> computed directly on the joint three-mode state.
inline double qrms_error_sq_moments(const LinearObservable& noise, const GaussianState& joint) {
    return second_moment(joint, noise);
}

/// Noise-operator q-rms errors eps(Q1), eps(P1). Both evaluation routes are
/// run and must agree; the product-formula route is reported.
inline ErrorPair qrms_errors(const LinearSimultaneousMeasurement& m, const MinUncertaintyParams& psi) {
    const auto n = noise_operators(m);
    const GaussianState joint = joint_initial_state(m, psi);
    auto both = [&](const LinearObservable& noise) {
        const double f = qrms_error_sq_formula(noise, m.probe, psi);
        const double g = qrms_error_sq_moments(noise, joint);
        const double scale = std::max({1e-300, std::abs(f), std::abs(g)});
        if (std::abs(f - g) > 1e-12 * scale) {
            throw InvariantViolation("q-rms error routes disagree: " + std::to_string(f) + " vs " +
                                     std::to_string(g));
        }
        return std::sqrt(std::max(f, 0.0));
    };
    return {both(n.q), both(n.p)};
}

/// eps(Q1)^2 sigma(P1)^2 + sigma(Q1)^2 eps(P1)^2.
inline double branciard_ozawa_lhs(const ErrorPair& e, const MinUncertaintyParams& psi) {
    const double sq = psi.sigma1;
    const double sp = psi.sigma_p();
    return e.eps_q * e.eps_q * sp * sp + sq * sq * e.eps_p * e.eps_p;
}

/// Left side minus hbar^2/4; nonnegative for every measurement, zero at the
/// minimum trade-off.
inline double branciard_ozawa_residual(const ErrorPair& e, const MinUncertaintyParams& psi) {
    return branciard_ozawa_lhs(e, psi) - psi.hbar * psi.hbar / 4.0;
}

inline double heisenberg_product(const ErrorPair& e) { return e.eps_q * e.eps_p; }

/// eps eps + eps sigma + sigma eps - hbar/2.
inline double ozawa_inequality_residual(const ErrorPair& e, const MinUncertaintyParams& psi) {
    const double sq = psi.sigma1;
    const double sp = psi.sigma_p();
    return e.eps_q * e.eps_p + e.eps_q * sp + sq * e.eps_p - psi.hbar / 2.0;
}

/// Lower bound (in units of hbar^2) of the trade-off functional over all
/// linear measurements with given a21, b31; minimal value 1/4 on the segment
/// a21, b31 >= 0, a21 + b31 = 1.
inline double lower_bound_l(double a21, double b31) {
    return ((a21 - 1.0) * (a21 - 1.0) + (b31 - 1.0) * (b31 - 1.0)) / 4.0 + std::abs(a21 * b31) / 2.0;
}

/// Residuals of the three necessary and sufficient conditions for the
/// minimum trade-off:
///   (i)   both noise operators have zero mean;
///   (ii)  sigma(probe part of N_q) = |a21 b31|^{1/2} sigma(Q1), likewise for P;
///   (iii) a21 > 0, b31 > 0, a21 + b31 = 1.
struct TheoremReport {
    std::array<double, 2> cond_i_residuals{};
    std::array<double, 2> cond_ii_residuals{};
    double a21 = 0.0;
    double b31 = 0.0;
    double cond_iii_residual = 0.0;  // a21 + b31 - 1
    bool pass_i = false;
    bool pass_ii = false;
    bool pass_iii = false;
    double bo_residual = 0.0;
    double tolerance = 1e-9;

    bool all_pass() const { return pass_i && pass_ii && pass_iii; }
};

inline TheoremReport check_theorem_conditions(const LinearSimultaneousMeasurement& m,
                                              const MinUncertaintyParams& psi, double tol = 1e-9) {
    psi.validate();
    TheoremReport r;
    r.tolerance = tol;
    const auto n = noise_operators(m);
    const GaussianState joint = joint_initial_state(m, psi);

    r.cond_i_residuals = {moments(joint, n.q).mean, moments(joint, n.p).mean};
    const double q_scale = std::max({1.0, psi.sigma1, std::abs(psi.q1)});
    const double p_scale = std::max({1.0, psi.sigma_p(), std::abs(psi.p1)});
    r.pass_i = std::abs(r.cond_i_residuals[0]) <= tol * q_scale &&
               std::abs(r.cond_i_residuals[1]) <= tol * p_scale;

    r.a21 = m.meter_q.q[0];
    r.b31 = m.meter_p.p[0];
    const double g = std::sqrt(std::abs(r.a21 * r.b31));
    const double sq = std::sqrt(moments(m.probe, n.q.restricted_to({2, 3})).variance);
    const double sp = std::sqrt(moments(m.probe, n.p.restricted_to({2, 3})).variance);
    r.cond_ii_residuals = {sq - g * psi.sigma1, sp - g * psi.sigma_p()};
    r.pass_ii = std::abs(r.cond_ii_residuals[0]) <= tol * std::max(1.0, psi.sigma1) &&
                std::abs(r.cond_ii_residuals[1]) <= tol * std::max(1.0, psi.sigma_p());

    r.cond_iii_residual = r.a21 + r.b31 - 1.0;
    r.pass_iii = r.a21 > tol && r.b31 > tol && std::abs(r.cond_iii_residual) <= tol;

    r.bo_residual = branciard_ozawa_residual(qrms_errors(m, psi), psi);
    return r;
}

/// F(tau, gamma2, E) = c1(tau) + gamma2 c2(tau); the coupling equations read
/// nu / alpha1 = (1 - nu) / (-alpha3) = F.
inline double coupling_time_factor(double tau, double gamma2, double E) {
    const auto c = propagator_coefficients(E, tau);
    return c.c1 + gamma2 * c.c2;
}

struct Couplings {
    double alpha1;
    double alpha3;
};

/// Couplings that make a21 = nu and b31 = 1 - nu at time tau.
inline Couplings solve_couplings(double nu, double tau, double gamma2, double E) {
    check_nu(nu);
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
    const double f = coupling_time_factor(tau, gamma2, E);
    if (!std::isfinite(f) || std::abs(f) < 1e-14) {
        throw DegenerateCoupling("coupling time factor vanishes; no couplings reach nu");
    }
    return {nu / f, -(1.0 - nu) / f};
}

/// Minimum trade-off model from free parameters (tau, gamma2, E): couplings
/// from solve_couplings, probe xi_{nu, a22}.
inline LinearSimultaneousMeasurement build_minimum_tradeoff_model(double nu, double tau, double gamma2,
                                                                  double E,
                                                                  const MinUncertaintyParams& psi) {
    const auto c = solve_couplings(nu, tau, gamma2, E);
    const auto gen = SolvableGenerator::from_couplings(c.alpha1, c.alpha3, gamma2, E, tau);
    const auto tr = propagate(gen);
    auto m = make_linear_measurement(tr, make_probe_state(nu, tr.a(2, 2), psi));
    m.generator = gen;
    return m;
}

/// (tau, S, kappa, E) for one member of a named family.
struct FamilyParameters {
    double tau;
    double kappa;
    double E;
    SolvableGenerator generator;
};

inline FamilyParameters family_parameters(ModelFamily family, double nu) {
    check_nu(nu);
    const double mu = 1.0 - nu;
    switch (family) {
        case ModelFamily::X: {
            const double tau = std::numbers::pi / 2.0;
            return {tau, 2.0, 1.0,
                    SolvableGenerator::from_entries(nu / 2.0, -2.0 / nu, -mu / 2.0, 2.0 / mu, 1.0, 1.0, tau)};
        }
        case ModelFamily::Y2:
            return {1.0, 4.0, 0.0,
                    SolvableGenerator::from_entries(nu / 2.0, -4.0 / nu, -mu / 2.0, 4.0 / mu, 2.0, 0.0, 1.0)};
        case ModelFamily::Y0:
            return {1.0, 1.0, 0.0, SolvableGenerator::from_entries(nu, 0.0, -mu, 0.0, 0.0, 0.0, 1.0)};
        case ModelFamily::Z: {
            const double tau = std::numbers::ln2;
            return {tau, 2.0, -1.0, SolvableGenerator::from_entries(nu, 0.0, -mu, 0.0, 1.0, -1.0, tau)};
        }
        case ModelFamily::ArthursKelly:
            break;
    }
    throw InvalidArgument("the Arthurs-Kelly model is not a member of the minimum trade-off families");
}

inline LinearSimultaneousMeasurement build_model(ModelFamily family, double nu,
                                                 const MinUncertaintyParams& psi) {
    const auto fp = family_parameters(family, nu);
    auto m = make_linear_measurement(fp.generator, make_probe_state(nu, fp.kappa, psi));
    m.family = family;
    return m;
}

/// Arthurs-Kelly errors; independent of the system state since the noise
/// operators Q2 + P3/2 and -P2/2 + Q3 carry no mode-1 terms.
inline ErrorPair arthurs_kelly_errors(const GaussianState& probe) {
    if (probe.modes() != std::vector<int>{2, 3}) {
        throw InvalidArgument("probe state must live on modes {2,3}");
    }
    return {std::sqrt(second_moment(probe, Q2 + 0.5 * P3)),
            std::sqrt(second_moment(probe, -0.5 * P2 + Q3))};
}

}  // namespace qpmeas
