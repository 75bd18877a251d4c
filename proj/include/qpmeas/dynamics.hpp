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

// Linear Heisenberg dynamics generated by the bilinear system-probe
// coupling. Positions evolve by e^{tR}, momenta by e^{-tR^T}.

#pragma once

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "qpmeas/errors.hpp"
#include "qpmeas/quadrature.hpp"

namespace qpmeas {

/// Couplings of the interaction
///   K [ a1 Q1P2 + b1 P1Q2 + g1 (Q1P1 - Q2P2)
///     + a2 Q2P3 + b2 P2Q3 + g2 (Q2P2 - Q3P3)
///     + a3 Q3P1 + b3 P3Q1 + g3 (Q3P3 - Q1P1) ].
/// Only K = 1 is modelled in code; another K is the same dynamics at time K*t.
struct InteractionParams {
    std::array<double, 3> alpha{};
    std::array<double, 3> beta{};
    std::array<double, 3> gamma{};
    double K = 1.0;
};

/// Generator R with Q(t) = e^{tR} Q(0). Always traceless.
inline Eigen::Matrix3d build_generator(const InteractionParams& p) {
    if (!(p.K > 0.0)) throw InvalidArgument("coupling constant K must be positive");
    const auto& a = p.alpha;
    const auto& b = p.beta;
    const auto& g = p.gamma;
    Eigen::Matrix3d r;
    r << g[0] - g[2], b[0], a[2],
         a[0], g[1] - g[0], b[1],
         b[2], a[1], g[2] - g[1];
    return r;
}

/// Coefficients (c1, c2) with e^{tS} = I + c1 S + c2 S^2 whenever S^3 = -E S.
struct PropagatorCoefficients {
    double c1;
    double c2;
};

inline PropagatorCoefficients propagator_coefficients(double E, double t) {
    if (std::abs(E) < 1e-14) return {t, 0.5 * t * t};
    if (E > 0.0) {
        const double w = std::sqrt(E);
        const double h = std::sin(0.5 * t * w);
        // 1 - cos(x) = 2 sin^2(x/2), stable for small x.
        return {std::sin(t * w) / w, 2.0 * h * h / E};
    }
    const double w = std::sqrt(-E);
    const double h = std::sinh(0.5 * t * w);
    return {std::sinh(t * w) / w, 2.0 * h * h / (-E)};
}

/// Generator of the exactly solvable class
///
///     S = [[0,  b1, a3],
///          [a1, g2, 0 ],
///          [b3, 0, -g2]]   with a1 b1 = a3 b3 = -(g2^2 + E)/2,
///
/// together with the measurement time tau. Construction validates the
/// pattern, the product constraint, the E relation and S^3 = -E S.
class SolvableGenerator {
public:
    static SolvableGenerator from_entries(double alpha1, double beta1, double alpha3, double beta3,
                                          double gamma2, double E, double tau) {
        Eigen::Matrix3d s;
        s << 0.0, beta1, alpha3,
             alpha1, gamma2, 0.0,
             beta3, 0.0, -gamma2;
        return SolvableGenerator(s, E, tau);
    }

    /// Derives beta1 and beta3 from the E relation. Needs alpha1, alpha3 != 0
    /// unless g2^2 + E = 0, in which case both betas are zero.
    static SolvableGenerator from_couplings(double alpha1, double alpha3, double gamma2, double E,
                                            double tau) {
        const double prod = -(gamma2 * gamma2 + E) / 2.0;
        double beta1 = 0.0;
        double beta3 = 0.0;
        if (prod != 0.0) {
            if (alpha1 == 0.0 || alpha3 == 0.0) {
                throw InvariantViolation("alpha1 and alpha3 must be nonzero when gamma2^2 + E != 0");
            }
            beta1 = prod / alpha1;
            beta3 = prod / alpha3;
        }
        return from_entries(alpha1, beta1, alpha3, beta3, gamma2, E, tau);
    }

    static SolvableGenerator from_params(const InteractionParams& p, double E, double tau) {
        if (p.alpha[1] != 0.0 || p.beta[1] != 0.0 || p.gamma[0] != 0.0 || p.gamma[2] != 0.0) {
            throw InvariantViolation("solvable class needs alpha2 = beta2 = gamma1 = gamma3 = 0");
        }
        return SolvableGenerator(build_generator(p), E, tau);
    }

    static SolvableGenerator from_matrix(const Eigen::Matrix3d& s, double E, double tau) {
        return SolvableGenerator(s, E, tau);
    }

    const Eigen::Matrix3d& matrix() const { return s_; }
    double E() const { return e_; }
    double tau() const { return tau_; }
    double gamma2() const { return s_(1, 1); }
    double alpha1() const { return s_(1, 0); }
    double alpha3() const { return s_(0, 2); }
    double beta1() const { return s_(0, 1); }
    double beta3() const { return s_(2, 0); }

private:
    SolvableGenerator(Eigen::Matrix3d s, double E, double tau) : s_(std::move(s)), e_(E), tau_(tau) {
        validate();
    }

    void validate() const {
        if (!s_.allFinite() || !std::isfinite(e_)) throw InvariantViolation("non-finite generator");
        if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
            throw InvariantViolation("measurement time tau must be positive");
        }
        if (s_(0, 0) != 0.0 || s_(1, 2) != 0.0 || s_(2, 1) != 0.0 || s_(2, 2) != -s_(1, 1)) {
            throw InvariantViolation("generator does not have the solvable sparsity pattern");
        }
        const double p1 = alpha1() * beta1();
        const double p3 = alpha3() * beta3();
        const double g2 = gamma2();
        const double prod_scale = std::max({1.0, std::abs(p1), std::abs(p3), g2 * g2, std::abs(e_)});
        if (std::abs(p1 - p3) > 1e-12 * prod_scale) {
            throw InvariantViolation("alpha1*beta1 != alpha3*beta3");
        }
        if (std::abs(p1 + (g2 * g2 + e_) / 2.0) > 1e-12 * prod_scale) {
            throw InvariantViolation("alpha1*beta1 != -(gamma2^2 + E)/2");
        }
        const double n = std::max(1.0, s_.cwiseAbs().maxCoeff());
        const Eigen::Matrix3d cube = s_ * s_ * s_ + e_ * s_;
        if (cube.cwiseAbs().maxCoeff() > 1e-12 * n * n * n) {
            throw InvariantViolation("generator violates S^3 = -E S");
        }
    }

    Eigen::Matrix3d s_;
    double e_;
    double tau_;
};

/// e^{tS} from the three-branch closed form (trigonometric for E > 0,
/// polynomial for E = 0, hyperbolic for E < 0).
inline Eigen::Matrix3d closed_form_propagator(const SolvableGenerator& gen, double t) {
    const auto c = propagator_coefficients(gen.E(), t);
    const Eigen::Matrix3d& s = gen.matrix();
    return Eigen::Matrix3d::Identity() + c.c1 * s + c.c2 * (s * s);
}

/// e^{-tS^T} = (e^{-tS})^T, the momentum propagator.
inline Eigen::Matrix3d closed_form_dual_propagator(const SolvableGenerator& gen, double t) {
    return closed_form_propagator(gen, -t).transpose();
}

/// e^{tM} by scaling and squaring of a truncated Taylor series. Works for any
/// real 3x3 matrix; used for generators outside the solvable class and as an
/// independent check of the closed form.
inline Eigen::Matrix3d numeric_expm(const Eigen::Matrix3d& m, double t) {
    Eigen::Matrix3d x = t * m;
    const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.25) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
        x /= std::ldexp(1.0, squarings);
    }
    Eigen::Matrix3d sum = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
    for (int k = 1; k <= 30; ++k) {
        term = term * x / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-20 * sum.cwiseAbs().maxCoeff()) break;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

/// A = e^{tau R}, B = e^{-tau R^T}: Q_i(tau) = sum_j a_ij Q_j, P_i(tau) = sum_j b_ij P_j.
class PropagatedTransform {
public:
    PropagatedTransform(Eigen::Matrix3d a, Eigen::Matrix3d b, double tau)
        : a_(std::move(a)), b_(std::move(b)), tau_(tau) {
        validate();
    }

    const Eigen::Matrix3d& A() const { return a_; }
    const Eigen::Matrix3d& B() const { return b_; }
    double tau() const { return tau_; }

    /// Entry a_ij with one-based indices, matching the usual matrix notation.
    double a(int i, int j) const { return a_(i - 1, j - 1); }
    double b(int i, int j) const { return b_(i - 1, j - 1); }

private:
    void validate() const {
        if (!(tau_ >= 0.0)) throw InvariantViolation("tau must be nonnegative");
        const double scale = std::max(1.0, a_.cwiseAbs().maxCoeff() * b_.cwiseAbs().maxCoeff());
        if ((a_ * b_.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
            throw InvariantViolation("A B^T != I: transform does not preserve commutators");
        }
        const double det_scale = std::max(1.0, std::pow(a_.cwiseAbs().maxCoeff(), 3));
        if (std::abs(a_.determinant() - 1.0) > 1e-10 * det_scale ||
            std::abs(b_.determinant() - 1.0) > 1e-10 * std::max(1.0, std::pow(b_.cwiseAbs().maxCoeff(), 3))) {
            throw InvariantViolation("transform is not in SL(3,R)");
        }
    }

    Eigen::Matrix3d a_;
    Eigen::Matrix3d b_;
    double tau_;
};

inline PropagatedTransform propagate(const SolvableGenerator& gen) {
    return PropagatedTransform(closed_form_propagator(gen, gen.tau()),
                               closed_form_dual_propagator(gen, gen.tau()), gen.tau());
}

/// Transform for an arbitrary generator R via numeric_expm.
inline PropagatedTransform propagate_numeric(const Eigen::Matrix3d& r, double tau) {
    return PropagatedTransform(numeric_expm(r, tau), numeric_expm(r.transpose(), -tau), tau);
}

/// Heisenberg-picture quadratures at the transform's time, ordered
/// Q1, Q2, Q3, P1, P2, P3.
inline std::array<LinearObservable, 6> heisenberg_observables(const PropagatedTransform& tr) {
    std::array<LinearObservable, 6> out;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            out[i].q[j] = tr.A()(i, j);
            out[3 + i].p[j] = tr.B()(i, j);
        }
    }
    return out;
}

inline LinearObservable position_at(const PropagatedTransform& tr, int mode) {
    LinearObservable::check_mode(mode);
    return heisenberg_observables(tr)[mode - 1];
}

inline LinearObservable momentum_at(const PropagatedTransform& tr, int mode) {
    LinearObservable::check_mode(mode);
    return heisenberg_observables(tr)[2 + mode];
}

}  // namespace qpmeas
