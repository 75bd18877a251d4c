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

// Phase-space primitives for the three-mode system + probe: linear
// observables over (Q1,Q2,Q3,P1,P2,P3), their canonical commutator and
// Gaussian states described by first and second moments.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpmeas/errors.hpp"

namespace qpmeas {

inline constexpr int kNumModes = 3;

/// A real linear combination of the six quadratures plus a constant.
/// Index 0 of `q` / `p` is mode 1.
struct LinearObservable {
    std::array<double, kNumModes> q{};
    std::array<double, kNumModes> p{};
    double offset = 0.0;

    static LinearObservable position(int mode) {
        check_mode(mode);
        LinearObservable f;
        f.q[mode - 1] = 1.0;
        return f;
    }

    static LinearObservable momentum(int mode) {
        check_mode(mode);
        LinearObservable f;
        f.p[mode - 1] = 1.0;
        return f;
    }

    static LinearObservable constant(double value) {
        LinearObservable f;
        f.offset = value;
        return f;
    }

    /// True when any coefficient of `mode` is nonzero.
    bool touches(int mode) const { return q[mode - 1] != 0.0 || p[mode - 1] != 0.0; }

    /// Same observable with every mode outside `keep` zeroed and no offset.
    LinearObservable restricted_to(std::initializer_list<int> keep) const {
        LinearObservable r;
        for (int m : keep) {
            r.q[m - 1] = q[m - 1];
            r.p[m - 1] = p[m - 1];
        }
        return r;
    }

    /// Largest absolute coefficient, offset excluded.
    double coefficient_norm() const {
        double n = 0.0;
        for (int j = 0; j < kNumModes; ++j) n = std::max({n, std::abs(q[j]), std::abs(p[j])});
        return n;
    }

    LinearObservable& operator+=(const LinearObservable& o) {
        for (int j = 0; j < kNumModes; ++j) {
            q[j] += o.q[j];
            p[j] += o.p[j];
        }
        offset += o.offset;
        return *this;
    }
    LinearObservable& operator-=(const LinearObservable& o) { return *this += -1.0 * o; }
    LinearObservable& operator*=(double s) {
        for (int j = 0; j < kNumModes; ++j) {
            q[j] *= s;
            p[j] *= s;
        }
        offset *= s;
        return *this;
    }

    friend LinearObservable operator+(LinearObservable a, const LinearObservable& b) { return a += b; }
    friend LinearObservable operator-(LinearObservable a, const LinearObservable& b) { return a -= b; }
    friend LinearObservable operator*(double s, LinearObservable a) { return a *= s; }
    friend LinearObservable operator*(LinearObservable a, double s) { return a *= s; }
    friend LinearObservable operator-(LinearObservable a) { return a *= -1.0; }
    friend bool operator==(const LinearObservable&, const LinearObservable&) = default;

    static void check_mode(int mode) {
        if (mode < 1 || mode > kNumModes) {
            throw InvalidArgument("mode index must be 1, 2 or 3, got " + std::to_string(mode));
        }
    }
};

inline const LinearObservable Q1 = LinearObservable::position(1);
inline const LinearObservable Q2 = LinearObservable::position(2);
inline const LinearObservable Q3 = LinearObservable::position(3);
inline const LinearObservable P1 = LinearObservable::momentum(1);
inline const LinearObservable P2 = LinearObservable::momentum(2);
inline const LinearObservable P3 = LinearObservable::momentum(3);

/// c such that [f, g] = i hbar c 1. Offsets commute with everything.
inline double commutator_coeff(const LinearObservable& f, const LinearObservable& g) {
    double c = 0.0;
    for (int j = 0; j < kNumModes; ++j) c += f.q[j] * g.p[j] - f.p[j] * g.q[j];
    return c;
}

/// Pure Gaussian wave packet of the measured particle (mode 1).
struct MinUncertaintyParams {
    double q1 = 0.0;
    double p1 = 0.0;
    double sigma1 = 1.0;
    double hbar = 1.0;

    void validate() const {
        if (!(sigma1 > 0.0) || !std::isfinite(sigma1)) {
            throw InvalidArgument("sigma1 must be positive and finite");
        }
        if (!(hbar > 0.0) || !std::isfinite(hbar)) {
            throw InvalidArgument("hbar must be positive and finite");
        }
        if (!std::isfinite(q1) || !std::isfinite(p1)) {
            throw InvalidArgument("q1 and p1 must be finite");
        }
    }

    /// Momentum spread hbar / (2 sigma1).
    double sigma_p() const { return hbar / (2.0 * sigma1); }
};

/// Gaussian state over an increasing subset of the modes {1,2,3}.
///
/// Layout of `mean` and `cov`: all positions of the carried modes first,
/// then all momenta, each in mode order. Covariances are symmetrized
/// (Cov(X,Y) = <XY + YX>/2 - <X><Y>), so `cov` is real symmetric and PSD.
/// The type holds any Gaussian moments; it does not require purity.
class GaussianState {
public:
    GaussianState(std::vector<int> modes, Eigen::VectorXd mean, Eigen::MatrixXd cov, double hbar)
        : modes_(std::move(modes)), mean_(std::move(mean)), cov_(std::move(cov)), hbar_(hbar) {
        validate();
    }

    const std::vector<int>& modes() const { return modes_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    double hbar() const { return hbar_; }
    int num_modes() const { return static_cast<int>(modes_.size()); }

    bool has_mode(int mode) const {
        return std::find(modes_.begin(), modes_.end(), mode) != modes_.end();
    }

    /// Row of Q_mode in mean/cov, if the mode is carried.
    std::optional<int> q_index(int mode) const {
        auto it = std::find(modes_.begin(), modes_.end(), mode);
        if (it == modes_.end()) return std::nullopt;
        return static_cast<int>(it - modes_.begin());
    }

    std::optional<int> p_index(int mode) const {
        auto i = q_index(mode);
        if (!i) return std::nullopt;
        return *i + num_modes();
    }

    /// Coefficient vector of `f` in this state's local layout.
    Eigen::VectorXd local_coefficients(const LinearObservable& f) const {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * num_modes());
        for (int m = 1; m <= kNumModes; ++m) {
            if (!f.touches(m)) continue;
            auto i = q_index(m);
            if (!i) {
                throw ModeMismatch("observable acts on mode " + std::to_string(m) +
                                   " which the state does not carry");
            }
            c[*i] = f.q[m - 1];
            c[*i + num_modes()] = f.p[m - 1];
        }
        return c;
    }

private:
    void validate() const {
        if (!(hbar_ > 0.0)) throw InvalidArgument("hbar must be positive");
        if (modes_.empty()) throw InvalidArgument("state must carry at least one mode");
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            LinearObservable::check_mode(modes_[i]);
            if (i > 0 && modes_[i] <= modes_[i - 1]) {
                throw InvalidArgument("modes must be strictly increasing");
            }
        }
        const auto dim = static_cast<Eigen::Index>(2 * modes_.size());
        if (mean_.size() != dim || cov_.rows() != dim || cov_.cols() != dim) {
            throw InvalidArgument("mean/cov dimensions do not match the number of modes");
        }
        if (!mean_.allFinite() || !cov_.allFinite()) throw InvalidArgument("non-finite moments");
        const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
        if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw InvariantViolation("covariance matrix is not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        const double lmax = es.eigenvalues().maxCoeff();
        if (lmin < -1e-10 * std::max(lmax, 0.0)) {
            throw InvariantViolation("covariance matrix is not positive semidefinite");
        }
    }

    std::vector<int> modes_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    double hbar_;
};

struct Moments {
    double mean;
    double variance;
};

inline Moments moments(const GaussianState& state, const LinearObservable& f) {
    const Eigen::VectorXd c = state.local_coefficients(f);
    return {c.dot(state.mean()) + f.offset, c.dot(state.cov() * c)};
}

/// Symmetrized covariance of two observables.
inline double covariance(const GaussianState& state, const LinearObservable& f,
                         const LinearObservable& g) {
    const Eigen::VectorXd a = state.local_coefficients(f);
    const Eigen::VectorXd b = state.local_coefficients(g);
    return a.dot(state.cov() * b);
}

/// <f^2> = Var(f) + <f>^2.
inline double second_moment(const GaussianState& state, const LinearObservable& f) {
    const auto m = moments(state, f);
    return m.variance + m.mean * m.mean;
}

inline GaussianState make_min_uncertainty_state(const MinUncertaintyParams& params) {
    params.validate();
    Eigen::Vector2d mean(params.q1, params.p1);
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    cov(0, 0) = params.sigma1 * params.sigma1;
    cov(1, 1) = params.sigma_p() * params.sigma_p();
    return GaussianState({1}, mean, cov, params.hbar);
}

/// Product probe xi_{nu,kappa} on modes {2,3}: each mode is a minimum
/// uncertainty packet, Var(Q2) = nu(1-nu) sigma1^2 / (2 kappa^2),
/// Var(Q3) = 2 kappa^2 sigma1^2 / (nu(1-nu)), <Q2> = (1-nu) q1 / kappa,
/// <P3> = nu p1 / kappa and the other means vanish.
inline GaussianState make_probe_state(double nu, double kappa, const MinUncertaintyParams& psi) {
    psi.validate();
    if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("nu must lie in the open interval (0,1)");
    if (kappa == 0.0 || !std::isfinite(kappa)) throw InvalidArgument("kappa must be nonzero");
    const double s2 = psi.sigma1 * psi.sigma1;
    const double w = nu * (1.0 - nu);
    const double var_q2 = w * s2 / (2.0 * kappa * kappa);
    const double var_q3 = 2.0 * kappa * kappa * s2 / w;
    const double h2 = psi.hbar * psi.hbar / 4.0;

    Eigen::Vector4d mean((1.0 - nu) * psi.q1 / kappa, 0.0, 0.0, nu * psi.p1 / kappa);
    Eigen::Vector4d diag(var_q2, var_q3, h2 / var_q2, h2 / var_q3);
    return GaussianState({2, 3}, mean, Eigen::MatrixXd(diag.asDiagonal()), psi.hbar);
}

/// Joint state of two independent subsystems on disjoint modes.
inline GaussianState tensor_product(const GaussianState& a, const GaussianState& b) {
    if (a.hbar() != b.hbar()) throw InvalidArgument("tensor product of states with different hbar");
    std::vector<int> modes = a.modes();
    for (int m : b.modes()) {
        if (a.has_mode(m)) throw InvalidArgument("tensor product factors share a mode");
        modes.push_back(m);
    }
    std::sort(modes.begin(), modes.end());
    const int n = static_cast<int>(modes.size());

    // Source row of every local index of the merged layout.
    auto locate = [&](int mode, bool momentum) -> std::pair<const GaussianState*, int> {
        const GaussianState* src = a.has_mode(mode) ? &a : &b;
        return {src, momentum ? *src->p_index(mode) : *src->q_index(mode)};
    };
    Eigen::VectorXd mean(2 * n);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        auto [si, ri] = locate(modes[i % n], i >= n);
        mean[i] = si->mean()[ri];
        for (int j = 0; j < 2 * n; ++j) {
            auto [sj, rj] = locate(modes[j % n], j >= n);
            if (si == sj) cov(i, j) = si->cov()(ri, rj);
        }
    }
    return GaussianState(std::move(modes), mean, cov, a.hbar());
}

/// Robertson-Schroedinger condition V + i (hbar/2) Omega >= 0, which every
/// physical Gaussian state obeys.
inline bool satisfies_uncertainty_principle(const GaussianState& state, double tol = 1e-10) {
    const int n = state.num_modes();
    Eigen::MatrixXcd m = state.cov().cast<std::complex<double>>();
    const std::complex<double> ih(0.0, state.hbar() / 2.0);
    for (int k = 0; k < n; ++k) {
        m(k, k + n) += ih;
        m(k + n, k) -= ih;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, state.cov().cwiseAbs().maxCoeff());
    return es.eigenvalues().minCoeff() >= -tol * scale;
}

}  // namespace qpmeas
