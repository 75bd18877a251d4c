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

// Outcome statistics of commuting Heisenberg observables: joint Gaussian
// laws, conditioning, Gauss' error, seeded sampling, posterior states and
// region-conditioned mixtures.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpmeas/errors.hpp"
#include "qpmeas/measurement.hpp"
#include "qpmeas/quadrature.hpp"

namespace qpmeas {

/// Gaussian law N(mean, cov) of a list of jointly measurable observables.
/// Characteristic function exp(i<m,k> - <k,Vk>/2).
struct JointGaussian {
    std::vector<std::string> labels;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    int dim() const { return static_cast<int>(mean.size()); }

    void validate() const {
        const auto d = mean.size();
        if (cov.rows() != d || cov.cols() != d || static_cast<Eigen::Index>(labels.size()) != d) {
            throw InvalidArgument("joint Gaussian dimensions are inconsistent");
        }
        const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
        if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw InvariantViolation("joint covariance is not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
        if (d > 0 && es.eigenvalues().minCoeff() < -1e-10 * std::max(0.0, es.eigenvalues().maxCoeff())) {
            throw InvariantViolation("joint covariance is not positive semidefinite");
        }
    }
};

/// Joint outcome law of mutually commuting observables in a Gaussian state.
/// Rejects the first non-commuting pair found.
inline JointGaussian joint_distribution(const std::vector<LinearObservable>& observables,
                                        const GaussianState& state,
                                        std::vector<std::string> labels = {}) {
    const auto d = observables.size();
    if (labels.empty()) {
        for (std::size_t i = 0; i < d; ++i) labels.push_back("X" + std::to_string(i + 1));
    }
    if (labels.size() != d) throw InvalidArgument("one label per observable required");
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const double c = commutator_coeff(observables[i], observables[j]);
            const double scale =
                std::max(1.0, observables[i].coefficient_norm() * observables[j].coefficient_norm());
            if (std::abs(c) > 1e-12 * scale) throw NonCommuting(i, j, c);
        }
    }
    Eigen::MatrixXd coeffs(static_cast<Eigen::Index>(d), 2 * state.num_modes());
    Eigen::VectorXd offsets(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        coeffs.row(static_cast<Eigen::Index>(i)) = state.local_coefficients(observables[i]).transpose();
        offsets[static_cast<Eigen::Index>(i)] = observables[i].offset;
    }
    JointGaussian j{std::move(labels), coeffs * state.mean() + offsets,
                    coeffs * state.cov() * coeffs.transpose()};
    j.cov = 0.5 * (j.cov + j.cov.transpose());
    return j;
}

inline std::complex<double> characteristic_function(const JointGaussian& j, const Eigen::VectorXd& k) {
    return std::exp(std::complex<double>(-0.5 * k.dot(j.cov * k), j.mean.dot(k)));
}

/// Log density; needs a nonsingular covariance.
inline double log_density(const JointGaussian& j, const Eigen::VectorXd& x) {
    Eigen::LLT<Eigen::MatrixXd> llt(j.cov);
    if (llt.info() != Eigen::Success) throw SingularBlock("density of a degenerate Gaussian");
    const Eigen::VectorXd r = llt.matrixL().solve(x - j.mean);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (r.squaredNorm() + log_det + j.dim() * std::log(2.0 * std::numbers::pi));
}

inline JointGaussian marginal(const JointGaussian& j, const std::vector<int>& keep) {
    JointGaussian m;
    const auto n = static_cast<Eigen::Index>(keep.size());
    m.mean.resize(n);
    m.cov.resize(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        if (keep[a] < 0 || keep[a] >= j.dim()) throw InvalidArgument("marginal index out of range");
        m.labels.push_back(j.labels[keep[a]]);
        m.mean[a] = j.mean[keep[a]];
        for (Eigen::Index b = 0; b < n; ++b) m.cov(a, b) = j.cov(keep[a], keep[b]);
    }
    return m;
}

/// Law of the remaining components given exact values of the `given` ones
/// (Schur complement). The conditioned block must be positive definite.
inline JointGaussian conditional(const JointGaussian& j, const std::vector<int>& given,
                                 const std::vector<double>& values) {
    if (given.size() != values.size()) throw InvalidArgument("one value per conditioned index");
    std::vector<int> rest;
    for (int i = 0; i < j.dim(); ++i) {
        if (std::find(given.begin(), given.end(), i) == given.end()) rest.push_back(i);
    }
    const auto g = static_cast<Eigen::Index>(given.size());
    const auto r = static_cast<Eigen::Index>(rest.size());
    Eigen::MatrixXd vgg(g, g), vrg(r, g), vrr(r, r);
    Eigen::VectorXd dev(g), mr(r);
    for (Eigen::Index a = 0; a < g; ++a) {
        if (given[a] < 0 || given[a] >= j.dim()) throw InvalidArgument("conditioned index out of range");
        dev[a] = values[a] - j.mean[given[a]];
        for (Eigen::Index b = 0; b < g; ++b) vgg(a, b) = j.cov(given[a], given[b]);
    }
    for (Eigen::Index a = 0; a < r; ++a) {
        mr[a] = j.mean[rest[a]];
        for (Eigen::Index b = 0; b < g; ++b) vrg(a, b) = j.cov(rest[a], given[b]);
        for (Eigen::Index b = 0; b < r; ++b) vrr(a, b) = j.cov(rest[a], rest[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(vgg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(vgg, Eigen::EigenvaluesOnly);
    if (llt.info() != Eigen::Success ||
        (g > 0 && es.eigenvalues().minCoeff() <= 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff()))) {
        throw SingularBlock("conditioned covariance block is singular");
    }
    JointGaussian c;
    for (int i : rest) c.labels.push_back(j.labels[i]);
    c.mean = mr + vrg * llt.solve(dev);
    c.cov = vrr - vrg * llt.solve(vrg.transpose());
    c.cov = 0.5 * (c.cov + c.cov.transpose());
    return c;
}

/// Gauss' error (E[(x_i - x_j)^2])^{1/2} of two components.
inline double gauss_error(const JointGaussian& j, int i, int k) {
    if (i < 0 || k < 0 || i >= j.dim() || k >= j.dim()) throw InvalidArgument("index out of range");
    const double dm = j.mean[i] - j.mean[k];
    const double v = j.cov(i, i) + j.cov(k, k) - 2.0 * j.cov(i, k);
    return std::sqrt(std::max(v, 0.0) + dm * dm);
}

/// Symmetric square root L with L L^T = cov. Eigenvalues down to
/// -1e-12 * max(1, lambda_max) are clipped to zero; anything lower is rejected.
inline Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd lam = es.eigenvalues();
    const double floor = -1e-12 * std::max(1.0, lam.size() ? lam.maxCoeff() : 0.0);
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] < floor) throw InvariantViolation("covariance is not positive semidefinite");
        lam[i] = std::sqrt(std::max(lam[i], 0.0));
    }
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

inline constexpr std::size_t kSampleChunk = 1 << 14;

/// Engine for one chunk of a sampling run. Chunk streams depend only on
/// (seed, chunk index), so chunks can be drawn in any order or in parallel.
inline std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    return std::mt19937_64(seq);
}

/// n i.i.d. draws, one per row.
inline Eigen::MatrixXd sample(const JointGaussian& j, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("sample count must be at least 1");
    const Eigen::MatrixXd root = covariance_sqrt(j.cov);
    const int d = j.dim();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    Eigen::VectorXd z(d);
    for (std::size_t start = 0, chunk = 0; start < n; start += kSampleChunk, ++chunk) {
        auto rng = chunk_engine(seed, chunk);
        std::normal_distribution<double> normal;
        const std::size_t stop = std::min(n, start + kSampleChunk);
        for (std::size_t row = start; row < stop; ++row) {
            for (int a = 0; a < d; ++a) z[a] = normal(rng);
            out.row(static_cast<Eigen::Index>(row)) = (j.mean + root * z).transpose();
        }
    }
    return out;
}

/// Posterior states of the Y0 and Z families: outcome y = (z, w) of the
/// meters (Q2(tau), P3(tau)) leaves the particle in the minimum uncertainty
/// packet with <Q1> = (z - (1-nu) q1)/nu, <P1> = (w - nu p1)/(1-nu) and
/// Var(Q1) = (1-nu) sigma1^2 / nu.
struct PosteriorFamily {
    double nu;
    MinUncertaintyParams psi;

    void validate() const {
        check_nu(nu);
        psi.validate();
    }
};

inline GaussianState posterior_state(const PosteriorFamily& fam, double y1, double y2) {
    fam.validate();
    const double nu = fam.nu;
    const auto& psi = fam.psi;
    const double var_q = (1.0 - nu) / nu * psi.sigma1 * psi.sigma1;
    Eigen::Vector2d mean((y1 - (1.0 - nu) * psi.q1) / nu, (y2 - nu * psi.p1) / (1.0 - nu));
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    cov(0, 0) = var_q;
    cov(1, 1) = psi.hbar * psi.hbar / 4.0 / var_q;
    return GaussianState({1}, mean, cov, psi.hbar);
}

inline void check_posterior_family(ModelFamily f) {
    if (f != ModelFamily::Y0 && f != ModelFamily::Z) {
        throw InvalidArgument("posterior families are only available for the Y0 and Z models");
    }
}

struct PosteriorConsistencyReport {
    std::size_t outcomes = 0;
    double max_mean_dev_q = 0.0;
    double max_var_dev_q = 0.0;
    double max_mean_dev_p = 0.0;
    double max_var_dev_p = 0.0;
    double max_product_dev = 0.0;  // |Var(Q1) Var(P1) - hbar^2/4| over posterior states

    double max_deviation() const {
        return std::max({max_mean_dev_q, max_var_dev_q, max_mean_dev_p, max_var_dev_p});
    }
};

/// 3x3 outcome grid around (q1, p1) spanning +-2 standard deviations of each meter.
inline std::vector<std::array<double, 2>> default_outcome_grid(double nu, const MinUncertaintyParams& psi) {
    const double sz = std::sqrt(nu) * psi.sigma1;
    const double sw = std::sqrt(1.0 - nu) * psi.sigma_p();
    std::vector<std::array<double, 2>> grid;
    for (int a = -1; a <= 1; ++a) {
        for (int b = -1; b <= 1; ++b) grid.push_back({psi.q1 + 2.0 * a * sz, psi.p1 + 2.0 * b * sw});
    }
    return grid;
}

/// Conditions the commuting triples (Q1(tau), Q2(tau), P3(tau)) and
/// (P1(tau), Q2(tau), P3(tau)) on each meter outcome and compares the
/// conditional law of the system quadrature with the posterior state.
inline PosteriorConsistencyReport posterior_consistency(ModelFamily family, double nu,
                                                        const MinUncertaintyParams& psi,
                                                        const std::vector<std::array<double, 2>>& outcomes) {
    check_posterior_family(family);
    const auto m = build_model(family, nu, psi);
    const GaussianState joint = joint_initial_state(m, psi);
    const auto& tr = *m.transform;
    const auto jq = joint_distribution({position_at(tr, 1), m.meter_q, m.meter_p}, joint,
                                       {"Q1(tau)", "Q2(tau)", "P3(tau)"});
    const auto jp = joint_distribution({momentum_at(tr, 1), m.meter_q, m.meter_p}, joint,
                                       {"P1(tau)", "Q2(tau)", "P3(tau)"});
    const PosteriorFamily fam{nu, psi};
    PosteriorConsistencyReport r;
    for (const auto& y : outcomes) {
        const auto cq = conditional(jq, {1, 2}, {y[0], y[1]});
        const auto cp = conditional(jp, {1, 2}, {y[0], y[1]});
        const auto post = posterior_state(fam, y[0], y[1]);
        r.max_mean_dev_q = std::max(r.max_mean_dev_q, std::abs(cq.mean[0] - post.mean()[0]));
        r.max_var_dev_q = std::max(r.max_var_dev_q, std::abs(cq.cov(0, 0) - post.cov()(0, 0)));
        r.max_mean_dev_p = std::max(r.max_mean_dev_p, std::abs(cp.mean[0] - post.mean()[1]));
        r.max_var_dev_p = std::max(r.max_var_dev_p, std::abs(cp.cov(0, 0) - post.cov()(1, 1)));
        r.max_product_dev = std::max(r.max_product_dev, std::abs(post.cov()(0, 0) * post.cov()(1, 1) -
                                                                 psi.hbar * psi.hbar / 4.0));
        ++r.outcomes;
    }
    return r;
}

/// Closed rectangle of meter outcomes; bounds may be infinite.
struct OutcomeRegion {
    double z_lo = -std::numeric_limits<double>::infinity();
    double z_hi = std::numeric_limits<double>::infinity();
    double w_lo = -std::numeric_limits<double>::infinity();
    double w_hi = std::numeric_limits<double>::infinity();

    void validate() const {
        if (!(z_lo < z_hi) || !(w_lo < w_hi)) throw InvalidArgument("outcome region has empty interior");
    }
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
    return std::isinf(x) ? 0.0 : std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

struct TruncatedMoments {
    double probability;
    double mean;
    double variance;
};

/// Moments of N(mu, sigma^2) restricted to [lo, hi].
inline TruncatedMoments truncated_normal_moments(double mu, double sigma, double lo, double hi) {
    const double a = (lo - mu) / sigma;
    const double b = (hi - mu) / sigma;
    double p;
    if (a >= 0.0) {
        p = 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
    } else if (b <= 0.0) {
        p = 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
    } else {
        p = normal_cdf(b) - normal_cdf(a);
    }
    if (!(p > 1e-300)) throw InvalidArgument("outcome region has zero probability");
    const double pa = normal_pdf(a);
    const double pb = normal_pdf(b);
    const double apa = std::isinf(a) ? 0.0 : a * pa;
    const double bpb = std::isinf(b) ? 0.0 : b * pb;
    const double shift = (pa - pb) / p;
    return {p, mu + sigma * shift, sigma * sigma * (1.0 + (apa - bpb) / p - shift * shift)};
}

/// Meter-outcome law N(r, V_nu), r = (q1, p1), V_nu = diag(nu sigma1^2, (1-nu) sigma_p^2).
inline JointGaussian meter_outcome_law(double nu, const MinUncertaintyParams& psi) {
    check_nu(nu);
    JointGaussian j{{"Q2(tau)", "P3(tau)"}, Eigen::Vector2d(psi.q1, psi.p1), Eigen::Matrix2d::Zero()};
    j.cov(0, 0) = nu * psi.sigma1 * psi.sigma1;
    j.cov(1, 1) = (1.0 - nu) * psi.sigma_p() * psi.sigma_p();
    return j;
}

struct RegionMixture {
    double probability;
    GaussianState state;  // moments of the (mixed) post-measurement state
};

/// State after discarding outcomes outside J: the posterior states averaged
/// over the meter law restricted to J. Mean is the affine posterior map of the
/// truncated outcome mean; covariance is the posterior covariance plus the
/// mapped outcome covariance.
inline RegionMixture region_mixture_moments(ModelFamily family, double nu, const MinUncertaintyParams& psi,
                                            const OutcomeRegion& region) {
    check_posterior_family(family);
    check_nu(nu);
    psi.validate();
    region.validate();
    const auto law = meter_outcome_law(nu, psi);
    const auto tz = truncated_normal_moments(psi.q1, std::sqrt(law.cov(0, 0)), region.z_lo, region.z_hi);
    const auto tw = truncated_normal_moments(psi.p1, std::sqrt(law.cov(1, 1)), region.w_lo, region.w_hi);
    const auto post = posterior_state({nu, psi}, tz.mean, tw.mean);
    Eigen::Matrix2d cov = post.cov();
    cov(0, 0) += tz.variance / (nu * nu);
    cov(1, 1) += tw.variance / ((1.0 - nu) * (1.0 - nu));
    return {tz.probability * tw.probability, GaussianState({1}, post.mean(), cov, psi.hbar)};
}

}  // namespace qpmeas
