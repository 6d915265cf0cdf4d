#pragma once

// Haar-uniform pure states on C^N. States are parameterized by N-1 polar
// angles in [0, pi/2] and N phases in [0, 2pi):
//
//   amp_k = sin(t_1) ... sin(t_{k-1}) cos(t_k) e^{i phi_k},   k < N
//   amp_N = sin(t_1) ... sin(t_{N-1})          e^{i phi_N}
//
// and the unitarily invariant surface element has density
//   prod_k cos(t_k) sin(t_k) (sin^2 t_k)^{N-k-1}
// with respect to dt_1..dt_{N-1} dphi_1..dphi_N.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "qcut/errors.hpp"
#include "qcut/linalg.hpp"
#include "qcut/rng.hpp"

namespace qcut::haar {

struct HypersphericalPoint {
    std::vector<double> thetas;  // N-1 polar angles
    std::vector<double> phis;    // N phases

    std::size_t dim() const { return phis.size(); }

    void validate() const {
        if (phis.empty()) throw DimensionError("HypersphericalPoint: need at least one phase");
        if (thetas.size() + 1 != phis.size()) {
            throw DimensionError("HypersphericalPoint: expected N-1 angles and N phases");
        }
        for (double t : thetas) {
            if (!(t >= 0.0 && t <= std::numbers::pi / 2)) {
                throw RangeError("HypersphericalPoint: polar angle outside [0, pi/2]");
            }
        }
        for (double p : phis) {
            if (!(p >= 0.0 && p <= 2 * std::numbers::pi)) {
                throw RangeError("HypersphericalPoint: phase outside [0, 2pi]");
            }
        }
    }
};

inline PureState point_to_state(const HypersphericalPoint& p) {
    p.validate();
    const std::size_t n = p.dim();
    ComplexVector amps(static_cast<Eigen::Index>(n));
    double sin_prefix = 1.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        amps[static_cast<Eigen::Index>(k)] =
            std::polar(sin_prefix * std::cos(p.thetas[k]), p.phis[k]);
        sin_prefix *= std::sin(p.thetas[k]);
    }
    amps[static_cast<Eigen::Index>(n - 1)] = std::polar(sin_prefix, p.phis[n - 1]);
    return PureState::normalized(std::move(amps));
}

namespace detail {

inline double angular_density(std::span<const double> thetas) {
    const std::size_t n = thetas.size() + 1;
    double out = 1.0;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        const double s = std::sin(thetas[k]);
        const double c = std::cos(thetas[k]);
        // 0-based k carries exponent N - (k+1) - 1 on sin^2.
        out *= c * s * std::pow(s * s, static_cast<double>(n - k - 2));
    }
    return out;
}

}  // namespace detail

/// Density of the surface element with respect to prod dtheta_k dphi_k dphi_N.
inline double measure_density(const HypersphericalPoint& p) {
    p.validate();
    return detail::angular_density(p.thetas);
}

/// Volume Jacobian r^{2N-1} prod_k cos sin (sin^2)^{N-k-1}; equals the surface
/// element density at r = 1. N is thetas.size() + 1.
inline double jacobian(double r, std::span<const double> thetas) {
    if (!(r > 0.0)) throw RangeError("jacobian: radius must be positive");
    const std::size_t n = thetas.size() + 1;
    return std::pow(r, static_cast<double>(2 * n - 1)) * detail::angular_density(thetas);
}

/// Total surface area (2pi)^N / (2^{N-1} (N-1)!).
inline double surface_area(std::size_t n) {
    if (n == 0) throw DimensionError("surface_area: dimension must be positive");
    double out = std::pow(2.0 * std::numbers::pi, static_cast<double>(n));
    for (std::size_t k = 1; k < n; ++k) out /= 2.0 * static_cast<double>(k);
    return out;
}

/// Draws angles by inverse CDF: u = sin^2(theta_k) has density proportional
/// to u^{N-k-1}, so u = v^{1/(N-k)} for v uniform.
inline HypersphericalPoint sample_point(std::size_t n, SeededRng& rng) {
    if (n == 0) throw DimensionError("sample_state: dimension must be positive");
    HypersphericalPoint p;
    p.thetas.resize(n - 1);
    p.phis.resize(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double v = rng.uniform();
        const double u = std::pow(v, 1.0 / static_cast<double>(n - k - 1));
        p.thetas[k] = std::asin(std::sqrt(u));
    }
    for (double& phi : p.phis) phi = rng.phase();
    return p;
}

inline PureState sample_state(std::size_t n, SeededRng& rng) {
    return point_to_state(sample_point(n, rng));
}

/// Independent sampler: normalized vector of i.i.d. complex Gaussians.
inline PureState sample_state_gaussian(std::size_t n, SeededRng& rng) {
    if (n == 0) throw DimensionError("sample_state_gaussian: dimension must be positive");
    ComplexVector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        const double re = rng.normal();
        const double im = rng.normal();
        v[j] = Complex(re, im);
    }
    return PureState::normalized(std::move(v));
}

/// Exponents m_j of the monomial prod_j |c_j|^{2 m_j}.
struct MomentSpec {
    std::size_t dim = 0;
    std::vector<unsigned> exponents;

    void validate() const {
        if (dim == 0 || exponents.size() != dim) {
            throw DimensionError("MomentSpec: exponent vector length must equal dim");
        }
        if (std::all_of(exponents.begin(), exponents.end(), [](unsigned m) { return m == 0; })) {
            throw RangeError("MomentSpec: at least one exponent must be positive");
        }
    }

    /// Moment with the given leading exponents and zeros elsewhere.
    static MomentSpec leading(std::size_t dim, std::initializer_list<unsigned> head) {
        MomentSpec s{dim, std::vector<unsigned>(dim, 0)};
        if (head.size() > dim) throw DimensionError("MomentSpec: too many exponents");
        std::copy(head.begin(), head.end(), s.exponents.begin());
        return s;
    }
};

/// Haar average E[prod_j |c_j|^{2 m_j}] = (N-1)! prod_j m_j! / (N + S - 1)!,
/// S = sum m_j. The |c_j|^2 are flat-Dirichlet distributed.
inline double exact_moment(const MomentSpec& spec) {
    spec.validate();
    // Numerator factors 1..m_j for each j, denominator N, N+1, ..., N+S-1.
    // Interleave them so the running value stays O(1).
    std::vector<double> numer;
    for (unsigned m : spec.exponents)
        for (unsigned t = 1; t <= m; ++t) numer.push_back(static_cast<double>(t));
    double out = 1.0;
    for (std::size_t i = 0; i < numer.size(); ++i) {
        out *= numer[i] / static_cast<double>(spec.dim + i);
    }
    return out;
}

}  // namespace qcut::haar
