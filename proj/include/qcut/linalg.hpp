#pragma once

// Dense complex linear algebra used throughout the library: state and
// density-matrix value types, Kronecker products, partial traces, a Hermitian
// eigensolver, PSD square roots and Schmidt decompositions.
//
// Indexing is 0-based. A basis label j in the usual 1-based physics notation
// maps to index j - 1 here. Bipartite amplitudes are stored system-major:
// (j, k) lives at j * dim_aux + k.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcut/errors.hpp"

namespace qcut {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kStateNormTol = 1e-12;
inline constexpr double kDensityTol = 1e-10;
inline constexpr std::size_t kDefaultDimensionCap = std::size_t{1} << 20;

namespace detail {

inline double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const Complex z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

}  // namespace detail

/// Normalized pure state of a single system.
class PureState {
public:
    /// Accepts amplitudes that are already unit norm (within 1e-12).
    static PureState from_amplitudes(ComplexVector amps) {
        if (amps.size() == 0) throw DimensionError("PureState: dimension must be positive");
        if (std::abs(amps.squaredNorm() - 1.0) > kStateNormTol) {
            throw DimensionError("PureState: amplitudes are not unit norm");
        }
        return PureState(std::move(amps));
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    static PureState normalized(ComplexVector amps) {
        if (amps.size() == 0) throw DimensionError("PureState: dimension must be positive");
        const double norm = amps.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw DimensionError("PureState: cannot normalize a zero vector");
        }
        amps /= norm;
        return PureState(std::move(amps));
    }

    static PureState basis(std::size_t dim, std::size_t index) {
        if (index >= dim) throw IndexError("PureState::basis: index out of range");
        ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
        v[static_cast<Eigen::Index>(index)] = 1.0;
        return PureState(std::move(v));
    }

    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    const ComplexVector& amps() const { return amps_; }
    Complex amp(std::size_t j) const { return amps_[static_cast<Eigen::Index>(j)]; }
    double weight(std::size_t j) const { return std::norm(amp(j)); }

private:
    explicit PureState(ComplexVector amps) : amps_(std::move(amps)) {}
    ComplexVector amps_;
};

/// Pure state on system (dim_sys) tensor auxiliary (dim_aux).
class BipartitePureState {
public:
    static BipartitePureState from_amplitudes(std::size_t dim_sys, std::size_t dim_aux,
                                              ComplexVector amps) {
        check_dims(dim_sys, dim_aux, amps);
        if (std::abs(amps.squaredNorm() - 1.0) > kStateNormTol) {
            throw DimensionError("BipartitePureState: amplitudes are not unit norm");
        }
        return BipartitePureState(dim_sys, dim_aux, std::move(amps));
    }

    static BipartitePureState normalized(std::size_t dim_sys, std::size_t dim_aux,
                                         ComplexVector amps) {
        check_dims(dim_sys, dim_aux, amps);
        const double norm = amps.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw DimensionError("BipartitePureState: cannot normalize a zero vector");
        }
        amps /= norm;
        return BipartitePureState(dim_sys, dim_aux, std::move(amps));
    }

    static BipartitePureState product(const PureState& sys, const PureState& aux) {
        ComplexVector v(static_cast<Eigen::Index>(sys.dim() * aux.dim()));
        for (std::size_t j = 0; j < sys.dim(); ++j) {
            for (std::size_t k = 0; k < aux.dim(); ++k) {
                v[static_cast<Eigen::Index>(j * aux.dim() + k)] = sys.amp(j) * aux.amp(k);
            }
        }
        return BipartitePureState(sys.dim(), aux.dim(), std::move(v));
    }

    /// Views a single-system state as bipartite with a trivial auxiliary.
    static BipartitePureState from_pure(const PureState& s) {
        return BipartitePureState(s.dim(), 1, s.amps());
    }

    /// Reinterprets a flat state of dimension dim_sys * dim_aux.
    static BipartitePureState split(const PureState& s, std::size_t dim_sys, std::size_t dim_aux) {
        return from_amplitudes(dim_sys, dim_aux, s.amps());
    }

    std::size_t dim_sys() const { return dim_sys_; }
    std::size_t dim_aux() const { return dim_aux_; }
    std::size_t dim() const { return dim_sys_ * dim_aux_; }
    const ComplexVector& amps() const { return amps_; }

    Complex coefficient(std::size_t j, std::size_t k) const {
        return amps_[static_cast<Eigen::Index>(j * dim_aux_ + k)];
    }

    /// Marginal weight sum_k |c_jk|^2 of system level j.
    double system_weight(std::size_t j) const {
        return amps_.segment(static_cast<Eigen::Index>(j * dim_aux_),
                             static_cast<Eigen::Index>(dim_aux_))
            .squaredNorm();
    }

    /// The dim_sys x dim_aux coefficient matrix c_jk.
    ComplexMatrix coefficient_matrix() const {
        ComplexMatrix c(static_cast<Eigen::Index>(dim_sys_), static_cast<Eigen::Index>(dim_aux_));
        for (std::size_t j = 0; j < dim_sys_; ++j) {
            for (std::size_t k = 0; k < dim_aux_; ++k) {
                c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = coefficient(j, k);
            }
        }
        return c;
    }

    PureState flattened() const { return PureState::from_amplitudes(amps_); }

private:
    BipartitePureState(std::size_t n, std::size_t r, ComplexVector amps)
        : dim_sys_(n), dim_aux_(r), amps_(std::move(amps)) {}

    static void check_dims(std::size_t n, std::size_t r, const ComplexVector& amps) {
        if (n == 0 || r == 0) throw DimensionError("BipartitePureState: dimensions must be positive");
        if (static_cast<std::size_t>(amps.size()) != n * r) {
            throw DimensionError("BipartitePureState: amplitude count != dim_sys * dim_aux");
        }
    }

    std::size_t dim_sys_;
    std::size_t dim_aux_;
    ComplexVector amps_;
};

struct EigenSystem {
    RealVector values;     // ascending
    ComplexMatrix vectors;  // column k pairs with values[k]
};

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Throws DimensionError for non-square or non-Hermitian input.
inline EigenSystem eigh(const ComplexMatrix& h, double hermitian_tol = kDensityTol) {
    if (h.rows() != h.cols() || h.rows() == 0) {
        throw DimensionError("eigh: matrix must be square and non-empty");
    }
    if (!detail::all_finite(h)) throw DimensionError("eigh: non-finite entries");
    if (detail::max_abs(h - h.adjoint()) > hermitian_tol) {
        throw DimensionError("eigh: matrix is not Hermitian");
    }
    const Eigen::Index n = h.rows();
    ComplexMatrix a = 0.5 * (h + h.adjoint());
    ComplexMatrix v = ComplexMatrix::Identity(n, n);

    const double scale = a.squaredNorm();
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        }
        if (off <= 1e-34 * scale || off == 0.0) break;

        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const Complex g = a(p, q);
                const double x = std::abs(g);
                if (x == 0.0) continue;
                const Complex phase_conj = std::conj(g) / x;
                const double theta = 0.5 * std::atan2(2.0 * x, a(q, q).real() - a(p, p).real());
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                // J restricted to (p, q): [[c, s], [-s e^{-i arg g}, c e^{-i arg g}]]
                const Complex jpp = c;
                const Complex jpq = s;
                const Complex jqp = -s * phase_conj;
                const Complex jqq = c * phase_conj;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex ap = a(k, p);
                    const Complex aq = a(k, q);
                    a(k, p) = ap * jpp + aq * jqp;
                    a(k, q) = ap * jpq + aq * jqq;
                    const Complex vp = v(k, p);
                    const Complex vq = v(k, q);
                    v(k, p) = vp * jpp + vq * jqp;
                    v(k, q) = vp * jpq + vq * jqq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex ap = a(p, k);
                    const Complex aq = a(q, k);
                    a(p, k) = std::conj(jpp) * ap + std::conj(jqp) * aq;
                    a(q, k) = std::conj(jpq) * ap + std::conj(jqq) * aq;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        return a(i, i).real() < a(j, j).real();
    });
    EigenSystem out{RealVector(n), ComplexMatrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

/// Hermitian, positive semidefinite, unit-trace matrix.
class DensityMatrix {
public:
    static DensityMatrix from_matrix(ComplexMatrix m) {
        if (m.rows() != m.cols() || m.rows() == 0) {
            throw DimensionError("DensityMatrix: matrix must be square and non-empty");
        }
        if (!detail::all_finite(m)) throw DimensionError("DensityMatrix: non-finite entries");
        if (detail::max_abs(m - m.adjoint()) > kDensityTol) {
            throw DimensionError("DensityMatrix: not Hermitian");
        }
        if (std::abs(m.trace() - Complex(1.0)) > kDensityTol) {
            throw DimensionError("DensityMatrix: trace is not 1");
        }
        const EigenSystem es = eigh(m);
        if (es.values[0] < -kDensityTol) throw NotPsdError("DensityMatrix: negative eigenvalue");
        return DensityMatrix(std::move(m));
    }

    static DensityMatrix from_pure(const PureState& s) {
        return DensityMatrix(s.amps() * s.amps().adjoint());
    }

    static DensityMatrix maximally_mixed(std::size_t dim) {
        const auto d = static_cast<Eigen::Index>(dim);
        return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(dim));
    }

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const ComplexMatrix& matrix() const { return m_; }
    Complex operator()(std::size_t i, std::size_t j) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

private:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
    ComplexMatrix m_;
};

/// |xi> = sum_i coefficients[i] |left_i> (x) |right_i>, coefficients descending.
struct SchmidtDecomposition {
    RealVector coefficients;
    ComplexMatrix left_basis;   // columns are |left_i>, dim_sys rows
    ComplexMatrix right_basis;  // columns are |right_i>, dim_aux rows

    RealVector weights() const { return coefficients.array().square(); }

    ComplexVector reconstruct() const {
        const Eigen::Index n = left_basis.rows();
        const Eigen::Index r = right_basis.rows();
        ComplexVector out = ComplexVector::Zero(n * r);
        for (Eigen::Index i = 0; i < coefficients.size(); ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                out.segment(j * r, r) += coefficients[i] * left_basis(j, i) * right_basis.col(i);
            }
        }
        return out;
    }
};

enum class Subsystem { sys, aux };

/// Kronecker product a (x) b. Each resulting dimension must stay within cap.
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b,
                                    std::size_t cap = kDefaultDimensionCap) {
    const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
    const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
    if (rows > cap || cols > cap) {
        throw DimensionError("tensor_product: result dimension exceeds cap " + std::to_string(cap));
    }
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Reduced state after tracing out `over`.
inline DensityMatrix partial_trace(const BipartitePureState& state, Subsystem over) {
    const ComplexMatrix c = state.coefficient_matrix();
    ComplexMatrix reduced = over == Subsystem::aux ? ComplexMatrix(c * c.adjoint())
                                                   : ComplexMatrix((c.adjoint() * c).transpose());
    return DensityMatrix::from_matrix(std::move(reduced));
}

/// Partial trace of a density matrix on a (dim_sys * dim_aux)-dimensional space.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t dim_sys,
                                   std::size_t dim_aux, Subsystem over) {
    if (dim_sys == 0 || dim_aux == 0 || rho.dim() != dim_sys * dim_aux) {
        throw DimensionError("partial_trace: dimensions do not factor the density matrix");
    }
    const auto n = static_cast<Eigen::Index>(dim_sys);
    const auto r = static_cast<Eigen::Index>(dim_aux);
    const ComplexMatrix& m = rho.matrix();
    if (over == Subsystem::aux) {
        ComplexMatrix out = ComplexMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index k = 0; k < r; ++k) out(i, j) += m(i * r + k, j * r + k);
        return DensityMatrix::from_matrix(std::move(out));
    }
    ComplexMatrix out = ComplexMatrix::Zero(r, r);
    for (Eigen::Index k = 0; k < r; ++k)
        for (Eigen::Index l = 0; l < r; ++l)
            for (Eigen::Index j = 0; j < n; ++j) out(k, l) += m(j * r + k, j * r + l);
    return DensityMatrix::from_matrix(std::move(out));
}

/// Square root of a Hermitian PSD matrix. Eigenvalues in [-1e-10, 0) are
/// clamped to zero; anything more negative is rejected.
/// Eigenvalues below this multiple of n * eps * lambda_max are rounding noise
/// around an exact zero; their square roots (~1e-8) would swamp the result.
inline constexpr double kEigenFloorUlps = 64.0;

inline ComplexMatrix psd_sqrt(const ComplexMatrix& h, double clamp_tol = kDensityTol) {
    const EigenSystem es = eigh(h);
    const Eigen::Index n = es.values.size();
    const double top = n > 0 ? std::max(0.0, es.values[n - 1]) : 0.0;
    const double floor =
        kEigenFloorUlps * std::numeric_limits<double>::epsilon() * static_cast<double>(n) * top;
    RealVector roots(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double lambda = es.values[k];
        if (lambda < -clamp_tol) throw NotPsdError("matrix_sqrt: matrix is not PSD");
        roots[k] = lambda > floor ? std::sqrt(lambda) : 0.0;
    }
    return es.vectors * roots.asDiagonal() * es.vectors.adjoint();
}

inline ComplexMatrix matrix_sqrt(const DensityMatrix& rho) { return psd_sqrt(rho.matrix()); }

/// Schmidt decomposition via the SVD of the coefficient matrix.
inline SchmidtDecomposition schmidt_decompose(const BipartitePureState& state) {
    const ComplexMatrix c = state.coefficient_matrix();
    Eigen::JacobiSVD<ComplexMatrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // c = U S V^dagger, so c_jk = sum_i s_i U_ji conj(V_ki).
    return SchmidtDecomposition{svd.singularValues(), svd.matrixU(), svd.matrixV().conjugate()};
}

}  // namespace qcut
