#pragma once

#include <cmath>
#include <complex>

#include <Eigen/SVD>

#include "qcut/errors.hpp"
#include "qcut/linalg.hpp"
#include "qcut/povm.hpp"

namespace qcut::fidelity {

inline constexpr double kClampTol = 1e-10;

/// Snaps round-off just outside [0, 1] back onto the interval.
inline double clamp_unit(double f) {
    if (f < 0.0 && f >= -kClampTol) return 0.0;
    if (f > 1.0 && f <= 1.0 + kClampTol) return 1.0;
    return f;
}

inline double overlap_fidelity(const PureState& a, const PureState& b) {
    if (a.dim() != b.dim()) throw DimensionError("overlap_fidelity: dimension mismatch");
    return clamp_unit(std::norm(a.amps().dot(b.amps())));
}

/// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2
inline double bures_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw DimensionError("bures_fidelity: dimension mismatch");
    const ComplexMatrix s = matrix_sqrt(rho);
    ComplexMatrix inner = s * sigma.matrix() * s;
    inner = 0.5 * (inner + inner.adjoint()).eval();
    const double t = psd_sqrt(inner).trace().real();
    return clamp_unit(t * t);
}

/// Cross matrix X_{k'k} = sum_j conj(a_jk) b_jk' between two purifications.
inline ComplexMatrix purification_cross_matrix(const BipartitePureState& phi0,
                                               const BipartitePureState& phi1) {
    if (phi0.dim_sys() != phi1.dim_sys() || phi0.dim_aux() != phi1.dim_aux()) {
        throw DimensionError("uhlmann_fidelity: dimension mismatch");
    }
    return phi1.coefficient_matrix().transpose() * phi0.coefficient_matrix().conjugate();
}

/// max_U |<phi0|(1 (x) U)|phi1>|^2, realized by the trace norm of the cross
/// matrix: <phi0|(1 (x) U)|phi1> = Tr(U X), maximized by the polar factor.
inline double uhlmann_fidelity(const BipartitePureState& phi0, const BipartitePureState& phi1) {
    const ComplexMatrix x = purification_cross_matrix(phi0, phi1);
    Eigen::JacobiSVD<ComplexMatrix> svd(x);
    const double trace_norm = svd.singularValues().sum();
    return clamp_unit(trace_norm * trace_norm);
}

/// |<phi0|(1 (x) U)|phi1>|^2 for a fixed auxiliary unitary U.
inline double purification_overlap(const BipartitePureState& phi0, const BipartitePureState& phi1,
                                   const ComplexMatrix& u) {
    const ComplexMatrix x = purification_cross_matrix(phi0, phi1);
    if (u.rows() != x.rows() || u.cols() != x.cols()) {
        throw DimensionError("purification_overlap: unitary has wrong dimension");
    }
    return std::norm((u * x).trace());
}

/// Single-outcome fidelity of the cut applied to a purified mixed state:
///   |<psi|(A_I (x) 1)|psi>|^2 / Tr(A_I rho A_I^dagger)
/// where rho = Tr_R |psi><psi|. Evaluates to K * p_I.
inline double per_outcome_mixed_fidelity(const povm::CutPovm& povm, const povm::SubsetIndex& subset,
                                         const BipartitePureState& purification) {
    const double p = povm::outcome_probability(povm, subset, purification);
    double block = 0.0;
    for (std::size_t j : subset) block += purification.system_weight(j);
    const double k = povm.norm_const();
    const double denom = block / (k * k);
    if (!(denom > 0.0)) {
        throw ImpossibleOutcomeError("per_outcome_mixed_fidelity: outcome has zero probability");
    }
    return clamp_unit(p * p / denom);
}

}  // namespace qcut::fidelity
