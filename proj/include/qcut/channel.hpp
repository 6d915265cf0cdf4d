#pragma once

// Perfect M-dimensional teleportation through the maximally entangled
// resource (1/sqrt(M)) sum_i |i>_A |i>_B, and the full cut-then-teleport
// protocol for N-dimensional inputs.
//
// Slot layout for teleportation: the input occupies Alice's slot S (dim M),
// optionally entangled with an untouched auxiliary (dim R). The resource
// occupies Alice's slot A and Bob's slot B.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "qcut/errors.hpp"
#include "qcut/linalg.hpp"
#include "qcut/povm.hpp"
#include "qcut/rng.hpp"

namespace qcut::channel {

struct ChannelState {
    std::size_t m = 0;
    BipartitePureState joint;  // Alice (system slot) x Bob (aux slot), dims (M, M)
};

inline ChannelState make_channel(std::size_t m) {
    if (m == 0) throw RangeError("make_channel: M must be positive");
    const auto d = static_cast<Eigen::Index>(m);
    ComplexVector v = ComplexVector::Zero(d * d);
    const double amp = 1.0 / std::sqrt(static_cast<double>(m));
    for (Eigen::Index i = 0; i < d; ++i) v[i * d + i] = amp;
    return {m, BipartitePureState::normalized(m, m, std::move(v))};
}

/// Two classical symbols sent from Alice to Bob.
struct ClassicalMessage {
    std::size_t a = 0;  // shift
    std::size_t b = 0;  // phase
    friend bool operator==(const ClassicalMessage&, const ClassicalMessage&) = default;
};

/// W_ab |k> = e^{2 pi i b k / M} |k + a mod M>
inline ComplexMatrix weyl_operator(std::size_t m, std::size_t a, std::size_t b) {
    if (m == 0 || a >= m || b >= m) throw RangeError("weyl_operator: require 0 <= a, b < M");
    const auto d = static_cast<Eigen::Index>(m);
    ComplexMatrix w = ComplexMatrix::Zero(d, d);
    for (std::size_t k = 0; k < m; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>((b * k) % m) /
                             static_cast<double>(m);
        w(static_cast<Eigen::Index>((k + a) % m), static_cast<Eigen::Index>(k)) =
            std::polar(1.0, angle);
    }
    return w;
}

/// Generalized Bell vector (1 (x) W_ab) applied to the resource, as an M x M
/// coefficient matrix over Alice's (S, A) slots.
inline ComplexMatrix bell_vector(const ChannelState& ch, const ClassicalMessage& msg) {
    return ch.joint.coefficient_matrix() * weyl_operator(ch.m, msg.a, msg.b).transpose();
}

/// Bob's correction for outcome (a, b): the inverse of W_{a,-b}.
inline ComplexMatrix correction_operator(std::size_t m, const ClassicalMessage& msg) {
    return weyl_operator(m, msg.a, (m - msg.b) % m).adjoint();
}

struct TeleportResult {
    ClassicalMessage message;
    double probability = 0.0;
    BipartitePureState bob;  // Bob's slot x auxiliary, dims (M, R)
};

namespace detail {

// Unnormalized (Bob, aux) amplitudes after Alice projects (S, A) onto the
// Bell vector for msg: chi[beta, k] = sum_{s, alpha} conj(Phi[s, alpha])
// psi[s, k] ch[alpha, beta].
inline ComplexMatrix conditional_bob_state(const BipartitePureState& input, const ChannelState& ch,
                                           const ClassicalMessage& msg) {
    const ComplexMatrix phi = bell_vector(ch, msg);
    return ch.joint.coefficient_matrix().transpose() * phi.adjoint() * input.coefficient_matrix();
}

inline void check_input(const BipartitePureState& input, const ChannelState& ch) {
    if (input.dim_sys() != ch.m) throw DimensionError("teleport: input system dimension != M");
}

inline BipartitePureState corrected(const ComplexMatrix& chi, const ChannelState& ch,
                                    const ClassicalMessage& msg, std::size_t dim_aux) {
    const ComplexMatrix fixed = correction_operator(ch.m, msg) * chi;
    ComplexVector flat(fixed.size());
    for (Eigen::Index j = 0; j < fixed.rows(); ++j) flat.segment(j * fixed.cols(), fixed.cols()) = fixed.row(j).transpose();
    return BipartitePureState::normalized(ch.m, dim_aux, std::move(flat));
}

}  // namespace detail

/// Teleport with a prescribed Bell outcome.
inline TeleportResult teleport_with_outcome(const BipartitePureState& input, const ChannelState& ch,
                                            const ClassicalMessage& msg) {
    detail::check_input(input, ch);
    if (msg.a >= ch.m || msg.b >= ch.m) throw RangeError("teleport: Bell outcome out of range");
    const ComplexMatrix chi = detail::conditional_bob_state(input, ch, msg);
    const double p = chi.squaredNorm();
    if (!(p > 0.0)) throw ImpossibleOutcomeError("teleport: Bell outcome has zero probability");
    return {msg, p, detail::corrected(chi, ch, msg, input.dim_aux())};
}

/// Alice measures (S, A) in the generalized Bell basis; the outcome is drawn
/// from the computed outcome probabilities and Bob applies the correction.
inline TeleportResult teleport(const BipartitePureState& input, const ChannelState& ch,
                               SeededRng& rng) {
    detail::check_input(input, ch);
    const std::size_t m = ch.m;
    std::vector<ComplexMatrix> chis;
    std::vector<double> probs;
    chis.reserve(m * m);
    probs.reserve(m * m);
    double total = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            chis.push_back(detail::conditional_bob_state(input, ch, {a, b}));
            probs.push_back(chis.back().squaredNorm());
            total += probs.back();
        }
    }
    const double target = rng.uniform() * total;
    std::size_t pick = probs.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (target < acc) {
            pick = i;
            break;
        }
    }
    const ClassicalMessage msg{pick / m, pick % m};
    return {msg, probs[pick], detail::corrected(chis[pick], ch, msg, input.dim_aux())};
}

inline TeleportResult teleport(const PureState& input, const ChannelState& ch, SeededRng& rng) {
    return teleport(BipartitePureState::from_pure(input), ch, rng);
}

/// Whether the cut state is teleported or kept locally (storage).
enum class Transfer { teleport, store };

/// Everything Alice sends: the cut outcome (which fixes the relabeling of the
/// M kept levels onto channel levels 0..M-1, ascending) and the Bell outcome.
struct ProtocolMessage {
    povm::SubsetIndex subset;
    ClassicalMessage bell;
};

struct ProtocolResult {
    ProtocolMessage message;
    double probability = 0.0;    // p_I of the cut outcome
    double cut_fidelity = 0.0;   // |<psi|psi_I>|^2 right after the cut
    BipartitePureState final_state;  // Bob's reconstruction in the original (N, R) basis
    double end_to_end_fidelity = 0.0;
};

/// Relabels an (N, R) state supported on the subset onto (M, R).
inline BipartitePureState compress_to_subset(const BipartitePureState& s,
                                             const povm::SubsetIndex& subset) {
    const auto r = static_cast<Eigen::Index>(s.dim_aux());
    ComplexVector v(static_cast<Eigen::Index>(subset.size()) * r);
    for (std::size_t i = 0; i < subset.size(); ++i) {
        v.segment(static_cast<Eigen::Index>(i) * r, r) =
            s.amps().segment(static_cast<Eigen::Index>(subset[i]) * r, r);
    }
    return BipartitePureState::normalized(subset.size(), s.dim_aux(), std::move(v));
}

/// Inverse of compress_to_subset.
inline BipartitePureState expand_from_subset(const BipartitePureState& s,
                                             const povm::SubsetIndex& subset, std::size_t n) {
    const auto r = static_cast<Eigen::Index>(s.dim_aux());
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(n) * r);
    for (std::size_t i = 0; i < subset.size(); ++i) {
        v.segment(static_cast<Eigen::Index>(subset[i]) * r, r) =
            s.amps().segment(static_cast<Eigen::Index>(i) * r, r);
    }
    return BipartitePureState::normalized(n, s.dim_aux(), std::move(v));
}

/// Cut N -> M with the POVM, relabel, teleport through the M-dimensional
/// resource, and re-embed at Bob.
inline ProtocolResult full_protocol(const BipartitePureState& input, std::size_t m, SeededRng& rng,
                                    Transfer transfer = Transfer::teleport) {
    const std::size_t n = input.dim_sys();
    if (m == 0 || m > n) throw RangeError("full_protocol: require 1 <= M <= N");
    const povm::CutPovm cut(n, m);
    auto outcome = povm::sample_outcome(cut, input, rng);

    const BipartitePureState local = compress_to_subset(outcome.post_state, outcome.subset);
    ClassicalMessage bell{};
    BipartitePureState at_bob = local;
    if (transfer == Transfer::teleport) {
        const ChannelState ch = make_channel(m);
        TeleportResult tr = teleport(local, ch, rng);
        bell = tr.message;
        at_bob = std::move(tr.bob);
    }
    BipartitePureState out = expand_from_subset(at_bob, outcome.subset, n);
    const double e2e = std::norm(input.amps().dot(out.amps()));
    return {ProtocolMessage{std::move(outcome.subset), bell}, outcome.probability,
            outcome.shot_fidelity, std::move(out), e2e};
}

inline ProtocolResult full_protocol(const PureState& input, std::size_t m, SeededRng& rng,
                                    Transfer transfer = Transfer::teleport) {
    return full_protocol(BipartitePureState::from_pure(input), m, rng, transfer);
}

}  // namespace qcut::channel
