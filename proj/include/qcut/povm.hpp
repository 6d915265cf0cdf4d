#pragma once

// The N -> M cutting POVM. Each element is
//
//   A_I = (1/K) sum_{j in I} |j><j|,    K = C(N-1, M-1),
//
// for an M-element subset I of the computational basis. Elements are kept
// implicit (subset + K); explicit matrices are built only on request.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcut/errors.hpp"
#include "qcut/linalg.hpp"
#include "qcut/rng.hpp"

namespace qcut::povm {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// Exact binomial coefficient, or nullopt if it does not fit in 64 bits.
inline std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // acc * (n - k + i) / i stays integral at every step.
        acc = acc * (n - k + i) / i;
        if (acc > UINT64_MAX) return std::nullopt;
    }
    return static_cast<std::uint64_t>(acc);
}

/// Strictly increasing list of M basis indices in [0, N).
class SubsetIndex {
public:
    SubsetIndex() = default;

    static SubsetIndex make(std::size_t n, std::vector<std::size_t> indices) {
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] >= n) throw IndexError("SubsetIndex: index out of range");
            if (i > 0 && indices[i] <= indices[i - 1]) {
                throw IndexError("SubsetIndex: indices must be strictly increasing");
            }
        }
        return SubsetIndex(std::move(indices));
    }

    std::size_t size() const { return indices_.size(); }
    const std::vector<std::size_t>& indices() const { return indices_; }
    std::size_t operator[](std::size_t i) const { return indices_[i]; }
    std::size_t front() const { return indices_.front(); }
    std::size_t back() const { return indices_.back(); }
    bool contains(std::size_t j) const {
        return std::binary_search(indices_.begin(), indices_.end(), j);
    }
    auto begin() const { return indices_.begin(); }
    auto end() const { return indices_.end(); }

    friend bool operator==(const SubsetIndex&, const SubsetIndex&) = default;
    friend auto operator<=>(const SubsetIndex&, const SubsetIndex&) = default;

    std::string to_string() const {
        std::string out = "{";
        for (std::size_t i = 0; i < indices_.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(indices_[i]);
        }
        return out + "}";
    }

private:
    explicit SubsetIndex(std::vector<std::size_t> indices) : indices_(std::move(indices)) {}
    std::vector<std::size_t> indices_;
};

class CutPovm {
public:
    CutPovm(std::size_t n, std::size_t m) : n_(n), m_(m) {
        if (m == 0 || m > n) throw RangeError("CutPovm: require 1 <= M <= N");
        exact_norm_ = binomial(n - 1, m - 1);
        norm_ = exact_norm_ ? static_cast<double>(*exact_norm_)
                            : std::exp(std::lgamma(static_cast<double>(n)) -
                                       std::lgamma(static_cast<double>(m)) -
                                       std::lgamma(static_cast<double>(n - m + 1)));
    }

    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }

    /// K = C(N-1, M-1) as a double (exact whenever it is below 2^53).
    double norm_const() const { return norm_; }
    std::optional<std::uint64_t> exact_norm_const() const { return exact_norm_; }

    /// Number of elements C(N, M), if it fits in 64 bits.
    std::optional<std::uint64_t> element_count() const { return binomial(n_, m_); }

    void check_subset(const SubsetIndex& s) const {
        if (s.size() != m_) throw IndexError("CutPovm: subset size != M");
        if (!s.indices().empty() && s.back() >= n_) throw IndexError("CutPovm: subset index >= N");
    }

private:
    std::size_t n_;
    std::size_t m_;
    std::optional<std::uint64_t> exact_norm_;
    double norm_ = 1.0;
};

/// A_I as an explicit N x N matrix.
inline ComplexMatrix element_matrix(const CutPovm& povm, const SubsetIndex& subset) {
    povm.check_subset(subset);
    const auto n = static_cast<Eigen::Index>(povm.n());
    ComplexMatrix a = ComplexMatrix::Zero(n, n);
    for (std::size_t j : subset) {
        a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0 / povm.norm_const();
    }
    return a;
}

/// Calls visit(subset) for every M-subset in lexicographic order.
inline void for_each_subset(std::size_t n, std::size_t m,
                            const std::function<void(const SubsetIndex&)>& visit,
                            std::uint64_t cap = kDefaultEnumerationCap) {
    const auto count = binomial(n, m);
    if (!count || *count > cap) {
        throw EnumerationError("for_each_subset: C(" + std::to_string(n) + "," + std::to_string(m) +
                               ") exceeds enumeration cap");
    }
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    while (true) {
        visit(SubsetIndex::make(n, idx));
        std::size_t i = m;
        while (i > 0 && idx[i - 1] == n - m + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t k = i; k < m; ++k) idx[k] = idx[k - 1] + 1;
    }
}

inline std::vector<SubsetIndex> enumerate_subsets(std::size_t n, std::size_t m,
                                                  std::uint64_t cap = kDefaultEnumerationCap) {
    std::vector<SubsetIndex> out;
    for_each_subset(n, m, [&](const SubsetIndex& s) { out.push_back(s); }, cap);
    return out;
}

namespace detail {

inline double subset_weight(const SubsetIndex& subset, const PureState& state) {
    double w = 0.0;
    for (std::size_t j : subset) w += state.weight(j);
    return w;
}

inline double subset_weight(const SubsetIndex& subset, const BipartitePureState& state) {
    double w = 0.0;
    for (std::size_t j : subset) w += state.system_weight(j);
    return w;
}

inline std::vector<double> system_weights(const PureState& s) {
    std::vector<double> w(s.dim());
    for (std::size_t j = 0; j < s.dim(); ++j) w[j] = s.weight(j);
    return w;
}

inline std::vector<double> system_weights(const BipartitePureState& s) {
    std::vector<double> w(s.dim_sys());
    for (std::size_t j = 0; j < s.dim_sys(); ++j) w[j] = s.system_weight(j);
    return w;
}

}  // namespace detail

/// p_I = <psi|A_I|psi> = (1/K) sum_{j in I} |c_j|^2.
inline double outcome_probability(const CutPovm& povm, const SubsetIndex& subset,
                                  const PureState& state) {
    povm.check_subset(subset);
    if (state.dim() != povm.n()) throw DimensionError("outcome_probability: state dim != N");
    return detail::subset_weight(subset, state) / povm.norm_const();
}

/// p_I = <psi|A_I (x) 1|psi> for a system-auxiliary state.
inline double outcome_probability(const CutPovm& povm, const SubsetIndex& subset,
                                  const BipartitePureState& state) {
    povm.check_subset(subset);
    if (state.dim_sys() != povm.n()) throw DimensionError("outcome_probability: dim_sys != N");
    return detail::subset_weight(subset, state) / povm.norm_const();
}

/// Draws a subset with probability (1/K) sum_{j in I} w_j without enumerating
/// subsets: pick a pivot j with probability w_j, then the other M-1 members
/// uniformly from the remaining N-1 levels. Each subset is reached once per
/// member pivot with weight w_j / C(N-1, M-1).
inline SubsetIndex sample_subset(const CutPovm& povm, std::span<const double> weights,
                                 SeededRng& rng) {
    const std::size_t n = povm.n();
    const std::size_t m = povm.m();
    if (weights.size() != n) throw DimensionError("sample_subset: weight vector length != N");
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw DimensionError("sample_subset: zero-norm state");

    const double target = rng.uniform() * total;
    std::size_t pivot = n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        acc += weights[j];
        if (target < acc && weights[j] > 0.0) {
            pivot = j;
            break;
        }
    }
    if (pivot == n) {
        // Round-off pushed the target past the last bin; take the last nonzero level.
        for (std::size_t j = n; j-- > 0;) {
            if (weights[j] > 0.0) {
                pivot = j;
                break;
            }
        }
    }

    // Floyd's algorithm: m-1 distinct values from [0, n-1), then skip the pivot.
    const std::size_t pool = n - 1;
    const std::size_t k = m - 1;
    std::vector<std::size_t> chosen;
    chosen.reserve(m);
    std::vector<char> taken(pool, 0);
    for (std::size_t j = pool - k; j < pool; ++j) {
        const auto t = static_cast<std::size_t>(rng.below(j + 1));
        const std::size_t pick = taken[t] ? j : t;
        taken[pick] = 1;
        chosen.push_back(pick >= pivot ? pick + 1 : pick);
    }
    chosen.push_back(pivot);
    std::sort(chosen.begin(), chosen.end());
    return SubsetIndex::make(n, std::move(chosen));
}

template <class State>
struct MeasurementOutcome {
    SubsetIndex subset;
    double probability = 0.0;
    State post_state;
    double shot_fidelity = 0.0;
};

/// Zeroes amplitudes outside the subset and renormalizes. Returns the
/// projected state and its fidelity |<psi|psi_I>|^2.
inline std::pair<PureState, double> project_pure(const CutPovm& povm, const SubsetIndex& subset,
                                                 const PureState& state) {
    povm.check_subset(subset);
    if (state.dim() != povm.n()) throw DimensionError("project_pure: state dim != N");
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(state.dim()));
    for (std::size_t j : subset) v[static_cast<Eigen::Index>(j)] = state.amp(j);
    if (v.squaredNorm() == 0.0) throw ImpossibleOutcomeError("project_pure: outcome has zero probability");
    PureState post = PureState::normalized(std::move(v));
    const double fid = std::norm(state.amps().dot(post.amps()));
    return {std::move(post), fid};
}

/// (A_I (x) 1_R)|psi>, renormalized, with its fidelity to the input.
inline std::pair<BipartitePureState, double> project_bipartite(const CutPovm& povm,
                                                               const SubsetIndex& subset,
                                                               const BipartitePureState& state) {
    povm.check_subset(subset);
    if (state.dim_sys() != povm.n()) throw DimensionError("project_bipartite: dim_sys != N");
    const auto r = static_cast<Eigen::Index>(state.dim_aux());
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(state.dim()));
    for (std::size_t j : subset) {
        const auto off = static_cast<Eigen::Index>(j) * r;
        v.segment(off, r) = state.amps().segment(off, r);
    }
    if (v.squaredNorm() == 0.0) {
        throw ImpossibleOutcomeError("project_bipartite: outcome has zero probability");
    }
    BipartitePureState post =
        BipartitePureState::normalized(state.dim_sys(), state.dim_aux(), std::move(v));
    const double fid = std::norm(state.amps().dot(post.amps()));
    return {std::move(post), fid};
}

inline MeasurementOutcome<PureState> sample_outcome(const CutPovm& povm, const PureState& state,
                                                    SeededRng& rng) {
    if (state.dim() != povm.n()) throw DimensionError("sample_outcome: state dim != N");
    const auto weights = detail::system_weights(state);
    SubsetIndex subset = sample_subset(povm, weights, rng);
    const double p = outcome_probability(povm, subset, state);
    auto [post, fid] = project_pure(povm, subset, state);
    return {std::move(subset), p, std::move(post), fid};
}

inline MeasurementOutcome<BipartitePureState> sample_outcome(const CutPovm& povm,
                                                             const BipartitePureState& state,
                                                             SeededRng& rng) {
    if (state.dim_sys() != povm.n()) throw DimensionError("sample_outcome: dim_sys != N");
    const auto weights = detail::system_weights(state);
    SubsetIndex subset = sample_subset(povm, weights, rng);
    const double p = outcome_probability(povm, subset, state);
    auto [post, fid] = project_bipartite(povm, subset, state);
    return {std::move(subset), p, std::move(post), fid};
}

/// A_I rho A_I / Tr(A_I rho A_I) together with the outcome probability
/// Tr(A_I rho). Since A_I^2 = A_I / K the normalizer is Tr(A_I rho) / K.
inline std::pair<DensityMatrix, double> apply_cut_density(const CutPovm& povm,
                                                          const SubsetIndex& subset,
                                                          const DensityMatrix& rho) {
    povm.check_subset(subset);
    if (rho.dim() != povm.n()) throw DimensionError("apply_cut_density: rho dim != N");
    const ComplexMatrix a = element_matrix(povm, subset);
    ComplexMatrix cut = a * rho.matrix() * a.adjoint();
    const double norm = cut.trace().real();
    if (!(norm > 0.0)) throw ImpossibleOutcomeError("apply_cut_density: outcome has zero probability");
    const double probability = (a * rho.matrix()).trace().real();
    cut /= norm;
    cut = 0.5 * (cut + cut.adjoint()).eval();
    return {DensityMatrix::from_matrix(std::move(cut)), probability};
}

struct CompletenessOptions {
    std::uint64_t cap = kDefaultEnumerationCap;
    // Test hook: added to K when accumulating elements. Zero in normal use.
    double normalization_perturbation = 0.0;
};

/// max |sum_I A_I - 1| over all matrix entries, by explicit enumeration.
inline double completeness_check(const CutPovm& povm, const CompletenessOptions& opts = {}) {
    const auto n = static_cast<Eigen::Index>(povm.n());
    const double k = povm.norm_const() + opts.normalization_perturbation;
    // Elements are diagonal, so the running sum is tracked on the diagonal;
    // off-diagonal entries of the sum are identically zero.
    RealVector diag = RealVector::Zero(n);
    for_each_subset(
        povm.n(), povm.m(),
        [&](const SubsetIndex& s) {
            for (std::size_t j : s) diag[static_cast<Eigen::Index>(j)] += 1.0 / k;
        },
        opts.cap);
    return (diag.array() - 1.0).abs().maxCoeff();
}

}  // namespace qcut::povm
