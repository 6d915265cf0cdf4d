#pragma once

// Closed-form average fidelities of the cut protocol, their independent
// moment-integral derivations, and seeded Monte Carlo estimators.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qcut/channel.hpp"
#include "qcut/errors.hpp"
#include "qcut/fidelity.hpp"
#include "qcut/haar.hpp"
#include "qcut/linalg.hpp"
#include "qcut/povm.hpp"
#include "qcut/rational.hpp"
#include "qcut/rng.hpp"

namespace qcut::experiments {

// ---------------------------------------------------------------------------
// Closed forms

namespace detail {

inline void check_nm(std::size_t n, std::size_t m) {
    if (m == 0 || m > n) throw RangeError("require 1 <= M <= N");
}

inline void check_nmr(std::size_t n, std::size_t m, std::size_t r) {
    check_nm(n, m);
    if (r == 0) throw RangeError("require R >= 1");
}

inline std::int64_t i64(std::size_t v) { return static_cast<std::int64_t>(v); }

}  // namespace detail

/// (M+1)/(N+1)
inline Rational analytic_pure(std::size_t n, std::size_t m) {
    detail::check_nm(n, m);
    return {detail::i64(m) + 1, detail::i64(n) + 1};
}

/// (MR+1)/(NR+1)
inline Rational analytic_entangled(std::size_t n, std::size_t m, std::size_t r) {
    detail::check_nmr(n, m, r);
    return {detail::i64(m * r) + 1, detail::i64(n * r) + 1};
}

/// (R+1)/(NR+1)
inline Rational analytic_n_to_1(std::size_t n, std::size_t r) {
    detail::check_nmr(n, 1, r);
    return {detail::i64(r) + 1, detail::i64(n * r) + 1};
}

/// Optimal teleportation fidelity (N f_s + 1)/(N + 1) with singlet fraction
/// f_s = M/N of the M-dimensional resource.
inline Rational horodecki_bound(std::size_t n, std::size_t m) {
    detail::check_nm(n, m);
    const Rational singlet_fraction(detail::i64(m), detail::i64(n));
    return (Rational(detail::i64(n)) * singlet_fraction + Rational(1)) / Rational(detail::i64(n) + 1);
}

/// (1 + 1/M)/(N+1)
inline Rational analytic_state_estimation(std::size_t n, std::size_t m) {
    detail::check_nm(n, m);
    return (Rational(1) + Rational(1, detail::i64(m))) / Rational(detail::i64(n) + 1);
}

/// |F_{N->M} - [(M-1)/(N-1) + (N-M)/(N-1) F_{N->1}]| in double arithmetic.
inline double relation_check(std::size_t n, std::size_t m, std::size_t r) {
    detail::check_nmr(n, m, r);
    if (n == 1) throw RangeError("relation_check: requires N >= 2");
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    const double rhs = (mm - 1.0) / (nn - 1.0) + (nn - mm) / (nn - 1.0) * analytic_n_to_1(n, r).value();
    return std::abs(analytic_entangled(n, m, r).value() - rhs);
}

/// |F_{N->M} - F_{N->K} F_{K->M}| in double arithmetic.
inline double composition_check(std::size_t n, std::size_t k, std::size_t m, std::size_t r) {
    detail::check_nmr(n, m, r);
    if (k < m || k > n) throw RangeError("composition_check: require M <= K <= N");
    return std::abs(analytic_entangled(n, m, r).value() -
                    analytic_entangled(n, k, r).value() * analytic_entangled(k, m, r).value());
}

/// Average over outcomes and Haar inputs expanded into the N-dim fourth
/// moment: (M-1)/(N-1) + (N-M)/(N-1) * N E|c_1|^4.
inline double exact_pure_via_moments(std::size_t n, std::size_t m) {
    detail::check_nm(n, m);
    if (n == 1) return 1.0;
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    const double n_to_1 = nn * haar::exact_moment(haar::MomentSpec::leading(n, {2}));
    return (mm - 1.0) / (nn - 1.0) + (nn - mm) / (nn - 1.0) * n_to_1;
}

/// Entangled version on the NR-dim sphere:
/// F_{N->1} = NR [E|c_1|^4 + (R-1) E|c_1|^2|c_2|^2].
inline double exact_entangled_via_moments(std::size_t n, std::size_t m, std::size_t r) {
    detail::check_nmr(n, m, r);
    if (n == 1) return 1.0;
    const std::size_t d = n * r;
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    const double fourth = haar::exact_moment(haar::MomentSpec::leading(d, {2}));
    const double cross = d >= 2 ? haar::exact_moment(haar::MomentSpec::leading(d, {1, 1})) : 0.0;
    const double n_to_1 = static_cast<double>(d) * (fourth + static_cast<double>(r - 1) * cross);
    return (mm - 1.0) / (nn - 1.0) + (nn - mm) / (nn - 1.0) * n_to_1;
}

// ---------------------------------------------------------------------------
// Monte Carlo

enum class Mode { pure, entangled, mixed, state_estimation };
enum class Method { montecarlo, analytic, exact_moments };

inline std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::pure: return "pure";
        case Mode::entangled: return "entangled";
        case Mode::mixed: return "mixed";
        case Mode::state_estimation: return "state-estimation";
    }
    return "?";
}

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::montecarlo: return "montecarlo";
        case Method::analytic: return "analytic";
        case Method::exact_moments: return "exact-moments";
    }
    return "?";
}

/// Which member of the outcome subset is reported as the state estimate.
enum class GuessRule { smallest_index, largest_index };

struct ExperimentConfig {
    std::size_t n = 2;
    std::size_t m = 1;
    std::size_t r = 1;
    Mode mode = Mode::pure;
    std::uint64_t samples = 1;
    std::uint64_t seed = 0;
    Method method = Method::montecarlo;
    // Execution knobs; never change the estimate.
    unsigned threads = 1;
    // Mixed mode: recompute every shot with the explicit Bures formula.
    bool verify_bures = false;
    GuessRule guess = GuessRule::smallest_index;

    void validate() const {
        if (m == 0 || m > n) throw RangeError("ExperimentConfig: require 1 <= M <= N");
        if (r == 0) throw RangeError("ExperimentConfig: require R >= 1");
        if (samples == 0) throw RangeError("ExperimentConfig: samples must be positive");
    }
};

struct FidelityEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::optional<double> analytic_target;
    std::optional<double> z_score;
    // Largest |K p_I - F_Bures| seen when Bures verification is on.
    std::optional<double> bures_max_deviation;
};

/// Samples per RNG stream. Block b always draws from stream(seed, b), so the
/// sample sequence is fixed by (seed, samples) regardless of thread count.
inline constexpr std::uint64_t kBlockSize = 4096;

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct Shot {
    double value = 0.0;
    double deviation = 0.0;  // auxiliary diagnostic, max-reduced
};

using ShotFn = std::function<Shot(SeededRng&)>;

struct BlockStats {
    double sum = 0.0;
    double m2 = 0.0;  // sum of squared deviations about the block mean
    std::uint64_t count = 0;
    double max_deviation = 0.0;
};

/// Z-score of mean against target. Differences within 1e-12 count as exact
/// agreement so deterministic cases (stderr 0) score 0.
inline double z_score(double mean, double std_error, double target) {
    const double diff = mean - target;
    if (std::abs(diff) <= 1e-12) return 0.0;
    if (std_error == 0.0) return diff > 0 ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity();
    return diff / std_error;
}

/// Runs `samples` shots split into fixed blocks, fanned out over threads, and
/// reduces block results in block order.
inline FidelityEstimate run_estimator(std::uint64_t samples, std::uint64_t seed, unsigned threads,
                                      const ShotFn& shot) {
    if (samples == 0) throw RangeError("run_estimator: samples must be positive");
    const std::uint64_t blocks = (samples + kBlockSize - 1) / kBlockSize;
    std::vector<BlockStats> stats(blocks);

    auto run_block = [&](std::uint64_t b) {
        SeededRng rng = SeededRng::stream(seed, b);
        const std::uint64_t begin = b * kBlockSize;
        const std::uint64_t end = std::min(samples, begin + kBlockSize);
        BlockStats& s = stats[b];
        std::vector<double> values;
        values.reserve(end - begin);
        CompensatedSum sum;
        for (std::uint64_t i = begin; i < end; ++i) {
            const Shot x = shot(rng);
            values.push_back(x.value);
            sum.add(x.value);
            s.max_deviation = std::max(s.max_deviation, x.deviation);
        }
        s.count = values.size();
        s.sum = sum.value();
        // Two-pass about the block mean; sum-of-squares cancels badly when
        // every shot is (nearly) the same value.
        const double mean = s.sum / static_cast<double>(s.count);
        CompensatedSum m2;
        for (double v : values) m2.add((v - mean) * (v - mean));
        s.m2 = m2.value();
    };

    const unsigned workers = static_cast<unsigned>(
        std::clamp<std::uint64_t>(threads == 0 ? 1 : threads, 1, blocks));
    if (workers == 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::uint64_t b = next++; b < blocks; b = next++) run_block(b);
            });
        }
        for (auto& t : pool) t.join();
    }

    CompensatedSum total;
    double max_dev = 0.0;
    for (const BlockStats& s : stats) {
        total.add(s.sum);
        max_dev = std::max(max_dev, s.max_deviation);
    }
    const double count = static_cast<double>(samples);
    FidelityEstimate est;
    est.samples = samples;
    est.seed = seed;
    est.mean = total.value() / count;
    if (samples > 1) {
        CompensatedSum m2;
        for (const BlockStats& s : stats) {
            const double shift = s.sum / static_cast<double>(s.count) - est.mean;
            m2.add(s.m2);
            m2.add(static_cast<double>(s.count) * shift * shift);
        }
        est.std_error = std::sqrt(std::max(0.0, m2.value()) / (count - 1.0) / count);
    }
    est.bures_max_deviation = max_dev;
    return est;
}

namespace detail {

inline FidelityEstimate with_target(FidelityEstimate est, double target) {
    est.analytic_target = target;
    est.z_score = z_score(est.mean, est.std_error, target);
    return est;
}

inline void check_mode(const ExperimentConfig& c, Mode expected) {
    c.validate();
    if (c.mode != expected) throw RangeError("experiment called with the wrong mode");
}

}  // namespace detail

/// Haar inputs, cut plus teleportation, end-to-end overlap per shot.
inline FidelityEstimate mc_pure(const ExperimentConfig& c) {
    detail::check_mode(c, Mode::pure);
    auto est = run_estimator(c.samples, c.seed, c.threads, [&](SeededRng& rng) {
        const PureState psi = haar::sample_state(c.n, rng);
        return Shot{channel::full_protocol(psi, c.m, rng).end_to_end_fidelity};
    });
    est.bures_max_deviation.reset();
    return detail::with_target(est, analytic_pure(c.n, c.m).value());
}

/// Haar inputs on the N*R space; only the N-dim part is cut and teleported.
inline FidelityEstimate mc_entangled(const ExperimentConfig& c) {
    detail::check_mode(c, Mode::entangled);
    auto est = run_estimator(c.samples, c.seed, c.threads, [&](SeededRng& rng) {
        const PureState flat = haar::sample_state(c.n * c.r, rng);
        const auto psi = BipartitePureState::split(flat, c.n, c.r);
        return Shot{channel::full_protocol(psi, c.m, rng).end_to_end_fidelity};
    });
    est.bures_max_deviation.reset();
    return detail::with_target(est, analytic_entangled(c.n, c.m, c.r).value());
}

/// Density matrices drawn from the induced measure (partial traces of Haar
/// states on N*R); per-outcome Bures fidelity through the purification form.
inline FidelityEstimate mc_mixed(const ExperimentConfig& c) {
    detail::check_mode(c, Mode::mixed);
    const povm::CutPovm cut(c.n, c.m);
    auto est = run_estimator(c.samples, c.seed, c.threads, [&](SeededRng& rng) {
        const PureState flat = haar::sample_state(c.n * c.r, rng);
        const auto psi = BipartitePureState::split(flat, c.n, c.r);
        const auto weights = povm::detail::system_weights(psi);
        const povm::SubsetIndex subset = povm::sample_subset(cut, weights, rng);
        Shot s{fidelity::per_outcome_mixed_fidelity(cut, subset, psi)};
        if (c.verify_bures) {
            const DensityMatrix rho = partial_trace(psi, Subsystem::aux);
            const auto [cut_rho, p] = povm::apply_cut_density(cut, subset, rho);
            s.deviation = std::abs(s.value - fidelity::bures_fidelity(rho, cut_rho));
        }
        return s;
    });
    if (!c.verify_bures) est.bures_max_deviation.reset();
    return detail::with_target(est, analytic_entangled(c.n, c.m, c.r).value());
}

/// Guess a single basis state from the outcome subset; score its overlap.
inline FidelityEstimate mc_state_estimation(const ExperimentConfig& c) {
    detail::check_mode(c, Mode::state_estimation);
    const povm::CutPovm cut(c.n, c.m);
    auto est = run_estimator(c.samples, c.seed, c.threads, [&](SeededRng& rng) {
        const PureState psi = haar::sample_state(c.n, rng);
        const auto weights = povm::detail::system_weights(psi);
        const povm::SubsetIndex subset = povm::sample_subset(cut, weights, rng);
        const std::size_t g = c.guess == GuessRule::smallest_index ? subset.front() : subset.back();
        return Shot{fidelity::overlap_fidelity(PureState::basis(c.n, g), psi)};
    });
    est.bures_max_deviation.reset();
    return detail::with_target(est, analytic_state_estimation(c.n, c.m).value());
}

inline double analytic_target(const ExperimentConfig& c) {
    switch (c.mode) {
        case Mode::pure: return analytic_pure(c.n, c.m).value();
        case Mode::entangled:
        case Mode::mixed: return analytic_entangled(c.n, c.m, c.r).value();
        case Mode::state_estimation: return analytic_state_estimation(c.n, c.m).value();
    }
    return 0.0;
}

/// Dispatches on mode and method. The analytic and exact-moment methods
/// return a deterministic value with zero standard error.
inline FidelityEstimate run(const ExperimentConfig& c) {
    c.validate();
    if (c.method != Method::montecarlo) {
        if (c.method == Method::exact_moments && c.mode == Mode::state_estimation) {
            throw RangeError("exact-moments method is not defined for state estimation");
        }
        FidelityEstimate est;
        est.samples = c.samples;
        est.seed = c.seed;
        if (c.method == Method::analytic) {
            est.mean = analytic_target(c);
        } else {
            const std::size_t r = c.mode == Mode::pure ? 1 : c.r;
            est.mean = exact_entangled_via_moments(c.n, c.m, r);
        }
        return detail::with_target(est, analytic_target(c));
    }
    switch (c.mode) {
        case Mode::pure: return mc_pure(c);
        case Mode::entangled: return mc_entangled(c);
        case Mode::mixed: return mc_mixed(c);
        case Mode::state_estimation: return mc_state_estimation(c);
    }
    throw RangeError("unknown mode");
}

}  // namespace qcut::experiments
