#pragma once

// Exhaustive exact sweeps over small (N, M, R, K): every closed form is
// compared against an independent derivation or identity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qcut/experiments.hpp"
#include "qcut/povm.hpp"

namespace qcut::verify {

struct SweepOptions {
    std::size_t max_n = 12;
    std::size_t max_r = 6;
    std::uint64_t enumeration_cap = povm::kDefaultEnumerationCap;
    // Test hook forwarded to the completeness check.
    double normalization_perturbation = 0.0;
};

struct CheckResult {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    std::string worst_case;  // "(n,m,r)" style label of the largest residual
    std::size_t cases = 0;
    bool exact = false;  // compared in exact arithmetic; tolerance unused

    bool passed() const { return exact ? max_residual == 0.0 : max_residual < tolerance; }
};

namespace detail {

inline std::string label(std::initializer_list<std::pair<const char*, std::size_t>> parts) {
    std::ostringstream os;
    os << '(';
    bool first = true;
    for (const auto& [k, v] : parts) {
        if (!first) os << ',';
        os << k << '=' << v;
        first = false;
    }
    os << ')';
    return os.str();
}

inline CheckResult check(std::string name, double tolerance, bool exact = false) {
    CheckResult c;
    c.name = std::move(name);
    c.tolerance = tolerance;
    c.exact = exact;
    return c;
}

inline void record(CheckResult& c, double residual, std::string where) {
    ++c.cases;
    if (c.cases == 1 || residual > c.max_residual || std::isnan(residual)) {
        c.max_residual = std::isnan(residual) ? std::numeric_limits<double>::infinity() : residual;
        c.worst_case = std::move(where);
    }
}

}  // namespace detail

inline std::vector<CheckResult> run_sweeps(const SweepOptions& o = {}) {
    using namespace experiments;
    std::vector<CheckResult> out;

    CheckResult pure = detail::check("pure_moments_vs_closed_form", 1e-13);
    CheckResult ent = detail::check("entangled_moments_vs_closed_form", 1e-13);
    CheckResult n_to_1 = detail::check("n_to_1_moments_vs_closed_form", 1e-13);
    CheckResult rel = detail::check("relation_residual", 1e-14);
    CheckResult comp = detail::check("composition_residual", 1e-14);
    CheckResult hor = detail::check("horodecki_identity", 0.0, true);
    CheckResult compl_ = detail::check("povm_completeness", 1e-12);

    for (std::size_t n = 1; n <= o.max_n; ++n) {
        for (std::size_t m = 1; m <= n; ++m) {
            detail::record(pure, std::abs(exact_pure_via_moments(n, m) - analytic_pure(n, m).value()),
                           detail::label({{"n", n}, {"m", m}}));
            detail::record(hor, horodecki_bound(n, m) == analytic_pure(n, m) ? 0.0 : 1.0,
                           detail::label({{"n", n}, {"m", m}}));
            for (std::size_t r = 1; r <= o.max_r; ++r) {
                const auto where = detail::label({{"n", n}, {"m", m}, {"r", r}});
                detail::record(ent,
                               std::abs(exact_entangled_via_moments(n, m, r) -
                                        analytic_entangled(n, m, r).value()),
                               where);
                if (n >= 2) detail::record(rel, relation_check(n, m, r), where);
                for (std::size_t k = m; k <= n; ++k) {
                    detail::record(comp, composition_check(n, k, m, r),
                                   detail::label({{"n", n}, {"k", k}, {"m", m}, {"r", r}}));
                }
            }
            const auto count = povm::binomial(n, m);
            if (count && *count <= o.enumeration_cap) {
                const povm::CutPovm cut(n, m);
                detail::record(compl_,
                               povm::completeness_check(
                                   cut, {o.enumeration_cap, o.normalization_perturbation}),
                               detail::label({{"n", n}, {"m", m}}));
            }
        }
        for (std::size_t r = 1; r <= o.max_r; ++r) {
            const std::size_t d = n * r;
            const double fourth = haar::exact_moment(haar::MomentSpec::leading(d, {2}));
            const double cross =
                d >= 2 ? haar::exact_moment(haar::MomentSpec::leading(d, {1, 1})) : 0.0;
            const double lhs = static_cast<double>(d) * (fourth + static_cast<double>(r - 1) * cross);
            detail::record(n_to_1, std::abs(lhs - analytic_n_to_1(n, r).value()),
                           detail::label({{"n", n}, {"r", r}}));
        }
    }
    out = {pure, ent, n_to_1, rel, comp, hor, compl_};
    return out;
}

inline bool all_passed(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& c) { return c.passed(); });
}

}  // namespace qcut::verify
