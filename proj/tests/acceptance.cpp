// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qcut/qcut.hpp"
#include "qcut/verify.hpp"
#include "test_util.hpp"

using namespace qcut;
using namespace qcut::experiments;

namespace {

struct Verdict {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

constexpr std::uint64_t kSamples = 200'000;
constexpr std::uint64_t kSeed = 20260101;

ExperimentConfig cfg(Mode mode, std::size_t n, std::size_t m, std::size_t r, std::uint64_t samples = kSamples) {
    ExperimentConfig c;
    c.mode = mode;
    c.n = n;
    c.m = m;
    c.r = r;
    c.samples = samples;
    c.seed = kSeed;
    c.threads = 1;
    return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_band(Verdict& v, const ExperimentConfig& c, double target, bool timed) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto e = run(c);
    const double secs = seconds_since(t0);
    char buf[200];
    std::snprintf(buf, sizeof buf, " (%zu,%zu,%zu): mean=%.6f target=%.6f stderr=%.2e t=%.1fs;", c.n, c.m, c.r,
                  e.mean, target, e.std_error, secs);
    v.detail << buf;
    v.require(std::abs(e.mean - target) < 3 * e.std_error + 1e-12, "3 sigma band");
    v.require(e.std_error < 2e-3, "stderr < 2e-3");
    if (timed) v.require(secs < 60.0, "runtime < 60 s");
}

Verdict criterion1() {
    Verdict v;
    for (auto [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 2}, {2, 1}, {4, 2}, {5, 3}}) {
        check_band(v, cfg(Mode::pure, n, m, 1), double(m + 1) / double(n + 1), true);
    }
    return v;
}

Verdict criterion2() {
    Verdict v;
    check_band(v, cfg(Mode::entangled, 3, 2, 2), 5.0 / 7.0, false);
    check_band(v, cfg(Mode::entangled, 4, 2, 3), 7.0 / 13.0, false);
    return v;
}

Verdict criterion3() {
    Verdict v;
    check_band(v, cfg(Mode::mixed, 2, 1, 2), 0.6, false);
    auto c = cfg(Mode::mixed, 3, 2, 2, 1000);
    c.verify_bures = true;
    const auto e = run(c);
    const double dev = e.bures_max_deviation.value_or(INFINITY);
    v.detail << " bures max deviation=" << dev << ";";
    v.require(dev < 1e-8, "Bures deviation < 1e-8");
    return v;
}

Verdict criterion4() {
    Verdict v;
    check_band(v, cfg(Mode::state_estimation, 2, 1, 1), 2.0 / 3.0, false);
    check_band(v, cfg(Mode::state_estimation, 4, 2, 1), 0.3, false);
    return v;
}

Verdict criterion5() {
    Verdict v;
    for (const auto& r : verify::run_sweeps({12, 6})) {
        if (r.name == "povm_completeness") continue;
        v.detail << ' ' << r.name << '=' << r.max_residual << ';';
        v.require(r.passed(), r.name);
    }
    return v;
}

Verdict criterion6() {
    Verdict v;
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
        for (std::size_t m = 1; m <= n; ++m) {
            if (*povm::binomial(n, m) > 1'000'000) continue;
            worst = std::max(worst, povm::completeness_check(povm::CutPovm(n, m)));
            ++cases;
        }
    }
    v.detail << " cases=" << cases << " max deviation=" << worst << ';';
    v.require(worst < 1e-12, "completeness < 1e-12");
    return v;
}

Verdict criterion7() {
    Verdict v;
    SeededRng rng(kSeed);
    for (auto [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{{4, 2}, {5, 2}, {5, 3}}) {
        const povm::CutPovm cut(n, m);
        const auto psi = haar::sample_state(n, rng);
        const auto weights = povm::detail::system_weights(psi);
        std::map<povm::SubsetIndex, double> counts;
        const int draws = 100'000;
        for (int i = 0; i < draws; ++i) counts[povm::sample_subset(cut, weights, rng)] += 1.0 / draws;
        double tv = 0.0;
        for (const auto& s : povm::enumerate_subsets(n, m)) {
            tv += std::abs(counts[s] - povm::outcome_probability(cut, s, psi));
        }
        tv *= 0.5;
        v.detail << " TV(" << n << ',' << m << ")=" << tv << ';';
        v.require(tv < 0.01, "TV < 0.01");
    }

    const std::size_t dim = 4;
    const int shots = 100'000;
    using Sampler = std::function<PureState(SeededRng&)>;
    const std::vector<std::pair<const char*, Sampler>> samplers = {
        {"hyperspherical", [&](SeededRng& g) { return haar::sample_state(dim, g); }},
        {"gaussian", [&](SeededRng& g) { return haar::sample_state_gaussian(dim, g); }},
    };
    const std::vector<std::vector<unsigned>> moments = {{1}, {2}, {1, 1}, {3}, {2, 1}};
    for (const auto& [name, sample] : samplers) {
        double worst_z = 0.0;
        for (const auto& head : moments) {
            haar::MomentSpec spec{dim, std::vector<unsigned>(dim, 0)};
            std::copy(head.begin(), head.end(), spec.exponents.begin());
            double s = 0.0, s2 = 0.0;
            for (int i = 0; i < shots; ++i) {
                const auto st = sample(rng);
                double x = 1.0;
                for (std::size_t j = 0; j < dim; ++j) x *= std::pow(st.weight(j), spec.exponents[j]);
                s += x;
                s2 += x * x;
            }
            const double mean = s / shots;
            const double se = std::sqrt((s2 / shots - mean * mean) / (shots - 1));
            worst_z = std::max(worst_z, std::abs(mean - haar::exact_moment(spec)) / se);
        }
        v.detail << ' ' << name << " max|z|=" << worst_z << ';';
        v.require(worst_z < 4.0, std::string(name) + " moments within 4 sigma");
    }
    return v;
}

Verdict criterion8() {
    Verdict v;
    SeededRng rng(kSeed + 8);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 1 + rng.below(4);
        const auto rho = testutil::random_density(n, rng);
        const auto sigma = testutil::random_density(n, rng);
        const double uhl = fidelity::uhlmann_fidelity(testutil::purify(rho), testutil::purify(sigma));
        worst = std::max(worst, std::abs(uhl - fidelity::bures_fidelity(rho, sigma)));
    }
    v.detail << " Uhlmann vs Bures max diff=" << worst << ';';
    v.require(worst < 1e-9, "Uhlmann = Bures within 1e-9");

    // The cut leaves a purification whose best auxiliary unitary is the identity.
    double gap = 0.0;
    bool beaten = false;
    for (int shot = 0; shot < 200; ++shot) {
        const povm::CutPovm cut(4, 2);
        const auto psi = testutil::random_bipartite(4, 3, rng);
        const auto out = povm::sample_outcome(cut, psi, rng);
        const double best = fidelity::uhlmann_fidelity(psi, out.post_state);
        const double at_identity = fidelity::purification_overlap(psi, out.post_state, ComplexMatrix::Identity(3, 3));
        gap = std::max(gap, std::abs(best - at_identity));
        for (int k = 0; k < 5; ++k) {
            const double other =
                fidelity::purification_overlap(psi, out.post_state, testutil::random_unitary(3, rng));
            if (other > at_identity + 1e-12) beaten = true;
        }
    }
    v.detail << " |max_U - U=1| max=" << gap << ';';
    v.require(gap < 1e-10, "optimum at identity");
    v.require(!beaten, "no random unitary beats identity");
    return v;
}

Verdict criterion9() {
    Verdict v;
    SeededRng rng(kSeed + 9);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t m = 1 + (i % 8);
        const std::size_t r = 1 + (i % 3);
        const auto ch = channel::make_channel(m);
        const auto psi = testutil::random_bipartite(m, r, rng);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) {
                const auto res = channel::teleport_with_outcome(psi, ch, {a, b});
                const double f = fidelity::overlap_fidelity(psi.flattened(), res.bob.flattened());
                worst = std::max(worst, std::abs(1.0 - f));
            }
        }
    }
    v.detail << " teleport max|1-F|=" << worst << ';';
    v.require(worst < 1e-12, "teleport lossless");

    double swap_worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + (i % 5);
        const auto psi = testutil::random_bipartite(n, 3, rng);
        const auto res = channel::full_protocol(psi, n, rng);
        swap_worst = std::max(swap_worst, std::abs(1.0 - res.end_to_end_fidelity));
    }
    v.detail << " swapping max|1-F|=" << swap_worst << ';';
    v.require(swap_worst < 1e-12, "entanglement swapping lossless");
    return v;
}

Verdict criterion10() {
    Verdict v;
    double worst = 0.0;
    for (Mode mode : {Mode::pure, Mode::entangled, Mode::mixed, Mode::state_estimation}) {
        const std::size_t r = (mode == Mode::entangled || mode == Mode::mixed) ? 2 : 1;
        auto c = cfg(mode, 5, 3, r, 50'000);
        const auto a = run(c);
        const auto b = run(c);
        v.require(a.mean == b.mean && a.std_error == b.std_error, "same threads bit-identical");
        for (unsigned t : {2u, 4u}) {
            c.threads = t;
            const auto o = run(c);
            worst = std::max({worst, std::abs(o.mean - a.mean), std::abs(o.std_error - a.std_error)});
        }
    }
    v.detail << " max thread-count difference=" << worst << ';';
    v.require(worst < 1e-13, "thread-count difference < 1e-13");
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"pure-state fidelity", criterion1},
        {"entangled fidelity", criterion2},
        {"mixed-state fidelity and Bures verification", criterion3},
        {"state-estimation bound", criterion4},
        {"exact moment and identity sweeps", criterion5},
        {"POVM completeness", criterion6},
        {"sampler correctness", criterion7},
        {"Uhlmann equals Bures", criterion8},
        {"lossless channel", criterion9},
        {"determinism", criterion10},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.ok = false;
            v.detail << " exception: " << e.what();
        }
        std::printf("%s criterion %zu: %s --%s\n", v.ok ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    v.detail.str().c_str());
        std::fflush(stdout);
        if (!v.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
