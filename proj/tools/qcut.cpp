// qcut: run fidelity estimators, exact verification sweeps, closed-form
// tables and a single protocol trace.
//
// Exit codes: 0 pass, 1 statistical or residual failure, 2 usage error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "qcut/qcut.hpp"
#include "qcut/report.hpp"
#include "qcut/verify.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr double kMaxAbsZ = 5.0;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("QCUT_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring unparsable QCUT_SEED=" << env << "\n";
        }
    }
    return 0;
}

std::string fixed12(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(12) << v;
    return os.str();
}

void emit(const std::string& text, const std::string& output_path) {
    std::cout << text;
    if (!output_path.empty()) {
        std::ofstream f(output_path);
        if (!f) throw qcut::Error("cannot open output file " + output_path);
        f << text;
    }
}

struct EstimateFlags {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t r = 1;
    std::string mode;
    std::string method = "montecarlo";
    std::uint64_t samples = 0;
    std::uint64_t seed = default_seed();
    std::string format = "json";
    bool verify_bures = false;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string output;
};

int cmd_estimate(const EstimateFlags& f) {
    namespace ex = qcut::experiments;
    ex::ExperimentConfig cfg;
    cfg.n = f.n;
    cfg.m = f.m;
    cfg.r = f.r;
    cfg.mode = qcut::report::parse_mode(f.mode);
    cfg.method = qcut::report::parse_method(f.method);
    cfg.samples = f.samples;
    cfg.seed = f.seed;
    cfg.threads = f.threads;
    cfg.verify_bures = f.verify_bures;
    if (cfg.verify_bures && cfg.mode != ex::Mode::mixed) {
        throw qcut::RangeError("--verify-bures only applies to --mode mixed");
    }
    if (cfg.mode == ex::Mode::pure || cfg.mode == ex::Mode::state_estimation) {
        if (cfg.r != 1) throw qcut::RangeError("--r applies only to entangled and mixed modes");
    }

    const auto start = std::chrono::steady_clock::now();
    qcut::report::ReportRecord rec{cfg, ex::run(cfg), 0.0};
    rec.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::string text = f.format == "csv"
                           ? qcut::report::csv_header() + "\n" + qcut::report::to_csv_row(rec) + "\n"
                           : qcut::report::to_json_string(rec) + "\n";
    emit(text, f.output);

    bool ok = true;
    if (rec.estimate.z_score) ok = std::abs(*rec.estimate.z_score) < kMaxAbsZ;
    if (rec.estimate.bures_max_deviation) ok = ok && *rec.estimate.bures_max_deviation < 1e-8;
    return ok ? kExitPass : kExitFail;
}

struct VerifyFlags {
    std::size_t max_n = 12;
    std::size_t max_r = 6;
    double perturb_normalization = 0.0;
};

int cmd_verify(const VerifyFlags& f) {
    if (f.max_n == 0 || f.max_r == 0) throw qcut::RangeError("--max-n and --max-r must be positive");
    qcut::verify::SweepOptions opts;
    opts.max_n = f.max_n;
    opts.max_r = f.max_r;
    opts.normalization_perturbation = f.perturb_normalization;
    const auto results = qcut::verify::run_sweeps(opts);
    for (const auto& c : results) {
        std::cout << std::left << std::setw(36) << c.name << " max_residual=" << std::scientific
                  << std::setprecision(3) << c.max_residual;
        if (c.exact) {
            std::cout << " (exact)";
        } else {
            std::cout << " tol=" << c.tolerance;
        }
        std::cout << " cases=" << c.cases << (c.passed() ? " PASS" : " FAIL");
        if (!c.passed()) std::cout << " at " << c.worst_case;
        std::cout << std::defaultfloat << "\n";
    }
    return qcut::verify::all_passed(results) ? kExitPass : kExitFail;
}

struct TableFlags {
    std::size_t n_max = 0;
    std::size_t r = 1;
    std::string what = "fidelity";
    std::string output;
};

int cmd_table(const TableFlags& f) {
    namespace ex = qcut::experiments;
    if (f.n_max == 0) throw qcut::RangeError("--n-max must be positive");
    if (f.r == 0) throw qcut::RangeError("--r must be positive");
    const bool estimation = f.what == "state-estimation";
    if (estimation && f.r != 1) throw qcut::RangeError("state-estimation table is defined for r = 1");
    std::ostringstream os;
    os << "n,m,r,fidelity\n";
    for (std::size_t n = 1; n <= f.n_max; ++n) {
        for (std::size_t m = 1; m <= n; ++m) {
            const qcut::Rational v =
                estimation ? ex::analytic_state_estimation(n, m) : ex::analytic_entangled(n, m, f.r);
            os << n << ',' << m << ',' << f.r << ',' << v.to_fixed(12) << '\n';
        }
    }
    emit(os.str(), f.output);
    return kExitPass;
}

struct DemoFlags {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t r = 1;
    std::uint64_t seed = default_seed();
    bool store = false;
};

int cmd_teleport_demo(const DemoFlags& f) {
    using namespace qcut;
    if (f.m == 0 || f.m > f.n) throw RangeError("require 1 <= m <= n");
    if (f.r == 0) throw RangeError("--r must be positive");
    SeededRng rng(f.seed);
    const PureState flat = haar::sample_state(f.n * f.r, rng);
    const auto psi = BipartitePureState::split(flat, f.n, f.r);
    const auto transfer = f.store ? channel::Transfer::store : channel::Transfer::teleport;
    const auto res = channel::full_protocol(psi, f.m, rng, transfer);
    const povm::CutPovm cut(f.n, f.m);

    std::cout << "input: n=" << f.n << " r=" << f.r << " haar-random (seed " << f.seed << ")\n";
    std::cout << "cut: n=" << f.n << " -> m=" << f.m << " normalization=" << cut.norm_const() << "\n";
    std::cout << "outcome subset: " << res.message.subset.to_string()
              << " probability=" << fixed12(res.probability) << "\n";
    std::cout << "relabeling:";
    for (std::size_t i = 0; i < res.message.subset.size(); ++i) {
        std::cout << ' ' << res.message.subset[i] << "->" << i;
    }
    std::cout << "\n";
    if (f.store) {
        std::cout << "transfer: stored locally (no teleportation)\n";
    } else {
        std::cout << "classical message: a=" << res.message.bell.a << " b=" << res.message.bell.b
                  << "\n";
    }
    std::cout << "cut fidelity: " << fixed12(res.cut_fidelity) << "\n";
    std::cout << "normalization * probability: " << fixed12(cut.norm_const() * res.probability) << "\n";
    std::cout << "end-to-end fidelity: " << fixed12(res.end_to_end_fidelity) << "\n";
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cut-and-teleport fidelity toolkit"};
    app.require_subcommand(1);

    EstimateFlags est;
    auto* estimate = app.add_subcommand("estimate", "Monte Carlo estimate of an average fidelity");
    estimate->add_option("--n", est.n, "System dimension N")->required()->check(CLI::PositiveNumber);
    estimate->add_option("--m", est.m, "Channel dimension M")->required()->check(CLI::PositiveNumber);
    estimate->add_option("--r", est.r, "Auxiliary dimension R")->check(CLI::PositiveNumber);
    estimate->add_option("--mode", est.mode, "pure | entangled | mixed | state-estimation")
        ->required()
        ->check(CLI::IsMember({"pure", "entangled", "mixed", "state-estimation"}));
    estimate->add_option("--method", est.method, "montecarlo | analytic | exact-moments")
        ->check(CLI::IsMember({"montecarlo", "analytic", "exact-moments"}));
    estimate->add_option("--samples", est.samples, "Number of shots")->required()->check(CLI::PositiveNumber);
    estimate->add_option("--seed", est.seed, "Seed (default: $QCUT_SEED or 0)");
    estimate->add_option("--format", est.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    estimate->add_flag("--verify-bures", est.verify_bures, "Check every mixed shot against the Bures formula");
    estimate->add_option("--threads", est.threads, "Worker threads")->check(CLI::PositiveNumber);
    estimate->add_option("--output", est.output, "Also write the report to this file");

    VerifyFlags ver;
    auto* verify = app.add_subcommand("verify", "Exact sweeps of all closed-form identities");
    verify->add_option("--max-n", ver.max_n, "Largest N in the sweep");
    verify->add_option("--max-r", ver.max_r, "Largest R in the sweep");
    verify->add_option("--perturb-normalization", ver.perturb_normalization)->group("");

    TableFlags tab;
    auto* table = app.add_subcommand("table", "CSV table of closed-form fidelities");
    table->add_option("--n-max", tab.n_max, "Largest N")->required();
    table->add_option("--r", tab.r, "Auxiliary dimension R");
    table->add_option("--what", tab.what, "fidelity | state-estimation")
        ->check(CLI::IsMember({"fidelity", "state-estimation"}));
    table->add_option("--output", tab.output, "Also write the table to this file");

    DemoFlags demo;
    auto* teleport_demo = app.add_subcommand("teleport-demo", "Trace one cut-and-teleport run");
    teleport_demo->add_option("--n", demo.n, "System dimension N")->required();
    teleport_demo->add_option("--m", demo.m, "Channel dimension M")->required();
    teleport_demo->add_option("--r", demo.r, "Auxiliary dimension R");
    teleport_demo->add_option("--seed", demo.seed, "Seed (default: $QCUT_SEED or 0)");
    teleport_demo->add_flag("--store", demo.store, "Keep the cut state locally instead of teleporting");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (estimate->parsed()) return cmd_estimate(est);
        if (verify->parsed()) return cmd_verify(ver);
        if (table->parsed()) return cmd_table(tab);
        if (teleport_demo->parsed()) return cmd_teleport_demo(demo);
    } catch (const qcut::RangeError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qcut::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}
