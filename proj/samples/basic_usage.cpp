// Cut a random qutrit down to a qubit, teleport it, and compare the Monte
// Carlo average with the closed form.

#include <iostream>

#include "qcut/qcut.hpp"

int main() {
    using namespace qcut;

    SeededRng rng(2024);
    const PureState psi = haar::sample_state(3, rng);
    const auto run = channel::full_protocol(psi, 2, rng);
    std::cout << "outcome " << run.message.subset.to_string() << " with p = " << run.probability
              << ", fidelity at Bob = " << run.end_to_end_fidelity << "\n";

    experiments::ExperimentConfig cfg;
    cfg.n = 3;
    cfg.m = 2;
    cfg.samples = 50'000;
    cfg.seed = 7;
    const auto est = experiments::mc_pure(cfg);
    std::cout << "F(3->2) ~ " << est.mean << " +/- " << est.std_error << " (closed form "
              << experiments::analytic_pure(3, 2) << ")\n";
}
