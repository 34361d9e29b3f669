// Solves a noisy strongly monotone quadratic VI on a box with the harmonic
// and the adaptive stepsize rules and prints the squared error of both.

#include <cstdio>

#include "svi/engine.hpp"
#include "svi/problems/quadratic.hpp"
#include "svi/stepsizes.hpp"

int main() {
    const svi::problems::QuadraticInstance inst = svi::problems::quadratic_instance(6, 7);
    const svi::BlockVector x_star(inst.problem.groups(), inst.solve());

    svi::SchemeParams params;
    params.eta = inst.eta;
    params.lip = inst.lip;
    params.diameter = (inst.upper - inst.lower).norm();
    params.e0 = params.diameter * params.diameter;
    params.nu = std::max(std::sqrt(inst.noise_sq), params.diameter * params.lip / std::sqrt(2.0));

    svi::RunConfig cfg;
    cfg.problem = &inst.problem;
    cfg.x0 = svi::BlockVector(inst.problem.groups());
    cfg.iterations = 20000;
    cfg.record_every = 5000;

    struct Named {
        const char* name;
        svi::StepsizeSchedule schedule;
    };
    const Named schemes[] = {{"HSA(1)", svi::StepsizeSchedule::harmonic(1.0)},
                             {"ASA", svi::StepsizeSchedule::asa(params)}};
    for (const auto& s : schemes) {
        cfg.schedules = {s.schedule};
        const svi::ReplicationResult rep = svi::run_replications(cfg, 10, 1, x_star);
        std::printf("%-8s", s.name);
        for (std::size_t j = 0; j < rep.ks.size(); ++j) std::printf("  k=%-6zu mse=%.3e", rep.ks[j], rep.mse[j]);
        std::printf("\n");
    }
    return 0;
}
