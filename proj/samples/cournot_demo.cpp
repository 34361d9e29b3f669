// Networked Cournot game: computes the reference equilibrium of the smoothed
// game and tracks one run of the distributed adaptive scheme towards it.

#include <cstdio>

#include "svi/bench/reference.hpp"
#include "svi/engine.hpp"
#include "svi/problems/cournot.hpp"
#include "svi/stepsizes.hpp"

int main() {
    const auto settings = svi::problems::cournot_default_settings();
    const svi::problems::CournotInstance inst = svi::problems::cournot_instance(settings[0], 1);
    const svi::SmoothingScheme smoothing = inst.smoothing(svi::SmoothingKind::MSR);

    svi::bench::ReferenceConfig rc;
    rc.saa_samples = 2000;
    rc.smoothing_samples = 2000;
    rc.tol = 1e-8;
    const svi::bench::ReferenceResult ref = svi::bench::reference_solution(inst.problem, smoothing, rc, inst.x0.flat());
    std::printf("reference residual %.2e after %zu iterations\n", ref.residual, ref.iterations);

    const svi::SchemeParams p = inst.dasa_params(svi::SmoothingKind::MSR);
    svi::RunConfig cfg;
    cfg.problem = &inst.problem;
    for (std::size_t i = 0; i < p.r.size(); ++i) cfg.schedules.push_back(svi::StepsizeSchedule::dasa(p, i));
    cfg.smoothing = smoothing;
    cfg.x0 = inst.x0;
    cfg.iterations = 2000;
    cfg.record_every = 500;
    cfg.seed = 3;
    const svi::RunRecord run = svi::run_sa(cfg, ref.x);
    for (std::size_t j = 0; j < run.ks.size(); ++j) std::printf("k=%-5zu  ||x_k - x*||^2 = %.4e\n", run.ks[j], run.sq_dist[j]);
    return 0;
}
