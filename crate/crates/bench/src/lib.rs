//! Shared setup for the criterion benches: one deterministic benchmark
//! instance with everything needed to drive the solver.

use l1l2_core::harness::rng::{stream, StreamPurpose};
use l1l2_core::harness::{add_noise_db, generate_instance, ExperimentSpec};
use l1l2_core::{NonlinearCsModel, Signal, SolverConfig};

pub struct BenchInstance {
    pub spec: ExperimentSpec,
    pub model: NonlinearCsModel,
    pub x_true: Signal,
    pub y_obs: Signal,
    pub cfg: SolverConfig,
}

pub fn benchmark_instance() -> BenchInstance {
    let spec = ExperimentSpec::benchmark();
    let (model, x_true, y_clean) = generate_instance(&spec, 0).expect("instance");
    let mut noise = stream(spec.seed, 0, StreamPurpose::Noise);
    let (y_obs, _delta) = add_noise_db(&y_clean, spec.noise_db, &mut noise).expect("noise");
    let cfg = spec.solver_config(0.015625);
    BenchInstance {
        spec,
        model,
        x_true,
        y_obs,
        cfg,
    }
}
