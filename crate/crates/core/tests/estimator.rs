use nalgebra::DMatrix;

use twoway_denoise::experiments::{generate_instance, run_experiment, GeneratorSpec, ReplicationSettings};
use twoway_denoise::{
    compose_signal, compute_gamma, denoise, initialize, loss_lq, run_pipeline, sin_theta, DenoiseConfig, InitConfig,
    ObservedMatrix, PipelineConfig, StoppingPolicy, ThresholdRule,
};

fn desk(seed: u64) -> GeneratorSpec {
    GeneratorSpec::desk().with_seed(seed)
}

#[test]
fn noiseless_input_is_a_fixed_point() {
    let (truth, _) = generate_instance(&desk(3)).unwrap();
    let m = compose_signal(&truth);
    let x = ObservedMatrix::new(m.clone()).unwrap();
    let config = DenoiseConfig {
        rank: truth.rank(),
        sigma: 1.0,
        gamma_u: 1e-9,
        gamma_v: 1e-9,
        threshold_rule: ThresholdRule::Hard,
        stopping: StoppingPolicy::Tolerance(1e-12),
        max_iterations: 50,
    };
    let res = denoise(&x, &config, truth.right()).unwrap();
    assert!(loss_lq(&m, &res.estimate, 2.0).unwrap() <= 1e-12 * m.norm_squared());
    assert_eq!(res.row_support, truth.row_support());
    assert_eq!(res.col_support, truth.col_support());
}

#[test]
fn strong_signal_start_is_close_to_truth() {
    let spec = desk(4).with_singular_values(vec![400.0, 380.0, 360.0, 340.0, 320.0]);
    let (truth, x) = generate_instance(&spec).unwrap();
    let init = initialize(&x, 1.0, &InitConfig::default()).unwrap();
    assert_eq!(init.r_hat, 5);
    assert!(init.sets.rows.iter().all(|i| truth.row_support().contains(i)));
    let dist = sin_theta(&init.v0, truth.right()).unwrap();
    assert!(dist.frobenius_sin_theta < 1.0 / 6.0, "{dist:?}");
}

#[test]
fn pipeline_beats_the_raw_data_by_a_wide_margin() {
    let (truth, x) = generate_instance(&desk(5)).unwrap();
    let m = compose_signal(&truth);
    let out = run_pipeline(&x, &PipelineConfig::simulation()).unwrap();
    assert_eq!(out.rank(), 5);
    let raw = loss_lq(&m, x.matrix(), 2.0).unwrap();
    let denoised = loss_lq(&m, &out.estimate, 2.0).unwrap();
    assert!(denoised < raw / 50.0, "{denoised} vs {raw}");
    let res = out.result.unwrap();
    assert!(res.converged());
    // gamma at the working noise level
    assert_eq!(out.gamma, compute_gamma(5, 3.0, 400));
}

#[test]
fn permuting_rows_and_columns_permutes_the_estimate() {
    let (_, x) = generate_instance(&desk(6)).unwrap();
    let (m, n) = x.shape();
    let rows: Vec<usize> = (0..m).map(|i| (i * 7 + 3) % m).collect();
    let cols: Vec<usize> = (0..n).map(|j| (j * 11 + 5) % n).collect();
    let shuffled = ObservedMatrix::new(DMatrix::from_fn(m, n, |i, j| x.matrix()[(rows[i], cols[j])])).unwrap();
    let cfg = PipelineConfig::simulation();
    let a = run_pipeline(&x, &cfg).unwrap().estimate;
    let b = run_pipeline(&shuffled, &cfg).unwrap().estimate;
    let a_shuffled = DMatrix::from_fn(m, n, |i, j| a[(rows[i], cols[j])]);
    assert!((&a_shuffled - &b).norm() <= 1e-9 * a.norm());
}

#[test]
fn experiment_reports_do_not_depend_on_worker_count() {
    let spec = desk(0);
    let settings = ReplicationSettings {
        check_invariants: true,
        ..ReplicationSettings::default()
    };
    let run_with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_experiment("desk", &spec, 6, 99, &settings).unwrap())
    };
    let serial = run_with(1);
    let parallel = run_with(4);
    assert_eq!(serial, parallel);
    assert!(serial.failures.is_empty());
    for rec in &serial.per_rep {
        assert!(rec.l1 >= rec.l2);
        assert_eq!(rec.r_hat, 5);
    }
}

#[test]
fn degenerate_noise_is_recorded_as_a_failure() {
    // without noise most entries are exactly zero, so the MAD estimate is zero
    let spec = GeneratorSpec { sigma: 0.0, ..desk(1) };
    let report = run_experiment("noiseless", &spec, 3, 1, &ReplicationSettings::default()).unwrap();
    assert!(report.per_rep.is_empty());
    assert_eq!(report.failures.len(), 3);
    assert_eq!(report.failures.iter().map(|f| f.index).collect::<Vec<_>>(), vec![0, 1, 2]);
    assert!(report.mean_l2.is_nan());
}
