//! Acceptance criteria 1-13. Each test writes one `PASS`/`FAIL` line to
//! stderr (unbuffered, so it shows without `--nocapture`) and then asserts.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use soundcone::bounds::{
    bound_grid, gong_bound, gong_terms, matexp_bound, series_oracle_bound, BoundKind, GongParams,
    HKParams, GONG_MU_BRACKET,
};
use soundcone::channel::{
    contour_exponent, ed_oracle_probability, signal_probability, ChannelSpec,
};
use soundcone::hopping::{
    cone_velocity, correlation_grid, correlation_matrix, delta_frequencies, density_of_states,
    group_velocity_scaling, DispersionTable, HoppingModel,
};
use soundcone::lattice::{
    hopping_interactions, normalization_factor, power_law_interactions, reproducibility_constant,
    Boundary, DecayParams, InteractionMatrix, LatticeSpec,
};
use soundcone::numerics::{fit_line, fit_power_law, RealSymmetricMatrix};
use soundcone::SpacetimeGrid;
use soundcone_cli::config::{default_n_list, Format};
use soundcone_cli::output::{parse, serialize, Data, GridFile};

fn report(id: u32, ok: bool, detail: impl AsRef<str>) {
    let line = format!(
        "{} criterion {id}: {}\n",
        if ok { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn within(elapsed: Duration, secs: f64) -> bool {
    elapsed.as_secs_f64() < secs
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> RealSymmetricMatrix {
    RealSymmetricMatrix::from_upper(n, |i, j| if i == j { 0.0 } else { rng.random::<f64>() })
        .unwrap()
}

#[test]
fn criterion_01_matexp_vs_series() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let j = InteractionMatrix::from_entries(
        LatticeSpec::chain(8, Boundary::Open).unwrap(),
        random_symmetric(&mut rng, 8),
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.1, 0.5, 1.0] {
        for a in 0..8 {
            for b in 0..8 {
                let exact = matexp_bound(&j, t, a, b).unwrap();
                let mut n_max = 8;
                let s = loop {
                    let s = series_oracle_bound(&j, t, a, b, n_max).unwrap();
                    if s.tail_bound < 1e-12 {
                        break s;
                    }
                    n_max *= 2;
                };
                worst = worst.max((exact - s.value).abs() / s.value.abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = worst < 1e-8 && within(elapsed, 1.0);
    report(
        1,
        ok,
        format!("max relative error {worst:.2e}, {elapsed:.2?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_02_circulant_vs_dense() {
    let start = Instant::now();
    let n = 64;
    let deltas: Vec<usize> = (1..=n / 2).collect();
    let times: Vec<f64> = (0..20).map(|k| k as f64 / 40.0).collect();
    let mut worst: f64 = 0.0;
    for alpha in [1.2, 4.0, 8.0] {
        let interactions = hopping_interactions(n, alpha).unwrap();
        let first_row = interactions.circulant_row().unwrap();
        let dense = bound_grid(
            &BoundKind::Matexp {
                interactions,
                source: 0,
            },
            &deltas,
            &times,
        )
        .unwrap();
        let fast = bound_grid(&BoundKind::MatexpCirculant { first_row }, &deltas, &times).unwrap();
        for (x, y) in dense.values().iter().zip(fast.values()) {
            worst = worst.max((x - y).abs());
        }
    }
    let elapsed = start.elapsed();
    let ok = worst < 1e-9 && within(elapsed, 5.0);
    report(
        2,
        ok,
        format!("max abs difference {worst:.2e}, {elapsed:.2?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_03_delta_forms() {
    let mut worst: f64 = 0.0;
    for n in [4usize, 10, 200] {
        for alpha in [0.0, 0.5, 1.0, 2.0, 3.0, 8.0] {
            let lib = delta_frequencies(&HoppingModel::new(n, alpha).unwrap()).unwrap();
            let w = |l: usize| (l.min(n - l) as f64).powf(-alpha);
            // phases reduced exactly in integers: cos(2π (m l mod n) / n)
            let c = |m: usize, l: usize| (TAU * ((m * l) % n) as f64 / n as f64).cos();
            let eps = |m: usize| -(1..n).map(|l| c(m, l) * w(l)).sum::<f64>();
            for (m, &d) in lib.iter().enumerate() {
                let shifted = eps((m + n / 2) % n) - eps(m);
                let odd = 2.0 * (1..n).step_by(2).map(|l| c(m, l) * w(l)).sum::<f64>();
                worst = worst
                    .max((d - shifted).abs())
                    .max((d - odd).abs())
                    .max((shifted - odd).abs());
            }
        }
    }
    let ok = worst < 1e-12;
    report(3, ok, format!("max disagreement {worst:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_04_channel_vs_ed() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for n in [4usize, 6, 8, 10] {
        let mut specs = vec![ChannelSpec::power_law(n, 1.5).unwrap()];
        for _ in 0..5 {
            specs.push(ChannelSpec::from_matrix(random_symmetric(&mut rng, n)).unwrap());
        }
        for spec in &specs {
            for _ in 0..50 {
                let t = rng.random_range(0.0..10.0);
                let ed = ed_oracle_probability(spec, t).unwrap();
                worst = worst.max((signal_probability(spec, t) - ed).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = worst < 1e-10 && within(elapsed, 30.0);
    report(4, ok, format!("max abs error {worst:.2e}, {elapsed:.2?}"));
    assert!(ok);
}

/// Exact bin averages of a density with antiderivative `cdf`.
fn bin_errors(
    edges: &[f64],
    density: &[f64],
    cdf: impl Fn(f64) -> f64,
    keep: impl Fn(f64, f64) -> bool,
) -> f64 {
    edges
        .windows(2)
        .zip(density)
        .filter(|(w, _)| keep(w[0], w[1]))
        .map(|(w, &d)| (d - (cdf(w[1]) - cdf(w[0])) / (w[1] - w[0])).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_05_density_of_states() {
    let start = Instant::now();
    let n_k = 100_000;
    let e1 = linspace(-5.0, 5.0, 101);
    let d1 = density_of_states(1.0, n_k, &e1).unwrap();
    let err1 = bin_errors(&e1, &d1.density, |v| v.atan() / PI, |_, _| true);

    let e2 = linspace(-PI, PI, 41);
    let d2 = density_of_states(2.0, n_k, &e2).unwrap();
    let err2 = d2.density[1..39]
        .iter()
        .map(|d| (d - 1.0 / TAU).abs())
        .fold(0.0, f64::max);
    let outside2 = d2.out_of_range_mass;

    let e50 = linspace(-2.0, 2.0, 41);
    let d50 = density_of_states(50.0, n_k, &e50).unwrap();
    let err50 = bin_errors(
        &e50,
        &d50.density,
        |v| (v / 2.0).asin() / PI,
        |lo, hi| lo >= -1.8 - 1e-12 && hi <= 1.8 + 1e-12,
    );
    let elapsed = start.elapsed();
    let ok = err1 < 1e-2 && err2 < 1e-2 && outside2 < 1e-2 && err50 < 2e-2 && within(elapsed, 10.0);
    report(
        5,
        ok,
        format!(
            "alpha=1 sup error {err1:.2e}; alpha=2 interior error {err2:.2e}, outside mass {outside2:.2e}; alpha=50 error {err50:.2e}; {elapsed:.2?}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_06_group_velocity_scaling() {
    let sizes: Vec<usize> = (8..=13).map(|p| 1usize << p).collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for alpha in [0.5, 1.0, 1.5] {
        let s = group_velocity_scaling(alpha, &sizes).unwrap();
        let target = 2.0 - alpha;
        ok &= s.fit.exponent >= target - 0.15;
        detail.push(format!(
            "alpha={alpha}: exponent {:.3} (needs >= {:.2})",
            s.fit.exponent,
            target - 0.15
        ));
    }
    let s = group_velocity_scaling(3.0, &sizes).unwrap();
    let q = &s.quotients;
    let (a, b) = (q[q.len() - 2].1, q[q.len() - 1].1);
    let change = (b - a).abs() / a.abs();
    ok &= change < 0.01;
    detail.push(format!(
        "alpha=3: last-doubling change {:.1}%",
        100.0 * change
    ));
    report(6, ok, detail.join("; "));
    assert!(ok);
}

#[test]
fn criterion_07_contour_exponent() {
    let mut ok = true;
    let mut detail = Vec::new();
    for alpha in [1.25, 1.5, 1.75] {
        let c = contour_exponent(alpha, 1e-8, &default_n_list()).unwrap();
        let target = 2.0 / alpha;
        let rel = (c.fit.exponent - target).abs() / target;
        ok &= rel < 0.1 && c.fit.exponent > 1.0;
        detail.push(format!(
            "alpha={alpha}: {:.3} vs {target:.3} ({:.1}%)",
            c.fit.exponent,
            100.0 * rel
        ));
    }
    report(7, ok, detail.join("; "));
    assert!(ok);
}

fn first_passage(alpha: f64) -> Option<f64> {
    let table = DispersionTable::new(HoppingModel::new(200, alpha).unwrap());
    (0..=50_000)
        .map(|i| i as f64 * 1e-3)
        .find(|&t| (table.occupation(0, t) - 0.5).abs() < 0.05)
}

#[test]
fn criterion_08_occupation_relaxation() {
    let table = DispersionTable::new(HoppingModel::new(200, 3.0).unwrap());
    let ts = linspace(50.0, 100.0, 5001);
    let vals: Vec<f64> = ts.iter().map(|&t| table.occupation(0, t)).collect();
    // trapezoid rule over the window
    let h = ts[1] - ts[0];
    let integral = h * (vals.iter().sum::<f64>() - 0.5 * (vals[0] + vals[vals.len() - 1]));
    let mean = integral / 50.0;
    let slow = first_passage(0.5);
    let fast = first_passage(3.0);
    let ok = (mean - 0.5).abs() < 0.01 && matches!((slow, fast), (Some(s), Some(f)) if s > f);
    report(
        8,
        ok,
        format!("time average {mean:.4}; first passage alpha=0.5 {slow:?}, alpha=3 {fast:?}"),
    );
    assert!(ok);
}

/// `U* C(0) Uᵀ` with `U = exp(-iht)` from the Padé matrix exponential.
fn propagated_correlations(n: usize, alpha: f64, t: f64) -> DMatrix<Complex64> {
    let h = DMatrix::from_fn(n, n, |a, b| {
        let l = a.abs_diff(b);
        let d = l.min(n - l);
        if d == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-(d as f64).powf(-alpha), 0.0)
        }
    });
    let u = (h * Complex64::new(0.0, -t)).exp();
    let c0 = DMatrix::from_fn(n, n, |a, b| {
        Complex64::new(if a == b && a % 2 == 1 { 1.0 } else { 0.0 }, 0.0)
    });
    u.conjugate() * c0 * u.transpose()
}

#[test]
fn criterion_09_correlation_physicality() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut herm, mut eig_out, mut trace, mut oracle): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for n in [8usize, 12, 16] {
        for alpha in [0.5, 1.5, 3.0] {
            let model = HoppingModel::new(n, alpha).unwrap();
            for _ in 0..20 {
                let t = rng.random_range(0.0..20.0);
                let c = correlation_matrix(&model, t).unwrap();
                let m = c.entries();
                herm = herm.max(
                    (m - m.adjoint())
                        .iter()
                        .map(|z| z.norm())
                        .fold(0.0, f64::max),
                );
                for e in c.eigenvalues().unwrap() {
                    eig_out = eig_out.max(-e).max(e - 1.0);
                }
                let tr: Complex64 = (0..n).map(|a| m[(a, a)]).sum();
                trace = trace.max((tr - Complex64::new(n as f64 / 2.0, 0.0)).norm());
                let reference = propagated_correlations(n, alpha, t);
                oracle = oracle.max((m - reference).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
    }
    let ok = herm < 1e-12 && eig_out <= 1e-10 && trace < 1e-10 && oracle < 1e-10;
    report(
        9,
        ok,
        format!(
            "hermiticity {herm:.1e}, eigenvalue excursion {:.1e}, trace error {trace:.1e}, oracle {oracle:.1e}",
            eig_out.max(0.0)
        ),
    );
    assert!(ok);
}

/// R² of a straight-line fit to the level contour over the first quarter of
/// the time window.
fn contour_linearity(grid: &SpacetimeGrid, level: f64) -> f64 {
    let t_end = grid.t_values()[grid.cols() - 1] / 4.0;
    let (ts, ds): (Vec<f64>, Vec<f64>) = grid
        .t_values()
        .iter()
        .zip(grid.contour_front(level))
        .filter(|(t, _)| **t <= t_end)
        .filter_map(|(&t, f)| f.position().map(|d| (t, d)))
        .unzip();
    fit_line(&ts, &ds).map(|f| f.r_squared).unwrap_or(f64::NAN)
}

#[test]
fn criterion_10_cone_phenomenology() {
    let deltas: Vec<usize> = (1..=100).collect();
    let times = linspace(0.0, 40.0, 401);
    let mut velocities = Vec::new();
    for alpha in [0.75, 1.5, 3.0] {
        let g = correlation_grid(&HoppingModel::new(200, alpha).unwrap(), &deltas, &times).unwrap();
        velocities.push(
            cone_velocity(&g, 0.5 * g.max_value())
                .map(|c| c.velocity)
                .unwrap_or(f64::NAN),
        );
    }
    let monotone = velocities.windows(2).all(|w| w[1] > w[0]);

    let mut r2 = Vec::new();
    for alpha in [8.0, 1.2] {
        let interactions = hopping_interactions(200, alpha).unwrap();
        let kappa = interactions.kappa();
        let t_max = 40.0 / (2.0 * kappa * kappa);
        let g = bound_grid(
            &BoundKind::Matexp {
                interactions,
                source: 0,
            },
            &deltas,
            &linspace(0.0, t_max, 801),
        )
        .unwrap();
        r2.push(contour_linearity(&g, 0.1));
    }
    let ok = monotone && r2[0] > 0.99 && r2[1] < 0.9;
    report(
        10,
        ok,
        format!(
            "cone velocities {velocities:.3?} for alpha 0.75, 1.5, 3; contour R^2 {:.4} at alpha=8, {:.4} at alpha=1.2",
            r2[0], r2[1]
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_11_normalization_regimes() {
    let sizes: Vec<usize> = (8..=13).map(|p| 1usize << p).collect();
    let factor = |n: usize, alpha: f64| {
        normalization_factor(&LatticeSpec::chain(n, Boundary::Periodic).unwrap(), alpha).unwrap()
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        let pts: Vec<(f64, f64)> = sizes
            .iter()
            .map(|&n| (n as f64, factor(n, alpha)))
            .collect();
        let e = fit_power_law(&pts).unwrap().exponent;
        let good = (e - (alpha - 1.0)).abs() <= 0.05;
        ok &= good;
        detail.push(format!(
            "alpha={alpha}: exponent {e:.3} vs {:.2}",
            alpha - 1.0
        ));
    }
    let (a, b) = (factor(1 << 12, 2.0), factor(1 << 13, 2.0));
    let c2 = (b - a).abs() / a;
    ok &= c2 < 0.01;
    detail.push(format!("alpha=2: last-doubling change {:.2e}", c2));
    let prod = |n: usize| factor(n, 1.0) * (n as f64).ln();
    let c1 = (prod(1 << 13) - prod(1 << 12)).abs() / prod(1 << 12);
    ok &= c1 < 0.02;
    detail.push(format!("alpha=1: N ln N product change {:.2}%", 100.0 * c1));
    report(11, ok, detail.join("; "));
    assert!(ok);
}

#[test]
fn criterion_12_zero_time_and_monotonicity() {
    let deltas: Vec<usize> = (1..=10).collect();
    let chain = LatticeSpec::chain(20, Boundary::Periodic).unwrap();
    let hopping = hopping_interactions(20, 3.0).unwrap();
    let kinds = vec![
        (
            BoundKind::HastingsKoma(HKParams::new(1.0, 2.0, 2.0, 1, 1, 1).unwrap()),
            3.0,
        ),
        (
            BoundKind::Rescaled {
                decay: DecayParams::new(1.5, 1.0, reproducibility_constant(&chain, 1.5).unwrap())
                    .unwrap(),
                size_a: 1,
                size_b: 2,
                n_factor: normalization_factor(&chain, 1.5).unwrap(),
            },
            3.0,
        ),
        (
            BoundKind::Matexp {
                interactions: power_law_interactions(&chain, 2.5, 1.0).unwrap(),
                source: 3,
            },
            2.0,
        ),
        (
            BoundKind::MatexpCirculant {
                first_row: hopping.circulant_row().unwrap(),
            },
            2.0,
        ),
        (BoundKind::Gong(GongParams::from_chain(2.5).unwrap()), 0.05),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (kind, t_max) in &kinds {
        let times = linspace(0.0, *t_max, 41);
        let g = bound_grid(kind, &deltas, &times).unwrap();
        let zero = (0..g.rows()).all(|r| g.get(r, 0) == 0.0);
        let increasing = (0..g.rows()).all(|r| g.row(r).windows(2).all(|w| w[1] > w[0]));
        ok &= zero && increasing;
        detail.push(format!(
            "{}: zero {zero}, increasing {increasing}",
            kind.name()
        ));
    }
    let gong = GongParams::from_chain(1.5).unwrap();
    let mut excess = f64::NEG_INFINITY;
    for delta in [1.0, 5.0, 30.0] {
        for t in [0.001, 0.01, 0.05] {
            let best = gong_bound(&gong, delta, t).unwrap();
            let (lo, hi) = GONG_MU_BRACKET;
            let grid_min = linspace(lo, hi, 101)
                .into_iter()
                .map(|mu| {
                    let (a, b) = gong_terms(&gong, mu, delta, t).unwrap();
                    a + b
                })
                .fold(f64::INFINITY, f64::min);
            excess = excess.max(best - grid_min);
        }
    }
    ok &= excess <= 1e-12;
    detail.push(format!("gong minus 101-point grid minimum <= {excess:.2e}"));
    report(12, ok, detail.join("; "));
    assert!(ok);
}

fn run_binary(args: &[&str], dir: &std::path::Path, name: &str, epoch: Option<&str>) -> Vec<u8> {
    let path = dir.join(name);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_soundcone"));
    cmd.args(args).arg("--output").arg(&path);
    match epoch {
        Some(e) => cmd.env("SOURCE_DATE_EPOCH", e),
        None => cmd.env_remove("SOURCE_DATE_EPOCH"),
    };
    let status = cmd.status().unwrap();
    assert!(status.success(), "{args:?} exited with {status}");
    std::fs::read(path).unwrap()
}

#[test]
fn criterion_13_cli_determinism_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    let runs: [&[&str]; 3] = [
        &[
            "bound",
            "matexp",
            "--n",
            "201",
            "--alpha",
            "8",
            "--t-max",
            "20",
            "--t-steps",
            "200",
        ],
        &[
            "hopping",
            "correlations",
            "--n",
            "64",
            "--alpha",
            "1.5",
            "--format",
            "json",
        ],
        &[
            "channel",
            "curve",
            "--n",
            "8",
            "--couplings",
            "random",
            "--seed",
            "5",
        ],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = run_binary(args, dir.path(), &format!("a{i}"), Some("1700000000"));
        let b = run_binary(args, dir.path(), &format!("b{i}"), Some("1700000000"));
        let c = run_binary(args, dir.path(), &format!("c{i}"), None);
        let format = if args.contains(&"json") {
            Format::Json
        } else {
            Format::Csv
        };
        let data = |bytes: &[u8]| parse(bytes, format).unwrap().data;
        let same = a == b && data(&a) == data(&c);
        ok &= same;
        detail.push(format!("{} {}: identical {same}", args[0], args[1]));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let values: Vec<f64> = (0..100 * 100)
        .map(|_| rng.random::<f64>() * 10f64.powi(rng.random_range(-300..300)))
        .collect();
    let times: Vec<f64> = (0..100)
        .map(|i| i as f64 * 0.1 + rng.random::<f64>() * 0.01)
        .collect();
    let grid = SpacetimeGrid::new((1..=100).collect(), times, values, Default::default()).unwrap();
    let file = GridFile::from_grid(
        grid,
        [("quantity".to_string(), "random".to_string())].into(),
    )
    .unwrap();
    let csv = parse(&serialize(&file, Format::Csv).unwrap(), Format::Csv).unwrap();
    let json = parse(&serialize(&file, Format::Json).unwrap(), Format::Json).unwrap();
    let bitwise = |f: &GridFile| match (&f.data, &file.data) {
        (Data::Grid(x), Data::Grid(y)) => {
            x.values()
                .iter()
                .zip(y.values())
                .all(|(a, b)| a.to_bits() == b.to_bits())
                && x.t_values()
                    .iter()
                    .zip(y.t_values())
                    .all(|(a, b)| a.to_bits() == b.to_bits())
                && x.delta_values() == y.delta_values()
        }
        _ => false,
    };
    let lossless = csv == file && json == file && bitwise(&csv) && bitwise(&json);
    ok &= lossless;
    detail.push(format!("100x100 round trip lossless {lossless}"));
    report(13, ok, detail.join("; "));
    assert!(ok);
}
