//! End-to-end acceptance checks. Each test writes one `PASS`/`FAIL` line
//! with the measured figures straight to stderr, so the report shows up
//! with or without `--nocapture`.

use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use qrabi::dressed::{default_band_cutoff, initial_amplitudes, BandLabel, DressedBasis};
use qrabi::dynamics::{
    amplitudes_to_state, build_hamiltonian, extract_oscillation_frequency, propagate_amplitudes, propagate_full,
    AmplitudeOptions, FullOptions, IntegratorConfig, TimeGrid,
};
use qrabi::fock::{self, SpinFockVector, TruncationConfig};
use qrabi::output::Metadata;
use qrabi::params::{ModelParams, Sign};
use qrabi::rabi::{self, TransitionKind, TransitionSpec};

const NORM_BAR: f64 = 1e-8;

fn report(criterion: u32, title: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {criterion} [{verdict}] {title}: {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn params(omega: f64, delta: f64, g: f64) -> ModelParams {
    ModelParams::new(omega, delta, g).unwrap()
}

fn label(n: usize, sigma: Sign) -> BandLabel {
    BandLabel::new(n, sigma)
}

#[test]
fn criterion_1_matrix_element_oracle() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for theta in [0.1, 0.5, 1.0, 2.0] {
        let trunc = TruncationConfig::for_indices(40, theta);
        let d = fock::displacement(trunc, theta).unwrap();
        for m in 0..=40 {
            for n in 0..=40 {
                let closed = fock::displaced_matrix_element(m as u64, n as u64, theta).unwrap();
                let e = d.get(m, n);
                worst = worst.max((closed - e.re).abs()).max(e.im.abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed <= Duration::from_secs(30);
    report(1, "closed form vs matrix exponential, m,n <= 40", pass, format!("max |diff| = {worst:.3e}, {elapsed:.2?}"));
    assert!(pass);
}

/// `cosh(θX)` and `sinh(θX)` for the real antisymmetric `X = a − a†`, built
/// from the eigen-decomposition of the symmetric `−X² = Q Λ Qᵀ`:
/// `cosh(θX) = Q cos(θ√Λ) Qᵀ`, `sinh(θX) = X Q sin(θ√Λ)/√Λ Qᵀ`.
fn hyperbolic_oracle(theta: f64, dim: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut x = DMatrix::<f64>::zeros(dim, dim);
    for k in 1..dim {
        let s = (k as f64).sqrt();
        x[(k - 1, k)] = s;
        x[(k, k - 1)] = -s;
    }
    let minus_sq = -(&x * &x);
    let eig = SymmetricEigen::new(minus_sq);
    let q = &eig.eigenvectors;
    let mut c = DMatrix::<f64>::zeros(dim, dim);
    let mut s = DMatrix::<f64>::zeros(dim, dim);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let r = lam.max(0.0).sqrt();
        c[(k, k)] = (theta * r).cos();
        s[(k, k)] = if r > 1e-300 { (theta * r).sin() / r } else { theta };
    }
    let cosh = q * c * q.transpose();
    let sinh = &x * (q * s * q.transpose());
    (cosh, sinh)
}

#[test]
fn criterion_2_hyperbolic_identity() {
    let delta = 0.37;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for theta in [0.1, 0.5, 1.0, 1.5, 2.0] {
        let p = params(1.0, delta, 0.5 * theta);
        let (cosh, sinh) = hyperbolic_oracle(theta, 140);
        for n in 0..=30usize {
            for m in 0..=30usize {
                if n == m {
                    continue;
                }
                let diff = m as i64 - n as i64;
                let (to_sigma, oracle) = match TransitionKind::allowed_for(diff) {
                    TransitionKind::Intraband => (Sign::Plus, cosh[(n, m)]),
                    TransitionKind::Interband => (Sign::Minus, sinh[(n, m)]),
                };
                let spec = TransitionSpec::new(label(n, Sign::Plus), label(m, to_sigma));
                let r = rabi::rabi_frequency(&spec, &p).unwrap().frequency;
                worst = worst.max((r - delta * oracle.abs()).abs());
                checked += 1;
            }
        }
    }
    let pass = worst <= 1e-9;
    report(2, "parity formulas vs sinh/cosh oracle, n,m <= 30", pass, format!("{checked} pairs, max |diff| = {worst:.3e}"));
    assert!(pass);
}

#[test]
fn criterion_3_parity_selection_exact() {
    let mut forbidden = 0;
    let mut violations = Vec::new();
    for theta in [0.1, 0.7, 2.0] {
        let p = params(1.0, 0.4, 0.5 * theta);
        for n in 0..=30usize {
            for m in 0..=30usize {
                for (s, s2) in [(Sign::Plus, Sign::Plus), (Sign::Plus, Sign::Minus), (Sign::Minus, Sign::Plus), (Sign::Minus, Sign::Minus)] {
                    let spec = TransitionSpec::new(label(n, s), label(m, s2));
                    if spec.allowed() {
                        continue;
                    }
                    forbidden += 1;
                    let r = rabi::rabi_frequency(&spec, &p).unwrap().frequency;
                    let v = rabi::band_coupling(&spec, &p).unwrap();
                    if r != 0.0 || v != 0.0 {
                        violations.push((spec, r, v));
                    }
                }
            }
        }
    }
    let pass = violations.is_empty();
    report(3, "forbidden transitions return exactly 0", pass, format!("{forbidden} forbidden pairs, {} nonzero", violations.len()));
    assert!(pass, "{violations:?}");
}

#[test]
fn criterion_4_bessel_asymptote() {
    let start = Instant::now();
    let mut devs = Vec::new();
    for n in [25usize, 400, 10_000] {
        let g = 1.0 / (4.0 * (n as f64).sqrt());
        let p = params(1.0, 0.2, g);
        let spec = TransitionSpec::new(label(n, Sign::Plus), label(n + 1, Sign::Minus));
        let r = rabi::rabi_frequency(&spec, &p).unwrap();
        assert!((r.bessel_argument - 1.0).abs() < 1e-12);
        devs.push(r.relative_deviation());
    }
    let elapsed = start.elapsed();
    let pass = devs[1] < devs[0] && devs[2] < devs[1] && devs[2] < 0.01 && elapsed <= Duration::from_secs(10);
    report(
        4,
        "Bessel asymptote at 4 sqrt(n) g/omega = 1",
        pass,
        format!("relative deviations {:.3e} / {:.3e} / {:.3e} at n = 25 / 400 / 10^4, {elapsed:.2?}", devs[0], devs[1], devs[2]),
    );
    assert!(pass);
}

#[test]
fn criterion_5_poisson_decomposition() {
    let mut worst_norm = 0.0f64;
    let mut worst_rel = 0.0f64;
    for g in [0.3, 1.0] {
        let p = params(1.0, 0.1, g);
        let d = initial_amplitudes(&p, default_band_cutoff(&p)).unwrap();
        worst_norm = worst_norm.max((d.weight() - 1.0).abs());
        let mu = g * g;
        let mut poisson = (-mu).exp();
        for (n, w) in d.photon_weights().into_iter().enumerate() {
            if n > 0 {
                poisson *= mu / n as f64;
            }
            if poisson > 1e-300 {
                worst_rel = worst_rel.max((w - poisson).abs() / poisson);
            }
        }
    }
    let pass = worst_norm <= 1e-12 && worst_rel <= 1e-12;
    report(
        5,
        "vacuum decomposition is Poissonian",
        pass,
        format!("|sum - 1| = {worst_norm:.3e}, max relative weight error = {worst_rel:.3e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_6_zero_splitting_degeneracy() {
    let p = params(1.0, 0.0, 1.0);
    let trunc = TruncationConfig::new(200, TruncationConfig::default_guard(p.theta())).unwrap();
    let h = build_hamiltonian(&p, trunc);
    let e = h.entries();
    let imag = e.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let real = e.map(|c| c.re);
    let mut vals: Vec<f64> = SymmetricEigen::new(real).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    let levels = trunc.n_max / 4;
    let mut worst = 0.0f64;
    for n in 0..levels {
        let exact = n as f64 - 1.0;
        worst = worst.max((vals[2 * n] - exact).abs()).max((vals[2 * n + 1] - exact).abs());
    }
    let pass = worst <= 1e-6 && imag == 0.0;
    report(6, "delta = 0 spectrum n omega - g^2/omega, doubly degenerate", pass, format!("{levels} levels, max |diff| = {worst:.3e}"));
    assert!(pass);
}

struct PictureRuns {
    min_fidelity: f64,
    drifts: [f64; 2],
    elapsed: Duration,
}

fn picture_runs() -> &'static PictureRuns {
    static RUNS: OnceLock<PictureRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let p = params(1.0, 0.01, 1.0);
        let trunc = TruncationConfig::new(120, TruncationConfig::default_guard(p.theta())).unwrap();
        let grid = TimeGrid::new(0.0, 50.0, 101).unwrap();
        let cfg = IntegratorConfig::default();
        let full = propagate_full(
            &SpinFockVector::vacuum_ground(trunc),
            &grid,
            &p,
            &cfg,
            &FullOptions {
                keep_states: true,
                ..Default::default()
            },
        )
        .unwrap();
        let d0 = initial_amplitudes(&p, trunc.interior()).unwrap();
        let amp = propagate_amplitudes(
            &d0,
            &grid,
            &p,
            &cfg,
            &AmplitudeOptions {
                bands: vec![],
                keep_snapshots: true,
            },
        )
        .unwrap();
        let basis = DressedBasis::new(&p, trunc).unwrap();
        let min_fidelity = grid
            .times()
            .iter()
            .zip(amp.snapshots.iter().zip(&full.states))
            .map(|(&t, (a, psi))| amplitudes_to_state(&basis, a, t).unwrap().fidelity(psi))
            .fold(1.0, f64::min);
        PictureRuns {
            min_fidelity,
            drifts: [full.max_norm_drift, amp.max_norm_drift],
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn criterion_7_picture_equivalence() {
    let r = picture_runs();
    let pass = r.min_fidelity >= 1.0 - 1e-6 && r.elapsed <= Duration::from_secs(300);
    report(
        7,
        "band amplitudes mapped back vs full evolution, t in [0, 50]",
        pass,
        format!("min fidelity = 1 - {:.3e}, {:.2?}", 1.0 - r.min_fidelity, r.elapsed),
    );
    assert!(pass);
}

struct RwaScan {
    ratios: [f64; 3],
    deviations: [f64; 3],
    drifts: Vec<f64>,
}

fn rwa_scan() -> &'static RwaScan {
    static SCAN: OnceLock<RwaScan> = OnceLock::new();
    SCAN.get_or_init(|| {
        let (omega, g) = (1.0, 0.1);
        let spec = TransitionSpec::new(label(0, Sign::Plus), label(1, Sign::Minus));
        let ratios = [0.05, 0.2, 0.5];
        let mut deviations = [0.0; 3];
        let mut drifts = Vec::new();
        for (i, &ratio) in ratios.iter().enumerate() {
            let delta = rabi::delta_for_detuning_ratio(&spec, omega, g, ratio).unwrap();
            let p = params(omega, delta, g);
            let r = rabi::rabi_frequency(&spec, &p).unwrap();
            assert!((r.detuning_ratio() - ratio).abs() < 1e-9);
            let trunc = TruncationConfig::for_indices(12, p.theta());
            let psi0 = DressedBasis::new(&p, trunc).unwrap().band_eigenstate(spec.from).unwrap();
            let period = 2.0 * std::f64::consts::PI / r.frequency;
            let grid = TimeGrid::new(0.0, 16.0 * period, 4001).unwrap();
            let run = propagate_full(
                &psi0,
                &grid,
                &p,
                &IntegratorConfig::default(),
                &FullOptions {
                    bands: vec![spec.to],
                    ..Default::default()
                },
            )
            .unwrap();
            let est = extract_oscillation_frequency(&run.series, &spec.to.track_name()).unwrap();
            deviations[i] = (est.omega - r.frequency).abs() / r.frequency;
            drifts.push(run.max_norm_drift);
        }
        RwaScan {
            ratios,
            deviations,
            drifts,
        }
    })
}

#[test]
fn criterion_8_rwa_quality() {
    let s = rwa_scan();
    let d = s.deviations;
    let pass = d[0] < 0.10 && d[0] < d[1] && d[1] < d[2];
    report(
        8,
        "dominant frequency of the full evolution vs R",
        pass,
        format!(
            "relative deviation {:.4} / {:.4} / {:.4} at |detuning|/R = {} / {} / {}",
            d[0], d[1], d[2], s.ratios[0], s.ratios[1], s.ratios[2]
        ),
    );
    assert!(pass);
}

fn cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_qrabi")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn criterion_9_unitarity_and_reproducibility() {
    let mut drifts: Vec<f64> = picture_runs().drifts.to_vec();
    drifts.extend(&rwa_scan().drifts);

    let configs: [&[&str]; 3] = [
        &["--omega", "1", "--delta", "0.01", "--g", "1", "--nmax", "120", "--tmax", "50", "--samples", "101", "evolve"],
        &["--g", "0.1", "--delta", "1.04", "--samples", "401", "compare", "--from", "0:+1", "--to", "1:-1"],
        &["--delta", "0.2", "rabi-sweep", "--var", "n", "--start", "25", "--stop", "10000", "--points", "30", "--log", "--fixed-arg", "1"],
    ];
    let mut identical = true;
    for args in configs {
        let a = cli(args);
        let b = cli(args);
        identical &= a == b;
        let meta = Metadata::parse_header(std::str::from_utf8(&a).unwrap());
        if let Some(d) = meta.get("max_norm_drift") {
            drifts.push(d.parse().unwrap());
        }
    }
    let worst = drifts.iter().copied().fold(0.0, f64::max);
    let pass = worst <= NORM_BAR && identical;
    report(
        9,
        "norm drift and byte-identical reruns",
        pass,
        format!("max drift = {worst:.3e} over {} runs, reruns identical: {identical}", drifts.len()),
    );
    assert!(pass);
}

/// Doubling the cutoff leaves the observables of the picture-equivalence
/// configuration unchanged.
#[test]
fn truncation_robustness() {
    let p = params(1.0, 0.01, 1.0);
    let grid = TimeGrid::new(0.0, 50.0, 51).unwrap();
    let run = |n_max: usize| {
        // half the space as guard keeps the displacement certifiable at both sizes
        let trunc = TruncationConfig::new(n_max, n_max / 2).unwrap();
        let opts = FullOptions {
            bands: (0..4).flat_map(|n| [label(n, Sign::Minus), label(n, Sign::Plus)]).collect(),
            ..Default::default()
        };
        propagate_full(&SpinFockVector::vacuum_ground(trunc), &grid, &p, &IntegratorConfig::default(), &opts).unwrap()
    };
    let (a, b) = (run(120), run(240));
    let mut worst = 0.0f64;
    for name in a.series.names() {
        if name == "norm" {
            continue;
        }
        let (x, y) = (a.series.real(name).unwrap(), b.series.real(name).unwrap());
        worst = x.iter().zip(y).map(|(u, v)| (u - v).abs()).fold(worst, f64::max);
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn energy_is_conserved() {
    let p = params(1.0, 0.3, 0.8);
    let trunc = TruncationConfig::for_indices(40, p.theta());
    let grid = TimeGrid::new(0.0, 40.0, 81).unwrap();
    let run = propagate_full(&SpinFockVector::vacuum_ground(trunc), &grid, &p, &IntegratorConfig::default(), &FullOptions::default())
        .unwrap();
    let e = run.series.real("energy").unwrap();
    let worst = e.iter().map(|x| (x - e[0]).abs() / e[0].abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}
