//! The acceptance suite behind `pauli report`.
//!
//! Every criterion has a fixed setup, returns a deterministic detail line and
//! may attach CSV artifacts. Runtime limits enter the verdict but elapsed
//! times never enter the artifacts.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use pauli_core::axial::{axial_coupling, AxialGrid, AxialProfile, GridMapping, KConstants};
use pauli_core::charvals::{
    gs_index, locate, locate_annulus, ContourShape, DerivativeScheme, HolomorphicFamily, LocateOptions,
    ScalarFamily,
};
use pauli_core::effective::{exceptional_couplings, CouplingScan, EffectiveModel, RemainderOrder};
use pauli_core::landau::{
    counting, LandauBasisSpec, PowerLawVerdict, RadialProfile, SectorElements, ToeplitzSpectrum,
};
use pauli_core::spectra::{negative_counts, sandwich_report, schur_check, DirectSetup, SectorMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::hash_text;
use crate::table::{flag, num, Table};

const SEED: u64 = 0x5eed_0a11;

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub artifacts: Vec<Artifact>,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!("{} {:>2} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.name, self.detail)
    }
}

type Check = pauli_core::Result<(bool, String, Vec<Artifact>)>;

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "toeplitz closed form", limit: Some(Duration::from_secs(1)), run: toeplitz_closed_form },
    Criterion { id: 2, name: "toeplitz counting rate", limit: None, run: counting_rate },
    Criterion { id: 3, name: "axial constants", limit: None, run: axial_constants },
    Criterion { id: 4, name: "operator inequalities", limit: None, run: operator_inequalities },
    Criterion { id: 5, name: "counting transfer", limit: None, run: counting_transfer },
    Criterion { id: 6, name: "logarithmic residue index", limit: Some(Duration::from_secs(10)), run: index_checks },
    Criterion { id: 7, name: "localization", limit: None, run: localization },
    Criterion { id: 8, name: "schur complement", limit: None, run: schur_equivalence },
    Criterion { id: 9, name: "sandwich", limit: None, run: sandwich },
];

/// Identifiers of the computational criteria, in order.
pub fn criterion_ids() -> Vec<usize> {
    CRITERIA.iter().map(|c| c.id).collect()
}

/// Runs one computational criterion (`1..=9`).
pub fn run_criterion(id: usize) -> Option<Outcome> {
    let c = CRITERIA.iter().find(|c| c.id == id)?;
    let start = Instant::now();
    let result = (c.run)();
    let elapsed = start.elapsed();
    let (mut pass, mut detail, artifacts) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}"), Vec::new()),
    };
    if let Some(limit) = c.limit {
        if elapsed > limit {
            pass = false;
            detail.push_str(&format!("; over the {} s runtime limit", limit.as_secs()));
        }
    }
    Some(Outcome { id: c.id, name: c.name, pass, detail, artifacts, elapsed })
}

/// Byte comparison of two artifact sets.
pub fn determinism(first: &[Artifact], second: &[Artifact]) -> Outcome {
    let mismatched: Vec<&str> = first
        .iter()
        .filter(|a| !second.iter().any(|b| b.file == a.file && b.contents == a.contents))
        .map(|a| a.file.as_str())
        .collect();
    let pass = mismatched.is_empty() && first.len() == second.len();
    let detail = if pass {
        format!("{} artifacts byte-identical", first.len())
    } else {
        format!("differing artifacts: {}", if mismatched.is_empty() { "file sets".to_string() } else { mismatched.join(" ") })
    };
    Outcome { id: 10, name: "determinism", pass, detail, artifacts: Vec::new(), elapsed: Duration::ZERO }
}

fn artifact(file: &str, setup: &str, table: &Table) -> Artifact {
    Artifact { file: file.to_string(), contents: table.to_csv(&hash_text(setup)) }
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn toeplitz_closed_form() -> Check {
    let setup = "gaussian e^(-b0 r^2/2), b0 in {0.5,1,2}, l <= 40";
    let mut table = Table::new(&["b0", "l", "lambda", "exact", "relative_error"]);
    let mut worst = 0.0f64;
    for b0 in [0.5, 1.0, 2.0] {
        let basis = LandauBasisSpec::new(b0, 0, 40, 32)?;
        let spectrum = ToeplitzSpectrum::compute(&RadialProfile::gaussian(0.5 * b0, 1.0)?, &basis)?;
        for (l, &lambda) in spectrum.eigenvalues.iter().enumerate() {
            let exact = 0.5f64.powi(l as i32 + 1);
            let rel = (lambda - exact).abs() / exact;
            worst = worst.max(rel);
            table.push(vec![num(b0), l.to_string(), num(lambda), num(exact), num(rel)]);
        }
    }
    let pass = worst < 1e-9;
    Ok((pass, format!("max relative error {worst:.3e} (< 1e-9)"), vec![artifact("c01_toeplitz.csv", setup, &table)]))
}

fn counting_rate() -> Check {
    let l_max = 60_000;
    let setup = format!("(1+r^2)^-1, b0=1, l_max={l_max}, s in [1e-4,1e-3]");
    let basis = LandauBasisSpec::new(1.0, 0, l_max, 32)?;
    let spectrum = ToeplitzSpectrum::compute(&RadialProfile::power_law(2.0, 1.0)?, &basis)?;
    let s = log_points(1e-4, 1e-3, 11);
    let report = pauli_core::landau::verify_power_law(&spectrum, 2.0, 1.0, &s, 0.1)?;
    let mut table = Table::new(&["s", "count", "count_half", "normalized", "c_alpha", "trusted"]);
    for r in &report.rows {
        table.push(vec![num(r.s), r.count.to_string(), r.count_half.to_string(), num(r.normalized), num(report.c_alpha), flag(r.trusted)]);
    }
    let pass = report.verdict == PowerLawVerdict::Consistent && l_max >= 20_000;
    let detail = format!(
        "n(s)*s vs {:.3}: max deviation {:.3e} (<= 0.1), fitted exponent {:.4}, verdict {:?}",
        report.c_alpha, report.max_relative_deviation, report.fitted_exponent, report.verdict
    );
    Ok((pass, detail, vec![artifact("c02_counting_rate.csv", &setup, &table)]))
}

/// `½⟨(−∂² + κ²)^{-1} e^{−|x|}, e^{−|x|}⟩` for κ ≠ 1 and its limit at κ = 1.
fn exp_abs_coupling(kappa: f64) -> f64 {
    (kappa + 2.0) / (2.0 * kappa * (kappa + 1.0).powi(2))
}

fn random_axial(rng: &mut ChaCha8Rng) -> pauli_core::Result<AxialProfile> {
    let bumps: Vec<(f64, f64, f64, C)> = (0..2)
        .map(|_| {
            let delta = rng.random_range(0.5..1.5);
            let shift = rng.random_range(-2.0..2.0);
            let amp = rng.random_range(0.2..2.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            (delta, shift, amp, C::from_polar(1.0, phase))
        })
        .collect();
    let delta = bumps.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    AxialProfile::custom(
        "random two-bump",
        move |x| {
            bumps
                .iter()
                .map(|&(d, s, a, p)| p * a * (-2.0 * d * ((1.0 + (x - s).powi(2)).sqrt() - 1.0)).exp())
                .sum()
        },
        delta,
    )
}

fn axial_constants() -> Check {
    let setup = format!("20 random two-bump profiles seed {SEED:#x}, b0=1, q<=4, uniform L3=36 N=262144; e^-|x| b0 in {{0.5,1}}, uniform L3=28 N=262144");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let grid = AxialGrid::uniform(36.0, 262_144)?;
    let mut table = Table::new(&["profile", "q", "c_q", "k1", "k2"]);
    let mut ordered = 0;
    let mut decreasing = 0;
    for i in 0..20 {
        let profile = random_axial(&mut rng)?;
        profile.check_grid(&grid)?;
        let k = KConstants::compute(&profile, 1.0, 3, &grid)?;
        ordered += usize::from(k.k1 < k.k2);
        decreasing += usize::from(k.is_decreasing() && k.within_resolvent_bound());
        for (q, c) in k.c.iter().enumerate() {
            table.push(vec![i.to_string(), (q + 1).to_string(), num(*c), num(k.k1), num(k.k2)]);
        }
    }
    let oracle_grid = AxialGrid::uniform(28.0, 262_144)?;
    let exp_abs = AxialProfile::exp_abs(1.0)?;
    let mut oracle_err = 0.0f64;
    for b0 in [0.5, 1.0] {
        let c1 = axial_coupling(1, &exp_abs, b0, &oracle_grid)?;
        let exact = exp_abs_coupling((2.0 * b0).sqrt());
        oracle_err = oracle_err.max((c1 - exact).abs());
        table.push(vec![format!("exp_abs b0={b0}"), "1".into(), num(c1), num(exact), String::new()]);
    }
    let pass = ordered == 20 && decreasing == 20 && oracle_err < 1e-6;
    let detail = format!(
        "K1 < K2 for {ordered}/20, c_q decreasing and <= K2/q for {decreasing}/20, e^-|x| c_1 error {oracle_err:.3e} (< 1e-6)"
    );
    Ok((pass, detail, vec![artifact("c03_constants.csv", &setup, &table)]))
}

fn operator_inequalities() -> Check {
    let setup = "power-law radial x exp_bracket(1,1), q_max=3, l <= 200, uniform L3=16 N=4096";
    let grid = AxialGrid::uniform(16.0, 4096)?;
    let axial = AxialProfile::exp_bracket(1.0, 1.0)?;
    let mut table = Table::new(&["b0", "alpha", "l", "toeplitz", "w_h2inv", "w_i", "lower_gap", "upper_gap"]);
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    for (b0, alpha) in [(1.0, 2.0), (2.0, 2.0), (1.0, 4.0)] {
        let basis = LandauBasisSpec::new(b0, 3, 200, 32)?;
        let model = EffectiveModel::new(basis, grid.clone(), RadialProfile::power_law(alpha, 1.0)?, axial.clone())?;
        let k1 = model.constants.k1;
        for b in model.blocks(200)? {
            let lower = b.w_h2inv - k1 * b.toeplitz * b.toeplitz;
            let upper = b.w_i / (2.0 * b0) - b.w_h2inv;
            worst_lower = worst_lower.min(lower);
            worst_upper = worst_upper.min(upper);
            table.push(vec![num(b0), num(alpha), b.l.to_string(), num(b.toeplitz), num(b.w_h2inv), num(b.w_i), num(lower), num(upper)]);
        }
    }
    let pass = worst_lower >= -1e-10 && worst_upper >= -1e-10;
    let detail = format!("min W - K1 lambda^2 = {worst_lower:.3e}, min W_I/(2b0) - W = {worst_upper:.3e} (>= -1e-10)");
    Ok((pass, detail, vec![artifact("c04_inequalities.csv", setup, &table)]))
}

fn counting_transfer() -> Check {
    let setup = format!("(q_max, N) in {{(1,24),(2,16),(3,12)}}, l <= 10, 50 thresholds seed {SEED:#x}");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let mut table = Table::new(&["q_max", "nodes", "r", "n_t0", "n_w"]);
    let mut mismatches = 0;
    let mut total = 0;
    for (q_max, n) in [(1usize, 24usize), (2, 16), (3, 12)] {
        let basis = LandauBasisSpec::new(1.0, q_max, 10, 32)?;
        let grid = AxialGrid::small(12.0, n, GridMapping::Uniform)?;
        let model = EffectiveModel::new(
            basis,
            grid,
            RadialProfile::power_law(2.0, 1.0)?,
            AxialProfile::exp_bracket(1.0, 1.0)?,
        )?;
        let mut t0 = Vec::new();
        let mut w = Vec::new();
        for l in 0..=10 {
            let el = model.elements(l)?;
            let fam = pauli_core::effective::SectorFamily::new(&model, &el, 0.3, RemainderOrder::Zero)?;
            t0.extend(fam.t0_eigenvalues());
            w.push(model.block_from(&el)?.w_h2inv);
        }
        let top = w.iter().copied().fold(0.0, f64::max);
        for _ in 0..50 {
            let r = top * 10f64.powf(rng.random_range(-6.0..0.3));
            let (a, b) = (counting(&t0, r), counting(&w, r));
            mismatches += usize::from(a != b);
            total += 1;
            table.push(vec![q_max.to_string(), n.to_string(), num(r), a.to_string(), b.to_string()]);
        }
    }
    let pass = mismatches == 0;
    Ok((pass, format!("{}/{total} thresholds with equal counts", total - mismatches), vec![artifact("c05_transfer.csv", &setup, &table)]))
}

/// `I − ν² (i/k) T₀` for a fixed Hermitian `T₀`.
struct OrderZero {
    t0: DMatrix<C>,
    nu: f64,
}

impl HolomorphicFamily for OrderZero {
    fn dim(&self) -> usize {
        self.t0.nrows()
    }

    fn eval(&self, k: C) -> pauli_core::Result<DMatrix<C>> {
        let s = C::new(0.0, self.nu * self.nu) / k;
        Ok(DMatrix::identity(self.dim(), self.dim()) - self.t0.map(|x| x * s))
    }

    fn derivative(&self, k: C) -> Option<pauli_core::Result<DMatrix<C>>> {
        let s = C::new(0.0, self.nu * self.nu) / (k * k);
        Some(Ok(self.t0.map(|x| x * s)))
    }
}

fn synthetic_t0(mu: &[f64]) -> DMatrix<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let n = mu.len();
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = a.qr().q();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(mu));
    (&q * d * q.transpose()).map(|x| C::new(x, 0.0))
}

fn index_checks() -> Check {
    let setup = "scalar index examples; order-0 family mu=(0.5,0.3,0.3,0.1,0), nu=0.5; sector l=0 order 0";
    let unit = ContourShape::Circle { center: C::new(0.0, 0.0), radius: 1.0 };
    let scheme = DerivativeScheme::Analytic;
    let one = C::new(1.0, 0.0);
    let scalar: [(&str, i64, pauli_core::Result<pauli_core::charvals::IndexEvaluation>); 4] = [
        ("z-0.5", 1, gs_index(&ScalarFamily::with_derivative(|z| z - 0.5, move |_| one), unit, scheme, 1024)),
        ("1", 0, gs_index(&ScalarFamily::with_derivative(move |_| one, |_| C::new(0.0, 0.0)), unit, scheme, 1024)),
        ("(z-0.3)^2(z-2)", 2, gs_index(&ScalarFamily::new(|z: C| (z - 0.3) * (z - 0.3) * (z - 2.0)), unit, scheme, 1024)),
        ("(z-0.5)/(z-0.2)", 0, gs_index(&ScalarFamily::new(|z: C| (z - 0.5) / (z - 0.2)), unit, scheme, 1024)),
    ];
    let mut table = Table::new(&["case", "expected", "index", "residual"]);
    let mut scalar_ok = true;
    for (name, expected, eval) in scalar {
        let eval = eval?;
        scalar_ok &= eval.index == expected && eval.residual < 1e-6;
        table.push(vec![name.to_string(), expected.to_string(), eval.index.to_string(), num(eval.residual)]);
    }

    let mu = [0.5, 0.3, 0.3, 0.1, 0.0];
    let nu = 0.5;
    let family = OrderZero { t0: synthetic_t0(&mu), nu };
    let (lo, hi) = (C::new(-0.05, 0.01), C::new(0.05, 0.2));
    let whole = gs_index(&family, ContourShape::Rectangle { lo, hi }, scheme, 4096)?;
    let mid = 0.5 * (lo + hi) + C::new(0.0123 * 0.1, 0.0123 * 0.19);
    let quads = [
        (lo, mid),
        (C::new(mid.re, lo.im), C::new(hi.re, mid.im)),
        (C::new(lo.re, mid.im), C::new(mid.re, hi.im)),
        (mid, hi),
    ];
    let mut parts = 0;
    for (a, b) in quads {
        parts += gs_index(&family, ContourShape::Rectangle { lo: a, hi: b }, scheme, 4096)?.index;
    }
    let additive = parts == whole.index;
    table.push(vec!["4-cell tiling".into(), whole.index.to_string(), parts.to_string(), String::new()]);

    let opts = LocateOptions { min_size: 1e-6, max_nodes: 4096, ..Default::default() };
    let found = locate(&family, lo, hi, &opts)?;
    let mut expected: Vec<(f64, usize)> = vec![(0.5, 1), (0.3, 2), (0.1, 1)];
    expected.iter_mut().for_each(|e| e.0 *= nu * nu);
    let mut located = found.values.len() == expected.len();
    for (im, mult) in &expected {
        let hit = found.values.iter().find(|v| (v.k - C::new(0.0, *im)).norm() <= 1e-6);
        located &= hit.is_some_and(|v| v.multiplicity == *mult);
        let (k, m) = hit.map_or((f64::NAN, 0), |v| (v.k.im, v.multiplicity));
        table.push(vec![format!("locate i*{im}"), mult.to_string(), m.to_string(), num((k - im).abs())]);
    }

    let basis = LandauBasisSpec::new(1.0, 1, 0, 32)?;
    let grid = AxialGrid::small(12.0, 16, GridMapping::Uniform)?;
    let model = EffectiveModel::new(basis, grid, RadialProfile::power_law(2.0, 1.0)?, AxialProfile::exp_bracket(1.0, 1.0)?)?;
    let nu_s = 0.1f64.sqrt();
    let sector = model.family(0, nu_s, RemainderOrder::Zero)?;
    let target = nu_s * nu_s * sector.t0_eigenvalues()[0];
    let sector_found = locate(&sector, C::new(-0.02, 0.001), C::new(0.02, 0.02), &opts)?;
    let sector_ok = sector_found.values.len() == 1
        && sector_found.values[0].multiplicity == 1
        && (sector_found.values[0].k - C::new(0.0, target)).norm() <= 1e-6;
    table.push(vec![
        "sector l=0 order 0".into(),
        "1".into(),
        sector_found.values.len().to_string(),
        sector_found.values.first().map_or(String::new(), |v| num((v.k - C::new(0.0, target)).norm())),
    ]);

    let pass = scalar_ok && additive && located && sector_ok;
    let detail = format!(
        "scalar indices {}, additivity {} = {}, order-0 values {} with multiplicities {}, sector value {}",
        if scalar_ok { "exact" } else { "wrong" },
        whole.index,
        parts,
        found.values.len(),
        if located { "recovered" } else { "not recovered" },
        if sector_ok { "recovered" } else { "not recovered" },
    );
    Ok((pass, detail, vec![artifact("c06_index.csv", setup, &table)]))
}

fn localization() -> Check {
    let setup = "b0=1, q_max=1, l <= 2, (1+r^2)^-1 x exp_bracket(1,1), uniform L3=14 N=40, nu^2=0.1, 1e-3<|k|<1e-1, alpha=0.05";
    let alpha = 0.05;
    let basis = LandauBasisSpec::new(1.0, 1, 2, 32)?;
    let grid = AxialGrid::small(14.0, 40, GridMapping::Uniform)?;
    let model = EffectiveModel::new(basis, grid, RadialProfile::power_law(2.0, 1.0)?, AxialProfile::exp_bracket(1.0, 1.0)?)?;
    let nu = 0.1f64.sqrt();
    let opts = LocateOptions { resolve_simple: true, ..Default::default() };
    let mut table = Table::new(&["l", "re_k", "im_k", "multiplicity", "in_annulus", "sector_ok", "predicted_im_k"]);
    let mut exceptional = Vec::new();
    let (mut inside, mut in_sector, mut wrong_side) = (0, 0, 0);
    for l in 0..=2 {
        let fam = model.family(l, nu, RemainderOrder::Full)?;
        exceptional.extend(exceptional_couplings(&fam.t0, fam.b_zero()));
        let predicted = nu * nu * fam.t0_eigenvalues()[0];
        let report = locate_annulus(&fam, 1e-3, 1e-1, fam.eps, nu, alpha, &opts)?;
        for (v, within) in report.values.iter().map(|v| (v, true)).chain(report.outside.iter().map(|v| (v, false))) {
            if within {
                inside += 1;
                in_sector += usize::from(v.sector_ok);
            }
            wrong_side += usize::from(v.k.im < -alpha * v.k.norm());
            table.push(vec![
                l.to_string(),
                num(v.k.re),
                num(v.k.im),
                v.multiplicity.to_string(),
                flag(within),
                flag(v.sector_ok),
                num(predicted),
            ]);
        }
    }
    let scan = CouplingScan::new(nu, exceptional, None);
    let pass = scan.safe && inside > 0 && in_sector == inside && wrong_side == 0;
    let detail = format!(
        "nu safe {}, {in_sector}/{inside} annulus values in the sector, {wrong_side} values in the excluded half-plane",
        scan.safe
    );
    Ok((pass, detail, vec![artifact("c07_localization.csv", setup, &table)]))
}

fn schur_equivalence() -> Check {
    let setup = "l=0, q_max=1, (1+r^2)^-1, e^0.7i exp_bracket(1,1), uniform L3=6 N=8, nu=0.9, 100 z < 1.8 b0";
    let b0 = 1.0;
    let el = SectorElements::compute(0, &RadialProfile::power_law(2.0, 1.0)?, b0, 1, 32)?;
    let grid = AxialGrid::small(6.0, 8, GridMapping::Uniform)?;
    let u = AxialProfile::exp_bracket(1.0, 1.0)?.scaled(C::from_polar(1.0, 0.7)).sample(&grid);
    let sector = SectorMatrix::new(0, b0, 0.9, el.uperp, u, &grid);
    let cut = 1.8 * b0;
    let eig: Vec<f64> = sector.dense_eigenvalues().into_iter().filter(|&e| e < cut).collect();
    let lo = eig.first().copied().unwrap_or(0.0) - 1.0;
    let mut points: Vec<(f64, bool)> = eig.iter().map(|&e| (e, true)).collect();
    let fill = 100 - points.len();
    for j in 0..fill {
        let z = lo + (cut - lo) * (j as f64 + 0.37) / fill as f64;
        if eig.iter().all(|&e| (e - z).abs() > 1e-6) {
            points.push((z, false));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut table = Table::new(&["z", "eigenvalue", "sigma_full", "sigma_schur", "scale", "det_relative_error"]);
    let mut agree = 0;
    let mut worst_det = 0.0f64;
    for &(z, is_eig) in &points {
        let check = schur_check(z, &sector)?;
        let tol = 1e-8 * check.scale;
        let ok = if is_eig {
            check.sigma_full < tol && check.sigma_schur < tol
        } else {
            worst_det = worst_det.max(check.det_relative_error());
            check.consistent(1e-8) && check.sigma_full >= tol && check.det_relative_error() < 1e-8
        };
        agree += usize::from(ok);
        table.push(vec![num(z), flag(is_eig), num(check.sigma_full), num(check.sigma_schur), num(check.scale), num(check.det_relative_error())]);
    }
    let pass = agree == points.len() && points.len() == 100 && !eig.is_empty();
    let detail = format!(
        "{agree}/{} points agree ({} eigenvalues), worst determinant mismatch {worst_det:.3e} (< 1e-8)",
        points.len(),
        eig.len()
    );
    Ok((pass, detail, vec![artifact("c08_schur.csv", setup, &table)]))
}

fn sandwich() -> Check {
    let setup = "b0=1, (1+r^2)^-1 x exp_bracket(1,1), nu^2=0.1, q_max=3, l_max=60; constants uniform L3=16 N=65536; direct sinh L3=2e6 N=300; r in [1e-5,1e-4]";
    let l_max = 60;
    let nu = 0.1f64.sqrt();
    let radial = RadialProfile::power_law(2.0, 1.0)?;
    let axial = AxialProfile::exp_bracket(1.0, 1.0)?;
    let basis = LandauBasisSpec::new(1.0, 3, l_max, 32)?;

    let probe = EffectiveModel::new(basis, AxialGrid::small(14.0, 40, GridMapping::Uniform)?, radial.clone(), axial.clone())?;
    let mut exceptional = Vec::new();
    for l in 0..=l_max {
        let fam = probe.family(l, nu, RemainderOrder::One)?;
        exceptional.extend(exceptional_couplings(&fam.t0, fam.b_zero()));
    }
    let scan = CouplingScan::new(nu, exceptional, None);

    let model = EffectiveModel::new(basis, AxialGrid::uniform(16.0, 65_536)?, radial.clone(), axial.clone())?;
    let blocks = model.blocks(l_max)?;
    let setup_direct = DirectSetup { basis, grid: AxialGrid::graded(2e6, 300, 1.0)?, radial: radial.clone(), axial, nu };
    let r = log_points(1e-5, 1e-4, 11);
    let counts = negative_counts(&setup_direct, &blocks, model.constants.k1, &r, false)?;
    let report = sandwich_report(&counts, &radial, 0.25);
    let mut table = Table::new(&["r", "lower", "direct", "effective", "upper", "ratio", "within"]);
    for row in &report.rows {
        table.push(vec![
            num(row.r),
            row.lower.to_string(),
            row.direct.to_string(),
            row.effective.to_string(),
            row.upper.to_string(),
            num(row.ratio),
            row.within.map_or("withheld".to_string(), flag),
        ]);
    }
    let bounds = report.rows.iter().all(|row| row.lower >= 5 && row.upper >= 5);
    let ratios = report.rows.iter().all(|row| (0.6..=1.6).contains(&row.ratio));
    let (rmin, rmax) = report.rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), row| (a.min(row.ratio), b.max(row.ratio)));
    let pass = scan.safe && bounds && ratios && report.verdict == Some(true) && counts.sectors_converged && counts.is_monotone();
    let detail = format!(
        "nu safe {}, bounds >= 5 {bounds}, sandwich {}, direct/effective in [{rmin:.3}, {rmax:.3}], sectors converged {}",
        scan.safe,
        match report.verdict {
            Some(true) => "holds",
            Some(false) => "violated",
            None => "withheld",
        },
        counts.sectors_converged
    );
    Ok((pass, detail, vec![artifact("c09_sandwich.csv", setup, &table)]))
}
