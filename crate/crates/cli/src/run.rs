use std::fs;
use std::path::Path;

use pauli_core::axial::KConstants;
use pauli_core::charvals::{locate_annulus, LocateOptions};
use pauli_core::effective::{exceptional_couplings, CouplingScan, EffectiveModel, RemainderOrder};
use pauli_core::landau::{verify_power_law, LandauBasisSpec, PowerLawVerdict, ToeplitzSpectrum};
use pauli_core::spectra::{negative_counts, sandwich_report, DirectSetup};

use crate::acceptance::{self, Artifact, Outcome};
use crate::config::{ExperimentConfig, ExperimentKind, GridConfig};
use crate::table::{flag, num, Table};

/// Operator tolerance of the sector inequalities.
pub const INEQUALITY_TOLERANCE: f64 = 1e-10;

/// Sector grid of the exceptional-coupling scan when no annulus grid is set.
const SCAN_NODES: usize = 40;

#[derive(Debug)]
pub enum RunError {
    /// Rejected input; maps to exit code 2.
    Config(String),
    /// Failure inside a computation; maps to exit code 1.
    Module(String),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Module(m) => write!(f, "computation failed: {m}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

fn module(context: &str) -> impl Fn(pauli_core::Error) -> RunError + '_ {
    move |e| RunError::Module(format!("{context}: {e}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Default)]
pub struct Summary {
    pub files: Vec<Artifact>,
    pub checks: Vec<Check>,
    /// Human-readable lines for stdout.
    pub lines: Vec<String>,
}

impl Summary {
    fn check(&mut self, name: impl Into<String>, pass: bool) {
        let name = name.into();
        self.lines.push(format!("{} {name}", if pass { "ok  " } else { "FAIL" }));
        self.checks.push(Check { name, pass });
    }

    fn file(&mut self, name: &str, hash: &str, table: &Table) {
        self.files.push(Artifact { file: name.to_string(), contents: table.to_csv(hash) });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write(&self, out: &Path) -> std::io::Result<()> {
        fs::create_dir_all(out)?;
        for a in &self.files {
            fs::write(out.join(&a.file), &a.contents)?;
        }
        Ok(())
    }
}

/// Runs one experiment. `report` ignores `cfg`; every other kind needs it.
pub fn execute(kind: ExperimentKind, cfg: Option<&ExperimentConfig>) -> Result<Summary, RunError> {
    if kind == ExperimentKind::Report {
        return Ok(report());
    }
    let cfg = cfg.ok_or_else(|| RunError::Config(format!("`{}` needs --config", kind.name())))?;
    match kind {
        ExperimentKind::Toeplitz => toeplitz(cfg),
        ExperimentKind::Constants => constants(cfg),
        ExperimentKind::Inequalities => inequalities(cfg),
        ExperimentKind::Resonances => resonances(cfg),
        ExperimentKind::Spectrum => spectrum(cfg),
        ExperimentKind::Report => unreachable!(),
    }
}

fn toeplitz(cfg: &ExperimentConfig) -> Result<Summary, RunError> {
    let hash = cfg.hash();
    let radial = cfg.radial.build().map_err(module("radial profile"))?;
    let basis = cfg.basis();
    let spectrum = ToeplitzSpectrum::compute(&radial, &basis).map_err(module("toeplitz spectrum"))?;
    let mut out = Summary::default();
    let mut table = Table::new(&["l", "lambda"]);
    for (l, &v) in spectrum.eigenvalues.iter().enumerate() {
        table.push(vec![l.to_string(), num(v)]);
    }
    out.file("toeplitz.csv", &hash, &table);
    let radii: Vec<f64> = (0..=400).map(|i| 0.05 * i as f64).collect();
    out.check("eigenvalues within the range of the profile", spectrum.within_range(&radial, &radii));
    if let Some(grid) = &cfg.s_grid {
        let s = grid.values();
        let mut table = Table::new(&["s", "count"]);
        let counts: Vec<usize> = s.iter().map(|&si| spectrum.count(si)).collect();
        for (si, c) in s.iter().zip(&counts) {
            table.push(vec![num(*si), c.to_string()]);
        }
        out.file("counting.csv", &hash, &table);
        out.check("counting function nonincreasing in s", counts.windows(2).all(|w| w[1] <= w[0]));
        if let Some(u0) = radial.u0 {
            let report = verify_power_law(&spectrum, radial.alpha, u0, &s, 0.1).map_err(module("power law"))?;
            let mut table = Table::new(&["s", "count", "count_half", "normalized", "c_alpha", "trusted"]);
            for r in &report.rows {
                table.push(vec![
                    num(r.s),
                    r.count.to_string(),
                    r.count_half.to_string(),
                    num(r.normalized),
                    num(report.c_alpha),
                    flag(r.trusted),
                ]);
            }
            out.file("power_law.csv", &hash, &table);
            out.lines.push(format!(
                "power law: fitted exponent {:.4}, max deviation {:.3e}, verdict {:?}",
                report.fitted_exponent, report.max_relative_deviation, report.verdict
            ));
            out.check("counting rate consistent with the power law", report.verdict == PowerLawVerdict::Consistent);
        }
    }
    Ok(out)
}

fn constants(cfg: &ExperimentConfig) -> Result<Summary, RunError> {
    let hash = cfg.hash();
    let axial = cfg.axial.build().map_err(module("axial profile"))?;
    let grid = cfg.constants_grid.build().map_err(module("constants grid"))?;
    let k = KConstants::compute(&axial, cfg.b0, cfg.q_max, &grid).map_err(module("axial constants"))?;
    let mut table = Table::new(&["q", "c_q", "k1", "k2", "k2_over_q"]);
    for (i, c) in k.c.iter().enumerate() {
        let q = i + 1;
        table.push(vec![q.to_string(), num(*c), num(k.k1), num(k.k2), num(k.k2 / q as f64)]);
    }
    let mut out = Summary::default();
    out.file("constants.csv", &hash, &table);
    out.lines.push(format!("K1 = {:.10e}, K2 = {:.10e}", k.k1, k.k2));
    out.check("K1 < K2", k.k1 < k.k2);
    out.check("c_q decreasing in q", k.is_decreasing());
    out.check("c_q <= K2/q", k.within_resolvent_bound());
    Ok(out)
}

fn model_on(cfg: &ExperimentConfig, basis: LandauBasisSpec, grid: &GridConfig, small: bool) -> Result<EffectiveModel, RunError> {
    let grid = if small { grid.build_small() } else { grid.build() }.map_err(module("axial grid"))?;
    let radial = cfg.radial.build().map_err(module("radial profile"))?;
    let axial = cfg.axial.build().map_err(module("axial profile"))?;
    EffectiveModel::new(basis, grid, radial, axial).map_err(module("effective model"))
}

fn inequalities(cfg: &ExperimentConfig) -> Result<Summary, RunError> {
    let hash = cfg.hash();
    let model = model_on(cfg, cfg.basis(), &cfg.constants_grid, false)?;
    let blocks = model.blocks(cfg.l_max).map_err(module("effective blocks"))?;
    let k1 = model.constants.k1;
    let mut table = Table::new(&["l", "toeplitz", "w_h2inv", "w_i", "tail", "lower_gap", "upper_gap"]);
    let (mut lower_ok, mut upper_ok) = (true, true);
    for b in &blocks {
        let lower = b.w_h2inv - k1 * b.toeplitz * b.toeplitz;
        let upper = b.w_i / (2.0 * cfg.b0) - b.w_h2inv;
        lower_ok &= lower >= -INEQUALITY_TOLERANCE;
        upper_ok &= upper >= -INEQUALITY_TOLERANCE;
        table.push(vec![b.l.to_string(), num(b.toeplitz), num(b.w_h2inv), num(b.w_i), num(b.tail), num(lower), num(upper)]);
    }
    let mut out = Summary::default();
    out.file("inequalities.csv", &hash, &table);
    out.check("W(H2^-1) >= K1 lambda^2 in every sector", lower_ok);
    out.check("W(H2^-1) <= W(I)/(2 b0) in every sector", upper_ok);
    Ok(out)
}

/// Exceptional couplings of sectors `0..=l_max` on the annulus grid, or a
/// coarse grid over the constants half-width.
pub fn coupling_scan(cfg: &ExperimentConfig) -> Result<CouplingScan, RunError> {
    let (q_max, l_max, grid) = match &cfg.annulus {
        Some(a) => (a.q_max, a.l_max, a.grid.clone()),
        None => (
            cfg.q_max,
            cfg.l_max,
            GridConfig { half_width: cfg.constants_grid.half_width, nodes: SCAN_NODES, scale: None },
        ),
    };
    let basis = LandauBasisSpec::new(cfg.b0, q_max, l_max, cfg.radial_nodes).map_err(module("basis"))?;
    let model = model_on(cfg, basis, &grid, true)?;
    let mut exceptional = Vec::new();
    for l in 0..=l_max {
        let fam = model.family(l, cfg.nu, RemainderOrder::Zero).map_err(module("sector family"))?;
        exceptional.extend(exceptional_couplings(&fam.t0, fam.b_zero()));
    }
    Ok(CouplingScan::new(cfg.nu, exceptional, None))
}

fn require_safe(cfg: &ExperimentConfig) -> Result<CouplingScan, RunError> {
    let scan = coupling_scan(cfg)?;
    if !scan.safe {
        return Err(RunError::Config(format!(
            "field `nu`: {} lies within {:.3e} of an exceptional coupling (margin {:.3e})",
            cfg.nu, scan.distance, scan.margin
        )));
    }
    Ok(scan)
}

fn resonances(cfg: &ExperimentConfig) -> Result<Summary, RunError> {
    let a = cfg.annulus.as_ref().ok_or_else(|| RunError::Config("`resonances` needs an `annulus` section".into()))?;
    let scan = require_safe(cfg)?;
    let hash = cfg.hash();
    let basis = LandauBasisSpec::new(cfg.b0, a.q_max, a.l_max, cfg.radial_nodes).map_err(module("basis"))?;
    let model = model_on(cfg, basis, &a.grid, true)?;
    let opts = LocateOptions { resolve_simple: true, ..Default::default() };
    let mut table = Table::new(&["l", "re_k", "im_k", "multiplicity", "in_annulus", "sector_ok", "predicted_im_k"]);
    let (mut inside, mut in_sector, mut wrong_side) = (0, 0, 0);
    for l in 0..=a.l_max {
        let fam = model.family(l, cfg.nu, RemainderOrder::Full).map_err(module("sector family"))?;
        let predicted = cfg.nu * cfg.nu * fam.t0_eigenvalues()[0];
        let rep = locate_annulus(&fam, a.r_in, a.r_out, fam.eps, cfg.nu, a.aperture, &opts)
            .map_err(|e| RunError::Module(format!("sector {l}: {e}")))?;
        let tagged = rep.values.iter().map(|v| (v, true)).chain(rep.outside.iter().map(|v| (v, false)));
        for (v, within) in tagged {
            if within {
                inside += 1;
                in_sector += usize::from(v.sector_ok);
            }
            wrong_side += usize::from(v.k.im < -a.aperture * v.k.norm());
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
    let mut out = Summary::default();
    out.file("resonances.csv", &hash, &table);
    out.lines.push(format!("nu = {} at distance {:.3e} from the exceptional set", cfg.nu, scan.distance));
    out.lines.push(format!("{inside} characteristic values in the annulus"));
    out.check("annulus values lie in the sector", in_sector == inside);
    out.check("no values in the excluded half-plane", wrong_side == 0);
    Ok(out)
}

fn spectrum(cfg: &ExperimentConfig) -> Result<Summary, RunError> {
    let direct = cfg.direct_grid.as_ref().ok_or_else(|| RunError::Config("`spectrum` needs `direct_grid`".into()))?;
    let r_grid = cfg.r_grid.as_ref().ok_or_else(|| RunError::Config("`spectrum` needs `r_grid`".into()))?;
    require_safe(cfg)?;
    let hash = cfg.hash();
    let model = model_on(cfg, cfg.basis(), &cfg.constants_grid, false)?;
    let blocks = model.blocks(cfg.l_max).map_err(module("effective blocks"))?;
    let setup = DirectSetup {
        basis: cfg.basis(),
        grid: direct.build_small().map_err(module("direct grid"))?,
        radial: model.radial.clone(),
        axial: model.axial.clone(),
        nu: cfg.nu,
    };
    let counts = negative_counts(&setup, &blocks, model.constants.k1, &r_grid.values(), false)
        .map_err(module("direct counts"))?;
    let report = sandwich_report(&counts, &model.radial, cfg.sandwich_tolerance);
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
    let mut sectors = Table::new(&["l", "r", "count"]);
    for (l, per) in counts.per_sector.iter().enumerate() {
        for (r, c) in counts.r.iter().zip(per) {
            sectors.push(vec![l.to_string(), num(*r), c.to_string()]);
        }
    }
    let mut out = Summary::default();
    out.file("counts.csv", &hash, &table);
    out.file("sector_counts.csv", &hash, &sectors);
    if let Some(note) = &report.note {
        out.lines.push(note.clone());
    }
    out.check("counts nonincreasing in r", counts.is_monotone());
    out.check("last sector contributes nothing", counts.sectors_converged);
    if let Some(v) = report.verdict {
        out.check(format!("lower(1 - {0}) <= direct <= upper(1 + {0})", cfg.sandwich_tolerance), v);
    }
    Ok(out)
}

/// The acceptance suite: criteria 1 to 9, then a rerun of the criteria
/// that finish in seconds, compared byte for byte.
pub fn report() -> Summary {
    let mut out = Summary::default();
    let mut text = String::new();
    let mut outcomes: Vec<Outcome> = Vec::new();
    for id in acceptance::criterion_ids() {
        let o = acceptance::run_criterion(id).expect("known criterion");
        out.lines.push(format!("{}  [{:.1} s]", o.line(), o.elapsed.as_secs_f64()));
        outcomes.push(o);
    }
    let rerun: Vec<Artifact> = [1, 3, 4, 5, 6, 8]
        .into_iter()
        .flat_map(|id| acceptance::run_criterion(id).expect("known criterion").artifacts)
        .collect();
    let first: Vec<Artifact> = outcomes
        .iter()
        .filter(|o| [1, 3, 4, 5, 6, 8].contains(&o.id))
        .flat_map(|o| o.artifacts.clone())
        .collect();
    let det = acceptance::determinism(&first, &rerun);
    out.lines.push(det.line());
    outcomes.push(det);
    for o in &outcomes {
        text.push_str(&o.line());
        text.push('\n');
        out.files.extend(o.artifacts.iter().cloned());
        out.checks.push(Check { name: format!("criterion {}", o.id), pass: o.pass });
    }
    out.files.push(Artifact { file: "report.txt".into(), contents: text });
    out
}
