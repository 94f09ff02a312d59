//! Randomized verification suites. Every trial draws from its own
//! `(seed, trial)` substream, so results do not depend on scheduling.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{check_lemma1, check_lemma2, check_lemma_timevarying, check_theorem3_gap, BoundReport};
use crate::channels::{sequence_count, Channel, ChannelFamily, WiretapUncertainty};
use crate::codes::{random_binning_code, robustness_check, AnyCode, BinningMode, CRCode, STATE_SEQ_CAP};
use crate::error::{Error, Result};
use crate::info::{family_distance, JointDistribution};
use crate::sampling;
use crate::scenarios::lambda_family;
use crate::symmetrize::{guaranteed_radius, min_f, non_symmetrizability_radius};

pub const CSV_SCHEMA: &str = "#schema=verify/v1";
pub const CSV_HEADER: &str = "suite,seed,trial,epsilon,lhs,rhs,slack,holds";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma1,
    Lemma2,
    TimeVarying,
    Theorem3,
    Robustness,
    Radius,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Lemma1,
        Suite::Lemma2,
        Suite::TimeVarying,
        Suite::Theorem3,
        Suite::Robustness,
        Suite::Radius,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Lemma2 => "lemma2",
            Suite::TimeVarying => "timevarying",
            Suite::Theorem3 => "theorem3",
            Suite::Robustness => "robustness",
            Suite::Radius => "radius",
        }
    }

    /// Trial counts used by the acceptance runs.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Lemma1 => 10_000,
            Suite::Lemma2 => 1_000,
            Suite::TimeVarying | Suite::Theorem3 | Suite::Robustness => 500,
            Suite::Radius => 300,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub suite: Suite,
    pub seed: u64,
    pub trial: usize,
    #[serde(flatten)]
    pub report: BoundReport,
}

/// Distance scale spread log-uniformly over `[1e-4, top]`.
fn log_scale<R: Rng + ?Sized>(rng: &mut R, top: f64) -> f64 {
    top * 10f64.powf(-4.0 * rng.random::<f64>())
}

fn pick<R: Rng + ?Sized, T: Copy>(rng: &mut R, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

fn lemma1_trial(seed: u64, trial: usize) -> Result<BoundReport> {
    let mut rng = sampling::substream(seed, trial as u64);
    let (rows, cols) = (rng.random_range(2..=6), rng.random_range(2..=6));
    let p = sampling::simplex(&mut rng, rows * cols);
    let t = log_scale(&mut rng, 1.0);
    let q = sampling::mix_toward_random(&mut rng, &p, t);
    check_lemma1(&JointDistribution::new(rows, cols, p)?, &JointDistribution::new(rows, cols, q)?)
}

fn lemma2_trial(seed: u64, trial: usize) -> Result<BoundReport> {
    let mut rng = sampling::substream(seed, trial as u64);
    let n = rng.random_range(1..=3);
    let (nx, ny) = (pick(&mut rng, &[2, 3]), pick(&mut rng, &[2, 3]));
    let nu = pick(&mut rng, &[2, 4]);
    let w = sampling::channel(&mut rng, nx, ny);
    let radius = log_scale(&mut rng, 1.0);
    let (w_tilde, _) = sampling::perturb_channel(&mut rng, &w, radius);
    let encoder = sampling::channel(&mut rng, nu, sequence_count(nx, n) as usize);
    check_lemma2(&w, &w_tilde, &encoder, nu, n)
}

fn timevarying_trial(seed: u64, trial: usize) -> Result<BoundReport> {
    let mut rng = sampling::substream(seed, trial as u64);
    let n = rng.random_range(2..=3);
    let (nx, nz) = (pick(&mut rng, &[2, 3]), pick(&mut rng, &[2, 3]));
    let nu = pick(&mut rng, &[2, 4]);
    let mut v = Vec::with_capacity(n);
    let mut v_tilde = Vec::with_capacity(n);
    for _ in 0..n {
        let letter = sampling::channel(&mut rng, nx, nz);
        let radius = log_scale(&mut rng, 0.5);
        v_tilde.push(sampling::perturb_channel(&mut rng, &letter, radius).0);
        v.push(letter);
    }
    let encoder = sampling::channel(&mut rng, nu, sequence_count(nx, n) as usize);
    check_lemma_timevarying(&v, &v_tilde, &encoder, nu)
}

fn theorem3_trial(seed: u64, trial: usize) -> Result<BoundReport> {
    let mut rng = sampling::substream(seed, trial as u64);
    let states = rng.random_range(1..=3);
    let nx = pick(&mut rng, &[2, 3]);
    let (ny, nz) = (pick(&mut rng, &[2, 3]), pick(&mut rng, &[2, 3]));
    let legit = sampling::family(&mut rng, states, nx, ny);
    let eve = sampling::family(&mut rng, states, nx, nz);
    let radius = log_scale(&mut rng, 0.1);
    let legit_b = sampling::perturb_family(&mut rng, &legit, radius)?;
    let eve_b = sampling::perturb_family(&mut rng, &eve, radius)?;
    let a = WiretapUncertainty::new(legit, eve)?;
    let b = WiretapUncertainty::new(legit_b, eve_b)?;
    let nu = pick(&mut rng, &[2, 3]);
    let p_u = sampling::distribution(&mut rng, nu);
    let encoder = sampling::channel(&mut rng, nu, nx);
    check_theorem3_gap(&a, &b, &p_u, &encoder)
}

/// Every fifth trial uses a useless eavesdropper and additionally requires
/// zero leakage under every state sequence; odd trials use CR codes.
fn robustness_trial(seed: u64, trial: usize) -> Result<BoundReport> {
    let mut rng = sampling::substream(seed, trial as u64);
    let n = rng.random_range(1..=3);
    let messages = rng.random_range(1..=4);
    let states = rng.random_range(1..=3);
    let nx = pick(&mut rng, &[2, 3]);
    let useless = trial % 5 == 0;
    let v = if useless {
        let nz = pick(&mut rng, &[2, 3]);
        let members = (0..states)
            .map(|_| {
                let row = sampling::distribution(&mut rng, nz);
                Channel::constant(nx, &row)
            })
            .collect();
        ChannelFamily::from_members(members)?
    } else {
        let nz = pick(&mut rng, &[2, 3]);
        sampling::family(&mut rng, states, nx, nz)
    };
    let radius = 0.2 * rng.random::<f64>();
    let v_star = sampling::perturb_family(&mut rng, &v, radius)?;
    let reference = sampling::channel(&mut rng, nx, 2);
    let mode = |rng: &mut rand_chacha::ChaCha8Rng| {
        if rng.random::<bool>() {
            BinningMode::Dense
        } else {
            BinningMode::Subset
        }
    };
    let code_seed: u64 = rng.random();
    let report = if trial % 2 == 1 {
        let count = rng.random_range(2..=3);
        let members = (0..count)
            .map(|i| random_binning_code(n, messages, &reference, mode(&mut rng), code_seed.wrapping_add(i)))
            .collect::<Result<Vec<_>>>()?;
        let gamma = sampling::distribution(&mut rng, count as usize);
        let code = CRCode::new(members, gamma)?;
        robustness_check(AnyCode::CommonRandomness(&code), &v, &v_star, STATE_SEQ_CAP)?
    } else {
        let code = random_binning_code(n, messages, &reference, mode(&mut rng), code_seed)?;
        robustness_check(AnyCode::Plain(&code), &v, &v_star, STATE_SEQ_CAP)?
    };
    let mut bound = report.bound;
    if useless && report.leakage_v != 0.0 {
        bound.holds = false;
    }
    Ok(bound)
}

/// Which neighborhood the radius suite samples from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusRule {
    /// `min F / 4`.
    Stated,
    /// `min F / (4 |X|^2)`, inside which halving of `min F` is provable.
    Guaranteed,
}

/// Perturbations of the λ-family at λ = 0.25, 0.5, 0.75, in consecutive
/// blocks of `trials / 3`. Each row compares half the original `min F` with
/// the perturbed one; a symmetrizable outcome also fails the row.
pub fn radius_rows(seed: u64, trials: usize, rule: RadiusRule) -> Result<Vec<TrialRow>> {
    const LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];
    let base: Vec<(ChannelFamily, f64, f64)> = LAMBDAS
        .iter()
        .map(|&l| {
            let fam = lambda_family(l)?.legitimate().clone();
            let mf = min_f(&fam)?.min_f;
            let radius = match rule {
                RadiusRule::Stated => non_symmetrizability_radius(&fam)?,
                RadiusRule::Guaranteed => guaranteed_radius(&fam)?,
            };
            Ok((fam, mf, radius))
        })
        .collect::<Result<_>>()?;
    let per = trials.div_ceil(LAMBDAS.len()).max(1);
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (fam, mf, radius) = &base[(trial / per).min(LAMBDAS.len() - 1)];
            let mut rng = sampling::substream(seed, trial as u64);
            let pert = sampling::perturb_family(&mut rng, fam, *radius)?;
            let eps = family_distance(fam, &pert)?;
            let v = min_f(&pert)?;
            let mut report = BoundReport::new(eps, mf / 2.0, v.min_f);
            report.holds = report.holds && !v.symmetrizable;
            Ok(TrialRow {
                suite: Suite::Radius,
                seed,
                trial,
                report,
            })
        })
        .collect()
}

/// Runs `trials` trials of `suite`, ordered by trial index.
pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<Vec<TrialRow>> {
    let trial_fn: fn(u64, usize) -> Result<BoundReport> = match suite {
        Suite::Lemma1 => lemma1_trial,
        Suite::Lemma2 => lemma2_trial,
        Suite::TimeVarying => timevarying_trial,
        Suite::Theorem3 => theorem3_trial,
        Suite::Robustness => robustness_trial,
        Suite::Radius => return radius_rows(seed, trials, RadiusRule::Stated),
    };
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            Ok(TrialRow {
                suite,
                seed,
                trial,
                report: trial_fn(seed, trial)?,
            })
        })
        .collect()
}

/// Shortest representation that parses back to the same value.
fn num(v: f64) -> String {
    format!("{v:?}")
}

/// CSV text with the schema comment and header line.
pub fn rows_to_csv(rows: &[TrialRow]) -> String {
    let mut out = format!("{CSV_SCHEMA}\n{CSV_HEADER}\n");
    for r in rows {
        let b = &r.report;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.suite,
            r.seed,
            r.trial,
            num(b.epsilon),
            num(b.lhs),
            num(b.rhs),
            num(b.slack),
            b.holds
        )
        .expect("writing to a string");
    }
    out
}

/// Number of rows whose bound failed.
pub fn violations(rows: &[TrialRow]) -> usize {
    rows.iter().filter(|r| !r.report.holds).count()
}

/// Smallest `rhs - lhs` over the rows, or `None` when empty.
pub fn worst_slack(rows: &[TrialRow]) -> Option<f64> {
    rows.iter().map(|r| r.report.slack).min_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_hold_on_small_runs() {
        for suite in Suite::ALL.into_iter().filter(|s| *s != Suite::Radius) {
            let rows = run_suite(suite, 30, 7).unwrap();
            assert_eq!(rows.len(), 30);
            assert!(rows.iter().enumerate().all(|(i, r)| r.trial == i && r.suite == suite));
            assert_eq!(violations(&rows), 0, "{suite}: {:?}", rows.iter().find(|r| !r.report.holds));
        }
    }

    #[test]
    fn radius_suite_keeps_non_symmetrizability() {
        let stated = run_suite(Suite::Radius, 60, 5).unwrap();
        assert_eq!(stated.len(), 60);
        assert!(stated.iter().all(|r| r.report.rhs > 0.0 && r.report.epsilon < r.report.lhs / 2.0));
        let guaranteed = radius_rows(5, 60, RadiusRule::Guaranteed).unwrap();
        assert_eq!(violations(&guaranteed), 0);
    }

    #[test]
    fn csv_is_deterministic() {
        let a = rows_to_csv(&run_suite(Suite::Robustness, 20, 3).unwrap());
        let b = rows_to_csv(&run_suite(Suite::Robustness, 20, 3).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("#schema=verify/v1\nsuite,seed"));
        assert_eq!(a.lines().count(), 22);
        assert_ne!(a, rows_to_csv(&run_suite(Suite::Robustness, 20, 4).unwrap()));
    }

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("lemma9".parse::<Suite>().is_err());
    }
}
