//! Concrete channels from the constructions: the Blackwell AVC, the
//! λ-interpolated wiretap family, and the symmetrizable-but-positive W*
//! instance, together with the sweep and probe experiments built on them.

use std::fmt::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{cr_capacity_avc, secrecy_capacity_dichotomy, SecrecyOptions, MINIMAX_TOL};
use crate::channels::{convex_combine, Channel, ChannelFamily, WiretapUncertainty};
use crate::error::{Error, Result};
use crate::sampling;
use crate::symmetrize::{min_f, Symmetrizer};

/// Capacities at or below this are reported as zero by the probe.
const POSITIVE_TOL: f64 = 1e-6;

fn fixed(rows: &[&[f64]]) -> Channel {
    Channel::new(rows.iter().map(|r| r.to_vec()).collect()).expect("literal is stochastic")
}

pub fn blackwell_w1() -> Channel {
    fixed(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]])
}

pub fn blackwell_w2() -> Channel {
    fixed(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]])
}

/// Noiseless two-input channel into a three-letter alphabet.
pub fn w_hat() -> Channel {
    fixed(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]])
}

/// Binary channel whose output ignores the input.
pub fn useless_channel() -> Channel {
    fixed(&[&[0.5, 0.5], &[0.5, 0.5]])
}

pub fn blackwell_family() -> ChannelFamily {
    ChannelFamily::from_members(vec![blackwell_w1(), blackwell_w2()]).expect("shapes agree")
}

fn useless_eve() -> ChannelFamily {
    ChannelFamily::from_members(vec![useless_channel(), useless_channel()]).expect("shapes agree")
}

/// Legitimate members `(1 - λ) W_s + λ Ŵ`; eavesdropper `{V, V}`.
pub fn lambda_family(lambda: f64) -> Result<WiretapUncertainty> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let hat = w_hat();
    let legit = blackwell_family().map_members(|w| convex_combine(w, &hat, lambda))?;
    WiretapUncertainty::new(legit, useless_eve())
}

pub fn wstar_w1() -> Channel {
    fixed(&[&[0.5, 0.5, 0.0], &[0.25, 0.0, 0.75]])
}

pub fn wstar_w2() -> Channel {
    fixed(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]])
}

pub fn sigma_star() -> Symmetrizer {
    Symmetrizer::new(vec![vec![0.8, 0.2], vec![0.4, 0.6]]).expect("literal is stochastic")
}

/// The W* wiretap channel with its printed symmetrizer.
pub fn wstar_instance() -> (WiretapUncertainty, Symmetrizer) {
    let legit = ChannelFamily::from_members(vec![wstar_w1(), wstar_w2()]).expect("shapes agree");
    let u = WiretapUncertainty::new(legit, useless_eve()).expect("alphabets agree");
    (u, sigma_star())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub min_f: f64,
    pub symmetrizable: bool,
    pub cr_capacity: f64,
    pub cs_capacity: f64,
}

/// Symmetrizability and capacities of the λ-family at each grid point.
pub fn discontinuity_sweep(grid: &[f64], tol: f64) -> Result<Vec<SweepRow>> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid("sweep grid must be sorted".into()));
    }
    let opts = SecrecyOptions {
        tol,
        ..SecrecyOptions::default()
    };
    grid.par_iter()
        .map(|&lambda| {
            let u = lambda_family(lambda)?;
            let v = secrecy_capacity_dichotomy(&u, &opts)?;
            Ok(SweepRow {
                lambda,
                min_f: v.symmetry.min_f,
                symmetrizable: v.symmetry.symmetrizable,
                cr_capacity: v.legitimate_cr.value,
                cs_capacity: v.cs_value.lower(),
            })
        })
        .collect()
}

pub const SWEEP_SCHEMA: &str = "#schema=sweep/v1";
pub const SWEEP_HEADER: &str = "lambda,min_f,symmetrizable,cr_bits,cs_bits";

/// CSV text with the schema comment and header line.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_SCHEMA}\n{SWEEP_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{:?},{:?},{},{:?},{:?}",
            r.lambda, r.min_f, r.symmetrizable, r.cr_capacity, r.cs_capacity
        )
        .expect("writing to a string");
    }
    out
}

/// Evenly spaced grid `start, start + step, ...` up to `stop` inclusive,
/// computed by index to avoid accumulating rounding.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Invalid(format!("bad grid {start}:{stop}:{step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| (start + i as f64 * step).min(stop)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroRegionReport {
    pub epsilon: f64,
    pub samples: usize,
    pub symmetrizable_fraction: f64,
    pub positive_cr_fraction: f64,
    /// Both fractions at once: symmetrizable yet with positive CR capacity.
    pub zero_region_fraction: f64,
    pub empirical: bool,
}

/// Samples legitimate families within `epsilon` of W* and records how many
/// stay symmetrizable while keeping positive CR capacity.
pub fn zero_region_probe(epsilon: f64, samples: usize, seed: u64) -> Result<ZeroRegionReport> {
    if !(epsilon >= 0.0) {
        return Err(Error::OutOfRange {
            what: "epsilon",
            value: epsilon,
        });
    }
    if samples == 0 {
        return Err(Error::OutOfRange {
            what: "samples",
            value: 0.0,
        });
    }
    let (wstar, _) = wstar_instance();
    let verdicts: Vec<(bool, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sampling::substream(seed, i as u64);
            let fam = sampling::perturb_family(&mut rng, wstar.legitimate(), epsilon)?;
            let sym = min_f(&fam)?.symmetrizable;
            let cr = cr_capacity_avc(&fam, MINIMAX_TOL)?.value;
            Ok((sym, cr > POSITIVE_TOL))
        })
        .collect::<Result<_>>()?;
    let frac = |f: &dyn Fn(&(bool, bool)) -> bool| verdicts.iter().filter(|v| f(v)).count() as f64 / samples as f64;
    let report = ZeroRegionReport {
        epsilon,
        samples,
        symmetrizable_fraction: frac(&|v| v.0),
        positive_cr_fraction: frac(&|v| v.1),
        zero_region_fraction: frac(&|v| v.0 && v.1),
        empirical: true,
    };
    log::info!(
        "zero-region probe eps={} symmetrizable={} positive_cr={}",
        epsilon,
        report.symmetrizable_fraction,
        report.positive_cr_fraction
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::uncertainty_distance;
    use crate::symmetrize::{f_value, is_symmetrizable, verify_symmetrizer};

    #[test]
    fn blackwell_literals() {
        let fam = blackwell_family();
        assert_eq!(fam.member(0).to_rows(), vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert_eq!(fam.member(1).to_rows(), vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]);
        assert!(is_symmetrizable(&fam).unwrap());
    }

    #[test]
    fn lambda_family_endpoints() {
        let zero = lambda_family(0.0).unwrap();
        assert_eq!(zero.legitimate(), &blackwell_family());
        let one = lambda_family(1.0).unwrap();
        for m in one.legitimate().members() {
            assert_eq!(m, &w_hat());
        }
        let half = lambda_family(0.5).unwrap();
        assert_eq!(half.legitimate().member(0).row(1), &[0.0, 0.5, 0.5]);
        assert!(matches!(lambda_family(1.5), Err(Error::LambdaOutOfRange(_))));
        assert!(lambda_family(f64::NAN).is_err());
    }

    #[test]
    fn lambda_family_symmetrizable_only_at_zero() {
        assert!(is_symmetrizable(lambda_family(0.0).unwrap().legitimate()).unwrap());
        for lambda in [0.02, 0.25, 0.5, 0.75, 1.0] {
            assert!(!is_symmetrizable(lambda_family(lambda).unwrap().legitimate()).unwrap());
        }
    }

    #[test]
    fn lambda_family_distance_is_twice_the_gap() {
        for (a, b) in [(0.0, 0.1), (0.1, 0.12), (0.3, 0.5), (0.0, 0.5)] {
            let d = uncertainty_distance(&lambda_family(a).unwrap(), &lambda_family(b).unwrap()).unwrap();
            assert!((d - 2.0 * (b - a)).abs() < 1e-12, "{a} {b} {d}");
        }
    }

    #[test]
    fn wstar_certificate() {
        let (u, sigma) = wstar_instance();
        assert!(verify_symmetrizer(u.legitimate(), &sigma).unwrap() <= 1e-12);
        assert!(f_value(&sigma, &sigma, u.legitimate()).unwrap() <= 1e-12);
        let fam = u.legitimate();
        // cross-input pair (x1, x2) = (1, 2) in one-based labels
        for (y, expected) in [0.2, 0.2, 0.6].iter().enumerate() {
            let lhs: f64 = (0..2).map(|s| fam.prob(y, 0, s) * sigma.prob(s, 1)).sum();
            let rhs: f64 = (0..2).map(|s| fam.prob(y, 1, s) * sigma.prob(s, 0)).sum();
            assert!((lhs - expected).abs() < 1e-15 && (rhs - expected).abs() < 1e-15);
        }
        assert!(cr_capacity_avc(fam, MINIMAX_TOL).unwrap().value > 0.0);
    }

    #[test]
    fn sweep_rows() {
        let rows = discontinuity_sweep(&[0.0], MINIMAX_TOL).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].symmetrizable && rows[0].cs_capacity == 0.0 && rows[0].cr_capacity > 0.0);

        let rows = discontinuity_sweep(&linear_grid(0.0, 1.0, 0.1).unwrap(), MINIMAX_TOL).unwrap();
        assert_eq!(rows.len(), 11);
        for r in &rows[1..] {
            assert!(!r.symmetrizable && r.cs_capacity > 0.0 && r.cs_capacity == r.cr_capacity);
        }
        assert!((rows[10].cr_capacity - 1.0).abs() < 1e-9);
        assert!(discontinuity_sweep(&[0.5, 0.2], MINIMAX_TOL).is_err());
        let csv = sweep_to_csv(&rows[..2]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SWEEP_SCHEMA));
        assert_eq!(lines.next(), Some(SWEEP_HEADER));
        assert!(lines.next().unwrap().starts_with("0.0,"));
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn grid_construction() {
        let g = linear_grid(0.0, 1.0, 0.02).unwrap();
        assert_eq!(g.len(), 51);
        assert_eq!(g[50], 1.0);
        assert!((g[7] - 0.14).abs() < 1e-15);
        assert!(linear_grid(0.0, 1.0, 0.0).is_err());
        assert!(linear_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn zero_region_probe_degenerate_radius() {
        let r = zero_region_probe(0.0, 4, 1).unwrap();
        assert_eq!(r.symmetrizable_fraction, 1.0);
        assert_eq!(r.positive_cr_fraction, 1.0);
        assert!(zero_region_probe(-1.0, 4, 1).is_err());
        let r = zero_region_probe(0.5, 8, 3).unwrap();
        assert!((0.0..=1.0).contains(&r.symmetrizable_fraction));
    }
}
