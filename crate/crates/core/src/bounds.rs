//! Continuity constants and exact checkers for the entropy, mutual
//! information and secrecy-objective perturbation bounds.

use serde::Serialize;

use crate::capacity::single_letter_objective;
use crate::channels::{product_of, Channel, Distribution, WiretapUncertainty, PRODUCT_CAP};
use crate::error::{Error, Result};
use crate::info::{
    binary_entropy, channel_distance, conditional_entropy, mutual_information_raw, uncertainty_distance,
    variation_distance, JointDistribution,
};

/// Absolute slack allowed on every bound comparison.
pub const BOUND_SLACK: f64 = 1e-9;

/// Largest variation distance between two distributions.
const MAX_EPSILON: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
}

impl BoundReport {
    pub fn new(epsilon: f64, lhs: f64, rhs: f64) -> Self {
        BoundReport {
            epsilon,
            lhs,
            rhs,
            holds: lhs <= rhs + BOUND_SLACK,
            slack: rhs - lhs,
        }
    }
}

/// `H2` at `min(eps, 1)`; above one the linear term alone dominates the
/// largest possible gap.
fn clipped_h2(eps: f64, out_size: usize) -> Result<f64> {
    if !(0.0..=MAX_EPSILON).contains(&eps) {
        return Err(Error::OutOfRange {
            what: "epsilon",
            value: eps,
        });
    }
    if out_size < 2 {
        return Err(Error::OutOfRange {
            what: "alphabet size",
            value: out_size as f64,
        });
    }
    binary_entropy(eps.min(1.0))
}

/// `2 eps log|Y| + 2 H2(eps)`.
pub fn delta1(eps: f64, out_size: usize) -> Result<f64> {
    let h = clipped_h2(eps, out_size)?;
    Ok(2.0 * eps * (out_size as f64).log2() + 2.0 * h)
}

/// `4 eps log|Y| + 4 H2(eps)`.
pub fn delta2(eps: f64, out_size: usize) -> Result<f64> {
    let h = clipped_h2(eps, out_size)?;
    Ok(4.0 * eps * (out_size as f64).log2() + 4.0 * h)
}

/// `4 eps log(|Y||Z|) + 8 H2(eps)`.
pub fn delta_secrecy(eps: f64, y_size: usize, z_size: usize) -> Result<f64> {
    Ok(delta2(eps, y_size)? + delta2(eps, z_size)?)
}

/// Conditional entropy `H(Y|X)` under two joints of the same shape.
pub fn check_lemma1(p: &JointDistribution, q: &JointDistribution) -> Result<BoundReport> {
    if p.rows() != q.rows() || p.cols() != q.cols() {
        return Err(Error::dims(format!(
            "joint shapes {}x{} and {}x{}",
            p.rows(),
            p.cols(),
            q.rows(),
            q.cols()
        )));
    }
    let eps = variation_distance(p.mass(), q.mass())?.min(MAX_EPSILON);
    let lhs = (conditional_entropy(p) - conditional_entropy(q)).abs();
    Ok(BoundReport::new(eps, lhs, delta1(eps, p.cols())?))
}

fn check_encoder(encoder: &Channel, u_size: usize, x_size: usize, n: usize) -> Result<()> {
    if encoder.inputs() != u_size {
        return Err(Error::dims(format!(
            "encoder has {} inputs, expected {u_size}",
            encoder.inputs()
        )));
    }
    let expected = crate::channels::sequence_count(x_size, n);
    if encoder.outputs() as u128 != expected {
        return Err(Error::dims(format!(
            "encoder has {} outputs, expected {expected}",
            encoder.outputs()
        )));
    }
    Ok(())
}

fn uniform(size: usize) -> Vec<f64> {
    vec![1.0 / size as f64; size]
}

/// `I(U; Y^n)` under memoryless `w` and `w_tilde` for a uniform `U` fed
/// through `encoder` (rows over `X^n`).
pub fn check_lemma2(w: &Channel, w_tilde: &Channel, encoder: &Channel, u_size: usize, n: usize) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "blocklength",
            value: 0.0,
        });
    }
    check_lemma_timevarying(&vec![w.clone(); n], &vec![w_tilde.clone(); n], encoder, u_size)
}

/// Per-letter channels `V_m` against `Ṽ_m`; `eps` is the largest per-letter
/// distance.
pub fn check_lemma_timevarying(
    v_list: &[Channel],
    v_tilde_list: &[Channel],
    encoder: &Channel,
    u_size: usize,
) -> Result<BoundReport> {
    if v_list.len() != v_tilde_list.len() {
        return Err(Error::LengthMismatch(format!(
            "{} letters against {}",
            v_list.len(),
            v_tilde_list.len()
        )));
    }
    let n = v_list.len();
    let Some(first) = v_list.first() else {
        return Err(Error::Empty("channel list"));
    };
    let mut eps: f64 = 0.0;
    for (a, b) in v_list.iter().zip(v_tilde_list) {
        if a.inputs() != first.inputs() || a.outputs() != first.outputs() {
            return Err(Error::dims("letters must share alphabets"));
        }
        eps = eps.max(channel_distance(a, b)?);
    }
    check_encoder(encoder, u_size, first.inputs(), n)?;
    let a: Vec<&Channel> = v_list.iter().collect();
    let b: Vec<&Channel> = v_tilde_list.iter().collect();
    let pu = uniform(u_size);
    let ia = mutual_information_raw(&pu, &encoder.then(&product_of(&a, PRODUCT_CAP)?)?);
    let ib = mutual_information_raw(&pu, &encoder.then(&product_of(&b, PRODUCT_CAP)?)?);
    let eps = eps.min(MAX_EPSILON);
    Ok(BoundReport::new(eps, (ia - ib).abs(), n as f64 * delta2(eps, first.outputs())?))
}

/// Gap of the single-letter secrecy objective between two uncertainty sets
/// for a fixed `(P_U, P_{X|U})`.
pub fn check_theorem3_gap(
    a: &WiretapUncertainty,
    b: &WiretapUncertainty,
    p_u: &Distribution,
    encoder: &Channel,
) -> Result<BoundReport> {
    let eps = uncertainty_distance(a, b)?.min(MAX_EPSILON);
    let lhs = (single_letter_objective(a, p_u, encoder)? - single_letter_objective(b, p_u, encoder)?).abs();
    let rhs = delta_secrecy(eps, a.legitimate().outputs(), a.eavesdropper().outputs())?;
    Ok(BoundReport::new(eps, lhs, rhs))
}
