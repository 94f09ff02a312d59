//! Channel capacities: Blahut-Arimoto, the common-randomness-assisted
//! capacity of an arbitrarily varying channel as a convex minimax problem,
//! the symmetrizability dichotomy for the unassisted secrecy capacity, and a
//! single-letter secrecy-rate heuristic for compound wiretap channels.

use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::Serialize;

use crate::channels::{averaged_raw, Channel, ChannelFamily, Distribution, WiretapUncertainty};
use crate::error::{Error, Result};
use crate::info::mutual_information_raw;
use crate::sampling;
use crate::symmetrize::{min_f, SymmetryVerdict};

/// Inner Blahut-Arimoto tolerance (bits).
pub const BA_TOL: f64 = 1e-10;
/// Default tolerance of the outer minimax over state distributions (bits).
pub const MINIMAX_TOL: f64 = 1e-5;
pub const BA_MAX_ITER: usize = 1_000_000;

/// Rows below this are treated as identical when deciding uselessness.
const USELESS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct CapacityResult {
    pub value: f64,
    pub optimizer_p: Distribution,
    pub worst_q: Option<Distribution>,
    /// Upper bound minus lower bound on the optimum.
    pub duality_gap: f64,
    pub iterations: usize,
}

struct BaState {
    lower: f64,
    upper: f64,
    p: Vec<f64>,
    iterations: usize,
}

/// Blahut-Arimoto from a starting law `p0`; stops once the bracket
/// `max_x D(W_x || q) - I(p, W)` is within `tol`.
fn blahut_arimoto(w: &Channel, p0: &[f64], tol: f64, max_iter: usize) -> Result<BaState> {
    let nx = w.inputs();
    let mut p = p0.to_vec();
    let mut d = vec![0.0; nx];
    let mut iterations = 0;
    // Exponent on the multiplicative update. It grows while over-relaxed
    // steps keep shrinking the bracket and falls back to the plain step when
    // one widens it; the bracket stays well above rounding noise even when
    // the capacity itself is tiny.
    let mut mu: f64 = 1.0;
    let mut prev_gap = f64::INFINITY;
    let mut prev_p = p.clone();
    let mut prev_d = d.clone();
    let mut prev_upper = f64::INFINITY;
    loop {
        divergences(w, &p, &mut d);
        let lower: f64 = p.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>().max(0.0);
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(lower);
        let gap = upper - lower;
        if gap <= tol {
            return Ok(BaState {
                lower,
                upper,
                p,
                iterations,
            });
        }
        if iterations >= max_iter {
            return Err(Error::NoConvergence { iterations, gap });
        }
        if mu > 1.0 && gap > prev_gap {
            p.copy_from_slice(&prev_p);
            d.copy_from_slice(&prev_d);
            mu = (mu * 0.25).max(1.0);
            step(&mut p, &d, prev_upper, mu);
            iterations += 1;
            continue;
        }
        mu = (mu * 1.5_f64).min(1e8);
        prev_gap = gap;
        prev_upper = upper;
        prev_p.copy_from_slice(&p);
        prev_d.copy_from_slice(&d);
        step(&mut p, &d, upper, mu);
        iterations += 1;
    }
}

/// `D(W_x || q)` for every input, with `q` the output law under `p`.
fn divergences(w: &Channel, p: &[f64], d: &mut [f64]) {
    let q = w.output_distribution(p);
    for (x, dx) in d.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (wy, qy) in w.row(x).iter().zip(&q) {
            if *wy > 0.0 {
                acc += wy * (wy / qy.max(f64::MIN_POSITIVE)).log2();
            }
        }
        *dx = acc;
    }
}

fn step(p: &mut [f64], d: &[f64], top: f64, mu: f64) {
    for (px, dx) in p.iter_mut().zip(d) {
        *px *= (mu * (dx - top)).exp2();
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
}

/// `max_p I(p, w)` by Blahut-Arimoto.
pub fn ba_capacity(w: &Channel, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    if tol <= 0.0 {
        return Err(Error::OutOfRange {
            what: "tolerance",
            value: tol,
        });
    }
    let start = vec![1.0 / w.inputs() as f64; w.inputs()];
    let st = blahut_arimoto(w, &start, tol, max_iter)?;
    Ok(CapacityResult {
        value: st.lower,
        optimizer_p: Distribution::from_trusted(st.p),
        worst_q: None,
        duality_gap: st.upper - st.lower,
        iterations: st.iterations,
    })
}

/// Golden-section minimization of a convex function on `[lo, hi]`; the
/// endpoints are also compared so boundary minima are found exactly.
fn golden_min<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evals = 2;
    while b - a > xtol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        evals += 1;
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for t in [lo, hi] {
        let ft = f(t)?;
        evals += 1;
        if ft < best.1 {
            best = (t, ft);
        }
    }
    Ok((best.0, best.1, evals))
}

/// `d/dq(s) I(p, W_q)` for the averaged channel `W_q`.
fn state_gradient(family: &ChannelFamily, p: &[f64], wq: &Channel) -> Vec<f64> {
    let r = wq.output_distribution(p);
    (0..family.len())
        .map(|s| {
            let ws = family.member(s);
            let mut g = 0.0;
            for (x, px) in p.iter().enumerate() {
                if *px <= 0.0 {
                    continue;
                }
                for (y, wsy) in ws.row(x).iter().enumerate() {
                    if *wsy > 0.0 {
                        let ratio = wq.get(x, y).max(1e-300) / r[y].max(1e-300);
                        g += px * wsy * ratio.log2();
                    }
                }
            }
            g
        })
        .collect()
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// `min_q I(p, W_q)`, a convex problem in `q`. Returns the best value found and
/// a certified lower bound from the linearization at the returned point.
fn min_mi_over_states(family: &ChannelFamily, p: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    let eval = |q: &[f64]| -> Result<f64> { Ok(mutual_information_raw(p, &averaged_raw(family, q)?)) };
    match family.len() {
        1 => {
            let v = eval(&[1.0])?;
            Ok((v, v, vec![1.0]))
        }
        2 => {
            let (t, v, _) = golden_min(|t| eval(&[1.0 - t, t]), 0.0, 1.0, 1e-10)?;
            Ok((v, v, vec![1.0 - t, t]))
        }
        k => {
            let mut q = vec![1.0 / k as f64; k];
            let mut fq = eval(&q)?;
            let mut step = 1.0;
            let mut bound = f64::NEG_INFINITY;
            for _ in 0..2_000 {
                let wq = averaged_raw(family, &q)?;
                let g = state_gradient(family, p, &wq);
                let lin = fq + g.iter().copied().fold(f64::INFINITY, f64::min)
                    - g.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
                bound = bound.max(lin);
                if fq - bound <= 1e-12 {
                    break;
                }
                let mut accepted = false;
                while step > 1e-14 {
                    let cand = project_simplex(
                        &q.iter().zip(&g).map(|(a, b)| a - step * b).collect::<Vec<_>>(),
                    );
                    let fc = eval(&cand)?;
                    let decrease: f64 = g.iter().zip(q.iter().zip(&cand)).map(|(gi, (a, b))| gi * (a - b)).sum();
                    if fc <= fq - 1e-4 * decrease {
                        q = cand;
                        fq = fc;
                        accepted = true;
                        step *= 2.0;
                        break;
                    }
                    step *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            Ok((fq, bound.min(fq), q))
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CrOptions {
    /// Contract on the returned duality gap.
    pub tol: f64,
    pub inner_tol: f64,
    pub max_iter: usize,
    /// Outer iterations for families with more than two states.
    pub max_outer: usize,
}

impl Default for CrOptions {
    fn default() -> Self {
        CrOptions {
            tol: MINIMAX_TOL,
            inner_tol: BA_TOL,
            max_iter: BA_MAX_ITER,
            max_outer: 5_000,
        }
    }
}

/// `C_CR(W) = min_q max_p I(p, W_q) = max_p min_q I(p, W_q)`.
pub fn cr_capacity_avc(family: &ChannelFamily, tol: f64) -> Result<CapacityResult> {
    cr_capacity_avc_with(
        family,
        CrOptions {
            tol,
            ..CrOptions::default()
        },
    )
}

pub fn cr_capacity_avc_with(family: &ChannelFamily, opts: CrOptions) -> Result<CapacityResult> {
    let nx = family.inputs();
    let uniform = vec![1.0 / nx as f64; nx];
    let (q, st, outer_iters) = match family.len() {
        1 => {
            let st = blahut_arimoto(family.member(0), &uniform, opts.inner_tol, opts.max_iter)?;
            (vec![1.0], st, 0)
        }
        2 => {
            let mut warm = uniform.clone();
            let (t, _, evals) = golden_min(
                |t| {
                    let wq = averaged_raw(family, &[1.0 - t, t])?;
                    let st = blahut_arimoto(&wq, &warm, opts.inner_tol, opts.max_iter)?;
                    warm = st.p.clone();
                    Ok(st.lower)
                },
                0.0,
                1.0,
                1e-9,
            )?;
            let q = vec![1.0 - t, t];
            let st = blahut_arimoto(&averaged_raw(family, &q)?, &warm, opts.inner_tol, opts.max_iter)?;
            (q, st, evals)
        }
        _ => projected_minimax(family, opts)?,
    };
    let (best_inner, certified_lower, _) = min_mi_over_states(family, &st.p)?;
    let lower = if family.len() > 2 {
        certified_lower
    } else {
        best_inner
    };
    let gap = (st.upper - lower).max(0.0);
    if gap > opts.tol {
        return Err(Error::NoConvergence {
            iterations: outer_iters,
            gap,
        });
    }
    Ok(CapacityResult {
        value: st.lower,
        optimizer_p: Distribution::from_trusted(st.p),
        worst_q: Some(Distribution::from_trusted(q)),
        duality_gap: gap,
        iterations: outer_iters,
    })
}

/// Projected descent on `g(q) = max_p I(p, W_q)` using the gradient of
/// `I(p*, W_q)` at the inner maximizer, with backtracked steps and
/// best-iterate tracking.
fn projected_minimax(family: &ChannelFamily, opts: CrOptions) -> Result<(Vec<f64>, BaState, usize)> {
    let k = family.len();
    let nx = family.inputs();
    let mut q = vec![1.0 / k as f64; k];
    let mut st = blahut_arimoto(&averaged_raw(family, &q)?, &vec![1.0 / nx as f64; nx], opts.inner_tol, opts.max_iter)?;
    let mut step = 0.5;
    for iter in 0..opts.max_outer {
        let wq = averaged_raw(family, &q)?;
        let g = state_gradient(family, &st.p, &wq);
        let lin = st.lower + g.iter().copied().fold(f64::INFINITY, f64::min)
            - g.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
        if st.upper - lin <= opts.tol {
            return Ok((q, st, iter));
        }
        let mut moved = false;
        while step > 1e-14 {
            let cand = project_simplex(&q.iter().zip(&g).map(|(a, b)| a - step * b).collect::<Vec<_>>());
            let cst = blahut_arimoto(&averaged_raw(family, &cand)?, &st.p, opts.inner_tol, opts.max_iter)?;
            let decrease: f64 = g.iter().zip(q.iter().zip(&cand)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if cst.lower <= st.lower - 1e-4 * decrease && decrease > 0.0 {
                q = cand;
                st = cst;
                step *= 2.0;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            return Ok((q, st, iter));
        }
    }
    Ok((q, st, opts.max_outer))
}

/// True when every eavesdropper channel ignores its input, so that no code
/// leaks anything under any state sequence.
pub fn useless_eavesdropper(v: &ChannelFamily) -> bool {
    v.all_useless(USELESS_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityValue {
    Exact(f64),
    Bounds { lower: f64, upper: f64 },
}

impl CapacityValue {
    pub fn lower(&self) -> f64 {
        match *self {
            CapacityValue::Exact(v) => v,
            CapacityValue::Bounds { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            CapacityValue::Exact(v) => v,
            CapacityValue::Bounds { upper, .. } => upper,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The legitimate family is symmetrizable: no positive unassisted rate.
    SymmetrizableZero,
    /// Non-symmetrizable with an input-independent eavesdropper: both
    /// capacities equal the CR capacity of the legitimate family.
    UselessEavesdropper,
    /// Non-symmetrizable with an informative eavesdropper: both capacities
    /// coincide but are only bracketed.
    BoundsOnly,
}

#[derive(Clone, Debug, Serialize)]
pub struct SecrecyVerdict {
    pub cs_value: CapacityValue,
    pub cs_cr_value: CapacityValue,
    pub regime: Regime,
    pub symmetry: SymmetryVerdict,
    /// CR capacity of the legitimate family without secrecy.
    pub legitimate_cr: CapacityResult,
}

#[derive(Clone, Copy, Debug)]
pub struct SecrecyOptions {
    pub tol: f64,
    pub u_size: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SecrecyOptions {
    fn default() -> Self {
        SecrecyOptions {
            tol: MINIMAX_TOL,
            u_size: 4,
            restarts: 6,
            seed: 0,
        }
    }
}

/// Unassisted and CR-assisted secrecy capacities of an arbitrarily varying
/// wiretap channel, as far as they are determined by symmetrizability of the
/// legitimate family and by the eavesdropper being useless.
pub fn secrecy_capacity_dichotomy(u: &WiretapUncertainty, opts: &SecrecyOptions) -> Result<SecrecyVerdict> {
    let symmetry = min_f(u.legitimate())?;
    let legitimate_cr = cr_capacity_avc(u.legitimate(), opts.tol)?;
    let useless = useless_eavesdropper(u.eavesdropper());
    let cs_cr_value = if useless {
        CapacityValue::Exact(legitimate_cr.value)
    } else {
        let lower = n1_avwc_secrecy_rate(u, opts.u_size, opts.restarts, opts.seed)?.value;
        CapacityValue::Bounds {
            lower: lower.max(0.0),
            upper: legitimate_cr.value,
        }
    };
    let (cs_value, regime) = if symmetry.symmetrizable {
        (CapacityValue::Exact(0.0), Regime::SymmetrizableZero)
    } else if useless {
        (cs_cr_value, Regime::UselessEavesdropper)
    } else {
        (cs_cr_value, Regime::BoundsOnly)
    };
    Ok(SecrecyVerdict {
        cs_value,
        cs_cr_value,
        regime,
        symmetry,
        legitimate_cr,
    })
}

/// Best single-letter secrecy objective found by the randomized search.
#[derive(Clone, Debug, Serialize)]
pub struct SingleLetterRate {
    /// Objective value clipped at zero.
    pub value: f64,
    pub p_u: Distribution,
    /// Prefix channel `P(x | u)`.
    pub encoder: Channel,
    pub heuristic: bool,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn decode(logits: &[f64], u_size: usize, nx: usize) -> (Vec<f64>, Channel) {
    let p_u = softmax(&logits[..u_size]);
    let probs = logits[u_size..].chunks(nx).flat_map(softmax).collect();
    (p_u, Channel::from_trusted(u_size, nx, probs))
}

/// Random-restart hill climbing over `(P_U, P_{X|U})`.
fn search_single_letter<F>(
    nx: usize,
    u_size: usize,
    restarts: usize,
    seed: u64,
    objective: F,
) -> Result<SingleLetterRate>
where
    F: Fn(&[f64], &Channel) -> Result<f64>,
{
    if u_size == 0 || restarts == 0 {
        return Err(Error::OutOfRange {
            what: "u_size and restarts",
            value: 0.0,
        });
    }
    let dim = u_size + u_size * nx;
    let mut best: Option<(f64, Vec<f64>, Channel)> = None;
    let consider = |v: f64, p: Vec<f64>, e: Channel, best: &mut Option<(f64, Vec<f64>, Channel)>| {
        if best.as_ref().is_none_or(|b| v > b.0) {
            *best = Some((v, p, e));
        }
    };
    // U = X with a uniform input, when there are enough auxiliary symbols.
    if u_size >= nx {
        let mut p = vec![0.0; u_size];
        p[..nx].iter_mut().for_each(|v| *v = 1.0 / nx as f64);
        let probs = (0..u_size)
            .flat_map(|u| (0..nx).map(move |x| if u % nx == x { 1.0 } else { 0.0 }))
            .collect();
        let enc = Channel::from_trusted(u_size, nx, probs);
        let v = objective(&p, &enc)?;
        consider(v, p, enc, &mut best);
    }
    for r in 0..restarts {
        let mut rng = sampling::substream(seed, r as u64);
        let mut logits: Vec<f64> = (0..dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let (p, e) = decode(&logits, u_size, nx);
        let mut current = objective(&p, &e)?;
        let mut step = 1.0;
        let mut stale = 0;
        for _ in 0..400 {
            let cand: Vec<f64> = logits
                .iter()
                .map(|l| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    l + step * z
                })
                .collect();
            let (p, e) = decode(&cand, u_size, nx);
            let v = objective(&p, &e)?;
            if v > current {
                current = v;
                logits = cand;
                stale = 0;
            } else {
                stale += 1;
                if stale >= 25 {
                    step *= 0.5;
                    stale = 0;
                }
            }
        }
        let (p, e) = decode(&logits, u_size, nx);
        consider(current, p, e, &mut best);
    }
    let (v, p, e) = best.expect("at least one restart");
    Ok(SingleLetterRate {
        value: v.max(0.0),
        p_u: Distribution::from_trusted(p),
        encoder: e,
        heuristic: true,
    })
}

/// `I(U; output)` for the prefix `encoder` followed by `w`, with `U ~ p_u`.
fn prefixed_mi(p_u: &[f64], encoder: &Channel, w: &Channel) -> Result<f64> {
    Ok(mutual_information_raw(p_u, &encoder.then(w)?))
}

/// The single-letter compound secrecy objective
/// `min_s I(U; Y_s) - max_s I(U; Z_s)` for a fixed `(P_U, P_{X|U})`.
pub fn single_letter_objective(u: &WiretapUncertainty, p_u: &Distribution, encoder: &Channel) -> Result<f64> {
    if encoder.inputs() != p_u.len() || encoder.outputs() != u.legitimate().inputs() {
        return Err(Error::dims("prefix channel does not match U or X"));
    }
    let mut legit = f64::INFINITY;
    for w in u.legitimate().members() {
        legit = legit.min(prefixed_mi(p_u.as_slice(), encoder, w)?);
    }
    let mut eve = f64::NEG_INFINITY;
    for v in u.eavesdropper().members() {
        eve = eve.max(prefixed_mi(p_u.as_slice(), encoder, v)?);
    }
    Ok(legit - eve)
}

/// Heuristic lower bound on the secrecy capacity of the compound wiretap
/// channel `u`: the best single-letter objective over random restarts,
/// clipped at zero.
pub fn n1_compound_secrecy_rate(
    u: &WiretapUncertainty,
    u_size: usize,
    restarts: usize,
    seed: u64,
) -> Result<SingleLetterRate> {
    let nx = u.legitimate().inputs();
    search_single_letter(nx, u_size, restarts, seed, |p, e| {
        let mut legit = f64::INFINITY;
        for w in u.legitimate().members() {
            legit = legit.min(prefixed_mi(p, e, w)?);
        }
        let mut eve = f64::NEG_INFINITY;
        for v in u.eavesdropper().members() {
            eve = eve.max(prefixed_mi(p, e, v)?);
        }
        Ok(legit - eve)
    })
}

/// Single-letter heuristic for the arbitrarily varying case: the legitimate
/// term is minimized over state mixtures `W_q` rather than pure states.
pub fn n1_avwc_secrecy_rate(
    u: &WiretapUncertainty,
    u_size: usize,
    restarts: usize,
    seed: u64,
) -> Result<SingleLetterRate> {
    let nx = u.legitimate().inputs();
    search_single_letter(nx, u_size, restarts, seed, |p, e| {
        let composed = u.legitimate().map_members(|w| e.then(w))?;
        let (legit, _, _) = min_mi_over_states(&composed, p)?;
        let mut eve = f64::NEG_INFINITY;
        for v in u.eavesdropper().members() {
            eve = eve.max(prefixed_mi(p, e, v)?);
        }
        Ok(legit - eve)
    })
}
