//! Wiretap codes at small blocklengths, evaluated exactly by enumerating
//! every input, output and state sequence.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{delta2, BoundReport};
use crate::channels::{product_channel, sequence_count, sequence_digits, Channel, ChannelFamily, Distribution};
use crate::error::{Error, Result};
use crate::info::{directed_family_distance, family_distance, mutual_information_raw};
use crate::sampling;

/// Cap on `|X|^n |Y|^n` (or `|Z|^n`) entries of a block channel.
pub const JOINT_CAP: u128 = 1_000_000;
/// Cap on the number of state sequences `|S|^n`.
pub const STATE_SEQ_CAP: u128 = 4096;
/// Row spread below which a channel is treated as ignoring its input.
const USELESS_TOL: f64 = 1e-12;

/// Stochastic encoder `E(x^n | j)` with a deterministic decoder on `Y^n`.
/// Messages and sequences are zero-based; sequences are indexed row-major
/// with the first letter most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodeFile", into = "CodeFile")]
pub struct WiretapCode {
    n: usize,
    x_size: usize,
    y_size: usize,
    encoder: Channel,
    decoder: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CodeFile {
    n: usize,
    messages: usize,
    encoder: Vec<Vec<f64>>,
    decoder: Vec<usize>,
}

impl TryFrom<CodeFile> for WiretapCode {
    type Error = Error;

    fn try_from(f: CodeFile) -> Result<Self> {
        if f.encoder.len() != f.messages {
            return Err(Error::InvalidCode(format!(
                "{} encoder rows for {} messages",
                f.encoder.len(),
                f.messages
            )));
        }
        WiretapCode::new(f.n, Channel::new(f.encoder)?, f.decoder)
    }
}

impl From<WiretapCode> for CodeFile {
    fn from(c: WiretapCode) -> Self {
        CodeFile {
            n: c.n,
            messages: c.messages(),
            encoder: c.encoder.to_rows(),
            decoder: c.decoder,
        }
    }
}

/// Integer `k` with `k^n == len`, if any.
fn exact_root(len: usize, n: usize) -> Option<usize> {
    let guess = (len as f64).powf(1.0 / n as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&k| k >= 1 && sequence_count(k, n) == len as u128)
}

impl WiretapCode {
    pub fn new(n: usize, encoder: Channel, decoder: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCode("blocklength must be positive".into()));
        }
        let x_size = exact_root(encoder.outputs(), n).ok_or_else(|| {
            Error::InvalidCode(format!("encoder width {} is not a power |X|^{n}", encoder.outputs()))
        })?;
        let y_size = exact_root(decoder.len(), n)
            .ok_or_else(|| Error::InvalidCode(format!("decoder length {} is not a power |Y|^{n}", decoder.len())))?;
        if let Some(bad) = decoder.iter().find(|&&j| j >= encoder.inputs()) {
            return Err(Error::InvalidCode(format!(
                "decoder output {bad} outside {} messages",
                encoder.inputs()
            )));
        }
        Ok(WiretapCode {
            n,
            x_size,
            y_size,
            encoder,
            decoder,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn messages(&self) -> usize {
        self.encoder.inputs()
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn encoder(&self) -> &Channel {
        &self.encoder
    }

    pub fn decoder(&self) -> &[usize] {
        &self.decoder
    }
}

fn block_channel(code_n: usize, x_size: usize, family: &ChannelFamily, s_seq: &[usize]) -> Result<Channel> {
    if s_seq.len() != code_n {
        return Err(Error::LengthMismatch(format!(
            "state sequence of length {} for blocklength {code_n}",
            s_seq.len()
        )));
    }
    if family.inputs() != x_size {
        return Err(Error::dims(format!(
            "code uses {x_size} input letters, channel has {}",
            family.inputs()
        )));
    }
    product_channel(family, s_seq, JOINT_CAP)
}

/// Average decoding error over uniformly chosen messages under state
/// sequence `s_seq`.
pub fn average_error(code: &WiretapCode, w: &ChannelFamily, s_seq: &[usize]) -> Result<f64> {
    if w.outputs() != code.y_size {
        return Err(Error::dims(format!(
            "decoder expects {} output letters, channel has {}",
            code.y_size,
            w.outputs()
        )));
    }
    let wn = block_channel(code.n, code.x_size, w, s_seq)?;
    let to_y = code.encoder.then(&wn)?;
    let correct: f64 = (0..code.messages())
        .map(|j| {
            to_y.row(j)
                .iter()
                .zip(&code.decoder)
                .filter(|(_, &d)| d == j)
                .map(|(p, _)| p)
                .sum::<f64>()
        })
        .sum();
    Ok((1.0 - correct / code.messages() as f64).clamp(0.0, 1.0))
}

/// `I(J; Z^n)` for a uniform message under state sequence `s_seq`.
pub fn exact_leakage(code: &WiretapCode, v: &ChannelFamily, s_seq: &[usize]) -> Result<f64> {
    let vn = block_channel(code.n, code.x_size, v, s_seq)?;
    // Z^n is then independent of X^n, so nothing leaks.
    if s_seq.iter().all(|&s| v.member(s).is_useless(USELESS_TOL)) {
        return Ok(0.0);
    }
    let to_z = code.encoder.then(&vn)?;
    let pj = vec![1.0 / code.messages() as f64; code.messages()];
    Ok(mutual_information_raw(&pj, &to_z))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeakageReport {
    /// Leakage for each state sequence, in row-major sequence order.
    pub per_state_sequence: Vec<(Vec<usize>, f64)>,
    pub max_leakage: f64,
    pub rate_leakage: f64,
}

fn state_sequences(states: usize, n: usize, cap: u128) -> Result<Vec<Vec<usize>>> {
    let count = sequence_count(states, n);
    let cap = cap.min(STATE_SEQ_CAP);
    if count > cap {
        return Err(Error::EnumerationCapExceeded { needed: count, cap });
    }
    Ok((0..count as usize).map(|i| sequence_digits(i, states, n)).collect())
}

fn leakage_report<F>(n: usize, states: usize, cap: u128, leak: F) -> Result<LeakageReport>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    let per_state_sequence = state_sequences(states, n, cap)?
        .into_par_iter()
        .map(|s| leak(&s).map(|l| (s, l)))
        .collect::<Result<Vec<_>>>()?;
    let max_leakage = per_state_sequence.iter().map(|(_, l)| *l).fold(0.0, f64::max);
    Ok(LeakageReport {
        per_state_sequence,
        max_leakage,
        rate_leakage: max_leakage / n as f64,
    })
}

/// Leakage under every state sequence of `v`.
pub fn max_leakage(code: &WiretapCode, v: &ChannelFamily, cap: u128) -> Result<LeakageReport> {
    leakage_report(code.n, v.len(), cap, |s| exact_leakage(code, v, s))
}

/// Codes selected by shared randomness with law `gamma`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CRCode {
    members: Vec<WiretapCode>,
    gamma: Distribution,
}

impl CRCode {
    pub fn new(members: Vec<WiretapCode>, gamma: Distribution) -> Result<Self> {
        let first = members.first().ok_or(Error::Empty("CR code members"))?;
        if gamma.len() != members.len() {
            return Err(Error::dims(format!(
                "{} weights for {} codes",
                gamma.len(),
                members.len()
            )));
        }
        let shape = |c: &WiretapCode| (c.n, c.messages(), c.x_size, c.y_size);
        if members.iter().any(|c| shape(c) != shape(first)) {
            return Err(Error::InvalidCode("CR code members differ in shape".into()));
        }
        Ok(CRCode { members, gamma })
    }

    pub fn members(&self) -> &[WiretapCode] {
        &self.members
    }

    pub fn gamma(&self) -> &Distribution {
        &self.gamma
    }

    pub fn n(&self) -> usize {
        self.members[0].n
    }

    fn weighted<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&WiretapCode) -> Result<f64>,
    {
        let mut acc = 0.0;
        for (c, g) in self.members.iter().zip(self.gamma.as_slice()) {
            if *g > 0.0 {
                acc += g * f(c)?;
            }
        }
        Ok(acc)
    }
}

pub fn cr_error(code: &CRCode, w: &ChannelFamily, s_seq: &[usize]) -> Result<f64> {
    code.weighted(|c| average_error(c, w, s_seq))
}

pub fn cr_leakage(code: &CRCode, v: &ChannelFamily, s_seq: &[usize]) -> Result<f64> {
    code.weighted(|c| exact_leakage(c, v, s_seq))
}

pub fn cr_max_leakage(code: &CRCode, v: &ChannelFamily, cap: u128) -> Result<LeakageReport> {
    leakage_report(code.n(), v.len(), cap, |s| cr_leakage(code, v, s))
}

/// Either kind of code, for the robustness check.
#[derive(Clone, Copy, Debug)]
pub enum AnyCode<'a> {
    Plain(&'a WiretapCode),
    CommonRandomness(&'a CRCode),
}

impl AnyCode<'_> {
    fn max_leakage(&self, v: &ChannelFamily, cap: u128) -> Result<LeakageReport> {
        match self {
            AnyCode::Plain(c) => max_leakage(c, v, cap),
            AnyCode::CommonRandomness(c) => cr_max_leakage(c, v, cap),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessReport {
    #[serde(flatten)]
    pub bound: BoundReport,
    /// Symmetric family distance, for reference.
    pub family_distance: f64,
    pub leakage_v: f64,
    pub leakage_v_star: f64,
}

/// Leakage rate under `v_star` against the rate under `v` plus
/// `delta2(eps, |Z|)`, where `eps` is how far the worst member of `v_star`
/// lies from its nearest member of `v`.
pub fn robustness_check(
    code: AnyCode<'_>,
    v: &ChannelFamily,
    v_star: &ChannelFamily,
    cap: u128,
) -> Result<RobustnessReport> {
    let eps = directed_family_distance(v, v_star)?;
    let d = family_distance(v, v_star)?;
    let base = code.max_leakage(v, cap)?;
    let pert = code.max_leakage(v_star, cap)?;
    let rhs = base.rate_leakage + delta2(eps.min(2.0), v.outputs())?;
    Ok(RobustnessReport {
        bound: BoundReport::new(eps, pert.rate_leakage, rhs),
        family_distance: d,
        leakage_v: base.max_leakage,
        leakage_v_star: pert.max_leakage,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinningMode {
    /// Encoder rows drawn uniformly from the simplex over `X^n`.
    Dense,
    /// Each message is uniform over its own random bin of codewords.
    Subset,
}

/// Maximum-likelihood decoder for `encoder` over `reference^n`; ties go to
/// the smallest message index.
pub fn ml_decoder(encoder: &Channel, reference: &Channel, n: usize) -> Result<Vec<usize>> {
    let block = product_of_n(reference, n)?;
    let to_y = encoder.then(&block)?;
    Ok((0..to_y.outputs())
        .map(|y| {
            let mut best = 0;
            for j in 1..to_y.inputs() {
                if to_y.get(j, y) > to_y.get(best, y) {
                    best = j;
                }
            }
            best
        })
        .collect())
}

fn product_of_n(w: &Channel, n: usize) -> Result<Channel> {
    crate::channels::product_of(&vec![w; n], JOINT_CAP)
}

/// Random code of blocklength `n` for `messages` messages with an ML decoder
/// for `reference`. Identical arguments give identical codes.
pub fn random_binning_code(
    n: usize,
    messages: usize,
    reference: &Channel,
    mode: BinningMode,
    seed: u64,
) -> Result<WiretapCode> {
    if n == 0 || messages == 0 {
        return Err(Error::InvalidCode("blocklength and message count must be positive".into()));
    }
    let words = sequence_count(reference.inputs(), n);
    let needed = words.saturating_mul(sequence_count(reference.outputs(), n));
    if needed > JOINT_CAP {
        return Err(Error::EnumerationCapExceeded { needed, cap: JOINT_CAP });
    }
    let words = words as usize;
    let mut rng = sampling::substream(seed, 0);
    let probs: Vec<f64> = match mode {
        BinningMode::Dense => (0..messages).flat_map(|_| sampling::simplex(&mut rng, words)).collect(),
        BinningMode::Subset => {
            let mut order: Vec<usize> = (0..words).collect();
            order.shuffle(&mut rng);
            let bin = (words / messages).max(1);
            let mut probs = vec![0.0; messages * words];
            for j in 0..messages {
                for k in 0..bin {
                    probs[j * words + order[(j * bin + k) % words]] = 1.0 / bin as f64;
                }
            }
            probs
        }
    };
    let encoder = Channel::from_trusted(messages, words, probs);
    let decoder = ml_decoder(&encoder, reference, n)?;
    WiretapCode::new(n, encoder, decoder)
}
