//! Finite channels, state-indexed channel families and wiretap uncertainty sets.
//!
//! A [`Channel`] is a row-stochastic matrix `W(y|x)` stored row-major. A
//! [`ChannelFamily`] is a finite list of channels indexed by states; the same
//! type serves as the uncertainty set of a compound channel and as an
//! arbitrarily varying channel. A [`WiretapUncertainty`] pairs a legitimate
//! family with an eavesdropper family governed by the same state.
//!
//! Sequences over an alphabet of size `k` are indexed row-major: the first
//! symbol is the most significant digit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-sum tolerance applied when validating user-supplied rows.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Drift above which combinators renormalize their output rows.
const DRIFT_TOLERANCE: f64 = 1e-12;

/// Default cap on `|X|^n * |Y|^n` for explicit product channels.
pub const PRODUCT_CAP: u128 = 10_000_000;

fn check_row(row: &[f64], index: usize) -> Result<()> {
    let sum: f64 = row.iter().sum();
    let min = row.iter().copied().fold(f64::INFINITY, f64::min);
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let finite = row.iter().all(|v| v.is_finite());
    if !finite || min < 0.0 || max > 1.0 + ROW_TOLERANCE || (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(Error::NonStochasticRow {
            row: index,
            sum,
            min,
        });
    }
    Ok(())
}

/// Probability vector over a finite support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("distribution"));
        }
        check_row(&entries, 0)?;
        Ok(Distribution(entries))
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution needs a non-empty support");
        Distribution(vec![1.0 / size as f64; size])
    }

    /// Point mass on `index`.
    pub fn point(size: usize, index: usize) -> Self {
        assert!(index < size);
        let mut v = vec![0.0; size];
        v[index] = 1.0;
        Distribution(v)
    }

    /// Wraps a vector that is already known to lie on the simplex, renormalizing drift.
    pub(crate) fn from_trusted(mut entries: Vec<f64>) -> Self {
        renormalize(&mut entries);
        Distribution(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Distribution::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.0
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn renormalize(row: &mut [f64]) {
    for v in row.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > DRIFT_TOLERANCE && sum > 0.0 {
        log::debug!("renormalizing row with drift {:e}", sum - 1.0);
        row.iter_mut().for_each(|v| *v /= sum);
    }
}

/// Discrete memoryless channel `W(y|x)` with finite input and output alphabets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelFile", into = "ChannelFile")]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    probs: Vec<f64>,
}

impl Channel {
    /// Validates a list of rows, one probability vector per input symbol.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.len();
        if inputs == 0 {
            return Err(Error::Empty("channel rows"));
        }
        let outputs = rows[0].len();
        if outputs == 0 {
            return Err(Error::Empty("channel output alphabet"));
        }
        let mut probs = Vec::with_capacity(inputs * outputs);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::RaggedRows {
                    row: i,
                    expected: outputs,
                    found: row.len(),
                });
            }
            check_row(row, i)?;
            probs.extend_from_slice(row);
        }
        Ok(Channel {
            inputs,
            outputs,
            probs,
        })
    }

    /// Row-major constructor with full validation.
    pub fn from_flat(inputs: usize, outputs: usize, probs: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::Empty("channel alphabet"));
        }
        if probs.len() != inputs * outputs {
            return Err(Error::dims(format!(
                "{} entries for a {inputs}x{outputs} channel",
                probs.len()
            )));
        }
        for (i, row) in probs.chunks(outputs).enumerate() {
            check_row(row, i)?;
        }
        Ok(Channel {
            inputs,
            outputs,
            probs,
        })
    }

    /// Builds a channel from rows that are stochastic up to rounding drift.
    pub(crate) fn from_trusted(inputs: usize, outputs: usize, mut probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), inputs * outputs);
        for row in probs.chunks_mut(outputs) {
            renormalize(row);
        }
        Channel {
            inputs,
            outputs,
            probs,
        }
    }

    /// The `n x n` noiseless channel.
    pub fn identity(n: usize) -> Self {
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            probs[i * n + i] = 1.0;
        }
        Channel::from_trusted(n, n, probs)
    }

    /// Channel whose every row equals `row`; its output is independent of the input.
    pub fn constant(inputs: usize, row: &Distribution) -> Self {
        let probs = (0..inputs).flat_map(|_| row.as_slice().iter().copied()).collect();
        Channel::from_trusted(inputs, row.len(), probs)
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                what: "crossover",
                value: p,
            });
        }
        Channel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.outputs)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.outputs + y]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.probs
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    /// True when every row is identical (within `tol`), i.e. the output carries no
    /// information about the input.
    pub fn is_useless(&self, tol: f64) -> bool {
        let first = self.row(0);
        self.rows()
            .all(|r| r.iter().zip(first).all(|(a, b)| (a - b).abs() <= tol))
    }

    pub fn same_shape(&self, other: &Channel) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs
    }

    /// Output law when the input is distributed as `p`.
    pub fn output_distribution(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs];
        for (px, row) in p.iter().zip(self.rows()) {
            if *px == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(row) {
                *o += px * w;
            }
        }
        out
    }

    /// Serial composition: first `self` (X -> Y), then `next` (Y -> Z).
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if self.outputs != next.inputs {
            return Err(Error::dims(format!(
                "cannot compose {}-output channel with {}-input channel",
                self.outputs, next.inputs
            )));
        }
        let mut probs = vec![0.0; self.inputs * next.outputs];
        for x in 0..self.inputs {
            let dst = &mut probs[x * next.outputs..(x + 1) * next.outputs];
            for (y, &w) in self.row(x).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (d, v) in dst.iter_mut().zip(next.row(y)) {
                    *d += w * v;
                }
            }
        }
        Ok(Channel::from_trusted(self.inputs, next.outputs, probs))
    }

    /// Parses the JSON channel file format.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ChannelFile = serde_json::from_str(text)?;
        raw.validate()
    }
}

/// On-disk channel representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub input_alphabet: usize,
    pub output_alphabet: usize,
    pub rows: Vec<Vec<f64>>,
}

impl ChannelFile {
    fn validate(self) -> Result<Channel> {
        if self.rows.len() != self.input_alphabet {
            return Err(Error::dims(format!(
                "input_alphabet is {} but {} rows given",
                self.input_alphabet,
                self.rows.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.output_alphabet {
                return Err(Error::RaggedRows {
                    row: i,
                    expected: self.output_alphabet,
                    found: row.len(),
                });
            }
        }
        Channel::new(self.rows)
    }
}

impl TryFrom<ChannelFile> for Channel {
    type Error = Error;

    fn try_from(raw: ChannelFile) -> Result<Self> {
        raw.validate()
    }
}

impl From<Channel> for ChannelFile {
    fn from(c: Channel) -> Self {
        ChannelFile {
            input_alphabet: c.inputs,
            output_alphabet: c.outputs,
            rows: c.to_rows(),
        }
    }
}

/// `(1 - lambda) * a + lambda * b`, entrywise.
pub fn convex_combine(a: &Channel, b: &Channel, lambda: f64) -> Result<Channel> {
    if !a.same_shape(b) {
        return Err(Error::dims(format!(
            "{}x{} vs {}x{}",
            a.inputs, a.outputs, b.inputs, b.outputs
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let probs = a
        .probs
        .iter()
        .zip(&b.probs)
        .map(|(x, y)| (1.0 - lambda) * x + lambda * y)
        .collect();
    Ok(Channel::from_trusted(a.inputs, a.outputs, probs))
}

/// Kronecker product of per-letter channels: the memoryless channel that uses
/// `letters[i]` at time `i`.
pub fn product_of(letters: &[&Channel], cap: u128) -> Result<Channel> {
    let first = letters.first().ok_or(Error::Empty("letter channels"))?;
    let mut inputs: u128 = 1;
    let mut outputs: u128 = 1;
    for c in letters {
        inputs = inputs.saturating_mul(c.inputs as u128);
        outputs = outputs.saturating_mul(c.outputs as u128);
    }
    let needed = inputs.saturating_mul(outputs);
    if needed > cap {
        return Err(Error::EnumerationCapExceeded { needed, cap });
    }
    let mut acc: Channel = (*first).clone();
    for next in &letters[1..] {
        let (ai, ao) = (acc.inputs, acc.outputs);
        let (bi, bo) = (next.inputs, next.outputs);
        let mut probs = vec![0.0; ai * bi * ao * bo];
        let out_cols = ao * bo;
        for x1 in 0..ai {
            for x2 in 0..bi {
                let row = (x1 * bi + x2) * out_cols;
                for (y1, &p1) in acc.row(x1).iter().enumerate() {
                    if p1 == 0.0 {
                        continue;
                    }
                    let base = row + y1 * bo;
                    for (y2, &p2) in next.row(x2).iter().enumerate() {
                        probs[base + y2] = p1 * p2;
                    }
                }
            }
        }
        acc = Channel::from_trusted(ai * bi, out_cols, probs);
    }
    Ok(acc)
}

/// Finite, state-indexed set of channels sharing input and output alphabets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyFile", into = "FamilyFile")]
pub struct ChannelFamily {
    labels: Vec<String>,
    members: Vec<Channel>,
}

impl ChannelFamily {
    pub fn new(labels: Vec<String>, members: Vec<Channel>) -> Result<Self> {
        let first = members.first().ok_or(Error::Empty("channel family"))?;
        if labels.len() != members.len() {
            return Err(Error::LengthMismatch(format!(
                "{} state labels for {} channels",
                labels.len(),
                members.len()
            )));
        }
        for (i, m) in members.iter().enumerate() {
            if !m.same_shape(first) {
                return Err(Error::InChannel {
                    index: i,
                    source: Box::new(Error::dims(format!(
                        "{}x{} member in a {}x{} family",
                        m.inputs, m.outputs, first.inputs, first.outputs
                    ))),
                });
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateState(l.clone()));
            }
        }
        Ok(ChannelFamily { labels, members })
    }

    /// Family with default labels `s1, s2, ...`.
    pub fn from_members(members: Vec<Channel>) -> Result<Self> {
        let labels = (1..=members.len()).map(|i| format!("s{i}")).collect();
        ChannelFamily::new(labels, members)
    }

    pub fn single(channel: Channel) -> Self {
        ChannelFamily {
            labels: vec!["s1".into()],
            members: vec![channel],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn inputs(&self) -> usize {
        self.members[0].inputs
    }

    pub fn outputs(&self) -> usize {
        self.members[0].outputs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn members(&self) -> &[Channel] {
        &self.members
    }

    pub fn member(&self, s: usize) -> &Channel {
        &self.members[s]
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    /// `W(y|x, s)`.
    pub fn prob(&self, y: usize, x: usize, s: usize) -> f64 {
        self.members[s].get(x, y)
    }

    pub fn same_shape(&self, other: &ChannelFamily) -> bool {
        self.inputs() == other.inputs() && self.outputs() == other.outputs()
    }

    /// True when every member ignores its input.
    pub fn all_useless(&self, tol: f64) -> bool {
        self.members.iter().all(|m| m.is_useless(tol))
    }

    /// Applies `f` to every member, keeping the labels.
    pub fn map_members<F>(&self, mut f: F) -> Result<ChannelFamily>
    where
        F: FnMut(&Channel) -> Result<Channel>,
    {
        let members = self.members.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        ChannelFamily::new(self.labels.clone(), members)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FamilyFile = serde_json::from_str(text)?;
        raw.validate()
    }
}

/// On-disk family representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub states: Vec<String>,
    pub channels: Vec<ChannelFile>,
}

impl FamilyFile {
    fn validate(self) -> Result<ChannelFamily> {
        let members = self
            .channels
            .into_iter()
            .enumerate()
            .map(|(index, c)| {
                c.validate().map_err(|e| Error::InChannel {
                    index,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ChannelFamily::new(self.states, members)
    }
}

impl TryFrom<FamilyFile> for ChannelFamily {
    type Error = Error;

    fn try_from(raw: FamilyFile) -> Result<Self> {
        raw.validate()
    }
}

impl From<ChannelFamily> for FamilyFile {
    fn from(f: ChannelFamily) -> Self {
        FamilyFile {
            states: f.labels,
            channels: f.members.into_iter().map(ChannelFile::from).collect(),
        }
    }
}

/// `W_q = sum_s q(s) W_s`.
pub fn averaged_channel(family: &ChannelFamily, q: &Distribution) -> Result<Channel> {
    averaged_raw(family, q.as_slice())
}

pub(crate) fn averaged_raw(family: &ChannelFamily, q: &[f64]) -> Result<Channel> {
    if q.len() != family.len() {
        return Err(Error::dims(format!(
            "state distribution of size {} for a family of {} states",
            q.len(),
            family.len()
        )));
    }
    let first = &family.members[0];
    let mut probs = vec![0.0; first.probs.len()];
    for (w, m) in q.iter().zip(&family.members) {
        if *w == 0.0 {
            continue;
        }
        for (p, v) in probs.iter_mut().zip(&m.probs) {
            *p += w * v;
        }
    }
    Ok(Channel::from_trusted(first.inputs, first.outputs, probs))
}

/// Memoryless channel `W^n(y^n | x^n, s^n) = prod_i W(y_i | x_i, s_i)` on the
/// product alphabets, indexed row-major.
pub fn product_channel(family: &ChannelFamily, states: &[usize], cap: u128) -> Result<Channel> {
    if states.is_empty() {
        return Err(Error::Empty("state sequence"));
    }
    let letters = states
        .iter()
        .map(|&s| {
            family
                .members
                .get(s)
                .ok_or_else(|| Error::UnknownState(s.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    product_of(&letters, cap)
}

/// Resolves state labels to indices.
pub fn resolve_states(family: &ChannelFamily, labels: &[&str]) -> Result<Vec<usize>> {
    labels.iter().map(|l| family.state_index(l)).collect()
}

/// Legitimate and eavesdropper families driven by a common state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WiretapFile", into = "WiretapFile")]
pub struct WiretapUncertainty {
    legitimate: ChannelFamily,
    eavesdropper: ChannelFamily,
}

impl WiretapUncertainty {
    pub fn new(legitimate: ChannelFamily, eavesdropper: ChannelFamily) -> Result<Self> {
        if legitimate.inputs() != eavesdropper.inputs() {
            return Err(Error::dims(format!(
                "legitimate input alphabet {} vs eavesdropper {}",
                legitimate.inputs(),
                eavesdropper.inputs()
            )));
        }
        if legitimate.labels != eavesdropper.labels {
            return Err(Error::LengthMismatch(
                "legitimate and eavesdropper families must share state labels".into(),
            ));
        }
        Ok(WiretapUncertainty {
            legitimate,
            eavesdropper,
        })
    }

    pub fn legitimate(&self) -> &ChannelFamily {
        &self.legitimate
    }

    pub fn eavesdropper(&self) -> &ChannelFamily {
        &self.eavesdropper
    }

    pub fn states(&self) -> usize {
        self.legitimate.len()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: WiretapFile = serde_json::from_str(text)?;
        WiretapUncertainty::new(raw.legitimate.validate()?, raw.eavesdropper.validate()?)
    }
}

/// On-disk wiretap representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WiretapFile {
    pub legitimate: FamilyFile,
    pub eavesdropper: FamilyFile,
}

impl TryFrom<WiretapFile> for WiretapUncertainty {
    type Error = Error;

    fn try_from(raw: WiretapFile) -> Result<Self> {
        WiretapUncertainty::new(raw.legitimate.validate()?, raw.eavesdropper.validate()?)
    }
}

impl From<WiretapUncertainty> for WiretapFile {
    fn from(u: WiretapUncertainty) -> Self {
        WiretapFile {
            legitimate: u.legitimate.into(),
            eavesdropper: u.eavesdropper.into(),
        }
    }
}

/// Number of length-`n` sequences over an alphabet of size `k`, if it fits in `u128`.
pub fn sequence_count(k: usize, n: usize) -> u128 {
    (k as u128).saturating_pow(n as u32)
}

/// Digits of `index` as a length-`n` sequence over `0..k`, most significant first.
pub fn sequence_digits(mut index: usize, k: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for d in digits.iter_mut().rev() {
        *d = index % k;
        index /= k;
    }
    digits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blackwell() -> ChannelFamily {
        ChannelFamily::from_members(vec![
            Channel::new(vec![vec![1., 0., 0.], vec![0., 0., 1.]]).unwrap(),
            Channel::new(vec![vec![0., 0., 1.], vec![0., 1., 0.]]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn make_channel_examples() {
        let w1 = Channel::new(vec![vec![1., 0., 0.], vec![0., 0., 1.]]).unwrap();
        assert_eq!(w1.row(1), &[0., 0., 1.]);
        assert!(matches!(
            Channel::new(vec![vec![0.5, 0.6]]),
            Err(Error::NonStochasticRow { row: 0, .. })
        ));
        let v = Channel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(v.is_useless(0.0));
    }

    #[test]
    fn rejects_ragged_and_negative_rows() {
        assert!(matches!(
            Channel::new(vec![vec![0.5, 0.5], vec![1.0]]),
            Err(Error::RaggedRows { row: 1, .. })
        ));
        assert!(matches!(
            Channel::new(vec![vec![1.0, 0.0], vec![1.5, -0.5]]),
            Err(Error::NonStochasticRow { row: 1, .. })
        ));
        assert!(Channel::new(vec![vec![0.5, 0.5 + 5e-10]]).is_ok());
    }

    #[test]
    fn averaged_examples() {
        let fam = blackwell();
        let w = averaged_channel(&fam, &Distribution::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(&w, fam.member(0));
        let half = averaged_channel(&fam, &Distribution::uniform(2)).unwrap();
        assert_eq!(half.to_rows(), vec![vec![0.5, 0., 0.5], vec![0., 0.5, 0.5]]);
        assert!(matches!(
            averaged_channel(&fam, &Distribution::uniform(3)),
            Err(Error::DimensionMismatch(_))
        ));
        let bsc = Channel::bsc(0.2).unwrap();
        let same = ChannelFamily::from_members(vec![bsc.clone(), bsc.clone(), bsc.clone()]).unwrap();
        let avg = averaged_channel(&same, &Distribution::uniform(3)).unwrap();
        for (a, b) in avg.as_flat().iter().zip(bsc.as_flat()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn convex_combine_examples() {
        let fam = blackwell();
        let what = Channel::new(vec![vec![1., 0., 0.], vec![0., 1., 0.]]).unwrap();
        let w1 = fam.member(0);
        assert_eq!(&convex_combine(w1, &what, 0.0).unwrap(), w1);
        let l = 0.3;
        let w1l = convex_combine(w1, &what, l).unwrap();
        assert_eq!(w1l.row(1), &[0.0, l, 1.0 - l]);
        let w2l = convex_combine(fam.member(1), &what, l).unwrap();
        assert_eq!(w2l.row(0), &[l, 0.0, 1.0 - l]);
        assert!(matches!(
            convex_combine(w1, &what, 1.5),
            Err(Error::LambdaOutOfRange(_))
        ));
        assert!(matches!(
            convex_combine(w1, &Channel::identity(2), 0.5),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn product_examples() {
        let fam = blackwell();
        assert_eq!(&product_channel(&fam, &[0], PRODUCT_CAP).unwrap(), fam.member(0));
        let p = product_channel(&fam, &[0, 1], PRODUCT_CAP).unwrap();
        assert_eq!((p.inputs(), p.outputs()), (4, 9));
        // x = (1, 2), y = (1, 2) in one-based symbols
        assert_eq!(p.get(1, 1), 1.0);
        assert!(matches!(
            product_channel(&fam, &[0, 2], PRODUCT_CAP),
            Err(Error::UnknownState(_))
        ));
        assert!(matches!(
            product_channel(&fam, &[0; 8], 1000),
            Err(Error::EnumerationCapExceeded { .. })
        ));
        let bsc = Channel::bsc(0.1).unwrap();
        let same = ChannelFamily::from_members(vec![bsc.clone(), bsc]).unwrap();
        assert_eq!(
            product_channel(&same, &[0, 1, 1], PRODUCT_CAP).unwrap(),
            product_channel(&same, &[1, 0, 0], PRODUCT_CAP).unwrap()
        );
    }

    #[test]
    fn family_validation() {
        let a = Channel::identity(2);
        let b = Channel::identity(3);
        assert!(matches!(
            ChannelFamily::from_members(vec![a.clone(), b]),
            Err(Error::InChannel { index: 1, .. })
        ));
        assert!(matches!(
            ChannelFamily::new(vec!["a".into(), "a".into()], vec![a.clone(), a.clone()]),
            Err(Error::DuplicateState(_))
        ));
        assert!(matches!(
            ChannelFamily::from_members(vec![]),
            Err(Error::Empty(_))
        ));
        let fam = ChannelFamily::new(vec!["x".into(), "y".into()], vec![a.clone(), a]).unwrap();
        assert_eq!(resolve_states(&fam, &["y", "x"]).unwrap(), vec![1, 0]);
        assert!(matches!(fam.state_index("z"), Err(Error::UnknownState(_))));
    }

    #[test]
    fn json_formats() {
        let text = r#"{"input_alphabet": 2, "output_alphabet": 2, "rows": [[0.9, 0.1], [0.2, 0.8]]}"#;
        let c = Channel::from_json(text).unwrap();
        assert_eq!(c.get(1, 0), 0.2);
        let bad = r#"{"input_alphabet": 2, "output_alphabet": 2, "rows": [[0.9, 0.1], [0.3, 0.8]]}"#;
        assert!(matches!(
            Channel::from_json(bad),
            Err(Error::NonStochasticRow { row: 1, .. })
        ));
        let fam_text = format!(r#"{{"states": ["a", "b"], "channels": [{text}, {bad}]}}"#);
        let err = ChannelFamily::from_json(&fam_text).unwrap_err();
        assert_eq!(err.kind(), "non_stochastic_row");
        assert!(err.to_string().contains("channel 1"));
        assert!(err.to_string().contains("row 1"));

        let fam = blackwell();
        let u = WiretapUncertainty::new(
            fam.clone(),
            ChannelFamily::from_members(vec![Channel::bsc(0.5).unwrap(); 2]).unwrap(),
        )
        .unwrap();
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(WiretapUncertainty::from_json(&s).unwrap(), u);
        let parsed: WiretapUncertainty = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed, u);
    }

    #[test]
    fn wiretap_requires_shared_states() {
        let legit = blackwell();
        let eve = ChannelFamily::new(
            vec!["a".into(), "b".into()],
            vec![Channel::bsc(0.5).unwrap(); 2],
        )
        .unwrap();
        assert!(WiretapUncertainty::new(legit.clone(), eve).is_err());
        let eve3 = ChannelFamily::from_members(vec![Channel::identity(3); 2]).unwrap();
        assert!(matches!(
            WiretapUncertainty::new(legit, eve3),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sequence_digits_row_major() {
        assert_eq!(sequence_digits(5, 2, 3), vec![1, 0, 1]);
        assert_eq!(sequence_digits(7, 3, 2), vec![2, 1]);
        assert_eq!(sequence_count(3, 4), 81);
    }
}
