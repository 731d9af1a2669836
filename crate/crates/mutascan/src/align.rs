//! Exact global pairwise alignment with affine gap scoring, plus k-mer seed
//! scanning for identical regions.
//!
//! The aligner is a three-state dynamic program (match, gap-in-b, gap-in-a)
//! with gap cost `gap_open + (L-1) * gap_extend` for a run of length L.
//! Traceback ties are broken diagonal > up > left so mismatch coordinates
//! are reproducible across runs and platforms. Inputs longer than
//! [`FULL_DP_LIMIT`] fall back to a diagonal band of width
//! `2 * |len difference| + 64`, recorded on the result.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

use crate::seqio::Sequence;

/// Above this length the full traceback matrix gives way to a banded one.
pub const FULL_DP_LIMIT: usize = 10_000;

/// Gap character used in alignment rows.
pub const GAP: u8 = b'-';

const NEG_INF: i32 = i32::MIN / 4;

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("sequences {0:?} and {1:?} have different alphabets")]
    AlphabetMismatch(String, String),
    #[error("k = {k} exceeds the shorter sequence length {min_len}")]
    KTooLarge { k: usize, min_len: usize },
    #[error("sequence {0:?} is empty")]
    EmptySequence(String),
    #[error("invalid scoring scheme: {0}")]
    InvalidScheme(String),
}

/// Match reward and gap penalties for the aligner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringScheme {
    #[serde(rename = "match")]
    pub match_score: i32,
    pub mismatch: i32,
    pub gap_open: i32,
    pub gap_extend: i32,
}

impl ScoringScheme {
    pub fn new(
        match_score: i32,
        mismatch: i32,
        gap_open: i32,
        gap_extend: i32,
    ) -> Result<Self, AlignError> {
        if match_score < 0 || match_score <= mismatch {
            return Err(AlignError::InvalidScheme(format!(
                "match ({match_score}) must be non-negative and exceed mismatch ({mismatch})"
            )));
        }
        if mismatch > 0 || gap_extend > 0 || gap_open > gap_extend {
            return Err(AlignError::InvalidScheme(format!(
                "penalties must satisfy gap_open ({gap_open}) <= gap_extend ({gap_extend}) <= 0 \
                 and mismatch ({mismatch}) <= 0"
            )));
        }
        Ok(ScoringScheme {
            match_score,
            mismatch,
            gap_open,
            gap_extend,
        })
    }

    /// Default nucleotide scheme.
    pub fn dna_default() -> Self {
        ScoringScheme {
            match_score: 2,
            mismatch: -1,
            gap_open: -4,
            gap_extend: -1,
        }
    }

    /// Default identity-based protein scheme.
    pub fn protein_default() -> Self {
        ScoringScheme {
            match_score: 2,
            mismatch: -1,
            gap_open: -6,
            gap_extend: -1,
        }
    }

    #[inline]
    fn substitution(&self, a: u8, b: u8) -> i32 {
        if a == b {
            self.match_score
        } else {
            self.mismatch
        }
    }
}

/// A maximal exact match of length >= k between query and subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedHit {
    pub query_pos: usize,
    pub subject_pos: usize,
    pub length: usize,
}

impl SeedHit {
    pub fn diagonal(&self) -> isize {
        self.subject_pos as isize - self.query_pos as isize
    }
}

/// Two gapped rows over a shared column axis, with the score and the scheme
/// that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub row_a: String,
    pub row_b: String,
    pub score: i32,
    pub scheme: ScoringScheme,
    /// True when the banded fallback produced this alignment.
    pub banded: bool,
}

impl Alignment {
    pub fn columns(&self) -> impl Iterator<Item = (u8, u8)> + '_ {
        self.row_a.bytes().zip(self.row_b.bytes())
    }

    /// Number of columns.
    pub fn len(&self) -> usize {
        self.row_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_a.is_empty()
    }

    /// `|` under equal non-gap columns, space elsewhere.
    pub fn midline(&self) -> String {
        self.columns()
            .map(|(a, b)| if a == b && a != GAP { '|' } else { ' ' })
            .collect()
    }

    pub fn ungapped_a(&self) -> String {
        self.row_a.chars().filter(|&c| c != GAP as char).collect()
    }

    pub fn ungapped_b(&self) -> String {
        self.row_b.chars().filter(|&c| c != GAP as char).collect()
    }

    /// Re-score the rows column by column under `self.scheme`.
    pub fn recomputed_score(&self) -> i32 {
        let mut score = 0;
        let mut gap_a = false;
        let mut gap_b = false;
        for (a, b) in self.columns() {
            if a == GAP {
                score += if gap_a {
                    self.scheme.gap_extend
                } else {
                    self.scheme.gap_open
                };
                gap_a = true;
                gap_b = false;
            } else if b == GAP {
                score += if gap_b {
                    self.scheme.gap_extend
                } else {
                    self.scheme.gap_open
                };
                gap_b = true;
                gap_a = false;
            } else {
                score += self.scheme.substitution(a, b);
                gap_a = false;
                gap_b = false;
            }
        }
        score
    }
}

/// Fraction of columns whose residues are equal and non-gap. An empty
/// alignment counts as fully identical.
pub fn percent_identity(al: &Alignment) -> f64 {
    if al.is_empty() {
        return 1.0;
    }
    let matches = al.columns().filter(|&(a, b)| a == b && a != GAP).count();
    matches as f64 / al.len() as f64
}

/// Columns where the rows differ, in ascending order.
pub fn mismatch_columns(al: &Alignment) -> Vec<(usize, u8, u8)> {
    al.columns()
        .enumerate()
        .filter(|&(_, (a, b))| a != b)
        .map(|(i, (a, b))| (i, a, b))
        .collect()
}

/// All maximal exact matches of length >= k, found via a k-mer index of the
/// subject; sorted by (diagonal, query position).
pub fn seed_scan(
    query: &Sequence,
    subject: &Sequence,
    k: usize,
) -> Result<Vec<SeedHit>, AlignError> {
    if query.alphabet != subject.alphabet {
        return Err(AlignError::AlphabetMismatch(
            query.id.clone(),
            subject.id.clone(),
        ));
    }
    assert!(k >= 1, "k must be positive");
    let min_len = query.len().min(subject.len());
    if k > min_len {
        return Err(AlignError::KTooLarge { k, min_len });
    }
    let q = query.bytes();
    let s = subject.bytes();
    let mut index: HashMap<&[u8], Vec<usize>> = HashMap::new();
    for (pos, kmer) in s.windows(k).enumerate() {
        index.entry(kmer).or_default().push(pos);
    }
    // Group k-mer hits by diagonal; query positions arrive in ascending
    // order, so overlapping or touching intervals merge into maximal runs.
    let mut diagonals: BTreeMap<isize, Vec<(usize, usize)>> = BTreeMap::new();
    for (qpos, kmer) in q.windows(k).enumerate() {
        if let Some(positions) = index.get(kmer) {
            for &spos in positions {
                let diag = spos as isize - qpos as isize;
                let runs = diagonals.entry(diag).or_default();
                match runs.last_mut() {
                    Some((_, end)) if qpos <= *end => *end = (qpos + k).max(*end),
                    _ => runs.push((qpos, qpos + k)),
                }
            }
        }
    }
    let mut hits = Vec::new();
    for (diag, runs) in diagonals {
        for (start, end) in runs {
            hits.push(SeedHit {
                query_pos: start,
                subject_pos: (start as isize + diag) as usize,
                length: end - start,
            });
        }
    }
    Ok(hits)
}

// Traceback states. M consumes one residue of each row (diagonal move),
// X consumes a residue of `a` against a gap (up), Y a residue of `b` (left).
const ST_M: u8 = 0;
const ST_X: u8 = 1;
const ST_Y: u8 = 2;

/// Pick the best of (M, X, Y) candidates, preferring M > X > Y on ties,
/// which realizes the diagonal > up > left rule.
#[inline]
fn best3(m: i32, x: i32, y: i32) -> (i32, u8) {
    let mut best = m;
    let mut state = ST_M;
    if x > best {
        best = x;
        state = ST_X;
    }
    if y > best {
        best = y;
        state = ST_Y;
    }
    (best, state)
}

#[inline]
fn pack(m_pred: u8, x_pred: u8, y_pred: u8) -> u8 {
    m_pred | (x_pred << 2) | (y_pred << 4)
}

#[inline]
fn preds(byte: u8, state: u8) -> u8 {
    (byte >> (2 * state)) & 0b11
}

/// Optimal global alignment under affine gap scoring.
pub fn global_align(
    a: &Sequence,
    b: &Sequence,
    scheme: &ScoringScheme,
) -> Result<Alignment, AlignError> {
    global_align_with_limit(a, b, scheme, FULL_DP_LIMIT)
}

/// As [`global_align`], with the banding threshold exposed so the banded
/// path can be exercised on small inputs.
pub fn global_align_with_limit(
    a: &Sequence,
    b: &Sequence,
    scheme: &ScoringScheme,
    full_dp_limit: usize,
) -> Result<Alignment, AlignError> {
    if a.alphabet != b.alphabet {
        return Err(AlignError::AlphabetMismatch(a.id.clone(), b.id.clone()));
    }
    if a.is_empty() {
        return Err(AlignError::EmptySequence(a.id.clone()));
    }
    if b.is_empty() {
        return Err(AlignError::EmptySequence(b.id.clone()));
    }
    let x = a.bytes();
    let y = b.bytes();
    let banded = x.len().max(y.len()) > full_dp_limit;
    let (row_a, row_b, score) = if banded {
        let diff = x.len().abs_diff(y.len());
        let half_band = diff / 2 + 32;
        align_banded(x, y, scheme, half_band as isize)
    } else {
        align_full(x, y, scheme)
    };
    Ok(Alignment {
        row_a,
        row_b,
        score,
        scheme: *scheme,
        banded,
    })
}

fn gap_cost(scheme: &ScoringScheme, len: usize) -> i32 {
    scheme.gap_open + (len as i32 - 1) * scheme.gap_extend
}

fn align_full(x: &[u8], y: &[u8], scheme: &ScoringScheme) -> (String, String, i32) {
    let n = x.len();
    let m = y.len();
    let cols = m + 1;
    let mut tb = vec![0u8; (n + 1) * cols];

    let mut prev_m = vec![NEG_INF; cols];
    let mut prev_x = vec![NEG_INF; cols];
    let mut prev_y = vec![NEG_INF; cols];
    let mut cur_m = vec![NEG_INF; cols];
    let mut cur_x = vec![NEG_INF; cols];
    let mut cur_y = vec![NEG_INF; cols];

    prev_m[0] = 0;
    for j in 1..=m {
        prev_y[j] = gap_cost(scheme, j);
        tb[j] = pack(ST_M, ST_M, if j == 1 { ST_M } else { ST_Y });
    }

    for i in 1..=n {
        cur_m[0] = NEG_INF;
        cur_y[0] = NEG_INF;
        cur_x[0] = gap_cost(scheme, i);
        tb[i * cols] = pack(ST_M, if i == 1 { ST_M } else { ST_X }, ST_M);
        for j in 1..=m {
            let sub = scheme.substitution(x[i - 1], y[j - 1]);
            let (m_best, m_pred) = best3(prev_m[j - 1], prev_x[j - 1], prev_y[j - 1]);
            let (x_best, x_pred) = best3(
                prev_m[j] + scheme.gap_open,
                prev_x[j] + scheme.gap_extend,
                prev_y[j] + scheme.gap_open,
            );
            let (y_best, y_pred) = best3(
                cur_m[j - 1] + scheme.gap_open,
                cur_x[j - 1] + scheme.gap_open,
                cur_y[j - 1] + scheme.gap_extend,
            );
            cur_m[j] = m_best + sub;
            cur_x[j] = x_best;
            cur_y[j] = y_best;
            tb[i * cols + j] = pack(m_pred, x_pred, y_pred);
        }
        std::mem::swap(&mut prev_m, &mut cur_m);
        std::mem::swap(&mut prev_x, &mut cur_x);
        std::mem::swap(&mut prev_y, &mut cur_y);
    }

    let (score, state) = best3(prev_m[m], prev_x[m], prev_y[m]);
    let (row_a, row_b) = traceback(x, y, state, |i, j| tb[i * cols + j]);
    (row_a, row_b, score)
}

/// Banded variant: only diagonals `j - i` within `[lo, hi]` are filled, where
/// the corridor spans the main diagonal to the length-difference diagonal
/// plus `half_band` slack on each side.
fn align_banded(
    x: &[u8],
    y: &[u8],
    scheme: &ScoringScheme,
    half_band: isize,
) -> (String, String, i32) {
    let n = x.len();
    let m = y.len();
    let shift = m as isize - n as isize;
    let lo = shift.min(0) - half_band;
    let hi = shift.max(0) + half_band;
    let width = (hi - lo + 1) as usize;

    let mut tb = vec![0u8; (n + 1) * width];
    // Value rows are indexed by diagonal offset d = j - i - lo.
    let mut prev_m = vec![NEG_INF; width];
    let mut prev_x = vec![NEG_INF; width];
    let mut prev_y = vec![NEG_INF; width];
    let mut cur_m = vec![NEG_INF; width];
    let mut cur_x = vec![NEG_INF; width];
    let mut cur_y = vec![NEG_INF; width];

    let d0 = (-lo) as usize; // offset of j == i
    prev_m[d0] = 0;
    for j in 1..=m {
        let d = j as isize - lo;
        if d < 0 || d >= width as isize {
            break;
        }
        prev_y[d as usize] = gap_cost(scheme, j);
        tb[d as usize] = pack(ST_M, ST_M, if j == 1 { ST_M } else { ST_Y });
    }

    for i in 1..=n {
        cur_m.fill(NEG_INF);
        cur_x.fill(NEG_INF);
        cur_y.fill(NEG_INF);
        let j_min = ((i as isize + lo).max(0)) as usize;
        let j_max = ((i as isize + hi).min(m as isize)) as usize;
        for j in j_min..=j_max {
            let d = (j as isize - i as isize - lo) as usize;
            if j == 0 {
                cur_x[d] = gap_cost(scheme, i);
                tb[i * width + d] = pack(ST_M, if i == 1 { ST_M } else { ST_X }, ST_M);
                continue;
            }
            let sub = scheme.substitution(x[i - 1], y[j - 1]);
            // Moving from row i-1 keeps d for diagonal moves and shifts it
            // by +1 for up moves; left moves shift it by -1 within the row.
            let (m_best, m_pred) = best3(prev_m[d], prev_x[d], prev_y[d]);
            let (x_best, x_pred) = if d + 1 < width {
                best3(
                    prev_m[d + 1] + scheme.gap_open,
                    prev_x[d + 1] + scheme.gap_extend,
                    prev_y[d + 1] + scheme.gap_open,
                )
            } else {
                (NEG_INF, ST_M)
            };
            let (y_best, y_pred) = if d >= 1 {
                best3(
                    cur_m[d - 1] + scheme.gap_open,
                    cur_x[d - 1] + scheme.gap_open,
                    cur_y[d - 1] + scheme.gap_extend,
                )
            } else {
                (NEG_INF, ST_M)
            };
            cur_m[d] = m_best + sub;
            cur_x[d] = x_best;
            cur_y[d] = y_best;
            tb[i * width + d] = pack(m_pred, x_pred, y_pred);
        }
        std::mem::swap(&mut prev_m, &mut cur_m);
        std::mem::swap(&mut prev_x, &mut cur_x);
        std::mem::swap(&mut prev_y, &mut cur_y);
    }

    let df = (m as isize - n as isize - lo) as usize;
    let (score, state) = best3(prev_m[df], prev_x[df], prev_y[df]);
    let (row_a, row_b) = traceback(x, y, state, |i, j| {
        tb[i * width + (j as isize - i as isize - lo) as usize]
    });
    (row_a, row_b, score)
}

fn traceback(
    x: &[u8],
    y: &[u8],
    final_state: u8,
    tb: impl Fn(usize, usize) -> u8,
) -> (String, String) {
    let mut i = x.len();
    let mut j = y.len();
    let mut state = final_state;
    let mut row_a = Vec::with_capacity(i + j);
    let mut row_b = Vec::with_capacity(i + j);
    while i > 0 || j > 0 {
        let byte = tb(i, j);
        match state {
            ST_M => {
                row_a.push(x[i - 1]);
                row_b.push(y[j - 1]);
                state = preds(byte, ST_M);
                i -= 1;
                j -= 1;
            }
            ST_X => {
                row_a.push(x[i - 1]);
                row_b.push(GAP);
                state = preds(byte, ST_X);
                i -= 1;
            }
            _ => {
                row_a.push(GAP);
                row_b.push(y[j - 1]);
                state = preds(byte, ST_Y);
                j -= 1;
            }
        }
    }
    row_a.reverse();
    row_b.reverse();
    (
        String::from_utf8(row_a).expect("rows are ASCII"),
        String::from_utf8(row_b).expect("rows are ASCII"),
    )
}
