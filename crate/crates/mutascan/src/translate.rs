//! DNA to protein translation under the standard genetic code, plus forward
//! reading-frame selection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seqio::{Alphabet, Sequence};

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("sequence {0:?} is not DNA")]
    NotDna(String),
    #[error("fewer than 3 residues after frame offset {frame}")]
    EmptyFrame { frame: u8 },
    #[error("no 'M' in any forward frame of {0:?}")]
    NoOrf(String),
}

/// What to do when a stop codon is reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopPolicy {
    /// End the protein just before the first stop.
    TruncateAtStop,
    /// Emit `*` for the stop and keep translating.
    TranslateThrough,
}

/// Amino acids for all 64 codons, ordered T, C, A, G on each codon position
/// (TTT, TTC, TTA, TTG, TCT, ...).
const CODON_AMINO_ACIDS: &[u8; 64] =
    b"FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG";

/// Total mapping from codons to one-letter amino acids (stop = `*`).
/// Codons containing `N` translate to `X`.
#[derive(Debug, Clone, Copy)]
pub struct CodonTable {
    amino_acids: &'static [u8; 64],
}

pub const STANDARD_TABLE: CodonTable = CodonTable {
    amino_acids: CODON_AMINO_ACIDS,
};

impl CodonTable {
    #[inline]
    fn base_index(base: u8) -> Option<usize> {
        match base {
            b'T' => Some(0),
            b'C' => Some(1),
            b'A' => Some(2),
            b'G' => Some(3),
            _ => None,
        }
    }

    /// Translate one codon; any `N` (or other ambiguity) yields `X`.
    pub fn translate_codon(&self, codon: &[u8]) -> u8 {
        assert_eq!(codon.len(), 3, "codon must have exactly 3 bases");
        match (
            Self::base_index(codon[0]),
            Self::base_index(codon[1]),
            Self::base_index(codon[2]),
        ) {
            (Some(a), Some(b), Some(c)) => self.amino_acids[16 * a + 4 * b + c],
            _ => b'X',
        }
    }

    pub fn is_stop(&self, codon: &[u8]) -> bool {
        self.translate_codon(codon) == b'*'
    }

    /// All 64 codons in table order, for enumeration.
    pub fn codons() -> impl Iterator<Item = [u8; 3]> {
        const BASES: [u8; 4] = [b'T', b'C', b'A', b'G'];
        BASES.iter().flat_map(move |&a| {
            BASES
                .iter()
                .flat_map(move |&b| BASES.iter().map(move |&c| [a, b, c]))
        })
    }
}

/// Translate `dna` starting at `frame` (0, 1, or 2); the trailing 1-2
/// residues of a partial codon are ignored.
pub fn translate(
    dna: &Sequence,
    frame: u8,
    stop_policy: StopPolicy,
) -> Result<Sequence, TranslateError> {
    assert!(frame <= 2, "frame must be 0, 1, or 2");
    if dna.alphabet != Alphabet::Dna {
        return Err(TranslateError::NotDna(dna.id.clone()));
    }
    let offset = frame as usize;
    if dna.len() < offset + 3 {
        return Err(TranslateError::EmptyFrame { frame });
    }
    let mut residues = String::with_capacity((dna.len() - offset) / 3);
    for codon in dna.bytes()[offset..].chunks_exact(3) {
        let aa = STANDARD_TABLE.translate_codon(codon);
        if aa == b'*' && stop_policy == StopPolicy::TruncateAtStop {
            break;
        }
        residues.push(aa as char);
    }
    // A leading stop under TruncateAtStop legitimately yields an empty
    // protein, so this bypasses the non-empty check in Sequence::new.
    Ok(Sequence {
        id: dna.id.clone(),
        description: dna.description.clone(),
        residues,
        alphabet: Alphabet::Protein,
        u_normalized: false,
    })
}

/// Pick the forward frame whose through-translation has the longest stop-free
/// run starting at an `M`, and return that run as the protein. Ties go to the
/// smaller frame index.
pub fn best_orf_frame(dna: &Sequence) -> Result<(u8, Sequence), TranslateError> {
    if dna.alphabet != Alphabet::Dna {
        return Err(TranslateError::NotDna(dna.id.clone()));
    }
    if dna.len() < 3 {
        return Err(TranslateError::EmptyFrame { frame: 0 });
    }
    let mut best: Option<(usize, u8, usize, Sequence)> = None;
    for frame in 0u8..3 {
        if dna.len() < frame as usize + 3 {
            continue;
        }
        let protein = translate(dna, frame, StopPolicy::TranslateThrough)?;
        let aas = protein.residues.as_bytes();
        // next_stop[i] = index of the first '*' at or after i.
        let mut next_stop = vec![aas.len(); aas.len() + 1];
        for i in (0..aas.len()).rev() {
            next_stop[i] = if aas[i] == b'*' { i } else { next_stop[i + 1] };
        }
        for (i, &aa) in aas.iter().enumerate() {
            if aa == b'M' {
                let run = next_stop[i] - i;
                if best.as_ref().is_none_or(|(len, ..)| run > *len) {
                    best = Some((run, frame, i, protein.clone()));
                }
            }
        }
    }
    match best {
        Some((run, frame, start, protein)) => {
            let orf = Sequence {
                residues: protein.residues[start..start + run].to_string(),
                ..protein
            };
            Ok((frame, orf))
        }
        None => Err(TranslateError::NoOrf(dna.id.clone())),
    }
}

/// Reverse complement of a DNA sequence (`N` maps to itself).
pub fn revcomp(dna: &Sequence) -> Result<Sequence, TranslateError> {
    if dna.alphabet != Alphabet::Dna {
        return Err(TranslateError::NotDna(dna.id.clone()));
    }
    let residues: String = dna
        .residues
        .bytes()
        .rev()
        .map(|b| match b {
            b'A' => 'T',
            b'T' => 'A',
            b'C' => 'G',
            b'G' => 'C',
            other => other as char,
        })
        .collect();
    Ok(Sequence {
        residues,
        ..dna.clone()
    })
}
