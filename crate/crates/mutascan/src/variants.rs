//! Variant calling from alignments and the malignancy-candidate rule: a DNA
//! difference is a candidate only if it also changes the protein.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::align::{global_align, Alignment, ScoringScheme, GAP};
use crate::seqio::Sequence;
use crate::translate::{best_orf_frame, translate, StopPolicy, TranslateError};

#[derive(Debug, Error)]
pub enum VariantError {
    #[error(transparent)]
    Align(#[from] crate::align::AlignError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("variant {variant} does not fit reference at position {pos}")]
    InconsistentVariant { variant: String, pos: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariantLevel {
    Dna,
    Protein,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariantKind {
    Substitution,
    Insertion,
    Deletion,
}

/// One reference-vs-patient difference. `ref_pos` is 0-based in the ungapped
/// reference; an insertion of `alt_allele` occurs immediately before the
/// reference residue at `ref_pos` (so `ref_pos` may equal the reference
/// length for an insertion at the very end).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub level: VariantLevel,
    pub kind: VariantKind,
    pub ref_pos: usize,
    pub ref_allele: String,
    pub alt_allele: String,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VariantKind::Substitution => {
                write!(f, "{}:{}>{}", self.ref_pos, self.ref_allele, self.alt_allele)
            }
            VariantKind::Insertion => write!(f, "{}:ins:{}", self.ref_pos, self.alt_allele),
            VariantKind::Deletion => write!(f, "{}:del:{}", self.ref_pos, self.ref_allele),
        }
    }
}

impl Variant {
    pub fn substitution(level: VariantLevel, ref_pos: usize, r: &str, a: &str) -> Self {
        Variant {
            level,
            kind: VariantKind::Substitution,
            ref_pos,
            ref_allele: r.to_string(),
            alt_allele: a.to_string(),
        }
    }

    pub fn insertion(level: VariantLevel, ref_pos: usize, alt: &str) -> Self {
        Variant {
            level,
            kind: VariantKind::Insertion,
            ref_pos,
            ref_allele: String::new(),
            alt_allele: alt.to_string(),
        }
    }

    pub fn deletion(level: VariantLevel, ref_pos: usize, r: &str) -> Self {
        Variant {
            level,
            kind: VariantKind::Deletion,
            ref_pos,
            ref_allele: r.to_string(),
            alt_allele: String::new(),
        }
    }
}

/// Extract variants from an alignment, merging adjacent mismatch columns of
/// the same kind into one record. Output is sorted by reference position.
pub fn call_variants(al: &Alignment, reference_is_row_a: bool, level: VariantLevel) -> Vec<Variant> {
    enum Run {
        None,
        Sub { pos: usize, r: String, a: String },
        Ins { pos: usize, a: String },
        Del { pos: usize, r: String },
    }

    let mut variants = Vec::new();
    let mut run = Run::None;
    let mut ref_pos = 0usize;

    let close = |run: &mut Run, variants: &mut Vec<Variant>| {
        match std::mem::replace(run, Run::None) {
            Run::None => {}
            Run::Sub { pos, r, a } => variants.push(Variant::substitution(level, pos, &r, &a)),
            Run::Ins { pos, a } => variants.push(Variant::insertion(level, pos, &a)),
            Run::Del { pos, r } => variants.push(Variant::deletion(level, pos, &r)),
        }
    };

    for (ca, cb) in al.columns() {
        let (r, p) = if reference_is_row_a { (ca, cb) } else { (cb, ca) };
        if r != GAP && p != GAP {
            if r == p {
                close(&mut run, &mut variants);
            } else {
                match &mut run {
                    Run::Sub { r: rr, a: aa, .. } => {
                        rr.push(r as char);
                        aa.push(p as char);
                    }
                    _ => {
                        close(&mut run, &mut variants);
                        run = Run::Sub {
                            pos: ref_pos,
                            r: (r as char).to_string(),
                            a: (p as char).to_string(),
                        };
                    }
                }
            }
            ref_pos += 1;
        } else if p == GAP {
            match &mut run {
                Run::Del { r: rr, .. } => rr.push(r as char),
                _ => {
                    close(&mut run, &mut variants);
                    run = Run::Del {
                        pos: ref_pos,
                        r: (r as char).to_string(),
                    };
                }
            }
            ref_pos += 1;
        } else {
            match &mut run {
                Run::Ins { a: aa, .. } => aa.push(p as char),
                _ => {
                    close(&mut run, &mut variants);
                    run = Run::Ins {
                        pos: ref_pos,
                        a: (p as char).to_string(),
                    };
                }
            }
        }
    }
    close(&mut run, &mut variants);
    variants
}

/// Apply variants (coordinates in the original reference) to reconstruct the
/// altered sequence. Inverse of [`call_variants`] for any valid alignment.
pub fn apply_variants(reference: &str, variants: &[Variant]) -> Result<String, VariantError> {
    let mut ordered: Vec<&Variant> = variants.iter().collect();
    // Apply right to left so earlier coordinates stay valid. At equal
    // positions the substitution/deletion must consume the reference residue
    // before the insertion lands in front of it, so insertions sort first
    // here and are applied last by the reversed loop.
    ordered.sort_by_key(|v| (v.ref_pos, !matches!(v.kind, VariantKind::Insertion)));
    let mut result = reference.to_string();
    for v in ordered.iter().rev() {
        let end = v.ref_pos + v.ref_allele.len();
        if end > result.len() || !result[v.ref_pos..end].eq(&v.ref_allele) {
            return Err(VariantError::InconsistentVariant {
                variant: v.to_string(),
                pos: v.ref_pos,
            });
        }
        result.replace_range(v.ref_pos..end, &v.alt_allele);
    }
    Ok(result)
}

/// Why a candidate verdict came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rationale {
    NoDnaDifference,
    SilentDnaOnly,
    ProteinChanged,
}

/// DNA and protein variant lists plus the candidate rule outcome:
/// `malignant_candidate` is true exactly when the protein changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateVerdict {
    pub dna_variants: Vec<Variant>,
    pub protein_variants: Vec<Variant>,
    pub malignant_candidate: bool,
    pub rationale: Rationale,
}

/// Which reading frame to translate in when comparing proteins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FramePolicy {
    Fixed(u8),
    /// Use the reference's best open reading frame for both sequences, so a
    /// patient indel cannot push the two translations into different frames.
    Auto,
}

/// A candidate verdict together with the alignments that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateAssessment {
    pub verdict: CandidateVerdict,
    pub dna_alignment: Alignment,
    pub protein_alignment: Option<Alignment>,
    /// Frame used for translation; absent when the DNA was identical.
    pub frame: Option<u8>,
}

/// Align reference and patient DNA, and if they differ, translate both in the
/// same frame and compare the proteins. Translation reads through stop codons
/// so downstream effects of frameshifts stay visible.
pub fn assess_candidate(
    ref_dna: &Sequence,
    patient_dna: &Sequence,
    frame: FramePolicy,
    scheme_dna: &ScoringScheme,
    scheme_protein: &ScoringScheme,
) -> Result<CandidateAssessment, VariantError> {
    let dna_alignment = global_align(ref_dna, patient_dna, scheme_dna)?;
    let dna_variants = call_variants(&dna_alignment, true, VariantLevel::Dna);
    if dna_variants.is_empty() {
        return Ok(CandidateAssessment {
            verdict: CandidateVerdict {
                dna_variants,
                protein_variants: Vec::new(),
                malignant_candidate: false,
                rationale: Rationale::NoDnaDifference,
            },
            dna_alignment,
            protein_alignment: None,
            frame: None,
        });
    }
    let frame = match frame {
        FramePolicy::Fixed(f) => f,
        FramePolicy::Auto => best_orf_frame(ref_dna)?.0,
    };
    let ref_protein = translate(ref_dna, frame, StopPolicy::TranslateThrough)?;
    let patient_protein = translate(patient_dna, frame, StopPolicy::TranslateThrough)?;
    let protein_alignment = global_align(&ref_protein, &patient_protein, scheme_protein)?;
    let protein_variants = call_variants(&protein_alignment, true, VariantLevel::Protein);
    let malignant_candidate = !protein_variants.is_empty();
    Ok(CandidateAssessment {
        verdict: CandidateVerdict {
            dna_variants,
            protein_variants,
            malignant_candidate,
            rationale: if malignant_candidate {
                Rationale::ProteinChanged
            } else {
                Rationale::SilentDnaOnly
            },
        },
        dna_alignment,
        protein_alignment: Some(protein_alignment),
        frame: Some(frame),
    })
}
