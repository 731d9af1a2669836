//! Catalog of known pathogenic mutations, feature encoding for the
//! classifier, and labeled training-set construction.
//!
//! Feature layout per variant: gene one-hot, kind one-hot (substitution /
//! insertion / deletion), position normalized by gene length, reference- and
//! alternate-base one-hots (first base of each allele), and one-hot encodings
//! of two flanking bases on each side. Flanks that fall off the sequence
//! encode as all zeros.

use std::collections::{BTreeMap, HashSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seqio::Sequence;
use crate::translate::STANDARD_TABLE;
use crate::variants::{Variant, VariantKind, VariantLevel};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("line {line}: duplicate catalog entry")]
    DuplicateEntry { line: usize },
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: gene {gene:?} is not in the configured gene set")]
    UnknownGene { line: usize, gene: String },
    #[error("gene {gene:?} is not in the configured gene set")]
    GeneNotConfigured { gene: String },
    #[error("variant position {pos} is outside gene length {gene_length}")]
    PositionOutOfRange { pos: usize, gene_length: usize },
    #[error("no reference sequence for catalog gene {gene:?}")]
    MissingReference { gene: String },
    #[error("cannot generate {needed} distinct benign variants for gene {gene:?}")]
    InsufficientSpace { gene: String, needed: usize },
}

/// Ordered gene names; the order fixes one-hot positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneSet {
    genes: Vec<String>,
}

impl GeneSet {
    pub fn new(genes: Vec<String>) -> Self {
        assert!(!genes.is_empty(), "gene set must not be empty");
        GeneSet { genes }
    }

    pub fn index_of(&self, gene: &str) -> Option<usize> {
        self.genes.iter().position(|g| g == gene)
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.genes
    }
}

impl Default for GeneSet {
    fn default() -> Self {
        GeneSet::new(vec!["BRCA1".into(), "BRCA2".into()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Pathogenic,
}

/// One known pathogenic mutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub gene: String,
    pub variant: Variant,
    pub label: Label,
    pub source: String,
}

/// Parse a catalog from tab-separated text: `gene  pos  ref  alt  source`,
/// with `-` marking an empty allele and `#` starting comment lines.
pub fn load_catalog(text: &str, genes: &GeneSet) -> Result<Vec<CatalogEntry>, CatalogError> {
    let malformed = |line: usize, message: &str| CatalogError::MalformedLine {
        line,
        message: message.to_string(),
    };
    let mut entries = Vec::new();
    let mut seen: HashSet<(String, usize, String, String)> = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(malformed(line, "expected 5 tab-separated fields"));
        }
        let gene = fields[0].to_string();
        if genes.index_of(&gene).is_none() {
            return Err(CatalogError::UnknownGene { line, gene });
        }
        let pos: usize = fields[1]
            .parse()
            .map_err(|_| malformed(line, "position is not a non-negative integer"))?;
        let parse_allele = |field: &str| -> Result<String, CatalogError> {
            if field == "-" {
                return Ok(String::new());
            }
            if field.is_empty() || !field.bytes().all(|b| matches!(b, b'A' | b'C' | b'G' | b'T' | b'N')) {
                return Err(malformed(line, "allele must be DNA bases or '-'"));
            }
            Ok(field.to_string())
        };
        let ref_allele = parse_allele(fields[2])?;
        let alt_allele = parse_allele(fields[3])?;
        let kind = match (ref_allele.is_empty(), alt_allele.is_empty()) {
            (false, false) if ref_allele.len() == alt_allele.len() => {
                if ref_allele == alt_allele {
                    return Err(malformed(line, "ref and alt alleles are identical"));
                }
                VariantKind::Substitution
            }
            (false, false) => return Err(malformed(line, "substitution alleles differ in length")),
            (true, false) => VariantKind::Insertion,
            (false, true) => VariantKind::Deletion,
            (true, true) => return Err(malformed(line, "both alleles are empty")),
        };
        if !seen.insert((gene.clone(), pos, ref_allele.clone(), alt_allele.clone())) {
            return Err(CatalogError::DuplicateEntry { line });
        }
        entries.push(CatalogEntry {
            gene,
            variant: Variant {
                level: VariantLevel::Dna,
                kind,
                ref_pos: pos,
                ref_allele,
                alt_allele,
            },
            label: Label::Pathogenic,
            source: fields[4].to_string(),
        });
    }
    Ok(entries)
}

/// Render entries back to the tab-separated catalog format.
pub fn write_catalog(entries: &[CatalogEntry]) -> String {
    let mut out = String::from("# gene\tpos\tref\talt\tsource\n");
    for e in entries {
        let dash = |s: &str| if s.is_empty() { "-".to_string() } else { s.to_string() };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            e.gene,
            e.variant.ref_pos,
            dash(&e.variant.ref_allele),
            dash(&e.variant.alt_allele),
            e.source
        ));
    }
    out
}

/// Fixed-length numeric features in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

/// Named segment offsets within a [`FeatureVector`].
#[derive(Debug, Clone, Copy)]
pub struct FeatureLayout {
    pub gene_count: usize,
}

impl FeatureLayout {
    pub fn len(&self) -> usize {
        self.gene_count + 3 + 1 + 4 + 4 + 8 + 8
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// (name, start, length) of every one-hot segment, for invariant checks.
    pub fn one_hot_segments(&self) -> Vec<(&'static str, usize, usize)> {
        let g = self.gene_count;
        vec![
            ("gene", 0, g),
            ("kind", g, 3),
            ("ref_base", g + 4, 4),
            ("alt_base", g + 8, 4),
            ("five_prime_2", g + 12, 4),
            ("five_prime_1", g + 16, 4),
            ("three_prime_1", g + 20, 4),
            ("three_prime_2", g + 24, 4),
        ]
    }

    pub fn position_index(&self) -> usize {
        self.gene_count + 3
    }
}

/// Encodes DNA-level variants against a configured gene set.
#[derive(Debug, Clone)]
pub struct Encoder {
    genes: GeneSet,
}

fn base_slot(b: u8) -> Option<usize> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None, // 'N' and anything else stays all-zero
    }
}

impl Encoder {
    pub fn new(genes: GeneSet) -> Self {
        Encoder { genes }
    }

    pub fn genes(&self) -> &GeneSet {
        &self.genes
    }

    pub fn layout(&self) -> FeatureLayout {
        FeatureLayout {
            gene_count: self.genes.len(),
        }
    }

    pub fn vector_len(&self) -> usize {
        self.layout().len()
    }

    /// Deterministically encode one DNA variant observed against `reference`.
    pub fn encode(
        &self,
        gene: &str,
        v: &Variant,
        reference: &Sequence,
        gene_length: usize,
    ) -> Result<FeatureVector, CatalogError> {
        let gene_idx = self
            .genes
            .index_of(gene)
            .ok_or_else(|| CatalogError::GeneNotConfigured { gene: gene.to_string() })?;
        if v.ref_pos >= gene_length {
            return Err(CatalogError::PositionOutOfRange {
                pos: v.ref_pos,
                gene_length,
            });
        }
        let layout = self.layout();
        let mut values = vec![0.0; layout.len()];
        values[gene_idx] = 1.0;
        let kind_slot = match v.kind {
            VariantKind::Substitution => 0,
            VariantKind::Insertion => 1,
            VariantKind::Deletion => 2,
        };
        values[layout.gene_count + kind_slot] = 1.0;
        values[layout.position_index()] = v.ref_pos as f64 / gene_length as f64;

        let g = layout.gene_count;
        let mut set_base = |offset: usize, base: Option<u8>| {
            if let Some(slot) = base.and_then(base_slot) {
                values[offset + slot] = 1.0;
            }
        };
        set_base(g + 4, v.ref_allele.bytes().next());
        set_base(g + 8, v.alt_allele.bytes().next());

        let seq = reference.bytes();
        let span_end = v.ref_pos + v.ref_allele.len();
        let upstream = |back: usize| v.ref_pos.checked_sub(back).and_then(|i| seq.get(i)).copied();
        let downstream = |ahead: usize| seq.get(span_end + ahead).copied();
        set_base(g + 12, upstream(2));
        set_base(g + 16, upstream(1));
        set_base(g + 20, downstream(0));
        set_base(g + 24, downstream(1));

        Ok(FeatureVector { values })
    }
}

/// One training example: features plus a per-gene target (all zeros = benign).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub features: FeatureVector,
    pub target: Vec<f64>,
}

/// Build the labeled training set: one positive per catalog entry plus
/// `negatives_per_positive` seeded benign substitutions per positive,
/// preferring synonymous changes and never colliding with the catalog.
/// Output order (entry, then its negatives) is deterministic given the seed.
pub fn build_training_set(
    catalog: &[CatalogEntry],
    references: &BTreeMap<String, Sequence>,
    negatives_per_positive: usize,
    seed: u64,
    encoder: &Encoder,
) -> Result<Vec<LabeledExample>, CatalogError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken: HashSet<(String, usize, u8, u8)> = HashSet::new();
    for e in catalog {
        if let (Some(&r), Some(&a)) = (
            e.variant.ref_allele.as_bytes().first(),
            e.variant.alt_allele.as_bytes().first(),
        ) {
            taken.insert((e.gene.clone(), e.variant.ref_pos, r, a));
        }
    }

    let mut examples = Vec::with_capacity(catalog.len() * (1 + negatives_per_positive));
    for entry in catalog {
        let reference = references
            .get(&entry.gene)
            .ok_or_else(|| CatalogError::MissingReference { gene: entry.gene.clone() })?;
        let gene_len = reference.len();

        let gene_idx = encoder
            .genes
            .index_of(&entry.gene)
            .ok_or_else(|| CatalogError::GeneNotConfigured { gene: entry.gene.clone() })?;
        let mut target = vec![0.0; encoder.genes.len()];
        target[gene_idx] = 1.0;
        examples.push(LabeledExample {
            features: encoder.encode(&entry.gene, &entry.variant, reference, gene_len)?,
            target,
        });

        for _ in 0..negatives_per_positive {
            let variant = sample_benign_substitution(
                &mut rng,
                &entry.gene,
                reference,
                &mut taken,
            )
            .ok_or_else(|| CatalogError::InsufficientSpace {
                gene: entry.gene.clone(),
                needed: negatives_per_positive,
            })?;
            examples.push(LabeledExample {
                features: encoder.encode(&entry.gene, &variant, reference, gene_len)?,
                target: vec![0.0; encoder.genes.len()],
            });
        }
    }
    Ok(examples)
}

const SYNONYMOUS_ATTEMPTS: usize = 200;
const TOTAL_ATTEMPTS: usize = 20_000;

/// Draw a random substitution of `reference` that collides with neither the
/// catalog nor previously drawn negatives. The first attempts insist on a
/// synonymous change in frame 0; after that any non-colliding one is taken.
fn sample_benign_substitution(
    rng: &mut ChaCha8Rng,
    gene: &str,
    reference: &Sequence,
    taken: &mut HashSet<(String, usize, u8, u8)>,
) -> Option<Variant> {
    const BASES: [u8; 4] = [b'A', b'C', b'G', b'T'];
    let seq = reference.bytes();
    for attempt in 0..TOTAL_ATTEMPTS {
        let pos = rng.random_range(0..seq.len());
        let ref_base = seq[pos];
        let alt_base = BASES[rng.random_range(0..4)];
        if alt_base == ref_base {
            continue;
        }
        if attempt < SYNONYMOUS_ATTEMPTS && !is_synonymous(seq, pos, alt_base) {
            continue;
        }
        let key = (gene.to_string(), pos, ref_base, alt_base);
        if taken.contains(&key) {
            continue;
        }
        taken.insert(key);
        return Some(Variant::substitution(
            VariantLevel::Dna,
            pos,
            &(ref_base as char).to_string(),
            &(alt_base as char).to_string(),
        ));
    }
    None
}

/// Whether substituting `alt` at `pos` preserves the frame-0 codon's amino acid.
fn is_synonymous(seq: &[u8], pos: usize, alt: u8) -> bool {
    let codon_start = pos - pos % 3;
    if codon_start + 3 > seq.len() {
        return false;
    }
    let mut codon = [seq[codon_start], seq[codon_start + 1], seq[codon_start + 2]];
    let before = STANDARD_TABLE.translate_codon(&codon);
    codon[pos - codon_start] = alt;
    let after = STANDARD_TABLE.translate_codon(&codon);
    before == after && before != b'X'
}
