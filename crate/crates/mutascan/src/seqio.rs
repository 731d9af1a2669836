//! FASTA ingestion: parsing, writing, and fetching sequences over HTTP.
//!
//! Records are case-normalized on parse and the alphabet is inferred per
//! record: anything outside `{A,C,G,T,N,U}` forces the protein alphabet.
//! RNA `U` is tolerated in nucleotide records and rewritten to `T`, with
//! [`Sequence::u_normalized`] set so callers can surface a warning.

use std::io::Read;
use std::net::ToSocketAddrs;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Residue alphabet of a [`Sequence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alphabet {
    Dna,
    Protein,
}

/// The 20 standard amino acids plus stop (`*`) and unknown (`X`).
pub const PROTEIN_RESIDUES: &[u8] = b"ACDEFGHIKLMNPQRSTVWXY*";

#[inline]
pub fn is_dna_residue(c: u8) -> bool {
    matches!(c, b'A' | b'C' | b'G' | b'T' | b'N')
}

#[inline]
pub fn is_protein_residue(c: u8) -> bool {
    PROTEIN_RESIDUES.contains(&c)
}

/// An identified residue string, the unit flowing through the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    pub id: String,
    pub description: String,
    pub residues: String,
    pub alphabet: Alphabet,
    /// Set by the parser when RNA `U` residues were rewritten to `T`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub u_normalized: bool,
}

impl Sequence {
    /// Build a validated sequence. Residues are uppercased; the id must be a
    /// non-empty whitespace-free token and every residue must belong to the
    /// stated alphabet.
    pub fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        residues: impl Into<String>,
        alphabet: Alphabet,
    ) -> Result<Self, FastaError> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(FastaError::InvalidSequence(format!(
                "id {id:?} must be a non-empty token without whitespace"
            )));
        }
        let residues: String = residues.into().to_ascii_uppercase();
        if residues.is_empty() {
            return Err(FastaError::InvalidSequence(format!(
                "sequence {id:?} has no residues"
            )));
        }
        let valid = |c: u8| match alphabet {
            Alphabet::Dna => is_dna_residue(c),
            Alphabet::Protein => is_protein_residue(c),
        };
        if let Some(bad) = residues.bytes().find(|&c| !valid(c)) {
            return Err(FastaError::InvalidSequence(format!(
                "residue '{}' not allowed in {alphabet:?} sequence {id:?}",
                bad as char
            )));
        }
        Ok(Sequence {
            id,
            description: description.into().trim().to_string(),
            residues,
            alphabet,
            u_normalized: false,
        })
    }

    pub fn dna(id: &str, residues: &str) -> Result<Self, FastaError> {
        Sequence::new(id, "", residues, Alphabet::Dna)
    }

    pub fn protein(id: &str, residues: &str) -> Result<Self, FastaError> {
        Sequence::new(id, "", residues, Alphabet::Protein)
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn bytes(&self) -> &[u8] {
        self.residues.as_bytes()
    }
}

#[derive(Debug, Error)]
pub enum FastaError {
    #[error("input contains no FASTA records")]
    EmptyInput,
    #[error("line {line}: sequence data before first '>' header")]
    MalformedHeader { line: usize },
    #[error("line {line}: residue '{residue}' is neither DNA nor protein")]
    IllegalResidue { line: usize, residue: char },
    #[error("record {id:?} has a header but no residues")]
    EmptyRecord { id: String },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
}

struct RawRecord {
    id: String,
    description: String,
    /// Residue characters paired with their 1-based source line.
    residues: Vec<(usize, char)>,
}

/// Parse FASTA text into validated sequences, preserving record order.
///
/// The id is the first whitespace-delimited token after `>`, the description
/// is the remainder of the header, and residue lines are concatenated with
/// internal whitespace removed.
pub fn parse_fasta(text: &str) -> Result<Vec<Sequence>, FastaError> {
    let mut records: Vec<RawRecord> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if let Some(header) = trimmed.strip_prefix('>') {
            let id = header
                .split_whitespace()
                .next()
                .ok_or(FastaError::MalformedHeader { line: line_no })?;
            let description = header[header.find(id).unwrap() + id.len()..].trim();
            records.push(RawRecord {
                id: id.to_string(),
                description: description.to_string(),
                residues: Vec::new(),
            });
        } else if !trimmed.is_empty() {
            let record = records
                .last_mut()
                .ok_or(FastaError::MalformedHeader { line: line_no })?;
            for ch in line.chars().filter(|c| !c.is_whitespace()) {
                record.residues.push((line_no, ch.to_ascii_uppercase()));
            }
        }
    }
    if records.is_empty() {
        return Err(FastaError::EmptyInput);
    }
    records.into_iter().map(finalize_record).collect()
}

fn finalize_record(raw: RawRecord) -> Result<Sequence, FastaError> {
    if raw.residues.is_empty() {
        return Err(FastaError::EmptyRecord { id: raw.id });
    }
    // Protein iff any residue falls outside the nucleotide set (with U counted
    // as a nucleotide); membership is a set property, so inference does not
    // depend on residue order.
    let is_protein = raw
        .residues
        .iter()
        .any(|&(_, c)| !matches!(c, 'A' | 'C' | 'G' | 'T' | 'N' | 'U'));
    let mut residues = String::with_capacity(raw.residues.len());
    let mut u_normalized = false;
    for &(line, c) in &raw.residues {
        if is_protein {
            if !is_protein_residue(c as u8) {
                return Err(FastaError::IllegalResidue { line, residue: c });
            }
            residues.push(c);
        } else if c == 'U' {
            u_normalized = true;
            residues.push('T');
        } else {
            residues.push(c);
        }
    }
    Ok(Sequence {
        id: raw.id,
        description: raw.description,
        residues,
        alphabet: if is_protein {
            Alphabet::Protein
        } else {
            Alphabet::Dna
        },
        u_normalized,
    })
}

/// Render sequences as FASTA with residues wrapped at `line_width`.
///
/// Canonical inverse of [`parse_fasta`]: re-parsing the output reproduces the
/// ids, descriptions, and residues exactly.
pub fn write_fasta(seqs: &[Sequence], line_width: usize) -> String {
    assert!(line_width >= 1, "line_width must be at least 1");
    let mut out = String::new();
    for s in seqs {
        out.push('>');
        out.push_str(&s.id);
        if !s.description.is_empty() {
            out.push(' ');
            out.push_str(&s.description);
        }
        out.push('\n');
        for chunk in s.residues.as_bytes().chunks(line_width) {
            out.push_str(std::str::from_utf8(chunk).expect("residues are ASCII"));
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("endpoint template has no {{accession}} placeholder")]
    BadEndpoint,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("remote returned status {status}")]
    Remote { status: u16 },
    #[error("response body is not FASTA: {0}")]
    Parse(#[from] FastaError),
}

/// Placeholder substituted into the endpoint template.
pub const ACCESSION_PLACEHOLDER: &str = "{accession}";

/// Fetch one record by accession from an HTTP endpoint template such as
/// `http://host/db/{accession}`. Blocking, with a caller-supplied timeout.
pub fn fetch_reference(
    accession: &str,
    endpoint: &str,
    timeout: Duration,
) -> Result<Sequence, FetchError> {
    if !endpoint.contains(ACCESSION_PLACEHOLDER) {
        return Err(FetchError::BadEndpoint);
    }
    let url = endpoint.replace(ACCESSION_PLACEHOLDER, accession);
    let body = http_get(&url, timeout)?;
    let mut records = parse_fasta(&body)?;
    Ok(records.remove(0))
}

/// Minimal blocking GET returning the body of a 2xx response.
fn http_get(url: &str, timeout: Duration) -> Result<String, FetchError> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let mut response = agent
        .get(url)
        .call()
        .map_err(|e| FetchError::Transport(e.to_string()))?;
    let status = response.status().as_u16();
    if !(200..300).contains(&status) {
        return Err(FetchError::Remote { status });
    }
    response
        .body_mut()
        .read_to_string()
        .map_err(|e| FetchError::Transport(e.to_string()))
}

/// Spawn a one-shot HTTP fixture server returning `status` with `body`.
/// Used by tests and kept here so integration tests can share it.
#[doc(hidden)]
pub fn spawn_http_fixture(status: u16, body: &'static str) -> String {
    use std::io::Write;
    let listener = std::net::TcpListener::bind(("127.0.0.1", 0)).expect("bind fixture");
    let addr = listener.local_addr().expect("fixture addr");
    std::thread::spawn(move || {
        if let Ok((mut stream, _)) = listener.accept() {
            let mut buf = [0u8; 4096];
            let _ = stream.read(&mut buf);
            let reason = match status {
                200 => "OK",
                404 => "Not Found",
                _ => "Status",
            };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(response.as_bytes());
        }
    });
    let _ = addr.to_socket_addrs();
    format!("http://{addr}/ref/{ACCESSION_PLACEHOLDER}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_multiline_record() {
        let seqs = parse_fasta(">s1 ref\nACGT\nACGT").unwrap();
        assert_eq!(seqs.len(), 1);
        assert_eq!(seqs[0].id, "s1");
        assert_eq!(seqs[0].description, "ref");
        assert_eq!(seqs[0].residues, "ACGTACGT");
        assert_eq!(seqs[0].alphabet, Alphabet::Dna);
    }

    #[test]
    fn stop_residue_forces_protein() {
        let seqs = parse_fasta(">p\nMK*\n").unwrap();
        assert_eq!(seqs[0].residues, "MK*");
        assert_eq!(seqs[0].alphabet, Alphabet::Protein);
    }

    #[test]
    fn data_before_header_is_malformed() {
        assert!(matches!(
            parse_fasta("ACGT"),
            Err(FastaError::MalformedHeader { line: 1 })
        ));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(parse_fasta(""), Err(FastaError::EmptyInput)));
        assert!(matches!(parse_fasta("\n \n"), Err(FastaError::EmptyInput)));
    }

    #[test]
    fn header_without_id_is_malformed() {
        assert!(matches!(
            parse_fasta(">\nACGT"),
            Err(FastaError::MalformedHeader { line: 1 })
        ));
    }

    #[test]
    fn record_without_residues_rejected() {
        assert!(matches!(
            parse_fasta(">only-header\n"),
            Err(FastaError::EmptyRecord { .. })
        ));
    }

    #[test]
    fn illegal_residue_reports_line() {
        let err = parse_fasta(">s\nACGT\nAC1T").unwrap_err();
        match err {
            FastaError::IllegalResidue { line, residue } => {
                assert_eq!(line, 3);
                assert_eq!(residue, '1');
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn u_normalized_to_t_and_flagged() {
        let seqs = parse_fasta(">rna\nACGU").unwrap();
        assert_eq!(seqs[0].residues, "ACGT");
        assert_eq!(seqs[0].alphabet, Alphabet::Dna);
        assert!(seqs[0].u_normalized);
    }

    #[test]
    fn u_in_protein_record_is_illegal() {
        let err = parse_fasta(">p\nMU").unwrap_err();
        assert!(matches!(err, FastaError::IllegalResidue { residue: 'U', .. }));
    }

    #[test]
    fn lowercase_is_normalized() {
        let seqs = parse_fasta(">s\nacgt").unwrap();
        assert_eq!(seqs[0].residues, "ACGT");
    }

    #[test]
    fn write_wraps_at_width() {
        let s = Sequence::dna("s1", "ACGTA").unwrap();
        assert_eq!(write_fasta(&[s], 4), ">s1\nACGT\nA\n");
    }

    #[test]
    fn write_empty_list_is_empty() {
        assert_eq!(write_fasta(&[], 60), "");
    }

    #[test]
    fn no_residues_dropped() {
        let text = ">a x\nAC GT\nNN\n>b\nTTTT\n";
        let seqs = parse_fasta(text).unwrap();
        let parsed: usize = seqs.iter().map(Sequence::len).sum();
        let raw = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('>'))
            .flat_map(|l| l.chars())
            .filter(|c| !c.is_whitespace())
            .count();
        assert_eq!(parsed, raw);
    }

    fn sequence_strategy() -> impl Strategy<Value = Sequence> {
        let dna = "[ACGTN]{1,80}".prop_map(|r| (r, Alphabet::Dna));
        let protein = "[ACDEFGHIKLMNPQRSTVWY]{0,40}[MKW*]{1,3}[ACDEFGHIKLMNPQRSTVWYX*]{0,40}"
            .prop_map(|r| (r, Alphabet::Protein));
        // Alphabet must be re-derivable by inference for a lossless round
        // trip, so protein strings carry at least one distinctive residue.
        (prop_oneof![dna, protein], "[a-z][a-z0-9_.-]{0,12}", "( ?[a-z]{1,8}){0,3}").prop_filter_map(
            "alphabet must match inference",
            |((residues, alphabet), id, description)| {
                if alphabet == Alphabet::Protein
                    && residues
                        .bytes()
                        .all(|c| matches!(c, b'A' | b'C' | b'G' | b'T' | b'N'))
                {
                    return None;
                }
                Some(Sequence {
                    id,
                    description: description.trim().to_string(),
                    residues,
                    alphabet,
                    u_normalized: false,
                })
            },
        )
    }

    proptest! {
        #[test]
        fn round_trip_preserves_records(
            seqs in proptest::collection::vec(sequence_strategy(), 1..6),
            width in 1usize..90,
        ) {
            let text = write_fasta(&seqs, width);
            let reparsed = parse_fasta(&text).unwrap();
            prop_assert_eq!(reparsed, seqs);
        }

        #[test]
        fn inference_is_order_independent(residues in "[ACGTNMKW*]{1,60}") {
            let forward = parse_fasta(&format!(">f\n{residues}")).unwrap();
            let reversed: String = residues.chars().rev().collect();
            let backward = parse_fasta(&format!(">b\n{reversed}")).unwrap();
            prop_assert_eq!(forward[0].alphabet, backward[0].alphabet);
        }
    }

    #[test]
    fn fetch_returns_first_record() {
        let endpoint = spawn_http_fixture(200, ">X1 fixture\nACGT\n");
        let seq = fetch_reference("X1", &endpoint, Duration::from_secs(5)).unwrap();
        assert_eq!(seq.id, "X1");
        assert_eq!(seq.residues, "ACGT");
    }

    #[test]
    fn fetch_maps_non_success_status() {
        let endpoint = spawn_http_fixture(404, "missing");
        let err = fetch_reference("X1", &endpoint, Duration::from_secs(5)).unwrap_err();
        assert!(matches!(err, FetchError::Remote { status: 404 }));
    }

    #[test]
    fn fetch_rejects_non_fasta_body() {
        let endpoint = spawn_http_fixture(200, "not fasta");
        let err = fetch_reference("X1", &endpoint, Duration::from_secs(5)).unwrap_err();
        assert!(matches!(err, FetchError::Parse(_)));
    }

    #[test]
    fn fetch_requires_placeholder() {
        let err = fetch_reference("X1", "http://localhost:9/fixed", Duration::from_secs(1));
        assert!(matches!(err, Err(FetchError::BadEndpoint)));
    }

    #[test]
    fn fetch_times_out() {
        use std::io::Read as _;
        let listener = std::net::TcpListener::bind(("127.0.0.1", 0)).unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            if let Ok((mut stream, _)) = listener.accept() {
                let mut buf = [0u8; 1024];
                let _ = stream.read(&mut buf);
                std::thread::sleep(Duration::from_secs(10));
            }
        });
        let endpoint = format!("http://{addr}/{ACCESSION_PLACEHOLDER}");
        let err = fetch_reference("X1", &endpoint, Duration::from_millis(200)).unwrap_err();
        assert!(matches!(err, FetchError::Transport(_)));
    }
}
