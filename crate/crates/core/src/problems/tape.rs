//! Binary round tapes for the matrix-completion family.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic   8 bytes  "PFOCOTP1"
//! m, n    u64, u64
//! k       f64
//! b, T    u64, u64
//! seed    u64
//! M       m·n f64, row-major
//! T × { B_t: b u64 flat indices i·n + j (ascending), G^t: m·n f64 row-major }
//! ```
//!
//! The target matrix is stored so that a reader needs no random generator to
//! replay the stream.

use std::io::{Read, Write};

use super::matrix_completion::{MatrixCompletionInstance, McRound};
use crate::error::{Error, Result};
use crate::functions::RoundFunctions;

pub const MAGIC: &[u8; 8] = b"PFOCOTP1";

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTape {
    pub rows: usize,
    pub cols: usize,
    pub radius: f64,
    pub batch: usize,
    pub seed: u64,
    pub target: Vec<f64>,
    pub rounds: Vec<McRound>,
}

impl RoundTape {
    pub fn record(instance: &MatrixCompletionInstance, horizon: usize) -> Self {
        Self {
            rows: instance.rows,
            cols: instance.cols,
            radius: instance.radius,
            batch: instance.batch,
            seed: instance.seed,
            target: instance.target().into_vec(),
            rounds: instance.round_data(horizon),
        }
    }

    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    pub fn instance(&self) -> Result<MatrixCompletionInstance> {
        MatrixCompletionInstance::from_target(
            self.rows,
            self.cols,
            self.radius,
            self.batch,
            self.seed,
            self.target.clone(),
        )
    }

    pub fn rounds(&self) -> Result<Vec<RoundFunctions>> {
        let inst = self.instance()?;
        Ok(self
            .rounds
            .iter()
            .enumerate()
            .map(|(i, data)| inst.round_from_data(i + 1, data.clone()))
            .collect())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [self.rows as u64, self.cols as u64] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.radius.to_le_bytes())?;
        for v in [self.batch as u64, self.horizon() as u64, self.seed] {
            w.write_all(&v.to_le_bytes())?;
        }
        write_f64s(&mut w, &self.target)?;
        for round in &self.rounds {
            for &idx in &round.entries {
                w.write_all(&(idx as u64).to_le_bytes())?;
            }
            write_f64s(&mut w, &round.g)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(Error::Tape("bad magic".into()));
        }
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        let radius = read_f64(&mut r)?;
        let batch = read_u64(&mut r)? as usize;
        let horizon = read_u64(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        let cells = rows
            .checked_mul(cols)
            .filter(|&c| c > 0)
            .ok_or_else(|| Error::Tape(format!("invalid shape {rows}x{cols}")))?;
        if batch == 0 || batch > cells {
            return Err(Error::Tape(format!("invalid batch size {batch}")));
        }
        let target = read_f64s(&mut r, cells)?;
        let mut rounds = Vec::with_capacity(horizon.min(1 << 20));
        for t in 1..=horizon {
            let mut entries = Vec::with_capacity(batch);
            for _ in 0..batch {
                let idx = read_u64(&mut r)? as usize;
                if idx >= cells {
                    return Err(Error::Tape(format!("round {t}: index {idx} out of range")));
                }
                entries.push(idx);
            }
            if entries.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Tape(format!("round {t}: indices not strictly ascending")));
            }
            let g = read_f64s(&mut r, cells)?;
            rounds.push(McRound { entries, g });
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Tape("trailing bytes after last round".into()));
        }
        Ok(Self {
            rows,
            cols,
            radius,
            batch,
            seed,
            target,
            rounds,
        })
    }
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Tape("unexpected end of tape".into())
    } else {
        Error::Io(e)
    }
}

fn write_f64s<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let v = f64::from_le_bytes(read_u64(r)?.to_le_bytes());
    if !v.is_finite() {
        return Err(Error::Tape("non-finite float".into()));
    }
    Ok(v)
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| read_f64(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::OnlineProblem;

    #[test]
    fn header_layout() {
        let inst = MatrixCompletionInstance::generate(3, 2, 2.0, 4, 17).unwrap();
        let tape = RoundTape::record(&inst, 2);
        let mut bytes = Vec::new();
        tape.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), 2.0);
        assert_eq!(u64::from_le_bytes(bytes[32..40].try_into().unwrap()), 4);
        assert_eq!(u64::from_le_bytes(bytes[40..48].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[48..56].try_into().unwrap()), 17);
        assert_eq!(bytes.len(), 56 + 6 * 8 + 2 * (4 * 8 + 6 * 8));
    }

    #[test]
    fn replayed_rounds_match_generated_rounds() {
        let inst = MatrixCompletionInstance::generate(4, 5, 2.0, 6, 3).unwrap();
        let mut bytes = Vec::new();
        RoundTape::record(&inst, 7).write_to(&mut bytes).unwrap();
        let tape = RoundTape::read_from(bytes.as_slice()).unwrap();
        let x = inst.domain().canonical_point();
        let mut y = x.clone();
        y.as_mut_slice().iter_mut().enumerate().for_each(|(i, v)| *v = 0.01 * i as f64);
        for (a, b) in inst.rounds(7).iter().zip(tape.rounds().unwrap()) {
            assert_eq!(a.loss_value(&y), b.loss_value(&y));
            assert_eq!(a.constraint_value(&y), b.constraint_value(&y));
        }
    }

    #[test]
    fn corrupt_tapes_are_rejected() {
        let inst = MatrixCompletionInstance::generate(2, 2, 1.0, 2, 0).unwrap();
        let mut bytes = Vec::new();
        RoundTape::record(&inst, 1).write_to(&mut bytes).unwrap();
        assert!(RoundTape::read_from(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(RoundTape::read_from(extra.as_slice()).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(RoundTape::read_from(bad.as_slice()), Err(Error::Tape(_))));
    }
}
