//! Sampled detector/observable bits and their file formats.

use std::io::{Read, Write};

use crate::bits::{words_for, BitRow};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"HHQS";
const VERSION: u32 = 1;

/// Shots are simulated in blocks of this many; each block owns one RNG stream.
pub const BLOCK_SHOTS: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectionBits {
    /// Shot passed post-selection (no detector fired).
    pub accepted: BitRow,
    /// Measured logical outcome; `true` is the -1 eigenvalue.
    pub outcomes: BitRow,
}

/// Detector and observable bits for `shots` shots, stored shot-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotBatch {
    shots: usize,
    num_detectors: usize,
    num_observables: usize,
    det_words: usize,
    obs_words: usize,
    detectors: Vec<u64>,
    observables: Vec<u64>,
    pub injection: Option<InjectionBits>,
    pub seed: u64,
}

/// Where a shot's randomness came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lineage {
    pub seed: u64,
    pub block: u64,
    pub offset: usize,
}

impl ShotBatch {
    pub fn zeros(shots: usize, num_detectors: usize, num_observables: usize, seed: u64) -> Self {
        let det_words = words_for(num_detectors);
        let obs_words = words_for(num_observables);
        ShotBatch {
            shots,
            num_detectors,
            num_observables,
            det_words,
            obs_words,
            detectors: vec![0; shots * det_words],
            observables: vec![0; shots * obs_words],
            injection: None,
            seed,
        }
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn num_observables(&self) -> usize {
        self.num_observables
    }

    pub fn lineage(&self, shot: usize) -> Lineage {
        Lineage {
            seed: self.seed,
            block: (shot / BLOCK_SHOTS) as u64,
            offset: shot % BLOCK_SHOTS,
        }
    }

    pub fn detector_words(&self, shot: usize) -> &[u64] {
        &self.detectors[shot * self.det_words..(shot + 1) * self.det_words]
    }

    pub(crate) fn detector_words_mut(&mut self, shot: usize) -> &mut [u64] {
        &mut self.detectors[shot * self.det_words..(shot + 1) * self.det_words]
    }

    pub(crate) fn observable_words_mut(&mut self, shot: usize) -> &mut [u64] {
        &mut self.observables[shot * self.obs_words..(shot + 1) * self.obs_words]
    }

    pub fn detector(&self, shot: usize, det: usize) -> bool {
        (self.detector_words(shot)[det >> 6] >> (det & 63)) & 1 == 1
    }

    pub fn observable(&self, shot: usize, obs: usize) -> bool {
        (self.observables[shot * self.obs_words + (obs >> 6)] >> (obs & 63)) & 1 == 1
    }

    pub fn set_detector(&mut self, shot: usize, det: usize, v: bool) {
        let w = &mut self.detectors[shot * self.det_words + (det >> 6)];
        let m = 1u64 << (det & 63);
        if v {
            *w |= m
        } else {
            *w &= !m
        }
    }

    pub fn set_observable(&mut self, shot: usize, obs: usize, v: bool) {
        let w = &mut self.observables[shot * self.obs_words + (obs >> 6)];
        let m = 1u64 << (obs & 63);
        if v {
            *w |= m
        } else {
            *w &= !m
        }
    }

    /// Indices of fired detectors in one shot.
    pub fn fired(&self, shot: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.detector_words(shot).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(wi * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    pub fn any_fired(&self, shot: usize) -> bool {
        self.detector_words(shot).iter().any(|&w| w != 0)
    }

    /// Binary layout: `HHQS`, version, shots (u64), detectors (u32),
    /// observables (u32), flags (u32, bit 0 = injection data), seed (u64),
    /// then per shot the detector words followed by the observable words,
    /// then for injection data the accepted and outcome bit arrays. All
    /// integers are little-endian; bit `i` of a word array is bit `i % 64`
    /// of word `i / 64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.shots as u64).to_le_bytes())?;
        w.write_all(&(self.num_detectors as u32).to_le_bytes())?;
        w.write_all(&(self.num_observables as u32).to_le_bytes())?;
        w.write_all(&u32::from(self.injection.is_some()).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for s in 0..self.shots {
            for &x in self.detector_words(s) {
                w.write_all(&x.to_le_bytes())?;
            }
            for &x in &self.observables[s * self.obs_words..(s + 1) * self.obs_words] {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        if let Some(inj) = &self.injection {
            for row in [&inj.accepted, &inj.outcomes] {
                for &x in row.words() {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::InvalidArgument(format!("shot file: {m}"));
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        let mut u32_ = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut b4)?;
            Ok(u32::from_le_bytes(b4))
        };
        if u32_(&mut r)? != VERSION {
            return Err(bad("unsupported version"));
        }
        r.read_exact(&mut b8)?;
        let shots = u64::from_le_bytes(b8) as usize;
        let dets = u32_(&mut r)? as usize;
        let obs = u32_(&mut r)? as usize;
        let flags = u32_(&mut r)?;
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        let mut batch = ShotBatch::zeros(shots, dets, obs, seed);
        let word = |r: &mut R| -> Result<u64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(u64::from_le_bytes(b))
        };
        for s in 0..shots {
            for i in 0..batch.det_words {
                batch.detectors[s * batch.det_words + i] = word(&mut r)?;
            }
            for i in 0..batch.obs_words {
                batch.observables[s * batch.obs_words + i] = word(&mut r)?;
            }
        }
        if flags & 1 == 1 {
            let mut rows = [BitRow::zeros(shots), BitRow::zeros(shots)];
            for row in &mut rows {
                for i in 0..words_for(shots) {
                    row.words_mut()[i] = word(&mut r)?;
                }
            }
            let [accepted, outcomes] = rows;
            batch.injection = Some(InjectionBits { accepted, outcomes });
        }
        Ok(batch)
    }

    /// One row per shot: `shot, d0.., o0.. [, accepted, outcome]`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["shot".to_string()];
        header.extend((0..self.num_detectors).map(|i| format!("d{i}")));
        header.extend((0..self.num_observables).map(|i| format!("o{i}")));
        if self.injection.is_some() {
            header.push("accepted".into());
            header.push("outcome".into());
        }
        wr.write_record(&header)?;
        let bit = |b: bool| if b { "1" } else { "0" };
        for s in 0..self.shots {
            let mut row = vec![s.to_string()];
            row.extend((0..self.num_detectors).map(|d| bit(self.detector(s, d)).to_string()));
            row.extend((0..self.num_observables).map(|o| bit(self.observable(s, o)).to_string()));
            if let Some(inj) = &self.injection {
                row.push(bit(inj.accepted.get(s)).into());
                row.push(bit(inj.outcomes.get(s)).into());
            }
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        let dets = header.iter().filter(|h| h.starts_with('d')).count();
        let obs = header.iter().filter(|h| h.starts_with('o') && *h != "outcome").count();
        let has_inj = header.iter().any(|h| h == "accepted");
        let mut rows = Vec::new();
        for rec in rd.records() {
            rows.push(rec?);
        }
        let mut batch = ShotBatch::zeros(rows.len(), dets, obs, 0);
        let mut inj = has_inj.then(|| InjectionBits {
            accepted: BitRow::zeros(rows.len()),
            outcomes: BitRow::zeros(rows.len()),
        });
        let parse_bit = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::InvalidArgument(format!("shot CSV: bad bit `{other}`"))),
        };
        for (s, rec) in rows.iter().enumerate() {
            if rec.len() != header.len() {
                return Err(Error::InvalidArgument(format!("shot CSV: row {s} has wrong width")));
            }
            for d in 0..dets {
                batch.set_detector(s, d, parse_bit(&rec[1 + d])?);
            }
            for o in 0..obs {
                batch.set_observable(s, o, parse_bit(&rec[1 + dets + o])?);
            }
            if let Some(inj) = &mut inj {
                inj.accepted.set(s, parse_bit(&rec[1 + dets + obs])?);
                inj.outcomes.set(s, parse_bit(&rec[2 + dets + obs])?);
            }
        }
        batch.injection = inj;
        Ok(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ShotBatch {
        let mut b = ShotBatch::zeros(70, 67, 1, 42);
        for s in 0..70 {
            for d in 0..67 {
                if (s * 7 + d * 3) % 11 == 0 {
                    b.set_detector(s, d, true);
                }
            }
            b.set_observable(s, 0, s % 3 == 0);
        }
        b
    }

    #[test]
    fn binary_round_trip() {
        let mut b = sample();
        let mut buf = Vec::new();
        b.write_binary(&mut buf).unwrap();
        assert_eq!(ShotBatch::read_binary(&buf[..]).unwrap(), b);
        b.injection = Some(InjectionBits {
            accepted: BitRow::from_indices(70, [1, 5, 69]),
            outcomes: BitRow::from_indices(70, [5]),
        });
        buf.clear();
        b.write_binary(&mut buf).unwrap();
        assert_eq!(ShotBatch::read_binary(&buf[..]).unwrap(), b);
        assert!(ShotBatch::read_binary(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut b = sample();
        b.seed = 0;
        b.injection = Some(InjectionBits {
            accepted: BitRow::from_indices(70, [2]),
            outcomes: BitRow::from_indices(70, [3, 4]),
        });
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        assert_eq!(ShotBatch::read_csv(&buf[..]).unwrap(), b);
        assert_eq!(b.fired(0), vec![0, 11, 22, 33, 44, 55, 66]);
    }
}
