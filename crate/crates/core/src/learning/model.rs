use std::fmt;
use std::io::{self, Read, Write};

use md5::{Digest as _, Md5};
use serde::{Deserialize, Serialize};

use super::{LearningError, Result};
use crate::ledger::Digest;

/// Magic bytes opening a model file.
pub const MODEL_MAGIC: [u8; 8] = *b"IDMLMDL1";

/// Layer widths from input to output. Hidden layers use ReLU; the output
/// layer feeds a softmax.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Arch(Vec<usize>);

impl Arch {
    /// Any list of positive widths; an empty list describes the empty model.
    pub fn new(layers: Vec<usize>) -> Result<Self> {
        if layers.len() == 1 {
            return Err(LearningError::InvalidArch(
                "a single layer has no weights".into(),
            ));
        }
        if layers.iter().any(|&w| w == 0 || w > u32::MAX as usize) {
            return Err(LearningError::InvalidArch(format!(
                "bad width in {layers:?}"
            )));
        }
        Ok(Arch(layers))
    }

    pub fn linear(inputs: usize, classes: usize) -> Result<Self> {
        Self::new(vec![inputs, classes])
    }

    /// One hidden layer of `width` units, or linear when `width` is 0.
    pub fn with_hidden(inputs: usize, width: usize, classes: usize) -> Result<Self> {
        if width == 0 {
            Self::linear(inputs, classes)
        } else {
            Self::new(vec![inputs, width, classes])
        }
    }

    pub fn layers(&self) -> &[usize] {
        &self.0
    }

    pub fn inputs(&self) -> usize {
        self.0.first().copied().unwrap_or(0)
    }

    pub fn outputs(&self) -> usize {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn param_count(&self) -> usize {
        self.0.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn is_trainable(&self) -> bool {
        self.0.len() >= 2
    }

    /// Descriptor bytes: each width as a little-endian `u32`.
    pub fn descriptor_bytes(&self) -> Vec<u8> {
        self.0
            .iter()
            .flat_map(|&w| (w as u32).to_le_bytes())
            .collect()
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "[{}]", parts.join("-"))
    }
}

/// Flat parameter vector in canonical layer order: for each layer, the
/// row-major `[out][in]` weights followed by the `out` biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    arch: Arch,
    params: Vec<f32>,
}

impl ModelParams {
    pub fn new(arch: Arch, params: Vec<f32>) -> Result<Self> {
        if params.len() != arch.param_count() {
            return Err(LearningError::DimensionMismatch {
                expected: arch.param_count(),
                got: params.len(),
            });
        }
        Ok(Self { arch, params })
    }

    pub fn zeros(arch: Arch) -> Self {
        let params = vec![0.0; arch.param_count()];
        Self { arch, params }
    }

    pub fn arch(&self) -> &Arch {
        &self.arch
    }

    pub fn params(&self) -> &[f32] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f32] {
        &mut self.params
    }

    /// Bit-level equality, distinguishing `-0.0` from `0.0` and NaN payloads.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.arch == other.arch
            && self.params.len() == other.params.len()
            && self
                .params
                .iter()
                .zip(&other.params)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Bytes the digest is computed over.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = self.arch.descriptor_bytes();
        out.reserve(self.params.len() * 4);
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    /// Writes magic, layer count, widths, then the parameters, all little-endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&MODEL_MAGIC)?;
        w.write_all(&(self.arch.0.len() as u32).to_le_bytes())?;
        w.write_all(&self.canonical_bytes())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::new();
        self.write_to(&mut v).expect("writing to a Vec cannot fail");
        v
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| LearningError::Format(m.to_string());
        let rest = bytes
            .strip_prefix(&MODEL_MAGIC)
            .ok_or_else(|| bad("bad magic"))?;
        let (n, mut rest) = split_u32(rest).ok_or_else(|| bad("truncated header"))?;
        let mut layers = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let (w, r) = split_u32(rest).ok_or_else(|| bad("truncated architecture"))?;
            layers.push(w as usize);
            rest = r;
        }
        let arch = Arch::new(layers)?;
        if rest.len() != arch.param_count() * 4 {
            return Err(bad("parameter section has the wrong length"));
        }
        let params = rest
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")))
            .collect();
        Self::new(arch, params)
    }
}

fn split_u32(b: &[u8]) -> Option<(u32, &[u8])> {
    let (head, rest) = b.split_first_chunk::<4>()?;
    Some((u32::from_le_bytes(*head), rest))
}

/// MD5 of the canonical serialization.
pub fn digest(model: &ModelParams) -> Digest {
    Digest(Md5::digest(model.canonical_bytes()).into())
}

/// Element-wise mean of two models with the same architecture.
pub fn merge(a: &ModelParams, b: &ModelParams) -> Result<ModelParams> {
    if a.arch != b.arch {
        return Err(LearningError::ArchMismatch(a.arch.clone(), b.arch.clone()));
    }
    let params = a
        .params
        .iter()
        .zip(&b.params)
        .map(|(&x, &y)| ((f64::from(x) + f64::from(y)) * 0.5) as f32)
        .collect();
    Ok(ModelParams {
        arch: a.arch.clone(),
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(layers: Vec<usize>, p: Vec<f32>) -> ModelParams {
        ModelParams::new(Arch::new(layers).unwrap(), p).unwrap()
    }

    #[test]
    fn param_count_includes_biases() {
        assert_eq!(Arch::new(vec![16, 10]).unwrap().param_count(), 170);
        assert_eq!(
            Arch::new(vec![16, 32, 10]).unwrap().param_count(),
            16 * 32 + 32 + 32 * 10 + 10
        );
        assert!(Arch::new(vec![5]).is_err());
        assert!(Arch::new(vec![5, 0]).is_err());
        assert!(ModelParams::new(Arch::new(vec![2, 2]).unwrap(), vec![0.0; 5]).is_err());
    }

    #[test]
    fn empty_model_digest_is_md5_of_nothing() {
        let e = ModelParams::new(Arch::new(vec![]).unwrap(), vec![]).unwrap();
        assert_eq!(digest(&e).to_hex(), "d41d8cd98f00b204e9800998ecf8427e");
    }

    #[test]
    fn digest_tracks_bits() {
        let a = m(vec![1, 1], vec![0.5, -1.0]);
        assert_eq!(digest(&a), digest(&a.clone()));
        let mut b = a.clone();
        b.params_mut()[0] = f32::from_bits(b.params()[0].to_bits() ^ 1);
        assert_ne!(a.canonical_bytes(), b.canonical_bytes());
        assert_ne!(digest(&a), digest(&b));
    }

    #[test]
    fn canonical_layout() {
        let a = m(vec![1, 1], vec![1.0, 2.0]);
        let mut expected = vec![1, 0, 0, 0, 1, 0, 0, 0];
        expected.extend_from_slice(&1.0f32.to_le_bytes());
        expected.extend_from_slice(&2.0f32.to_le_bytes());
        assert_eq!(a.canonical_bytes(), expected);
        let file = a.to_bytes();
        assert_eq!(&file[..8], b"IDMLMDL1");
        assert_eq!(&file[8..12], &2u32.to_le_bytes());
        assert_eq!(&file[12..], &expected[..]);
    }

    #[test]
    fn from_bytes_rejects_garbage() {
        assert!(ModelParams::from_bytes(b"nope").is_err());
        let mut f = m(vec![1, 1], vec![1.0, 2.0]).to_bytes();
        f.pop();
        assert!(ModelParams::from_bytes(&f).is_err());
    }

    #[test]
    fn merge_examples() {
        let a = m(vec![1, 1], vec![0.0, 2.0]);
        let b = m(vec![1, 1], vec![2.0, 0.0]);
        assert_eq!(merge(&a, &b).unwrap().params(), &[1.0, 1.0]);
        assert!(merge(&a, &a).unwrap().bit_eq(&a));
        let c = m(vec![2, 1], vec![0.0; 3]);
        assert!(matches!(
            merge(&a, &c),
            Err(LearningError::ArchMismatch(..))
        ));
    }

    proptest! {
        #[test]
        fn merge_commutes_and_fixes_equal_inputs(
            a in prop::collection::vec(-1e6f32..1e6, 6),
            b in prop::collection::vec(-1e6f32..1e6, 6),
        ) {
            let a = m(vec![2, 2], a);
            let b = m(vec![2, 2], b);
            prop_assert!(merge(&a, &b).unwrap().bit_eq(&merge(&b, &a).unwrap()));
            prop_assert!(merge(&a, &a).unwrap().bit_eq(&a));
        }

        #[test]
        fn serialization_round_trips(
            hidden in 0usize..4,
            bits in prop::collection::vec(any::<u32>(), 0..64),
        ) {
            let arch = Arch::with_hidden(3, hidden, 2).unwrap();
            let n = arch.param_count();
            let params: Vec<f32> = (0..n).map(|i| f32::from_bits(bits.get(i).copied().unwrap_or(i as u32))).collect();
            let model = ModelParams::new(arch, params).unwrap();
            let back = ModelParams::from_bytes(&model.to_bytes()).unwrap();
            prop_assert!(back.bit_eq(&model));
        }
    }
}
