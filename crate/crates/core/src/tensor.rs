//! The AFPY tensor container.
//!
//! Layout, all integers little-endian:
//!
//! | offset      | size       | field                                   |
//! |-------------|------------|-----------------------------------------|
//! | 0           | 4          | magic `b"AFPY"`                         |
//! | 4           | 1          | version, always 1                       |
//! | 5           | 1          | dtype: 0 = f32, 1 = u32                 |
//! | 6           | 1          | ndim, 1..=4                             |
//! | 7           | 4 * ndim   | dims as u32                             |
//! | 7 + 4*ndim  | 4 * prod   | payload, row-major (last dim fastest)   |
//!
//! Nothing follows the payload.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{ClassScores, Grid, LabelKind, LabelMap};

pub const MAGIC: [u8; 4] = *b"AFPY";
pub const VERSION: u8 = 1;
pub const MAX_NDIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum DType {
    F32 = 0,
    U32 = 1,
}

impl DType {
    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(DType::F32),
            1 => Ok(DType::U32),
            other => Err(Error::UnsupportedDtype(other)),
        }
    }

    pub fn size(self) -> usize {
        4
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TensorData {
    F32(Vec<f32>),
    U32(Vec<u32>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::F32(v) => v.len(),
            TensorData::U32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> DType {
        match self {
            TensorData::F32(_) => DType::F32,
            TensorData::U32(_) => DType::U32,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Tensor {
    dims: Vec<u32>,
    data: TensorData,
}

/// Bitwise equality; `NaN` payloads compare equal to themselves.
impl PartialEq for Tensor {
    fn eq(&self, other: &Self) -> bool {
        if self.dims != other.dims {
            return false;
        }
        match (&self.data, &other.data) {
            (TensorData::F32(a), TensorData::F32(b)) => a
                .iter()
                .zip(b)
                .all(|(x, y)| x.to_bits() == y.to_bits()),
            (TensorData::U32(a), TensorData::U32(b)) => a == b,
            _ => false,
        }
    }
}

fn checked_dims(dims: &[usize]) -> Result<Vec<u32>> {
    if dims.is_empty() || dims.len() > MAX_NDIM {
        return Err(Error::InvalidShape(format!(
            "ndim {} outside [1, {MAX_NDIM}]",
            dims.len()
        )));
    }
    dims.iter()
        .map(|&d| u32::try_from(d).map_err(|_| Error::DimsOverflow(d)))
        .collect()
}

impl Tensor {
    pub fn new(dims: &[usize], data: TensorData) -> Result<Self> {
        let dims = checked_dims(dims)?;
        let expected = dims.iter().map(|&d| d as usize).product::<usize>();
        if expected != data.len() {
            return Err(Error::InvalidShape(format!(
                "dims {dims:?} hold {expected} values, payload has {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn f32(dims: &[usize], data: Vec<f32>) -> Result<Self> {
        Self::new(dims, TensorData::F32(data))
    }

    pub fn u32(dims: &[usize], data: Vec<u32>) -> Result<Self> {
        Self::new(dims, TensorData::U32(data))
    }

    pub fn dims(&self) -> Vec<usize> {
        self.dims.iter().map(|&d| d as usize).collect()
    }

    pub fn dtype(&self) -> DType {
        self.data.dtype()
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn into_data(self) -> TensorData {
        self.data
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(7 + 4 * self.dims.len() + 4 * self.data.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.dtype() as u8);
        out.push(self.dims.len() as u8);
        for d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        match &self.data {
            TensorData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            TensorData::U32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(Error::TruncatedHeader);
        }
        let magic: [u8; 4] = bytes[..4].try_into().expect("length checked");
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        if bytes.len() < 7 {
            return Err(Error::TruncatedHeader);
        }
        if bytes[4] != VERSION {
            return Err(Error::UnsupportedVersion(bytes[4]));
        }
        let dtype = DType::from_code(bytes[5])?;
        let ndim = bytes[6] as usize;
        if ndim == 0 || ndim > MAX_NDIM {
            return Err(Error::InvalidShape(format!("ndim {ndim} outside [1, {MAX_NDIM}]")));
        }
        let header = 7 + 4 * ndim;
        if bytes.len() < header {
            return Err(Error::TruncatedHeader);
        }
        let dims: Vec<u32> = bytes[7..header]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("chunk of 4")))
            .collect();
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
            .ok_or_else(|| Error::InvalidShape(format!("dims {dims:?} overflow")))?;
        let expected = count
            .checked_mul(dtype.size())
            .ok_or_else(|| Error::InvalidShape(format!("dims {dims:?} overflow")))?;
        let payload = &bytes[header..];
        if payload.len() < expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: payload.len(),
            });
        }
        if payload.len() > expected {
            return Err(Error::TrailingBytes(payload.len() - expected));
        }
        let words = payload.chunks_exact(4).map(|c| c.try_into().expect("chunk of 4"));
        let data = match dtype {
            DType::F32 => TensorData::F32(words.map(f32::from_le_bytes).collect()),
            DType::U32 => TensorData::U32(words.map(u32::from_le_bytes).collect()),
        };
        Ok(Self { dims, data })
    }

    fn expect_u32(self, ndim: usize, what: &str) -> Result<(Vec<usize>, Vec<u32>)> {
        let dims = self.dims();
        match self.data {
            TensorData::U32(v) if dims.len() == ndim => Ok((dims, v)),
            _ => Err(Error::InvalidShape(format!(
                "{what} needs a {ndim}-d u32 tensor, got {}-d {:?}",
                dims.len(),
                self.data.dtype()
            ))),
        }
    }

    fn expect_f32(self, ndim: usize, what: &str) -> Result<(Vec<usize>, Vec<f32>)> {
        let dims = self.dims();
        match self.data {
            TensorData::F32(v) if dims.len() == ndim => Ok((dims, v)),
            _ => Err(Error::InvalidShape(format!(
                "{what} needs a {ndim}-d f32 tensor, got {}-d {:?}",
                dims.len(),
                self.data.dtype()
            ))),
        }
    }

    pub fn from_label_map(map: &LabelMap) -> Self {
        Self::u32(&[map.height(), map.width()], map.grid.as_slice().to_vec())
            .expect("grid dims always fit")
    }

    pub fn into_label_map(self, level: u32, kind: LabelKind) -> Result<LabelMap> {
        let (dims, data) = self.expect_u32(2, "label map")?;
        Ok(LabelMap::new(level, kind, Grid::from_vec(dims[0], dims[1], data)?))
    }

    pub fn from_scores(scores: &ClassScores) -> Self {
        Self::f32(
            &[scores.classes(), scores.height(), scores.width()],
            scores.as_slice().to_vec(),
        )
        .expect("score dims always fit")
    }

    pub fn into_scores(self, level: u32) -> Result<ClassScores> {
        let (dims, data) = self.expect_f32(3, "class scores")?;
        ClassScores::from_vec(level, dims[0], dims[1], dims[2], data)
    }

    /// `(dims, values)` of a 3-d f32 tensor.
    pub fn into_f32_volume(self, what: &str) -> Result<([usize; 3], Vec<f32>)> {
        let (dims, data) = self.expect_f32(3, what)?;
        Ok(([dims[0], dims[1], dims[2]], data))
    }

    /// `(dims, values)` of a 3-d u32 tensor.
    pub fn into_u32_volume(self, what: &str) -> Result<([usize; 3], Vec<u32>)> {
        let (dims, data) = self.expect_u32(3, what)?;
        Ok(([dims[0], dims[1], dims[2]], data))
    }
}

pub fn write_tensor(path: impl AsRef<Path>, tensor: &Tensor) -> Result<()> {
    fs::write(path, tensor.encode())?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    Tensor::decode(&fs::read(path)?)
}
