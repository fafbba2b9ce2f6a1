//! The TDML model container: a little-endian binary envelope holding a
//! length-prefixed JSON description plus raw f64 tensor blocks. Writing is
//! deterministic (fixed field order, fixed block order), so serializing a
//! reloaded model reproduces the original bytes bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Tensor;
use crate::nn::{NetworkSpec, NetworkState, TrainedModel};
use crate::svm::{BinarySvmModel, MulticlassSvm, PairwiseMachine, Standardizer};
use crate::zoo::{FittedModel, SvmFitted};

const MAGIC: &[u8; 4] = b"TDML";
const VERSION: u32 = 1;
const SECTION_NETWORK: u32 = 1;
const SECTION_SVM: u32 = 2;

#[derive(Serialize, Deserialize)]
struct NetworkHeader {
    spec: NetworkSpec,
    class_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MachineMeta {
    first: usize,
    second: usize,
    dims: usize,
    bias: f64,
    gamma: f64,
    converged: bool,
}

#[derive(Serialize, Deserialize)]
struct SvmHeader {
    class_names: Vec<String>,
    machines: Vec<MachineMeta>,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// One tensor block: rank, dims, then the values. Zero-length blocks are
/// legal at the format level (an untrained epoch curve, a machine with no
/// support vectors) even though `Tensor` itself rejects empty shapes.
fn put_block(out: &mut Vec<u8>, dims: &[usize], values: &[f64]) -> Result<()> {
    let expected: usize = dims.iter().product();
    if expected != values.len() {
        return Err(Error::State(format!(
            "tensor block dims {dims:?} do not hold {} values",
            values.len()
        )));
    }
    put_u32(out, dims.len() as u32);
    for &d in dims {
        let v = u32::try_from(d)
            .map_err(|_| Error::State(format!("tensor dimension {d} exceeds the format limit")))?;
        put_u32(out, v);
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(format_err(format!(
                "truncated: wanted {n} bytes at offset {}, only {} remain",
                self.pos,
                self.bytes.len() - self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn block(&mut self) -> Result<(Vec<usize>, Vec<f64>)> {
        let rank = self.u32()? as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(self.u32()? as usize);
        }
        let count: usize = dims.iter().product();
        let raw = self.take(count * 8)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok((dims, values))
    }

    fn done(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(format_err(format!(
                "{} trailing bytes after the payload",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn format_err(msg: String) -> Error {
    Error::Format {
        path: "<tdml>".to_string(),
        line: None,
        msg,
    }
}

fn envelope(section: u32, header_json: Vec<u8>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, section);
    put_u32(&mut out, header_json.len() as u32);
    out.extend_from_slice(&header_json);
    out
}

/// Open the envelope and hand back (section tag, header bytes, body cursor).
fn open<'a>(bytes: &'a [u8]) -> Result<(u32, &'a [u8], Cursor<'a>)> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(format_err("bad magic, not a TDML container".to_string()));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(format_err(format!(
            "unsupported container version {version}"
        )));
    }
    let section = cur.u32()?;
    let header_len = cur.u32()? as usize;
    let header = cur.take(header_len)?;
    Ok((section, header, cur))
}

pub fn network_to_bytes(model: &TrainedModel) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&NetworkHeader {
        spec: model.spec().clone(),
        class_names: model.class_names().to_vec(),
    })?;
    let mut out = envelope(SECTION_NETWORK, header);
    put_u32(&mut out, (model.state().params().len() + 1) as u32);
    for p in model.state().params() {
        put_block(&mut out, p.shape(), p.values())?;
    }
    put_block(&mut out, &[model.epoch_curve().len()], model.epoch_curve())?;
    Ok(out)
}

pub fn network_from_bytes(bytes: &[u8]) -> Result<TrainedModel> {
    let (section, header, mut cur) = open(bytes)?;
    if section != SECTION_NETWORK {
        return Err(format_err(format!(
            "expected a network section, found tag {section}"
        )));
    }
    let header: NetworkHeader = serde_json::from_slice(header)?;
    let block_count = cur.u32()? as usize;
    if block_count == 0 {
        return Err(format_err("network payload without blocks".to_string()));
    }
    let mut params = Vec::with_capacity(block_count - 1);
    for _ in 0..block_count - 1 {
        let (dims, values) = cur.block()?;
        params.push(Tensor::new(dims, values)?);
    }
    let (curve_dims, curve) = cur.block()?;
    if curve_dims.len() != 1 {
        return Err(format_err(format!(
            "epoch curve block must be rank 1, got {curve_dims:?}"
        )));
    }
    cur.done()?;
    let state = NetworkState::from_parts(header.spec, params)?;
    Ok(TrainedModel::from_parts(state, curve, header.class_names))
}

pub fn svm_to_bytes(model: &SvmFitted) -> Result<Vec<u8>> {
    let machines = model.machines().machines();
    let header = serde_json::to_vec(&SvmHeader {
        class_names: model.class_names().to_vec(),
        machines: machines
            .iter()
            .map(|m| MachineMeta {
                first: m.first,
                second: m.second,
                dims: m.model.dims(),
                bias: m.model.bias(),
                gamma: m.model.gamma(),
                converged: m.model.converged(),
            })
            .collect(),
    })?;
    let mut out = envelope(SECTION_SVM, header);
    let standardizer = model.standardizer();
    put_block(&mut out, &[standardizer.dims()], standardizer.means())?;
    put_block(&mut out, &[standardizer.dims()], standardizer.scales())?;
    for m in machines {
        let sv = m.model.support_values();
        put_block(&mut out, &[m.model.support_count(), m.model.dims()], sv)?;
        put_block(&mut out, &[m.model.support_count()], m.model.coefficients())?;
    }
    Ok(out)
}

pub fn svm_from_bytes(bytes: &[u8]) -> Result<SvmFitted> {
    let (section, header, mut cur) = open(bytes)?;
    if section != SECTION_SVM {
        return Err(format_err(format!(
            "expected an svm section, found tag {section}"
        )));
    }
    let header: SvmHeader = serde_json::from_slice(header)?;
    let (_, means) = cur.block()?;
    let (_, scales) = cur.block()?;
    let standardizer = Standardizer::from_parts(means, scales)?;
    let mut machines = Vec::with_capacity(header.machines.len());
    for meta in &header.machines {
        let (sv_dims, support) = cur.block()?;
        let (_, coef) = cur.block()?;
        if sv_dims.len() != 2 || sv_dims[1] != meta.dims {
            return Err(format_err(format!(
                "support block {sv_dims:?} does not match declared width {}",
                meta.dims
            )));
        }
        let model =
            BinarySvmModel::from_raw(support, coef, meta.dims, meta.bias, meta.gamma, meta.converged)?;
        machines.push(PairwiseMachine {
            first: meta.first,
            second: meta.second,
            model,
        });
    }
    cur.done()?;
    let svm = MulticlassSvm::from_machines(machines, header.class_names)?;
    Ok(SvmFitted::from_parts(standardizer, svm))
}

/// Load either model kind behind the uniform prediction trait.
pub fn model_from_bytes(bytes: &[u8]) -> Result<Box<dyn FittedModel>> {
    let (section, _, _) = open(bytes)?;
    match section {
        SECTION_NETWORK => Ok(Box::new(network_from_bytes(bytes)?)),
        SECTION_SVM => Ok(Box::new(svm_from_bytes(bytes)?)),
        other => Err(format_err(format!("unknown section tag {other}"))),
    }
}
