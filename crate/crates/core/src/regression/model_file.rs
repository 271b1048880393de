//! Binary model file: magic, kind byte, little-endian parameter blob for
//! the BR model then the HR model, CRC-32 trailer.

use std::path::Path;

use super::{ForestModel, KnnModel, LinearModel, ModelKind, ModelMeta, ModelPair, Node, Regressor, TrainedModel, Tree};
use crate::error::{Error, Result};
use crate::features::FEATURE_COUNT;

pub const MODEL_MAGIC: &[u8; 8] = b"VSMDL001";

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        v.iter().for_each(|x| self.f64(*x));
    }
}

fn write_model(w: &mut Writer, m: &TrainedModel) {
    let meta = &m.meta;
    w.u64(meta.seed);
    w.f64(meta.split);
    w.u32(meta.n_train);
    w.u8(meta.ridge_raised as u8);
    w.f64s(&meta.means);
    w.f64s(&meta.stds);
    match &m.regressor {
        Regressor::Linear(l) => {
            w.f64(l.ridge);
            w.f64s(&l.weights);
        }
        Regressor::Knn(k) => {
            w.u32(k.k);
            w.u32(k.samples.len());
            for (s, y) in k.samples.iter().zip(&k.labels) {
                w.f64s(s);
                w.f64(*y);
            }
        }
        Regressor::Forest(f) => {
            w.u32(f.trees.len());
            for t in &f.trees {
                w.u32(t.nodes.len());
                for n in &t.nodes {
                    match *n {
                        Node::Leaf(v) => {
                            w.u8(0);
                            w.f64(v);
                        }
                        Node::Split { feature, threshold, left, right } => {
                            w.u8(1);
                            w.u8(feature as u8);
                            w.f64(threshold);
                            w.u32(left);
                            w.u32(right);
                        }
                    }
                }
            }
        }
    }
}

pub fn encode_models(pair: &ModelPair) -> Result<Vec<u8>> {
    let kind = pair.br.kind();
    if pair.hr.kind() != kind {
        return Err(Error::Param("BR and HR models must be the same kind".into()));
    }
    let mut w = Writer(MODEL_MAGIC.to_vec());
    w.u8(kind.tag());
    let mut body = Writer(Vec::new());
    write_model(&mut body, &pair.br);
    write_model(&mut body, &pair.hr);
    w.u32(body.0.len());
    w.0.extend_from_slice(&body.0);
    let crc = crc32fast::hash(&w.0);
    w.0.extend_from_slice(&crc.to_le_bytes());
    Ok(w.0)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail(&self, at: usize, reason: impl Into<String>) -> Error {
        Error::Model { offset: at as u64, reason: reason.into() }
    }
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(self.fail(self.pos, format!("truncated while reading {what}")));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f64(&mut self, what: &str) -> Result<f64> {
        let at = self.pos;
        let v = f64::from_le_bytes(self.take(8, what)?.try_into().unwrap());
        if !v.is_finite() {
            return Err(self.fail(at, format!("non-finite {what}")));
        }
        Ok(v)
    }
    fn features(&mut self, what: &str) -> Result<[f64; FEATURE_COUNT]> {
        let mut out = [0.0; FEATURE_COUNT];
        for v in out.iter_mut() {
            *v = self.f64(what)?;
        }
        Ok(out)
    }
    /// Element count that must fit in the remaining bytes at `min_size` each.
    fn count(&mut self, what: &str, min_size: usize) -> Result<usize> {
        let at = self.pos;
        let n = self.u32(what)?;
        if n.saturating_mul(min_size) > self.buf.len() - self.pos {
            return Err(self.fail(at, format!("{what} {n} exceeds remaining data")));
        }
        Ok(n)
    }
}

fn read_model(r: &mut Reader, kind: ModelKind) -> Result<TrainedModel> {
    let seed = r.u64("seed")?;
    let split = r.f64("split")?;
    let n_train = r.u32("training count")?;
    let flag_at = r.pos;
    let ridge_raised = match r.u8("ridge flag")? {
        0 => false,
        1 => true,
        b => return Err(r.fail(flag_at, format!("ridge flag must be 0 or 1, got {b}"))),
    };
    let means = r.features("feature mean")?;
    let stds_at = r.pos;
    let stds = r.features("feature std")?;
    if stds.iter().any(|s| *s <= 0.0) {
        return Err(r.fail(stds_at, "feature std must be positive"));
    }
    let meta = ModelMeta { seed, split, n_train, means, stds, ridge_raised };
    let regressor = match kind {
        ModelKind::Linear => {
            let ridge = r.f64("ridge")?;
            let weights = (0..=FEATURE_COUNT).map(|_| r.f64("weight")).collect::<Result<_>>()?;
            Regressor::Linear(LinearModel { weights, ridge })
        }
        ModelKind::Knn => {
            let at = r.pos;
            let k = r.u32("k")?;
            let n = r.count("sample count", 8 * (FEATURE_COUNT + 1))?;
            if k == 0 || n == 0 {
                return Err(r.fail(at, format!("knn needs k >= 1 and samples, got k {k} with {n}")));
            }
            let mut samples = Vec::with_capacity(n);
            let mut labels = Vec::with_capacity(n);
            for _ in 0..n {
                samples.push(r.features("sample")?.to_vec());
                labels.push(r.f64("label")?);
            }
            Regressor::Knn(KnnModel { k, samples, labels })
        }
        ModelKind::RandomForest => {
            let ntrees = r.count("tree count", 4)?;
            if ntrees == 0 {
                return Err(r.fail(r.pos - 4, "forest has no trees"));
            }
            let mut trees = Vec::with_capacity(ntrees);
            for _ in 0..ntrees {
                let count_at = r.pos;
                let nn = r.count("node count", 9)?;
                if nn == 0 {
                    return Err(r.fail(count_at, "tree has no nodes"));
                }
                let mut nodes = Vec::with_capacity(nn);
                for i in 0..nn {
                    let at = r.pos;
                    nodes.push(match r.u8("node tag")? {
                        0 => Node::Leaf(r.f64("leaf value")?),
                        1 => {
                            let feature = r.u8("split feature")? as usize;
                            let threshold = r.f64("threshold")?;
                            let (left, right) = (r.u32("left child")?, r.u32("right child")?);
                            // children always follow their parent, which also rules out cycles
                            if feature >= FEATURE_COUNT || left <= i || right <= i || left >= nn || right >= nn {
                                return Err(r.fail(at, format!("invalid split node {i}")));
                            }
                            Node::Split { feature, threshold, left, right }
                        }
                        t => return Err(r.fail(at, format!("unknown node tag {t}"))),
                    });
                }
                trees.push(Tree { nodes });
            }
            Regressor::Forest(ForestModel { trees })
        }
    };
    Ok(TrainedModel { meta, regressor })
}

pub fn decode_models(bytes: &[u8]) -> Result<ModelPair> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(8, "magic")?;
    if magic != MODEL_MAGIC {
        return Err(r.fail(0, format!("bad magic {:?}, expected {:?}", String::from_utf8_lossy(magic), "VSMDL001")));
    }
    let kind_byte = r.u8("kind")?;
    let kind = ModelKind::from_tag(kind_byte).ok_or_else(|| r.fail(8, format!("unknown model kind {kind_byte}")))?;
    let len = r.u32("blob length")?;
    if bytes.len() != 13 + len + 4 {
        return Err(r.fail(9, format!("blob length {len} does not match file size {}", bytes.len())));
    }
    let crc_at = bytes.len() - 4;
    let stored = u32::from_le_bytes(bytes[crc_at..].try_into().unwrap());
    if crc32fast::hash(&bytes[..crc_at]) != stored {
        return Err(r.fail(crc_at, "checksum mismatch"));
    }
    let mut body = Reader { buf: &bytes[..crc_at], pos: 13 };
    let br = read_model(&mut body, kind)?;
    let hr = read_model(&mut body, kind)?;
    if body.pos != crc_at {
        return Err(body.fail(body.pos, "trailing bytes after models"));
    }
    Ok(ModelPair { br, hr })
}

pub fn save_models(path: &Path, pair: &ModelPair) -> Result<()> {
    std::fs::write(path, encode_models(pair)?)?;
    Ok(())
}

pub fn load_models(path: &Path) -> Result<ModelPair> {
    decode_models(&std::fs::read(path)?)
}
