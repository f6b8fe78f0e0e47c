//! Canonical JSON serialization for the file formats: conditions,
//! models, tuples, catalogs, and indexed bases. Keys are sorted (struct
//! fields are declared alphabetically and map keys live in ordered
//! maps), words serialize as digit strings, and pair keys are
//! `"a,b"` with the smaller label first, so equal values always produce
//! byte-identical files.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bases::{BaseTag, FiniteTree, IStar, IndexedBase};
use crate::forcing::{Condition, Label};
use crate::gf2::{BitWord, WordSet};
use crate::mtuples::{Catalog, CatalogBounds, MTuple};
use crate::splitrank::{FiniteModel, Relation};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("io: {0}")]
    File(#[from] std::io::Error),
}

fn parse_word(s: &str) -> Result<BitWord, IoError> {
    BitWord::parse(s).map_err(|e| IoError::Malformed(e.to_string()))
}

fn parse_words(len: usize, items: &[String]) -> Result<WordSet, IoError> {
    let mut out = WordSet::new(len);
    for s in items {
        out.insert(parse_word(s)?)
            .map_err(|e| IoError::Malformed(e.to_string()))?;
    }
    Ok(out)
}

fn pair_key(a: Label, b: Label) -> String {
    format!("{},{}", a.min(b), a.max(b))
}

fn parse_pair_key(key: &str) -> Result<(Label, Label), IoError> {
    let (a, b) = key
        .split_once(',')
        .ok_or_else(|| IoError::Malformed(format!("pair key {key:?} lacks a comma")))?;
    let a: Label = a
        .trim()
        .parse()
        .map_err(|_| IoError::Malformed(format!("bad label in {key:?}")))?;
    let b: Label = b
        .trim()
        .parse()
        .map_err(|_| IoError::Malformed(format!("bad label in {key:?}")))?;
    if a >= b {
        return Err(IoError::Malformed(format!(
            "pair key {key:?} is not ordered"
        )));
    }
    Ok((a, b))
}

/// Renders any serializable value in the canonical layout.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serialization cannot fail");
    out.push('\n');
    out
}

#[derive(Serialize, Deserialize)]
pub struct TreeDto {
    pub depth: usize,
    pub level_n_nodes: Vec<String>,
}

impl TreeDto {
    pub fn from_tree(t: &FiniteTree) -> Self {
        TreeDto {
            depth: t.depth(),
            level_n_nodes: t.leaves().iter().map(|w| w.to_string()).collect(),
        }
    }

    pub fn into_tree(self) -> Result<FiniteTree, IoError> {
        let leaves = parse_words(self.depth, &self.level_n_nodes)?;
        FiniteTree::from_level_set(self.depth, leaves)
            .map_err(|e| IoError::Malformed(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ConditionDto {
    pub M: usize,
    pub eta: BTreeMap<String, String>,
    pub g: Vec<BTreeMap<String, Vec<String>>>,
    pub h: Vec<BTreeMap<String, usize>>,
    pub iota: usize,
    pub n: usize,
    pub r: Vec<usize>,
    pub trees: Vec<TreeDto>,
    pub w: Vec<Label>,
}

impl ConditionDto {
    pub fn from_condition(p: &Condition) -> Self {
        let mut g = Vec::new();
        let mut h = Vec::new();
        for i in 0..p.iota() {
            let mut gmap = BTreeMap::new();
            let mut hmap = BTreeMap::new();
            for (a, b) in p.pairs() {
                let key = pair_key(a, b);
                gmap.insert(
                    key.clone(),
                    p.g_at(i, a, b)
                        .unwrap()
                        .iter()
                        .map(|w| w.to_string())
                        .collect(),
                );
                hmap.insert(key, p.h_at(i, a, b).unwrap());
            }
            g.push(gmap);
            h.push(hmap);
        }
        ConditionDto {
            M: p.tree_count(),
            eta: p
                .etas()
                .iter()
                .map(|(a, e)| (a.to_string(), e.to_string()))
                .collect(),
            g,
            h,
            iota: p.iota(),
            n: p.level(),
            r: p.r_values().to_vec(),
            trees: p.trees().iter().map(TreeDto::from_tree).collect(),
            w: p.labels().iter().copied().collect(),
        }
    }

    pub fn into_condition(self) -> Result<Condition, IoError> {
        let w: BTreeSet<Label> = self.w.iter().copied().collect();
        if self.trees.len() != self.M {
            return Err(IoError::Malformed(format!(
                "M = {} against {} trees",
                self.M,
                self.trees.len()
            )));
        }
        let mut eta = BTreeMap::new();
        for (key, digits) in &self.eta {
            let label: Label = key
                .parse()
                .map_err(|_| IoError::Malformed(format!("bad label {key:?}")))?;
            eta.insert(label, parse_word(digits)?);
        }
        let trees = self
            .trees
            .into_iter()
            .map(TreeDto::into_tree)
            .collect::<Result<Vec<_>, _>>()?;
        let mut h = Vec::new();
        for map in &self.h {
            let mut out = BTreeMap::new();
            for (key, &value) in map {
                out.insert(parse_pair_key(key)?, value);
            }
            h.push(out);
        }
        let mut g = Vec::new();
        for map in &self.g {
            let mut out = BTreeMap::new();
            for (key, nodes) in map {
                out.insert(parse_pair_key(key)?, parse_words(self.n, nodes)?);
            }
            g.push(out);
        }
        Condition::from_parts(w, self.n, self.iota, eta, trees, self.r, h, g)
            .map_err(|e| IoError::Malformed(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
pub struct RelationDto {
    pub arity: usize,
    pub tuples: Vec<Vec<u32>>,
    pub zeta: u32,
}

#[derive(Serialize, Deserialize)]
pub struct ModelDto {
    pub relations: Vec<RelationDto>,
    pub size: u32,
    pub theta: usize,
}

impl ModelDto {
    pub fn from_model(m: &FiniteModel) -> Self {
        ModelDto {
            relations: m
                .relations
                .iter()
                .map(|r| RelationDto {
                    arity: r.arity,
                    tuples: r.tuples.iter().cloned().collect(),
                    zeta: r.zeta,
                })
                .collect(),
            size: m.size,
            theta: m.theta,
        }
    }

    pub fn into_model(self) -> FiniteModel {
        FiniteModel::new(
            self.size,
            self.theta,
            self.relations
                .into_iter()
                .map(|r| Relation {
                    zeta: r.zeta,
                    arity: r.arity,
                    tuples: r.tuples.into_iter().collect(),
                })
                .collect(),
        )
    }
}

fn word_pair_key(a: &BitWord, b: &BitWord) -> String {
    if a <= b {
        format!("{a},{b}")
    } else {
        format!("{b},{a}")
    }
}

fn parse_word_pair_key(key: &str, len: usize) -> Result<(BitWord, BitWord), IoError> {
    let (a, b) = key
        .split_once(',')
        .ok_or_else(|| IoError::Malformed(format!("pair key {key:?} lacks a comma")))?;
    let (a, b) = (parse_word(a.trim())?, parse_word(b.trim())?);
    if a.len() != len || b.len() != len || a >= b {
        return Err(IoError::Malformed(format!(
            "pair key {key:?} is not canonical"
        )));
    }
    Ok((a, b))
}

#[derive(Serialize, Deserialize)]
pub struct MTupleDto {
    pub ell: usize,
    pub g: Vec<BTreeMap<String, Vec<String>>>,
    pub h: Vec<BTreeMap<String, usize>>,
    pub iota: usize,
    pub u: Vec<String>,
}

impl MTupleDto {
    pub fn from_tuple(m: &MTuple) -> Self {
        let mut g = Vec::new();
        let mut h = Vec::new();
        for i in 0..m.iota() {
            let mut gmap = BTreeMap::new();
            let mut hmap = BTreeMap::new();
            for (a, b) in m.pair_keys() {
                let key = word_pair_key(&a, &b);
                gmap.insert(
                    key.clone(),
                    m.g_at(i, &a, &b)
                        .unwrap()
                        .iter()
                        .map(|w| w.to_string())
                        .collect(),
                );
                hmap.insert(key, m.h_at(i, &a, &b).unwrap());
            }
            g.push(gmap);
            h.push(hmap);
        }
        MTupleDto {
            ell: m.ell(),
            g,
            h,
            iota: m.iota(),
            u: m.u().iter().map(|w| w.to_string()).collect(),
        }
    }

    pub fn into_tuple(self) -> Result<MTuple, IoError> {
        let u = parse_words(self.ell, &self.u)?;
        let mut h = Vec::new();
        for map in &self.h {
            let mut out = BTreeMap::new();
            for (key, &value) in map {
                out.insert(parse_word_pair_key(key, self.ell)?, value);
            }
            h.push(out);
        }
        let mut g = Vec::new();
        for map in &self.g {
            let mut out = BTreeMap::new();
            for (key, nodes) in map {
                out.insert(
                    parse_word_pair_key(key, self.ell)?,
                    parse_words(self.ell, nodes)?,
                );
            }
            g.push(out);
        }
        MTuple::new(self.ell, self.iota, u, h, g).map_err(|e| IoError::Malformed(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum IStarDto {
    Finite(usize),
    Omega(String),
}

#[derive(Serialize, Deserialize)]
pub struct IndexedBaseDto {
    pub istar: IStarDto,
    pub tags: Vec<BaseTag>,
}

impl IndexedBaseDto {
    pub fn from_base(ib: &IndexedBase) -> Self {
        IndexedBaseDto {
            istar: match ib.istar() {
                IStar::Finite(k) => IStarDto::Finite(k),
                IStar::Omega => IStarDto::Omega("omega".to_string()),
            },
            tags: ib.tags().to_vec(),
        }
    }

    pub fn into_base(self) -> Result<IndexedBase, IoError> {
        let istar = match self.istar {
            IStarDto::Finite(k) => IStar::Finite(k),
            IStarDto::Omega(s) if s == "omega" => IStar::Omega,
            IStarDto::Omega(s) => {
                return Err(IoError::Malformed(format!("unknown index bound {s:?}")))
            }
        };
        IndexedBase::new(istar, self.tags).map_err(|e| IoError::Malformed(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
pub struct CatalogBoundsDto {
    pub max_g: usize,
    pub max_iota: usize,
    pub max_u: usize,
}

#[derive(Serialize, Deserialize)]
pub struct CatalogDto {
    pub base: IndexedBaseDto,
    pub bounds: CatalogBoundsDto,
    pub depth: usize,
    pub trees: Vec<TreeDto>,
}

impl CatalogDto {
    pub fn from_catalog(cat: &Catalog) -> Self {
        CatalogDto {
            base: IndexedBaseDto::from_base(&cat.ib),
            bounds: CatalogBoundsDto {
                max_g: cat.bounds.max_g,
                max_iota: cat.bounds.max_iota,
                max_u: cat.bounds.max_u,
            },
            depth: cat.depth,
            trees: cat.trees.iter().map(TreeDto::from_tree).collect(),
        }
    }

    pub fn into_catalog(self) -> Result<Catalog, IoError> {
        let trees = self
            .trees
            .into_iter()
            .map(TreeDto::into_tree)
            .collect::<Result<Vec<_>, _>>()?;
        Catalog::new(
            trees,
            self.depth,
            self.base.into_base()?,
            CatalogBounds {
                max_u: self.bounds.max_u,
                max_g: self.bounds.max_g,
                max_iota: self.bounds.max_iota,
            },
        )
        .map_err(|e| IoError::Malformed(e.to_string()))
    }
}

/// Parses the command-line base specifier: `per`, `omega`, or `iotaK`
/// for K copies of the singleton base.
pub fn parse_base_spec(spec: &str) -> Result<IndexedBase, IoError> {
    match spec {
        "per" => Ok(IndexedBase::perfect()),
        "omega" => Ok(IndexedBase::omega_singleton()),
        other => {
            if let Some(k) = other.strip_prefix("iota") {
                let k: usize = k
                    .parse()
                    .map_err(|_| IoError::Malformed(format!("bad base spec {other:?}")))?;
                if k == 0 {
                    return Err(IoError::Malformed("iota0 is empty".to_string()));
                }
                Ok(IndexedBase::singleton_iota(k))
            } else {
                Err(IoError::Malformed(format!(
                    "unknown base spec {other:?} (expected per, omega, or iotaK)"
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::{genesis, BuildConfig};

    #[test]
    fn condition_round_trip_is_identity() {
        let ib = IndexedBase::singleton_iota(6);
        let p = genesis(&[0, 1, 2, 3, 4], &ib, &BuildConfig::default()).unwrap();
        let dto = ConditionDto::from_condition(&p);
        let text = to_canonical_json(&dto);
        let back: ConditionDto = serde_json::from_str(&text).unwrap();
        let q = back.into_condition().unwrap();
        assert_eq!(p, q);
        // canonical: serializing again is byte-identical
        assert_eq!(text, to_canonical_json(&ConditionDto::from_condition(&q)));
    }

    #[test]
    fn malformed_digits_are_rejected() {
        let ib = IndexedBase::singleton_iota(6);
        let p = genesis(&[0, 1, 2, 3, 4], &ib, &BuildConfig::default()).unwrap();
        let mut dto = ConditionDto::from_condition(&p);
        dto.eta.insert("0".to_string(), "01x1".to_string());
        assert!(dto.into_condition().is_err());
    }

    #[test]
    fn model_and_base_round_trips() {
        let m = crate::splitrank::bundled_model();
        let dto = ModelDto::from_model(&m);
        let text = to_canonical_json(&dto);
        let back: ModelDto = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_model(), m);

        for spec in ["per", "omega", "iota6"] {
            let ib = parse_base_spec(spec).unwrap();
            let dto = IndexedBaseDto::from_base(&ib);
            let text = to_canonical_json(&dto);
            let back: IndexedBaseDto = serde_json::from_str(&text).unwrap();
            assert_eq!(back.into_base().unwrap(), ib);
        }
        assert!(parse_base_spec("nope").is_err());
    }
}
