//! Facts file reading and writing, and the synthetic system generator.
//!
//! A facts file is UTF-8 JSON:
//!
//! ```json
//! {"schema_version": "1",
//!  "classes": [{"id": 0, "name": "A",
//!               "attributes": [{"id": 0, "name": "x"}],
//!               "methods": [{"id": 0, "name": "f", "calls": [1], "accesses": [0]}]}]}
//! ```
//!
//! Files are always written in canonical form (sorted keys, ascending ids)
//! so the same model produces the same bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{ConfigError, IngestError, ModelError};
use crate::model::{
    validate, AttrId, ClassId, ClassRecord, DependencyTable, MethodId, SystemModel,
};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactsDocument {
    pub schema_version: String,
    pub classes: Vec<FactsClass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactsClass {
    pub id: u32,
    pub name: String,
    #[serde(default)]
    pub attributes: Vec<FactsAttribute>,
    #[serde(default)]
    pub methods: Vec<FactsMethod>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactsAttribute {
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactsMethod {
    pub id: u32,
    pub name: String,
    #[serde(default)]
    pub calls: Vec<u32>,
    #[serde(default)]
    pub accesses: Vec<u32>,
}

/// Something ingestion changed about the input without rejecting it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadWarning {
    SelfCallRemoved(MethodId),
}

impl std::fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadWarning::SelfCallRemoved(m) => write!(f, "removed recursive call of {m}"),
        }
    }
}

/// A validated model with the warnings raised while building it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub model: SystemModel,
    pub deps: DependencyTable,
    pub warnings: Vec<LoadWarning>,
}

pub fn load_facts(path: impl AsRef<Path>) -> Result<Loaded, IngestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_facts(&text)
}

pub fn parse_facts(text: &str) -> Result<Loaded, IngestError> {
    let doc: FactsDocument = serde_json::from_str(text).map_err(|e| IngestError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_document(doc)
}

/// Builds a validated model from a parsed document. Member lists are sorted,
/// repeated calls and accesses collapse to sets, and recursive calls are
/// dropped with a warning.
pub fn from_document(mut doc: FactsDocument) -> Result<Loaded, IngestError> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(IngestError::UnsupportedSchema {
            found: doc.schema_version,
            supported: SCHEMA_VERSION,
        });
    }
    doc.classes.sort_by_key(|c| c.id);
    for class in &mut doc.classes {
        class.attributes.sort_by_key(|a| a.id);
        class.methods.sort_by_key(|m| m.id);
    }

    let records = doc
        .classes
        .iter()
        .map(|c| ClassRecord {
            id: ClassId(c.id),
            name: c.name.clone(),
            attribute_ids: c.attributes.iter().map(|a| AttrId(a.id)).collect(),
            method_ids: c.methods.iter().map(|m| MethodId(m.id)).collect(),
        })
        .collect();
    let mut model = SystemModel::from_classes(records);

    let rows = model.n_methods();
    let mut calls: Vec<Vec<MethodId>> = vec![Vec::new(); rows];
    let mut accesses: Vec<Vec<AttrId>> = vec![Vec::new(); rows];
    for class in doc.classes.iter().rev() {
        // reverse so the first declaration's name wins
        for a in class.attributes.iter().rev() {
            model.set_attribute_name(AttrId(a.id), a.name.clone());
        }
        for m in class.methods.iter().rev() {
            model.set_method_name(MethodId(m.id), m.name.clone());
        }
    }
    for m in doc.classes.iter().flat_map(|c| c.methods.iter()) {
        let row = m.id as usize;
        calls[row].extend(m.calls.iter().copied().map(MethodId));
        accesses[row].extend(m.accesses.iter().copied().map(AttrId));
    }
    let mut deps = DependencyTable::new(calls, accesses);
    let warnings = deps
        .strip_self_calls()
        .into_iter()
        .map(LoadWarning::SelfCallRemoved)
        .collect();

    let violations = validate(&model, &deps);
    if !violations.is_empty() {
        return Err(ModelError::Invalid(violations).into());
    }
    Ok(Loaded {
        model,
        deps,
        warnings,
    })
}

/// Canonical document for a model: classes, members and dependency lists in
/// ascending id order.
pub fn to_document(model: &SystemModel, deps: &DependencyTable) -> FactsDocument {
    let classes = model
        .classes()
        .iter()
        .map(|c| {
            let mut attributes: Vec<FactsAttribute> = c
                .attribute_ids
                .iter()
                .map(|&a| FactsAttribute {
                    id: a.0,
                    name: model.attribute_name(a).to_owned(),
                })
                .collect();
            attributes.sort_by_key(|a| a.id);
            let mut methods: Vec<FactsMethod> = c
                .method_ids
                .iter()
                .map(|&m| FactsMethod {
                    id: m.0,
                    name: model.method_name(m).to_owned(),
                    calls: deps.calls(m).iter().map(|t| t.0).collect(),
                    accesses: deps.accesses(m).iter().map(|a| a.0).collect(),
                })
                .collect();
            methods.sort_by_key(|m| m.id);
            FactsClass {
                id: c.id.0,
                name: c.name.clone(),
                attributes,
                methods,
            }
        })
        .collect::<Vec<_>>();
    let mut doc = FactsDocument {
        schema_version: SCHEMA_VERSION.to_owned(),
        classes,
    };
    doc.classes.sort_by_key(|c| c.id);
    doc
}

pub fn render_facts(model: &SystemModel, deps: &DependencyTable) -> String {
    canonical::to_string(&to_document(model, deps)).expect("facts documents always serialize")
}

pub fn save_facts(
    model: &SystemModel,
    deps: &DependencyTable,
    path: impl AsRef<Path>,
) -> Result<(), IngestError> {
    let path = path.as_ref();
    fs::write(path, render_facts(model, deps)).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parameters for [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_classes: usize,
    pub n_methods: usize,
    pub n_attributes: usize,
    /// Upper bound on calls drawn per method (`k_m`).
    pub max_calls_per_method: usize,
    /// Upper bound on accesses drawn per method (`k_a`).
    pub max_accesses_per_method: usize,
    /// Probability that a drawn dependency targets the caller's own class.
    pub intra_class_bias: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_classes: 10,
            n_methods: 80,
            n_attributes: 40,
            max_calls_per_method: 4,
            max_accesses_per_method: 3,
            intra_class_bias: 0.7,
            seed: 42,
        }
    }
}

impl GeneratorConfig {
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.n_classes == 0 {
            return Err(ConfigError::NotPositive("n_classes"));
        }
        if self.n_methods == 0 {
            return Err(ConfigError::NotPositive("n_methods"));
        }
        if self.n_attributes == 0 {
            return Err(ConfigError::NotPositive("n_attributes"));
        }
        if self.n_methods < self.n_classes {
            return Err(ConfigError::TooFewMethods {
                methods: self.n_methods,
                classes: self.n_classes,
            });
        }
        if !(0.0..=1.0).contains(&self.intra_class_bias) {
            return Err(ConfigError::BiasOutOfRange(self.intra_class_bias));
        }
        Ok(())
    }
}

/// SplitMix64 stream. Every output is a fixed function of the seed and the
/// position in the stream, on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[0, bound)` by multiply-shift; `bound` must be > 0.
    pub fn below(&mut self, bound: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(bound)) >> 64) as u64
    }

    /// Uniform float in `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Members of a round-robin layout: entity `i` belongs to class `i % classes`.
struct RoundRobin {
    items: u64,
    classes: u64,
}

impl RoundRobin {
    /// Members of `class` with id below `bound`.
    fn members_below(&self, class: u64, bound: u64) -> u64 {
        if bound <= class {
            0
        } else {
            (bound - class).div_ceil(self.classes)
        }
    }

    fn class_size(&self, class: u64) -> u64 {
        self.members_below(class, self.items)
    }

    /// Uniform member of `class` other than `exclude` (which must belong to it).
    fn draw_own_except(&self, rng: &mut SplitMix64, class: u64, exclude: u64) -> Option<u64> {
        let size = self.class_size(class);
        if size < 2 {
            return None;
        }
        let exclude_rank = (exclude - class) / self.classes;
        let mut rank = rng.below(size - 1);
        if rank >= exclude_rank {
            rank += 1;
        }
        Some(class + rank * self.classes)
    }

    fn draw_own(&self, rng: &mut SplitMix64, class: u64) -> Option<u64> {
        let size = self.class_size(class);
        (size > 0).then(|| class + rng.below(size) * self.classes)
    }

    /// Uniform entity not owned by `class`.
    fn draw_other(&self, rng: &mut SplitMix64, class: u64) -> Option<u64> {
        let outside = self.items - self.class_size(class);
        if outside == 0 {
            return None;
        }
        Some(self.nth_outside(class, rng.below(outside)))
    }

    /// The `rank`-th (0-based, ascending) entity not owned by `class`.
    fn nth_outside(&self, class: u64, rank: u64) -> u64 {
        // smallest v with (# non-members in [0, v]) > rank
        let (mut lo, mut hi) = (0u64, self.items - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let non_members = mid + 1 - self.members_below(class, mid + 1);
            if non_members > rank {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }
}

/// Deterministic synthetic system. Methods and attributes are dealt
/// round-robin over classes; each method draws `[0, k_m]` calls and
/// `[0, k_a]` accesses, each one same-class with probability
/// `intra_class_bias` and otherwise uniform over other classes' members.
/// Draws that have no eligible target, or repeat an earlier target, are
/// simply lost.
pub fn generate(config: &GeneratorConfig) -> Result<(SystemModel, DependencyTable), ConfigError> {
    config.check()?;
    let c = config.n_classes as u64;
    let methods = RoundRobin {
        items: config.n_methods as u64,
        classes: c,
    };
    let attrs = RoundRobin {
        items: config.n_attributes as u64,
        classes: c,
    };

    let mut records: Vec<ClassRecord> = (0..config.n_classes)
        .map(|k| ClassRecord {
            id: ClassId::from(k),
            name: format!("C{k}"),
            attribute_ids: Vec::new(),
            method_ids: Vec::new(),
        })
        .collect();
    for m in 0..config.n_methods {
        records[m % config.n_classes]
            .method_ids
            .push(MethodId::from(m));
    }
    for a in 0..config.n_attributes {
        records[a % config.n_classes]
            .attribute_ids
            .push(AttrId::from(a));
    }

    let mut rng = SplitMix64::new(config.seed);
    let mut calls = Vec::with_capacity(config.n_methods);
    let mut accesses = Vec::with_capacity(config.n_methods);
    for m in 0..config.n_methods as u64 {
        let own = m % c;
        let n_calls = rng.below(config.max_calls_per_method as u64 + 1);
        let mut row = Vec::with_capacity(n_calls as usize);
        for _ in 0..n_calls {
            let target = if rng.unit() < config.intra_class_bias {
                methods.draw_own_except(&mut rng, own, m)
            } else {
                methods.draw_other(&mut rng, own)
            };
            row.extend(target.map(|t| MethodId(t as u32)));
        }
        calls.push(row);

        let n_acc = rng.below(config.max_accesses_per_method as u64 + 1);
        let mut row = Vec::with_capacity(n_acc as usize);
        for _ in 0..n_acc {
            let target = if rng.unit() < config.intra_class_bias {
                attrs.draw_own(&mut rng, own)
            } else {
                attrs.draw_other(&mut rng, own)
            };
            row.extend(target.map(|t| AttrId(t as u32)));
        }
        accesses.push(row);
    }

    let mut model = SystemModel::from_classes(records);
    for m in 0..config.n_methods {
        model.set_method_name(MethodId::from(m), format!("m{m}"));
    }
    for a in 0..config.n_attributes {
        model.set_attribute_name(AttrId::from(a), format!("a{a}"));
    }
    Ok((model, DependencyTable::new(calls, accesses)))
}
