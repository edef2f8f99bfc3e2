//! Language-neutral entity model: classes, their attributes and methods, and
//! the per-method dependency table (called methods, accessed attributes).
//!
//! Classes, methods and attributes live in three separate dense id spaces,
//! each contiguous from zero, so every per-entity table is a plain vector
//! indexed by id.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

macro_rules! entity_id {
    ($(#[$doc:meta])* $name:ident, $label:literal) => {
        $(#[$doc])*
        #[derive(
            Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            #[inline]
            fn from(value: usize) -> Self {
                Self(u32::try_from(value).expect(concat!($label, " id overflows u32")))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}#{}", $label, self.0)
            }
        }
    };
}

entity_id!(
    /// Dense id of a class.
    ClassId,
    "class"
);
entity_id!(
    /// Dense id of a method.
    MethodId,
    "method"
);
entity_id!(
    /// Dense id of an attribute.
    AttrId,
    "attribute"
);

/// One class and the ids of the members it declares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassRecord {
    pub id: ClassId,
    pub name: String,
    pub attribute_ids: Vec<AttrId>,
    pub method_ids: Vec<MethodId>,
}

/// Classes plus total owner maps for methods and attributes.
///
/// Owner maps are derived from class membership when the model is built. A
/// gap in an id space shows up as `None`; [`validate`] reports it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SystemModel {
    classes: Vec<ClassRecord>,
    method_owner: Vec<Option<ClassId>>,
    attribute_owner: Vec<Option<ClassId>>,
    method_names: Vec<String>,
    attribute_names: Vec<String>,
}

impl SystemModel {
    /// Builds a model from class records. Never fails; integrity problems
    /// (gaps, duplicate membership, misnumbered classes) are left for
    /// [`validate`] to report.
    pub fn from_classes(classes: Vec<ClassRecord>) -> Self {
        let n_methods = classes
            .iter()
            .flat_map(|c| c.method_ids.iter())
            .map(|m| m.index() + 1)
            .max()
            .unwrap_or(0);
        let n_attrs = classes
            .iter()
            .flat_map(|c| c.attribute_ids.iter())
            .map(|a| a.index() + 1)
            .max()
            .unwrap_or(0);

        let mut method_owner = vec![None; n_methods];
        let mut attribute_owner = vec![None; n_attrs];
        for class in &classes {
            for m in &class.method_ids {
                method_owner[m.index()].get_or_insert(class.id);
            }
            for a in &class.attribute_ids {
                attribute_owner[a.index()].get_or_insert(class.id);
            }
        }
        Self {
            classes,
            method_owner,
            attribute_owner,
            method_names: vec![String::new(); n_methods],
            attribute_names: vec![String::new(); n_attrs],
        }
    }

    /// Attaches a display name to a declared method. Ids outside the model
    /// are ignored.
    pub fn set_method_name(&mut self, id: MethodId, name: impl Into<String>) {
        if let Some(slot) = self.method_names.get_mut(id.index()) {
            *slot = name.into();
        }
    }

    pub fn set_attribute_name(&mut self, id: AttrId, name: impl Into<String>) {
        if let Some(slot) = self.attribute_names.get_mut(id.index()) {
            *slot = name.into();
        }
    }

    pub fn method_name(&self, id: MethodId) -> &str {
        self.method_names.get(id.index()).map_or("", String::as_str)
    }

    pub fn attribute_name(&self, id: AttrId) -> &str {
        self.attribute_names
            .get(id.index())
            .map_or("", String::as_str)
    }

    pub fn classes(&self) -> &[ClassRecord] {
        &self.classes
    }

    pub fn class(&self, id: ClassId) -> Result<&ClassRecord, ModelError> {
        self.classes
            .get(id.index())
            .filter(|c| c.id == id)
            .ok_or(ModelError::UnknownClass(id))
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_methods(&self) -> usize {
        self.method_owner.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.attribute_owner.len()
    }

    #[inline]
    pub fn method_owner(&self, id: MethodId) -> Option<ClassId> {
        self.method_owner.get(id.index()).copied().flatten()
    }

    #[inline]
    pub fn attribute_owner(&self, id: AttrId) -> Option<ClassId> {
        self.attribute_owner.get(id.index()).copied().flatten()
    }
}

/// Per-method call and access sets, indexed by method id. Every row is sorted
/// ascending with no duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencyTable {
    calls: Vec<Vec<MethodId>>,
    accesses: Vec<Vec<AttrId>>,
}

impl DependencyTable {
    /// Builds a table from raw per-method lists, collapsing each list into a
    /// sorted set. The shorter of the two inputs is padded with empty rows.
    pub fn new(mut calls: Vec<Vec<MethodId>>, mut accesses: Vec<Vec<AttrId>>) -> Self {
        let rows = calls.len().max(accesses.len());
        calls.resize_with(rows, Vec::new);
        accesses.resize_with(rows, Vec::new);
        for row in &mut calls {
            row.sort_unstable();
            row.dedup();
        }
        for row in &mut accesses {
            row.sort_unstable();
            row.dedup();
        }
        Self { calls, accesses }
    }

    /// A table with `n_methods` empty rows.
    pub fn empty(n_methods: usize) -> Self {
        Self {
            calls: vec![Vec::new(); n_methods],
            accesses: vec![Vec::new(); n_methods],
        }
    }

    /// Removes every recursive call and returns the ids that had one.
    pub fn strip_self_calls(&mut self) -> Vec<MethodId> {
        let mut stripped = Vec::new();
        for (idx, row) in self.calls.iter_mut().enumerate() {
            let me = MethodId::from(idx);
            if let Ok(pos) = row.binary_search(&me) {
                row.remove(pos);
                stripped.push(me);
            }
        }
        stripped
    }

    pub fn n_rows(&self) -> usize {
        self.calls.len()
    }

    #[inline]
    pub fn calls(&self, method: MethodId) -> &[MethodId] {
        self.calls.get(method.index()).map_or(&[], Vec::as_slice)
    }

    #[inline]
    pub fn accesses(&self, method: MethodId) -> &[AttrId] {
        self.accesses.get(method.index()).map_or(&[], Vec::as_slice)
    }

    pub fn contains_method(&self, method: MethodId) -> bool {
        method.index() < self.calls.len()
    }

    /// Largest call set over all methods (`k_m`).
    pub fn max_calls(&self) -> usize {
        self.calls.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest access set over all methods (`k_a`).
    pub fn max_accesses(&self) -> usize {
        self.accesses.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// A single property of a method: a called method or an accessed attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Method(MethodId),
    Attribute(AttrId),
}

const ATTRIBUTE_TAG: u64 = 1 << 32;

impl Property {
    /// Packs the tag above the id, so keys order exactly like `Property`.
    #[inline]
    fn key(self) -> u64 {
        match self {
            Property::Method(m) => u64::from(m.0),
            Property::Attribute(a) => ATTRIBUTE_TAG | u64::from(a.0),
        }
    }

    #[inline]
    fn from_key(key: u64) -> Self {
        let id = key as u32;
        if key & ATTRIBUTE_TAG == 0 {
            Property::Method(MethodId(id))
        } else {
            Property::Attribute(AttrId(id))
        }
    }
}

/// Sorted, duplicate-free set of tagged properties.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PropertySet {
    keys: Vec<u64>,
}

impl PropertySet {
    pub fn from_deps(calls: &[MethodId], accesses: &[AttrId]) -> Self {
        let mut keys: Vec<u64> = calls
            .iter()
            .map(|&m| Property::Method(m).key())
            .chain(accesses.iter().map(|&a| Property::Attribute(a).key()))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        Self { keys }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn contains(&self, p: &Property) -> bool {
        self.keys.binary_search(&p.key()).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Property> + '_ {
        self.keys.iter().map(|&k| Property::from_key(k))
    }

    /// Size of the intersection, by a linear merge of the two sorted lists.
    pub fn intersection_len(&self, other: &PropertySet) -> usize {
        let (a, b) = (self.keys.as_slice(), other.keys.as_slice());
        let (mut i, mut j, mut shared) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            let (x, y) = (a[i], b[j]);
            i += usize::from(x <= y);
            j += usize::from(y <= x);
            shared += usize::from(x == y);
        }
        shared
    }
}

/// Called methods and accessed attributes of `method`, tagged by kind.
pub fn properties_of(method: MethodId, deps: &DependencyTable) -> Result<PropertySet, ModelError> {
    if !deps.contains_method(method) {
        return Err(ModelError::UnknownMethod(method));
    }
    Ok(PropertySet::from_deps(
        deps.calls(method),
        deps.accesses(method),
    ))
}

/// Property sets for every row of the table, in id order.
pub fn all_properties(deps: &DependencyTable) -> Vec<PropertySet> {
    (0..deps.n_rows())
        .map(|i| {
            let m = MethodId::from(i);
            PropertySet::from_deps(deps.calls(m), deps.accesses(m))
        })
        .collect()
}

/// One broken invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `classes[position]` carries id `found`.
    MisnumberedClass {
        position: usize,
        found: ClassId,
    },
    DuplicateMethod {
        method: MethodId,
        classes: Vec<ClassId>,
    },
    DuplicateAttribute {
        attribute: AttrId,
        classes: Vec<ClassId>,
    },
    /// A method id below the maximum that no class declares.
    MissingMethod {
        method: MethodId,
    },
    MissingAttribute {
        attribute: AttrId,
    },
    DanglingCall {
        caller: MethodId,
        target: MethodId,
    },
    DanglingAccess {
        method: MethodId,
        attribute: AttrId,
    },
    /// Dependency row for a method no class declares.
    UnownedDependencyRow {
        method: MethodId,
    },
    SelfCall {
        method: MethodId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MisnumberedClass { position, found } => {
                write!(f, "class at position {position} has id {}", found.0)
            }
            Violation::DuplicateMethod { method, classes } => {
                write!(
                    f,
                    "{method} is declared {} times (classes {:?})",
                    classes.len(),
                    ids(classes)
                )
            }
            Violation::DuplicateAttribute { attribute, classes } => write!(
                f,
                "{attribute} is declared {} times (classes {:?})",
                classes.len(),
                ids(classes)
            ),
            Violation::MissingMethod { method } => {
                write!(f, "{method} is not declared by any class")
            }
            Violation::MissingAttribute { attribute } => {
                write!(f, "{attribute} is not declared by any class")
            }
            Violation::DanglingCall { caller, target } => {
                write!(f, "{caller} calls undeclared {target}")
            }
            Violation::DanglingAccess { method, attribute } => {
                write!(f, "{method} accesses undeclared {attribute}")
            }
            Violation::UnownedDependencyRow { method } => {
                write!(f, "dependencies listed for undeclared {method}")
            }
            Violation::SelfCall { method } => write!(f, "{method} calls itself"),
        }
    }
}

fn ids(classes: &[ClassId]) -> Vec<u32> {
    classes.iter().map(|c| c.0).collect()
}

/// Checks every model invariant and returns all violations found, in a
/// fixed scan order. An empty list means the model is valid.
pub fn validate(model: &SystemModel, deps: &DependencyTable) -> Vec<Violation> {
    let mut out = Vec::new();

    for (position, class) in model.classes().iter().enumerate() {
        if class.id.index() != position {
            out.push(Violation::MisnumberedClass {
                position,
                found: class.id,
            });
        }
    }

    let mut method_decls: Vec<Vec<ClassId>> = vec![Vec::new(); model.n_methods()];
    let mut attr_decls: Vec<Vec<ClassId>> = vec![Vec::new(); model.n_attributes()];
    for class in model.classes() {
        for m in &class.method_ids {
            method_decls[m.index()].push(class.id);
        }
        for a in &class.attribute_ids {
            attr_decls[a.index()].push(class.id);
        }
    }
    for (idx, owners) in method_decls.into_iter().enumerate() {
        let method = MethodId::from(idx);
        match owners.len() {
            0 => out.push(Violation::MissingMethod { method }),
            1 => {}
            _ => out.push(Violation::DuplicateMethod {
                method,
                classes: owners,
            }),
        }
    }
    for (idx, owners) in attr_decls.into_iter().enumerate() {
        let attribute = AttrId::from(idx);
        match owners.len() {
            0 => out.push(Violation::MissingAttribute { attribute }),
            1 => {}
            _ => out.push(Violation::DuplicateAttribute {
                attribute,
                classes: owners,
            }),
        }
    }

    for idx in 0..deps.n_rows() {
        let method = MethodId::from(idx);
        let declared = model.method_owner(method).is_some();
        let has_deps = !deps.calls(method).is_empty() || !deps.accesses(method).is_empty();
        if !declared && has_deps {
            out.push(Violation::UnownedDependencyRow { method });
        }
        for &target in deps.calls(method) {
            if target == method {
                out.push(Violation::SelfCall { method });
            } else if model.method_owner(target).is_none() {
                out.push(Violation::DanglingCall {
                    caller: method,
                    target,
                });
            }
        }
        for &attribute in deps.accesses(method) {
            if model.attribute_owner(attribute).is_none() {
                out.push(Violation::DanglingAccess { method, attribute });
            }
        }
    }
    out
}

/// [`validate`] as a `Result`, for call sites that only need pass/fail.
pub fn ensure_valid(model: &SystemModel, deps: &DependencyTable) -> Result<(), ModelError> {
    let violations = validate(model, deps);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ModelError::Invalid(violations))
    }
}
