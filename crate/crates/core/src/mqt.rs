use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::linalg::{Matrix, Vector, det, is_basis, tensor_vec};
use crate::scalar::Scalar;

/// Cap on `p^dim` when enumerating all effects of a system.
pub const DEFAULT_ENUM_CAP: u64 = 4096;

/// Cap on the number of candidate effect subsets examined when enumerating
/// measurements.
pub const MEASUREMENT_CANDIDATE_CAP: u128 = 2_000_000;

fn uniform_field(v: &Vector<FieldElement>) -> Result<PrimeField> {
    let field = v.get(0).field();
    for e in v.entries() {
        if e.field() != field {
            return Err(Error::FieldMismatch {
                left: field.modulus(),
                right: e.field().modulus(),
            });
        }
    }
    Ok(field)
}

/// Rescale a nonzero vector so its first nonzero coordinate is 1. Two
/// vectors represent the same state or effect exactly when their canonical
/// forms are equal.
pub fn canonicalize(v: &Vector<FieldElement>) -> Result<Vector<FieldElement>> {
    uniform_field(v)?;
    let leading = v
        .entries()
        .iter()
        .find(|e| !e.is_zero())
        .ok_or(Error::ZeroVector)?;
    Ok(v.scale(&leading.inverse()?))
}

fn build_canonical(field: PrimeField, coords: &[i64]) -> Result<Vector<FieldElement>> {
    let v = Vector::new(coords.iter().map(|&n| field.element(n)).collect())?;
    canonicalize(&v)
}

/// A pure state: a nonzero vector over GF(p), stored canonically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    vector: Vector<FieldElement>,
    field: PrimeField,
}

impl State {
    pub fn new(vector: Vector<FieldElement>) -> Result<Self> {
        let field = uniform_field(&vector)?;
        Ok(State {
            vector: canonicalize(&vector)?,
            field,
        })
    }

    pub fn from_coords(field: PrimeField, coords: &[i64]) -> Result<Self> {
        Ok(State {
            vector: build_canonical(field, coords)?,
            field,
        })
    }

    pub fn vector(&self) -> &Vector<FieldElement> {
        &self.vector
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.vector.dim()
    }
}

/// An effect: a nonzero dual vector over GF(p), stored canonically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Effect {
    covector: Vector<FieldElement>,
    field: PrimeField,
}

impl Effect {
    pub fn new(covector: Vector<FieldElement>) -> Result<Self> {
        let field = uniform_field(&covector)?;
        Ok(Effect {
            covector: canonicalize(&covector)?,
            field,
        })
    }

    pub fn from_coords(field: PrimeField, coords: &[i64]) -> Result<Self> {
        Ok(Effect {
            covector: build_canonical(field, coords)?,
            field,
        })
    }

    pub fn covector(&self) -> &Vector<FieldElement> {
        &self.covector
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.covector.dim()
    }
}

/// The dual pairing `<e|s>`. The value depends on the chosen representatives;
/// only its vanishing is representative-independent.
pub fn pair(e: &Effect, s: &State) -> Result<FieldElement> {
    if e.field != s.field {
        return Err(Error::FieldMismatch {
            left: e.field.modulus(),
            right: s.field.modulus(),
        });
    }
    e.covector.dot(&s.vector)
}

/// An outcome is possible exactly when its effect pairs to a nonzero value.
pub fn is_possible(e: &Effect, s: &State) -> Result<bool> {
    Ok(!pair(e, s)?.is_zero())
}

/// A measurement: a labelled basis of effects, one per outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measurement {
    label: String,
    outcome_labels: Vec<String>,
    effects: Vec<Effect>,
}

impl Measurement {
    pub fn new(
        label: impl Into<String>,
        outcome_labels: Vec<String>,
        effects: Vec<Effect>,
    ) -> Result<Self> {
        let label = label.into();
        if effects.is_empty() {
            return Err(Error::InvalidMeasurement("no effects given".into()));
        }
        if outcome_labels.len() != effects.len() {
            return Err(Error::InvalidMeasurement(format!(
                "{} outcome labels for {} effects",
                outcome_labels.len(),
                effects.len()
            )));
        }
        for (i, a) in outcome_labels.iter().enumerate() {
            if outcome_labels[..i].contains(a) {
                return Err(Error::InvalidMeasurement(format!(
                    "duplicate outcome label {a:?}"
                )));
            }
        }
        let field = effects[0].field;
        for e in &effects {
            if e.field != field {
                return Err(Error::FieldMismatch {
                    left: field.modulus(),
                    right: e.field.modulus(),
                });
            }
        }
        let covectors: Vec<_> = effects.iter().map(|e| e.covector.clone()).collect();
        if !is_basis(&covectors)? {
            return Err(Error::InvalidMeasurement(format!(
                "effects of {label:?} do not form a basis"
            )));
        }
        Ok(Measurement {
            label,
            outcome_labels,
            effects,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn outcome_labels(&self) -> &[String] {
        &self.outcome_labels
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn field(&self) -> PrimeField {
        self.effects[0].field
    }

    pub fn dim(&self) -> usize {
        self.effects.len()
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (&str, &Effect)> {
        self.outcome_labels
            .iter()
            .map(String::as_str)
            .zip(&self.effects)
    }

    pub fn effect_for(&self, outcome: &str) -> Option<&Effect> {
        self.outcome_labels
            .iter()
            .position(|o| o == outcome)
            .map(|i| &self.effects[i])
    }
}

/// Outcome labels of `m` that are possible for the state `s`, in measurement
/// order. Always non-empty: a basis cannot annihilate a nonzero vector.
pub fn possible_outcomes(m: &Measurement, s: &State) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (label, effect) in m.outcomes() {
        if is_possible(effect, s)? {
            out.push(label.to_string());
        }
    }
    debug_assert!(!out.is_empty());
    Ok(out)
}

/// Tensor product of states, row-major: coordinate `i * dim(s2) + j` of the
/// composite is `s1[i] * s2[j]`.
pub fn compose(s1: &State, s2: &State) -> Result<State> {
    if s1.field != s2.field {
        return Err(Error::FieldMismatch {
            left: s1.field.modulus(),
            right: s2.field.modulus(),
        });
    }
    State::new(tensor_vec(&s1.vector, &s2.vector))
}

/// Tensor product of effects, with the same coordinate convention as
/// `compose`.
pub fn joint_effect(e1: &Effect, e2: &Effect) -> Result<Effect> {
    if e1.field != e2.field {
        return Err(Error::FieldMismatch {
            left: e1.field.modulus(),
            right: e2.field.modulus(),
        });
    }
    Effect::new(tensor_vec(&e1.covector, &e2.covector))
}

/// An invertible linear map acting on states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evolution {
    matrix: Matrix<FieldElement>,
}

impl Evolution {
    pub fn new(matrix: Matrix<FieldElement>) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let field = matrix.get(0, 0).field();
        for r in 0..matrix.rows() {
            for e in matrix.row(r) {
                if e.field() != field {
                    return Err(Error::FieldMismatch {
                        left: field.modulus(),
                        right: e.field().modulus(),
                    });
                }
            }
        }
        if det(&matrix)?.is_zero() {
            return Err(Error::SingularEvolution);
        }
        Ok(Evolution { matrix })
    }

    pub fn from_coords(field: PrimeField, rows: &[&[i64]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&n| field.element(n)).collect())
            .collect();
        Evolution::new(Matrix::from_rows(rows)?)
    }

    pub fn matrix(&self) -> &Matrix<FieldElement> {
        &self.matrix
    }
}

/// Apply an evolution to a state; the result is canonicalized.
pub fn evolve(t: &Evolution, s: &State) -> Result<State> {
    State::new(t.matrix.mat_vec(&s.vector)?)
}

/// All distinct effects of a `dim`-dimensional system over GF(p), i.e. all
/// canonical nonzero covectors, in lexicographic coordinate order. There are
/// `(p^dim - 1) / (p - 1)` of them. Errors `EnumerationTooLarge` when
/// `p^dim > cap`.
pub fn enumerate_effects_capped(
    field: PrimeField,
    dim: usize,
    cap: u64,
) -> Result<Vec<Effect>> {
    if dim == 0 {
        return Err(Error::DimensionMismatch(
            "effects need positive dimension".into(),
        ));
    }
    let p = field.modulus();
    let size = (0..dim).try_fold(1u128, |acc, _| {
        let next = acc.checked_mul(p as u128)?;
        (next <= cap as u128).then_some(next)
    });
    let Some(_) = size else {
        let size = (0..dim as u32).fold(1u128, |acc, _| acc.saturating_mul(p as u128));
        return Err(Error::EnumerationTooLarge {
            size,
            cap: cap as u128,
        });
    };

    let mut out = Vec::new();
    let mut digits = vec![0u64; dim];
    loop {
        if digits.iter().find(|&&d| d != 0) == Some(&1) {
            let coords: Vec<i64> = digits.iter().map(|&d| d as i64).collect();
            out.push(Effect::from_coords(field, &coords)?);
        }
        // Odometer increment on the last digit, in residue order.
        let mut i = dim;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
        }
    }
}

pub fn enumerate_effects(field: PrimeField, dim: usize) -> Result<Vec<Effect>> {
    enumerate_effects_capped(field, dim, DEFAULT_ENUM_CAP)
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// All measurements of a `dim`-dimensional system over GF(p): every
/// unordered set of `dim` effects that forms a basis, in lexicographic order
/// of effect indices. Labels are `M0, M1, ...` and outcome labels are the
/// indices `0..dim` as strings.
pub fn enumerate_measurements_capped(
    field: PrimeField,
    dim: usize,
    cap: u64,
) -> Result<Vec<Measurement>> {
    let effects = enumerate_effects_capped(field, dim, cap)?;
    let n = effects.len();
    let candidates = binomial(n as u128, dim as u128);
    match candidates {
        Some(c) if c <= MEASUREMENT_CANDIDATE_CAP => {}
        _ => {
            return Err(Error::EnumerationTooLarge {
                size: candidates.unwrap_or(u128::MAX),
                cap: MEASUREMENT_CANDIDATE_CAP,
            });
        }
    }

    let outcome_labels: Vec<String> = (0..dim).map(|i| i.to_string()).collect();
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..dim).collect();
    if dim > n {
        return Ok(out);
    }
    loop {
        let chosen: Vec<Effect> = combo.iter().map(|&i| effects[i].clone()).collect();
        let covectors: Vec<_> = chosen.iter().map(|e| e.covector.clone()).collect();
        if is_basis(&covectors)? {
            out.push(Measurement::new(
                format!("M{}", out.len()),
                outcome_labels.clone(),
                chosen,
            )?);
        }
        // Next lexicographic dim-combination of 0..n.
        let mut i = dim;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if combo[i] < n - dim + i {
                combo[i] += 1;
                for j in i + 1..dim {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn enumerate_measurements(field: PrimeField, dim: usize) -> Result<Vec<Measurement>> {
    enumerate_measurements_capped(field, dim, DEFAULT_ENUM_CAP)
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = self.vector.entries().iter().map(|e| e.to_string()).collect();
        write!(f, "({})", coords.join(","))
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = self.covector.entries().iter().map(|e| e.to_string()).collect();
        write!(f, "({})", coords.join(","))
    }
}

fn coords_of(v: &Vector<FieldElement>) -> Vec<u64> {
    v.entries().iter().map(|e| e.value()).collect()
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("State", 3)?;
        s.serialize_field("p", &self.field.modulus())?;
        s.serialize_field("dim", &self.dim())?;
        s.serialize_field("entries", &coords_of(&self.vector))?;
        s.end()
    }
}

impl Serialize for Effect {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Effect", 3)?;
        s.serialize_field("p", &self.field.modulus())?;
        s.serialize_field("dim", &self.dim())?;
        s.serialize_field("entries", &coords_of(&self.covector))?;
        s.end()
    }
}

#[derive(Deserialize)]
struct VectorDto {
    p: u64,
    #[serde(default)]
    dim: Option<usize>,
    entries: Vec<i64>,
}

impl VectorDto {
    fn check_dim<E: serde::de::Error>(&self) -> std::result::Result<(), E> {
        match self.dim {
            Some(d) if d != self.entries.len() => Err(E::custom(format!(
                "dim {} does not match {} entries",
                d,
                self.entries.len()
            ))),
            _ => Ok(()),
        }
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = VectorDto::deserialize(deserializer)?;
        dto.check_dim()?;
        let field = PrimeField::new(dto.p).map_err(D::Error::custom)?;
        State::from_coords(field, &dto.entries).map_err(D::Error::custom)
    }
}

impl<'de> Deserialize<'de> for Effect {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = VectorDto::deserialize(deserializer)?;
        dto.check_dim()?;
        let field = PrimeField::new(dto.p).map_err(D::Error::custom)?;
        Effect::from_coords(field, &dto.entries).map_err(D::Error::custom)
    }
}

impl Serialize for Measurement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Measurement", 5)?;
        s.serialize_field("p", &self.field().modulus())?;
        s.serialize_field("dim", &self.dim())?;
        s.serialize_field("label", &self.label)?;
        s.serialize_field("outcomes", &self.outcome_labels)?;
        let effects: Vec<Vec<u64>> = self.effects.iter().map(|e| coords_of(&e.covector)).collect();
        s.serialize_field("effects", &effects)?;
        s.end()
    }
}

#[derive(Deserialize)]
struct MeasurementDto {
    p: u64,
    #[serde(default)]
    dim: Option<usize>,
    label: String,
    outcomes: Vec<String>,
    effects: Vec<Vec<i64>>,
}

impl<'de> Deserialize<'de> for Measurement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = MeasurementDto::deserialize(deserializer)?;
        let field = PrimeField::new(dto.p).map_err(D::Error::custom)?;
        if let Some(d) = dto.dim
            && dto.effects.iter().any(|e| e.len() != d)
        {
            return Err(D::Error::custom(format!(
                "dim {d} does not match the effect entries"
            )));
        }
        let effects: Vec<Effect> = dto
            .effects
            .iter()
            .map(|entries| Effect::from_coords(field, entries))
            .collect::<Result<_>>()
            .map_err(D::Error::custom)?;
        Measurement::new(dto.label, dto.outcomes, effects).map_err(D::Error::custom)
    }
}
