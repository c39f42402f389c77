//! Exact algebra of phase-tracked displacement operators.
//!
//! Every operator is kept in single-exponential (Weyl-ordered) form
//! `e^{iφ} · exp(i G / ħ)` with `G` linear in `x₁, x₂, p₁, p₂`. Because the
//! commutator of two linear generators is a c-number, products close on
//! this form with the Baker–Campbell–Hausdorff correction
//! `e^{iF/ħ} e^{iG/ħ} = e^{-i s/(2ħ)} e^{i(F+G)/ħ}` where `[F, G] = iħ s`.
//! All coefficients and phases are exact elements of `ℚ[π, π⁻¹]`.

mod exact;
mod labels;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use exact::{PiPoly, Phase};
pub use labels::{ContextId, ObservableId, RealObservable};

pub(crate) use exact::rational_to_f64;

/// `ħ` and the modular momentum scale `p₀`, both exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "UnitsRepr", into = "UnitsRepr")]
pub struct UnitSystem {
    hbar: Rational64,
    p0: Rational64,
}

#[derive(Serialize, Deserialize)]
struct UnitsRepr {
    hbar: String,
    p0: String,
}

impl TryFrom<UnitsRepr> for UnitSystem {
    type Error = Error;
    fn try_from(r: UnitsRepr) -> Result<Self> {
        let parse = |s: &str| {
            s.trim()
                .parse::<Rational64>()
                .map_err(|e| Error::Units(format!("`{s}`: {e}")))
        };
        UnitSystem::new(parse(&r.hbar)?, parse(&r.p0)?)
    }
}

impl From<UnitSystem> for UnitsRepr {
    fn from(u: UnitSystem) -> Self {
        UnitsRepr {
            hbar: u.hbar.to_string(),
            p0: u.p0.to_string(),
        }
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: Rational64::one(),
            p0: Rational64::one(),
        }
    }
}

impl UnitSystem {
    pub fn new(hbar: Rational64, p0: Rational64) -> Result<Self> {
        if !hbar.is_positive() {
            return Err(Error::Units(format!("hbar must be positive, got {hbar}")));
        }
        if !p0.is_positive() {
            return Err(Error::Units(format!("p0 must be positive, got {p0}")));
        }
        Ok(Self { hbar, p0 })
    }

    pub fn hbar(&self) -> Rational64 {
        self.hbar
    }

    pub fn p0(&self) -> Rational64 {
        self.p0
    }

    pub fn hbar_f64(&self) -> f64 {
        rational_to_f64(self.hbar)
    }

    pub fn p0_f64(&self) -> f64 {
        rational_to_f64(self.p0)
    }

    /// Coefficient `p₀` multiplying a position in a modular generator.
    pub fn position_scale(&self) -> PiPoly {
        PiPoly::rational(self.p0)
    }

    /// Coefficient `πħ/p₀` multiplying a momentum in a modular generator.
    pub fn momentum_scale(&self) -> PiPoly {
        PiPoly::pi(self.hbar / self.p0)
    }
}

/// Real linear combination of `x₁, x₂, p₁, p₂` with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LinearForm {
    pub x1: PiPoly,
    pub x2: PiPoly,
    pub p1: PiPoly,
    pub p2: PiPoly,
}

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn x1() -> Self {
        Self { x1: PiPoly::one(), ..Self::zero() }
    }

    pub fn x2() -> Self {
        Self { x2: PiPoly::one(), ..Self::zero() }
    }

    pub fn p1() -> Self {
        Self { p1: PiPoly::one(), ..Self::zero() }
    }

    pub fn p2() -> Self {
        Self { p2: PiPoly::one(), ..Self::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.x1.is_zero() && self.x2.is_zero() && self.p1.is_zero() && self.p2.is_zero()
    }

    pub fn scaled(&self, c: &PiPoly) -> Self {
        Self {
            x1: &self.x1 * c,
            x2: &self.x2 * c,
            p1: &self.p1 * c,
            p2: &self.p2 * c,
        }
    }

    /// Position coefficients `(x₁, x₂)`.
    pub fn position_coeffs(&self) -> [&PiPoly; 2] {
        [&self.x1, &self.x2]
    }

    /// Momentum coefficients `(p₁, p₂)`.
    pub fn momentum_coeffs(&self) -> [&PiPoly; 2] {
        [&self.p1, &self.p2]
    }
}

impl Add<&LinearForm> for &LinearForm {
    type Output = LinearForm;
    fn add(self, rhs: &LinearForm) -> LinearForm {
        LinearForm {
            x1: &self.x1 + &rhs.x1,
            x2: &self.x2 + &rhs.x2,
            p1: &self.p1 + &rhs.p1,
            p2: &self.p2 + &rhs.p2,
        }
    }
}

impl Add for LinearForm {
    type Output = LinearForm;
    fn add(self, rhs: LinearForm) -> LinearForm {
        &self + &rhs
    }
}

impl Neg for &LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        LinearForm {
            x1: -&self.x1,
            x2: -&self.x2,
            p1: -&self.p1,
            p2: -&self.p2,
        }
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        -&self
    }
}

impl Sub for LinearForm {
    type Output = LinearForm;
    fn sub(self, rhs: LinearForm) -> LinearForm {
        &self + &(-&rhs)
    }
}

impl Mul<LinearForm> for &PiPoly {
    type Output = LinearForm;
    fn mul(self, rhs: LinearForm) -> LinearForm {
        rhs.scaled(self)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = [("x1", &self.x1), ("x2", &self.x2), ("p1", &self.p1), ("p2", &self.p2)]
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(name, c)| format!("({c})*{name}"))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Returns `s` with `[F, G] = iħ s`, from the canonical relations
/// `[xᵢ, pⱼ] = iħ δᵢⱼ`, `[xᵢ, xⱼ] = [pᵢ, pⱼ] = 0`.
pub fn symplectic_commutator(f: &LinearForm, g: &LinearForm) -> PiPoly {
    let first = &(&f.x1 * &g.p1) - &(&f.p1 * &g.x1);
    let second = &(&f.x2 * &g.p2) - &(&f.p2 * &g.x2);
    first + second
}

/// Phase-tracked displacement operator `e^{iφ} exp(i G/ħ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylOp {
    generator: LinearForm,
    phase: Phase,
    hbar: Rational64,
}

impl WeylOp {
    pub fn new(generator: LinearForm, phase: Phase, units: &UnitSystem) -> Self {
        Self {
            generator,
            phase,
            hbar: units.hbar(),
        }
    }

    /// `exp(i G/ħ)` with no extra phase.
    pub fn exp(generator: LinearForm, units: &UnitSystem) -> Self {
        Self::new(generator, Phase::zero(), units)
    }

    pub fn identity(units: &UnitSystem) -> Self {
        Self::exp(LinearForm::zero(), units)
    }

    pub fn generator(&self) -> &LinearForm {
        &self.generator
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn hbar(&self) -> Rational64 {
        self.hbar
    }

    /// Phase of the operator if it is a multiple of the identity.
    pub fn scalar_phase(&self) -> Option<&Phase> {
        self.generator.is_zero().then_some(&self.phase)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            generator: -&self.generator,
            phase: -&self.phase,
            hbar: self.hbar,
        }
    }

    pub fn compose(&self, rhs: &WeylOp) -> WeylOp {
        weyl_compose(self, rhs)
    }
}

impl fmt::Display for WeylOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp(i*pi*{}) exp(i[{}]/hbar)", self.phase, self.generator)
    }
}

/// Product `u·v`, normalized back into single-exponential form.
pub fn weyl_compose(u: &WeylOp, v: &WeylOp) -> WeylOp {
    assert_eq!(u.hbar, v.hbar, "operators built with different hbar");
    let s = symplectic_commutator(&u.generator, &v.generator);
    let correction = s.scale(-Rational64::one() / (Rational64::from_integer(2) * u.hbar));
    let phase = &(&u.phase + &v.phase) + &Phase::new(correction);
    WeylOp {
        generator: &u.generator + &v.generator,
        phase,
        hbar: u.hbar,
    }
}

/// `δ` with `u·v = e^{iδ} v·u`.
pub fn commutator_phase(u: &WeylOp, v: &WeylOp) -> Phase {
    assert_eq!(u.hbar, v.hbar, "operators built with different hbar");
    let s = symplectic_commutator(&u.generator, &v.generator);
    Phase::new(s.scale(-Rational64::one() / u.hbar))
}

/// Argument `θ` and sine sign `σ` of a complex modular observable, so that
/// its real part is `cos(θ/ħ)` and its imaginary part `σ·sin(θ/ħ)`.
pub fn modular_argument(id: ObservableId, units: &UnitSystem) -> (LinearForm, i8) {
    let x = units.position_scale();
    let p = units.momentum_scale();
    use ObservableId::*;
    match id {
        A => (&x * LinearForm::x1(), 1),
        B => (&p * LinearForm::p2(), 1),
        C => (&x * LinearForm::x1() + &p * LinearForm::p2(), -1),
        LowerA => (&x * LinearForm::x2(), -1),
        LowerB => (&p * LinearForm::p1(), 1),
        LowerC => (&x * LinearForm::x2() - &p * LinearForm::p1(), 1),
        Alpha => (&x * (LinearForm::x2() - LinearForm::x1()), 1),
        Beta => (&p * (LinearForm::p1() + LinearForm::p2()), -1),
        Gamma => (
            &x * (LinearForm::x1() - LinearForm::x2()) + &p * (LinearForm::p1() + LinearForm::p2()),
            1,
        ),
    }
}

/// The nine complex observables `X = X′ + iX″ = exp(iσθ/ħ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableTable {
    ops: BTreeMap<ObservableId, WeylOp>,
}

impl ObservableTable {
    pub fn get(&self, id: ObservableId) -> &WeylOp {
        &self.ops[&id]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObservableId, &WeylOp)> {
        self.ops.iter().map(|(&k, v)| (k, v))
    }

    /// Replaces one entry; used to build deliberately broken tables for
    /// negative controls.
    pub fn with_entry(mut self, id: ObservableId, op: WeylOp) -> Self {
        self.ops.insert(id, op);
        self
    }
}

impl std::ops::Index<ObservableId> for ObservableTable {
    type Output = WeylOp;
    fn index(&self, id: ObservableId) -> &WeylOp {
        self.get(id)
    }
}

pub fn observable_table(units: &UnitSystem) -> ObservableTable {
    let ops = ObservableId::ALL
        .iter()
        .map(|&id| {
            let (theta, sign) = modular_argument(id, units);
            let generator = if sign < 0 { -theta } else { theta };
            (id, WeylOp::exp(generator, units))
        })
        .collect();
    ObservableTable { ops }
}

/// Product of a context's three observables, composed left to right.
pub fn context_product(ctx: ContextId, units: &UnitSystem) -> WeylOp {
    context_product_in(&observable_table(units), ctx)
}

pub fn context_product_in(table: &ObservableTable, ctx: ContextId) -> WeylOp {
    let [a, b, c] = ctx.members();
    table[a].compose(&table[b]).compose(&table[c])
}

/// 9×9 table of commutator phases between the complex observables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibilityMatrix {
    entries: Vec<Vec<Phase>>,
}

impl CompatibilityMatrix {
    pub fn get(&self, row: ObservableId, col: ObservableId) -> &Phase {
        &self.entries[row.index()][col.index()]
    }
}

pub fn compatibility_matrix(units: &UnitSystem) -> CompatibilityMatrix {
    compatibility_matrix_in(&observable_table(units))
}

pub fn compatibility_matrix_in(table: &ObservableTable) -> CompatibilityMatrix {
    let entries = ObservableId::ALL
        .iter()
        .map(|&r| {
            ObservableId::ALL
                .iter()
                .map(|&c| commutator_phase(&table[r], &table[c]))
                .collect()
        })
        .collect();
    CompatibilityMatrix { entries }
}

/// Outcome of certifying one context identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContextCertificate {
    pub context: ContextId,
    pub expected_sign: i8,
    pub generator_zero: bool,
    /// `φ/π` of the product as an exact fraction string.
    pub phase_over_pi: String,
    pub pairwise_commuting: bool,
    pub certified: bool,
}

pub fn certify_contexts(table: &ObservableTable) -> Vec<ContextCertificate> {
    let matrix = compatibility_matrix_in(table);
    ContextId::ALL
        .iter()
        .map(|&ctx| {
            let product = context_product_in(table, ctx);
            let expected = if ctx.sign() > 0 { Phase::zero() } else { Phase::half_turn() };
            let [a, b, c] = ctx.members();
            let pairwise_commuting = [(a, b), (a, c), (b, c)]
                .iter()
                .all(|&(x, y)| matrix.get(x, y).is_zero());
            let generator_zero = product.generator().is_zero();
            ContextCertificate {
                context: ctx,
                expected_sign: ctx.sign(),
                generator_zero,
                phase_over_pi: product.phase().to_string(),
                pairwise_commuting,
                certified: generator_zero && pairwise_commuting && *product.phase() == expected,
            }
        })
        .collect()
}

/// Compatibility CSV: a `complex` block with all 81 ordered pairs of the
/// nine unitaries, then one block per context with the 36 ordered pairs of
/// its six real observables. Each real observable inherits the commutator
/// phase of its parent unitary.
pub fn compatibility_csv(table: &ObservableTable) -> Result<String> {
    let matrix = compatibility_matrix_in(table);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["block", "row", "col", "phase_over_pi"])?;
    for &r in &ObservableId::ALL {
        for &c in &ObservableId::ALL {
            w.write_record(["complex", r.name(), c.name(), &matrix.get(r, c).to_string()])?;
        }
    }
    for &ctx in &ContextId::ALL {
        let reals: Vec<RealObservable> = ctx
            .members()
            .iter()
            .flat_map(|&id| RealObservable::pair(id))
            .collect();
        for r in &reals {
            for c in &reals {
                let phase = matrix.get(r.parent, c.parent);
                w.write_record([ctx.name(), &r.label(), &c.label(), &phase.to_string()])?;
            }
        }
    }
    finish_csv(w)
}

pub fn context_products_csv(table: &ObservableTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["context", "expected_sign", "generator_zero", "phase_over_pi", "certified"])?;
    for cert in certify_contexts(table) {
        w.write_record([
            cert.context.name().to_string(),
            cert.expected_sign.to_string(),
            cert.generator_zero.to_string(),
            cert.phase_over_pi.clone(),
            cert.certified.to_string(),
        ])?;
    }
    finish_csv(w)
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}
