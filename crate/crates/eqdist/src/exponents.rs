//! Exact-rational exponent numerology: claim systems of strict linear
//! inequalities over `(ϖ, δ, σ)`, σ-interval computation, Fourier-Motzkin
//! elimination onto `(ϖ, δ)` regions, and the distribution-exponent
//! optimizer. No floating point anywhere in this module.
//!
//! A claim set bundles bilinear (Type I/II) and trilinear (Type III)
//! estimates, each valid at some dense-divisibility multiplicity `i` and
//! each a conjunction of strict inequalities. A claim proved at
//! multiplicity `i` applies at every `i' ≥ i`, because raising the
//! multiplicity shrinks the moduli set being summed over. Combining one
//! claim of each kind under the side conditions
//! `1/10 < σ < 1/2`, `σ > 2ϖ` yields the distribution estimate; for
//! `σ > 1/6` the Type III hypothesis may be dropped altogether.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse an exact rational: `-7/300`, `3`, `1/12`.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| Error::Parse(format!("bad rational: {s}")))?;
    let d: BigInt = den.parse().map_err(|_| Error::Parse(format!("bad rational: {s}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator: {s}")));
    }
    Ok(BigRational::new(n, d))
}

/// A strict or non-strict linear inequality
/// `cw·ϖ + cd·δ + cs·σ (<|≤) rhs` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub cw: Rat,
    pub cd: Rat,
    pub cs: Rat,
    pub rhs: Rat,
    pub strict: bool,
}

impl LinearConstraint {
    pub fn less(cw: Rat, cd: Rat, cs: Rat, rhs: Rat) -> Self {
        LinearConstraint { cw, cd, cs, rhs, strict: true }
    }

    /// `cw·ϖ + cd·δ + cs·σ > rhs`, normalized to strict-less form.
    pub fn greater(cw: Rat, cd: Rat, cs: Rat, rhs: Rat) -> Self {
        LinearConstraint { cw: -cw, cd: -cd, cs: -cs, rhs: -rhs, strict: true }
    }

    fn coeff(&self, var: usize) -> &Rat {
        match var {
            0 => &self.cw,
            1 => &self.cd,
            _ => &self.cs,
        }
    }

    /// Scale so the integer coefficient vector `(cw, cd, cs, rhs)` is
    /// primitive; strict flag unchanged.
    pub fn normalized(&self) -> Self {
        let lcm = [&self.cw, &self.cd, &self.cs, &self.rhs]
            .iter()
            .fold(BigInt::one(), |acc, r| num_integer::lcm(acc, r.denom().clone()));
        let ints: Vec<BigInt> = [&self.cw, &self.cd, &self.cs, &self.rhs]
            .iter()
            .map(|r| (*r * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let mut gcd = BigInt::zero();
        for v in &ints {
            gcd = num_integer::gcd(gcd, v.clone());
        }
        if gcd.is_zero() {
            gcd = BigInt::one();
        }
        let f = |v: &BigInt| BigRational::from_integer(v / &gcd);
        LinearConstraint {
            cw: f(&ints[0]),
            cd: f(&ints[1]),
            cs: f(&ints[2]),
            rhs: f(&ints[3]),
            strict: self.strict,
        }
    }

    /// Evaluate at a point, honoring strictness.
    pub fn holds_at(&self, w: &Rat, d: &Rat, s: &Rat) -> bool {
        let lhs = &self.cw * w + &self.cd * d + &self.cs * s;
        if self.strict {
            lhs < self.rhs
        } else {
            lhs <= self.rhs
        }
    }
}

impl std::fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut lhs = String::new();
        for (c, name) in [(&self.cw, "w"), (&self.cd, "d"), (&self.cs, "s")] {
            if c.is_zero() {
                continue;
            }
            if !lhs.is_empty() {
                lhs.push_str(if c.is_negative() { " - " } else { " + " });
            } else if c.is_negative() {
                lhs.push('-');
            }
            let a = c.abs();
            if a.is_one() {
                lhs.push_str(name);
            } else {
                lhs.push_str(&format!("{a} {name}"));
            }
        }
        if lhs.is_empty() {
            lhs.push('0');
        }
        write!(f, "{} {} {}", lhs, if self.strict { "<" } else { "<=" }, self.rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimKind {
    TypeI,
    TypeII,
    TypeIII,
}

/// One proved estimate: a conjunction of constraints valid from
/// multiplicity `i` upward.
#[derive(Debug, Clone)]
pub struct Claim {
    pub kind: ClaimKind,
    pub multiplicity: u32,
    pub deligne: bool,
    pub constraints: Vec<LinearConstraint>,
    pub label: String,
}

/// A named collection of claims plus the structural side conditions.
#[derive(Debug, Clone)]
pub struct ClaimSet {
    pub name: String,
    pub claims: Vec<Claim>,
}

impl ClaimSet {
    pub fn claims_of(&self, kind: ClaimKind, multiplicity: u32) -> Vec<&Claim> {
        self.claims
            .iter()
            .filter(|c| c.kind == kind && c.multiplicity <= multiplicity)
            .collect()
    }
}

/// Claims-file format: `claim <typeI|typeII|typeIII> i=<n> [deligne]`
/// headers, followed by constraint lines
/// `cw <rat> cd <rat> cs <rat> <LT|GT> <rat>`; `#` comments.
pub fn parse_claims(name: &str, text: &str) -> Result<ClaimSet> {
    let mut claims: Vec<Claim> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse(format!("claims line {}: {msg}", lineno + 1));
        if let Some(rest) = line.strip_prefix("claim ") {
            let mut kind = None;
            let mut multiplicity = None;
            let mut deligne = false;
            for tok in rest.split_whitespace() {
                match tok {
                    "typeI" => kind = Some(ClaimKind::TypeI),
                    "typeII" => kind = Some(ClaimKind::TypeII),
                    "typeIII" => kind = Some(ClaimKind::TypeIII),
                    "deligne" => deligne = true,
                    t if t.starts_with("i=") => {
                        multiplicity =
                            Some(t[2..].parse().map_err(|_| err("bad multiplicity"))?);
                    }
                    _ => return Err(err("unknown token")),
                }
            }
            claims.push(Claim {
                kind: kind.ok_or_else(|| err("missing claim kind"))?,
                multiplicity: multiplicity.ok_or_else(|| err("missing multiplicity"))?,
                deligne,
                constraints: Vec::new(),
                label: rest.to_string(),
            });
        } else {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 8 || toks[0] != "cw" || toks[2] != "cd" || toks[4] != "cs" {
                return Err(err("expected `cw <r> cd <r> cs <r> <LT|GT> <r>`"));
            }
            let cw = parse_rational(toks[1])?;
            let cd = parse_rational(toks[3])?;
            let cs = parse_rational(toks[5])?;
            let rhs = parse_rational(toks[7])?;
            let c = match toks[6] {
                "LT" => LinearConstraint::less(cw, cd, cs, rhs),
                "GT" => LinearConstraint::greater(cw, cd, cs, rhs),
                _ => return Err(err("relation must be LT or GT")),
            };
            claims
                .last_mut()
                .ok_or_else(|| err("constraint before any claim header"))?
                .constraints
                .push(c);
        }
    }
    Ok(ClaimSet { name: name.to_string(), claims })
}

// A claim proved at multiplicity i covers every i' >= i (the moduli sets
// shrink as the multiplicity grows), so combining e.g. the i=4 claims with
// the i=1 ones below is legitimate.
const NEWTYPE_FULL: &str = "\
claim typeI i=1
cw 54 cd 15 cs 5 LT 1
claim typeI i=2
cw 56 cd 16 cs 4 LT 1
claim typeI i=4 deligne
cw 160/3 cd 16 cs 34/9 LT 1
cw 64 cd 18 cs 2 LT 1
claim typeII i=1
cw 68 cd 14 cs 0 LT 1
claim typeIII i=1 deligne
cw -28/9 cd -2/9 cs 1 GT 1/18
cw 1 cd 0 cs 0 LT 1/12
";

const ZHANG_ORIGINAL: &str = "\
claim typeI i=1
cw 44 cd 12 cs 8 LT 1
claim typeII i=1
cw 116 cd 20 cs 0 LT 1
claim typeIII i=1
cw -32/13 cd -2/13 cs 1 GT 3/26
";

/// The built-in claim sets.
pub fn claim_sets(name: &str) -> Result<ClaimSet> {
    match name {
        "newtypeFull" => parse_claims(name, NEWTYPE_FULL),
        "newtypeElementary" => {
            let full = parse_claims(name, NEWTYPE_FULL)?;
            Ok(ClaimSet {
                name: name.to_string(),
                claims: full.claims.into_iter().filter(|c| !c.deligne).collect(),
            })
        }
        "zhangOriginal" => parse_claims(name, ZHANG_ORIGINAL),
        other => Err(Error::Unknown { kind: "claim set", name: other.into() }),
    }
}

// ---------------------------------------------------------------------------
// open-interval sets over σ

/// Disjoint ascending open intervals.
pub type IntervalSet = Vec<(Rat, Rat)>;

fn interval_intersect(a: &IntervalSet, b: &IntervalSet) -> IntervalSet {
    let mut out = Vec::new();
    for (al, ah) in a {
        for (bl, bh) in b {
            let lo = if al > bl { al.clone() } else { bl.clone() };
            let hi = if ah < bh { ah.clone() } else { bh.clone() };
            if lo < hi {
                out.push((lo, hi));
            }
        }
    }
    out.sort();
    out
}

fn interval_union(mut a: IntervalSet, b: IntervalSet) -> IntervalSet {
    a.extend(b);
    a.sort();
    let mut out: IntervalSet = Vec::new();
    for (lo, hi) in a {
        match out.last_mut() {
            // open intervals only merge when they genuinely overlap
            Some((_, phi)) if lo < *phi => {
                if hi > *phi {
                    *phi = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// σ-interval of one conjunction of constraints at a fixed `(ϖ, δ)`;
/// `lo/hi` start from the structural window.
fn sigma_window(
    constraints: &[LinearConstraint],
    w: &Rat,
    d: &Rat,
    mut lo: Rat,
    mut hi: Rat,
) -> IntervalSet {
    for c in constraints {
        let base = &c.rhs - &c.cw * w - &c.cd * d;
        if c.cs.is_zero() {
            let ok = if c.strict { Rat::zero() < base } else { Rat::zero() <= base };
            if !ok {
                return Vec::new();
            }
        } else {
            let bound = &base / &c.cs;
            if c.cs.is_positive() {
                if bound < hi {
                    hi = bound;
                }
            } else if bound > lo {
                lo = bound;
            }
        }
    }
    if lo < hi {
        vec![(lo, hi)]
    } else {
        Vec::new()
    }
}

/// The exact set of `σ` making all selected claims at multiplicity ≤ `i`
/// hold at `(ϖ, δ)`, together with the structural conditions
/// `1/10 < σ < 1/2` and `σ > 2ϖ`. Where `σ > 1/6`, the Type III
/// constraints are dropped; the result is the union over both branches,
/// returned as disjoint open intervals.
pub fn sigma_interval(set: &ClaimSet, multiplicity: u32, w: &Rat, d: &Rat) -> IntervalSet {
    let struct_lo = {
        let tenth = rat(1, 10);
        let two_w = rat(2, 1) * w;
        if two_w > tenth { two_w } else { tenth }
    };
    let struct_hi = rat(1, 2);
    if struct_lo >= struct_hi {
        return Vec::new();
    }

    let union_of = |kind: ClaimKind| -> IntervalSet {
        let mut acc = Vec::new();
        for claim in set.claims_of(kind, multiplicity) {
            let win = sigma_window(
                &claim.constraints,
                w,
                d,
                struct_lo.clone(),
                struct_hi.clone(),
            );
            acc = interval_union(acc, win);
        }
        acc
    };

    let type_i = union_of(ClaimKind::TypeI);
    let type_ii = union_of(ClaimKind::TypeII);
    let type_iii = union_of(ClaimKind::TypeIII);
    let base = interval_intersect(&type_i, &type_ii);

    let with_iii = interval_intersect(&base, &type_iii);
    let omitted = interval_intersect(&base, &vec![(rat(1, 6), struct_hi.clone())]);
    interval_union(with_iii, omitted)
}

// ---------------------------------------------------------------------------
// Fourier-Motzkin elimination onto (ϖ, δ)

/// Eliminate variable `var` from a strict/non-strict system; exact for
/// real-valued feasibility.
fn fm_eliminate(system: &[LinearConstraint], var: usize) -> Vec<LinearConstraint> {
    let mut free = Vec::new();
    let mut lowers: Vec<(LinearConstraint, Rat)> = Vec::new(); // (constraint, coeff<0)
    let mut uppers: Vec<(LinearConstraint, Rat)> = Vec::new();
    for c in system {
        let coeff = c.coeff(var).clone();
        if coeff.is_zero() {
            free.push(c.clone());
        } else if coeff.is_positive() {
            uppers.push((c.clone(), coeff));
        } else {
            lowers.push((c.clone(), coeff));
        }
    }
    for (lc, la) in &lowers {
        for (uc, ua) in &uppers {
            // la < 0 < ua: combine  (uc/ua − lc/la) removes `var`
            let scale_l = -la.recip(); // positive
            let scale_u = ua.recip();
            let mk = |field: fn(&LinearConstraint) -> &Rat| {
                field(lc) * &scale_l + field(uc) * &scale_u
            };
            let combined = LinearConstraint {
                cw: mk(|c| &c.cw),
                cd: mk(|c| &c.cd),
                cs: mk(|c| &c.cs),
                rhs: mk(|c| &c.rhs),
                strict: lc.strict || uc.strict,
            };
            free.push(combined);
        }
    }
    // drop trivially true rows and exact duplicates
    let mut out: Vec<LinearConstraint> = Vec::new();
    for c in free {
        let trivial = c.cw.is_zero() && c.cd.is_zero() && c.cs.is_zero();
        if trivial {
            if (c.strict && c.rhs.is_positive()) || (!c.strict && !c.rhs.is_negative()) {
                continue; // always true
            }
            // always false: keep one marker row
            out.push(c.normalized());
            continue;
        }
        let n = c.normalized();
        if !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

/// Decide feasibility of a system over (ϖ, δ, σ) by full elimination.
fn fm_feasible(system: &[LinearConstraint]) -> bool {
    let mut sys = system.to_vec();
    for var in [2, 1, 0] {
        sys = fm_eliminate(&sys, var);
    }
    sys.iter().all(|c| {
        debug_assert!(c.cw.is_zero() && c.cd.is_zero() && c.cs.is_zero());
        if c.strict {
            c.rhs.is_positive()
        } else {
            !c.rhs.is_negative()
        }
    })
}

/// Does the system imply the strict constraint `c`?
fn fm_implies(system: &[LinearConstraint], c: &LinearConstraint) -> bool {
    // system ∧ ¬c infeasible, with ¬(lhs < rhs) = (−lhs ≤ −rhs)
    let negated = LinearConstraint {
        cw: -&c.cw,
        cd: -&c.cd,
        cs: -&c.cs,
        rhs: -&c.rhs,
        strict: !c.strict,
    };
    let mut sys = system.to_vec();
    sys.push(negated);
    !fm_feasible(&sys)
}

/// An open convex cell in the `(ϖ, δ)` plane: a conjunction of strict
/// inequalities with `cs = 0`.
pub type Cell = Vec<LinearConstraint>;

/// A region of admissible `(ϖ, δ)`: a union of open convex cells.
#[derive(Debug, Clone, Default)]
pub struct ExponentRegion {
    pub cells: Vec<Cell>,
}

impl ExponentRegion {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, w: &Rat, d: &Rat) -> bool {
        self.cells
            .iter()
            .any(|cell| cell.iter().all(|c| c.holds_at(w, d, &Rat::zero())))
    }

    /// Exact equivalence with a single conjunctive cell.
    pub fn equals_cell(&self, cell: &[LinearConstraint]) -> bool {
        let fwd = self
            .cells
            .iter()
            .all(|own| cell.iter().all(|c| fm_implies(own, c)));
        if !fwd {
            return false;
        }
        if self.cells.len() == 1 {
            return self.cells[0].iter().all(|c| fm_implies(cell, c));
        }
        // several incomparable cells cannot equal one convex cell unless
        // each contains it, which containment pruning would have collapsed
        false
    }
}

/// Structural domain constraints: `0 < ϖ < 1/4`, `0 < δ < 1/4 + ϖ`.
fn domain_constraints() -> Vec<LinearConstraint> {
    vec![
        LinearConstraint::greater(rat(1, 1), rat(0, 1), rat(0, 1), rat(0, 1)),
        LinearConstraint::less(rat(1, 1), rat(0, 1), rat(0, 1), rat(1, 4)),
        LinearConstraint::greater(rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1)),
        // δ < 1/4 + ϖ  ⟺  −ϖ + δ < 1/4
        LinearConstraint::less(rat(-1, 1), rat(1, 1), rat(0, 1), rat(1, 4)),
    ]
}

/// Structural σ conditions: `1/10 < σ < 1/2`, `σ > 2ϖ`.
fn sigma_conditions() -> Vec<LinearConstraint> {
    vec![
        LinearConstraint::greater(rat(0, 1), rat(0, 1), rat(1, 1), rat(1, 10)),
        LinearConstraint::less(rat(0, 1), rat(0, 1), rat(1, 1), rat(1, 2)),
        // σ > 2ϖ ⟺ 2ϖ − σ < 0
        LinearConstraint::less(rat(2, 1), rat(0, 1), rat(-1, 1), rat(0, 1)),
    ]
}

/// The exact `(ϖ, δ)` region where the distribution estimate holds at
/// multiplicity `i`: the union over claim selections (one Type I claim,
/// one Type II claim, a Type III claim or the `σ > 1/6` omission branch)
/// of the σ-eliminated cells, pruned to an irredundant form.
pub fn mpz_region(set: &ClaimSet, multiplicity: u32) -> ExponentRegion {
    let type_i = set.claims_of(ClaimKind::TypeI, multiplicity);
    let type_ii = set.claims_of(ClaimKind::TypeII, multiplicity);
    let type_iii = set.claims_of(ClaimKind::TypeIII, multiplicity);

    let mut cells: Vec<Cell> = Vec::new();
    for ci in &type_i {
        for cii in &type_ii {
            // branches: each Type III claim, plus the σ > 1/6 omission
            let mut branches: Vec<Vec<LinearConstraint>> = type_iii
                .iter()
                .map(|ciii| ciii.constraints.clone())
                .collect();
            branches.push(vec![LinearConstraint::greater(
                rat(0, 1),
                rat(0, 1),
                rat(1, 1),
                rat(1, 6),
            )]);
            for branch in branches {
                let mut sys: Vec<LinearConstraint> = Vec::new();
                sys.extend(ci.constraints.iter().cloned());
                sys.extend(cii.constraints.iter().cloned());
                sys.extend(branch);
                sys.extend(sigma_conditions());
                sys.extend(domain_constraints());
                let cell = fm_eliminate(&sys, 2);
                if fm_feasible(&cell) {
                    cells.push(simplify_cell(cell));
                }
            }
        }
    }

    // drop cells contained in another cell, then dedupe
    let mut keep = vec![true; cells.len()];
    for a in 0..cells.len() {
        if !keep[a] {
            continue;
        }
        for b in 0..cells.len() {
            if a == b || !keep[b] {
                continue;
            }
            // cell a ⊆ cell b if every constraint of b holds on a
            let contained = cells[b].iter().all(|c| fm_implies(&cells[a], c));
            if contained {
                let equal = cells[a].iter().all(|c| fm_implies(&cells[b], c));
                if !equal || a > b {
                    keep[a] = false;
                    break;
                }
            }
        }
    }
    ExponentRegion {
        cells: cells
            .into_iter()
            .zip(keep)
            .filter_map(|(c, k)| k.then_some(c))
            .collect(),
    }
}

/// Remove constraints implied by the others.
fn simplify_cell(cell: Cell) -> Cell {
    let mut out = cell;
    let mut i = 0;
    while i < out.len() {
        let mut rest = out.clone();
        let c = rest.remove(i);
        if fm_implies(&rest, &c) {
            out.remove(i);
        } else {
            i += 1;
        }
    }
    out
}

/// How `δ` is pinned when optimizing the distribution exponent.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaPolicy {
    /// `δ → 0` (the supremum along the δ = 0 frontier).
    Zero,
    /// `δ = c·ϖ`.
    Ray(Rat),
}

/// The supremum of `2ϖ` over the region under the δ-policy, as an exact
/// rational. Strict inequalities everywhere make this an unattained
/// supremum (hence "open"); `None` when the region is empty or the policy
/// line misses it.
pub fn max_distribution_exponent(
    set: &ClaimSet,
    multiplicity: u32,
    policy: &DeltaPolicy,
) -> Option<Rat> {
    let region = mpz_region(set, multiplicity);
    let mut best: Option<Rat> = None;
    for cell in &region.cells {
        // substitute δ per policy into the closure of the cell
        let mut uppers: Vec<Rat> = Vec::new();
        let mut lowers: Vec<Rat> = Vec::new();
        let mut feasible = true;
        for c in cell {
            let coeff = match policy {
                DeltaPolicy::Zero => c.cw.clone(),
                DeltaPolicy::Ray(slope) => &c.cw + &c.cd * slope,
            };
            if policy == &DeltaPolicy::Zero && c.cw.is_zero() && c.cd.is_negative() {
                // pure lower bound on δ: satisfied in the limit δ → 0⁺
                continue;
            }
            if coeff.is_zero() {
                // constant row of the closure: 0 ≤ rhs
                if c.rhs.is_negative() {
                    feasible = false;
                    break;
                }
            } else if coeff.is_positive() {
                uppers.push(&c.rhs / &coeff);
            } else {
                lowers.push(&c.rhs / &coeff);
            }
        }
        if !feasible {
            continue;
        }
        let sup = uppers.into_iter().min();
        let Some(sup) = sup else { continue }; // unbounded cannot happen here
        if lowers.iter().any(|lo| lo > &sup) {
            continue;
        }
        if sup.is_negative() {
            continue;
        }
        let two_sup = rat(2, 1) * sup;
        best = match best {
            Some(b) if b >= two_sup => Some(b),
            _ => Some(two_sup),
        };
    }
    best
}
