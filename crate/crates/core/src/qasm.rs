//! OpenQASM 2.0 export of the two-step, two-angle (one bit each) walk circuit.
//!
//! Qubits: `q[0] = phi`, `q[1] = psi`, `q[2] = move`, `q[3] = coin`. Move 0
//! updates `phi`, move 1 updates `psi`. The coin preparation first rotates every
//! branch by `pi` and then corrects only the branches whose acceptance is below
//! one. Corrections are grouped pairwise so each needs only two controls:
//!
//! | group | controls            | members `(phi psi move)` |
//! |-------|---------------------|--------------------------|
//! | `R0`  | `phi = 0, move = 0` | `000`, `010`             |
//! | `R1`  | `psi = 0, move = 1` | `001`, `101`             |
//! | `R2`  | `phi = 1, move = 0` | `100`, `110`             |
//! | `R3`  | `psi = 1, move = 1` | `011`, `111`             |
//!
//! Each group applies the mean of its members' exact angles. On landscapes
//! whose ground state is `00` and where raising either angle costs energy,
//! `R2` and `R3` vanish.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::cwalk::acceptance;
use crate::error::{Error, Result};
use crate::landscape::EnergyLandscape;

pub const PHI: usize = 0;
pub const PSI: usize = 1;
pub const MOVE: usize = 2;
pub const COIN: usize = 3;
const N_QUBITS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct HardwareCircuitSpec {
    pub landscape: EnergyLandscape,
    pub beta_pair: (f64, f64),
    /// Group corrections with `|angle - pi|` at or below this are not emitted.
    pub grouping_tolerance: f64,
}

impl HardwareCircuitSpec {
    pub fn new(landscape: EnergyLandscape, beta_pair: (f64, f64), grouping_tolerance: f64) -> Result<Self> {
        check_shape(&landscape)?;
        if !(beta_pair.0 >= 0.0 && beta_pair.1 >= 0.0) {
            return Err(Error::field("beta_pair", "inverse temperatures must be >= 0"));
        }
        if !(grouping_tolerance >= 0.0) {
            return Err(Error::field("grouping_tolerance", "must be >= 0"));
        }
        Ok(HardwareCircuitSpec {
            landscape,
            beta_pair,
            grouping_tolerance,
        })
    }
}

fn check_shape(landscape: &EnergyLandscape) -> Result<()> {
    if landscape.n_angles() != 2 || landscape.bits() != 1 {
        return Err(Error::Unsupported(format!(
            "circuit export needs 2 angles at 1 bit, got {} angles at {} bits",
            landscape.n_angles(),
            landscape.bits()
        )));
    }
    Ok(())
}

/// Exact coin angle `2 arcsin(sqrt(A))` for control `(phi, psi, move)`.
pub fn exact_angle(landscape: &EnergyLandscape, beta: f64, phi: usize, psi: usize, mv: usize) -> f64 {
    let x = 2 * phi + psi;
    let y = if mv == 0 { x ^ 2 } else { x ^ 1 };
    let a = acceptance(beta, landscape.energy(x), landscape.energy(y));
    2.0 * a.sqrt().asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationGroup {
    pub name: &'static str,
    /// `(qubit, required value)` pairs.
    pub controls: [(usize, usize); 2],
    /// Members as `(phi, psi, move)`.
    pub members: [(usize, usize, usize); 2],
    pub member_angles: [f64; 2],
    /// Mean of the member angles.
    pub angle: f64,
    /// `|member - mean|`, equal for both members.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupedRotations {
    pub beta: f64,
    pub groups: [RotationGroup; 4],
    pub grouping_error: f64,
}

impl GroupedRotations {
    pub fn r0(&self) -> f64 {
        self.groups[0].angle
    }

    pub fn r1(&self) -> f64 {
        self.groups[1].angle
    }
}

const GROUP_LAYOUT: [(&str, [(usize, usize); 2], [(usize, usize, usize); 2]); 4] = [
    ("R0", [(PHI, 0), (MOVE, 0)], [(0, 0, 0), (0, 1, 0)]),
    ("R1", [(PSI, 0), (MOVE, 1)], [(0, 0, 1), (1, 0, 1)]),
    ("R2", [(PHI, 1), (MOVE, 0)], [(1, 0, 0), (1, 1, 0)]),
    ("R3", [(PSI, 1), (MOVE, 1)], [(0, 1, 1), (1, 1, 1)]),
];

pub fn grouped_rotations(landscape: &EnergyLandscape, beta: f64) -> Result<GroupedRotations> {
    check_shape(landscape)?;
    let groups = GROUP_LAYOUT.map(|(name, controls, members)| {
        let member_angles = members.map(|(phi, psi, mv)| exact_angle(landscape, beta, phi, psi, mv));
        let angle = 0.5 * (member_angles[0] + member_angles[1]);
        RotationGroup {
            name,
            controls,
            members,
            member_angles,
            angle,
            deviation: 0.5 * (member_angles[0] - member_angles[1]).abs(),
        }
    });
    let grouping_error = groups.iter().map(|g| g.deviation).fold(0.0, f64::max);
    Ok(GroupedRotations {
        beta,
        groups,
        grouping_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Rx(f64, usize),
    Ry(f64, usize),
    Cx(usize, usize),
    Ccx(usize, usize, usize),
    Barrier,
    Measure(usize, usize),
}

fn push_cry(gates: &mut Vec<Gate>, theta: f64, control: usize, target: usize) {
    gates.push(Gate::Ry(0.5 * theta, target));
    gates.push(Gate::Cx(control, target));
    gates.push(Gate::Ry(-0.5 * theta, target));
    gates.push(Gate::Cx(control, target));
}

/// Doubly-controlled `Ry(theta)`, controls active on the given values.
fn push_ccry(gates: &mut Vec<Gate>, theta: f64, controls: [(usize, usize); 2], target: usize) {
    let flips: Vec<usize> = controls.iter().filter(|c| c.1 == 0).map(|c| c.0).collect();
    gates.extend(flips.iter().map(|&q| Gate::X(q)));
    let (a, b) = (controls[0].0, controls[1].0);
    push_cry(gates, 0.5 * theta, b, target);
    gates.push(Gate::Cx(a, b));
    push_cry(gates, -0.5 * theta, b, target);
    gates.push(Gate::Cx(a, b));
    push_cry(gates, 0.5 * theta, a, target);
    gates.extend(flips.iter().map(|&q| Gate::X(q)));
}

/// The coin preparation `B` (or its inverse): `Ry(pi)` on the coin, then one
/// doubly-controlled correction per group whose angle differs from `pi` by
/// more than `tolerance`.
pub fn coin_block(rot: &GroupedRotations, tolerance: f64, inverse: bool) -> Vec<Gate> {
    let mut gates = Vec::new();
    let corrections: Vec<_> = rot
        .groups
        .iter()
        .map(|g| (g.controls, g.angle - PI))
        .filter(|(_, c)| c.abs() > tolerance)
        .collect();
    if inverse {
        for (controls, c) in corrections.iter().rev() {
            push_ccry(&mut gates, -c, *controls, COIN);
        }
        gates.push(Gate::Ry(-PI, COIN));
    } else {
        gates.push(Gate::Ry(PI, COIN));
        for (controls, c) in &corrections {
            push_ccry(&mut gates, *c, *controls, COIN);
        }
    }
    gates
}

fn flip_block() -> Vec<Gate> {
    vec![
        Gate::X(MOVE),
        Gate::Ccx(COIN, MOVE, PHI),
        Gate::X(MOVE),
        Gate::Ccx(COIN, MOVE, PSI),
    ]
}

fn reflect_block() -> Vec<Gate> {
    vec![
        Gate::X(MOVE),
        Gate::X(COIN),
        Gate::H(COIN),
        Gate::Cx(MOVE, COIN),
        Gate::H(COIN),
        Gate::X(MOVE),
        Gate::X(COIN),
    ]
}

/// Full gate list: uniform superposition on the angles, two walk steps (the
/// last without uncomputing move and coin), then measurement of both angles.
pub fn circuit_gates(spec: &HardwareCircuitSpec) -> Result<(Vec<Gate>, [GroupedRotations; 2])> {
    let rot1 = grouped_rotations(&spec.landscape, spec.beta_pair.0)?;
    let rot2 = grouped_rotations(&spec.landscape, spec.beta_pair.1)?;
    let tol = spec.grouping_tolerance;
    let mut g = vec![Gate::H(PHI), Gate::H(PSI), Gate::Barrier];

    g.push(Gate::H(MOVE));
    g.extend(coin_block(&rot1, tol, false));
    g.extend(flip_block());
    g.extend(coin_block(&rot1, tol, true));
    g.push(Gate::H(MOVE));
    g.extend(reflect_block());
    g.push(Gate::Barrier);

    g.push(Gate::H(MOVE));
    g.extend(coin_block(&rot2, tol, false));
    g.extend(flip_block());
    g.push(Gate::Barrier);

    g.push(Gate::Measure(PHI, 0));
    g.push(Gate::Measure(PSI, 1));
    Ok((g, [rot1, rot2]))
}

fn fmt_angle(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:?}")
}

fn render_gate(out: &mut String, gate: &Gate) {
    match *gate {
        Gate::H(q) => writeln!(out, "h q[{q}];"),
        Gate::X(q) => writeln!(out, "x q[{q}];"),
        Gate::Rx(t, q) => writeln!(out, "rx({}) q[{q}];", fmt_angle(t)),
        Gate::Ry(t, q) => writeln!(out, "ry({}) q[{q}];", fmt_angle(t)),
        Gate::Cx(c, t) => writeln!(out, "cx q[{c}],q[{t}];"),
        Gate::Ccx(a, b, t) => writeln!(out, "ccx q[{a}],q[{b}],q[{t}];"),
        Gate::Barrier => writeln!(out, "barrier q;"),
        Gate::Measure(q, c) => writeln!(out, "measure q[{q}] -> c[{c}];"),
    }
    .expect("writing to a String cannot fail");
}

/// Export report: the OpenQASM text plus the rotation data it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportedCircuit {
    pub text: String,
    pub rotations: [GroupedRotations; 2],
    pub grouping_error: f64,
}

pub fn export_circuit(spec: &HardwareCircuitSpec) -> Result<ExportedCircuit> {
    let (gates, rotations) = circuit_gates(spec)?;
    let grouping_error = rotations[0].grouping_error.max(rotations[1].grouping_error);
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    let _ = writeln!(out, "// metrofold two-step coined Metropolis walk");
    let _ = writeln!(out, "// landscape: {}", spec.landscape.name());
    let _ = writeln!(out, "// energies: {:?}", spec.landscape.energies());
    let _ = writeln!(
        out,
        "// beta_step1: {} beta_step2: {}",
        fmt_angle(spec.beta_pair.0),
        fmt_angle(spec.beta_pair.1)
    );
    let _ = writeln!(out, "// grouping_tolerance: {}", fmt_angle(spec.grouping_tolerance));
    for (step, rot) in rotations.iter().enumerate() {
        let angles: Vec<String> = rot
            .groups
            .iter()
            .map(|g| format!("{}={}", g.name, fmt_angle(g.angle)))
            .collect();
        let _ = writeln!(
            out,
            "// step{} rotations: {} grouping_error: {}",
            step + 1,
            angles.join(" "),
            fmt_angle(rot.grouping_error)
        );
    }
    let _ = writeln!(out, "// grouping_error: {}", fmt_angle(grouping_error));
    let _ = writeln!(out, "// qubits: q[0]=phi q[1]=psi q[2]=move q[3]=coin");
    out.push_str("qreg q[4];\n");
    out.push_str("creg c[2];\n");
    for gate in &gates {
        render_gate(&mut out, gate);
    }
    Ok(ExportedCircuit {
        text: out,
        rotations,
        grouping_error,
    })
}

/// A parsed OpenQASM 2.0 program restricted to the gates this module emits.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub n_qubits: usize,
    pub n_clbits: usize,
    pub gates: Vec<Gate>,
}

struct ExprParser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.chars.peek().is_some_and(|c| c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn expr(&mut self) -> std::result::Result<f64, String> {
        let mut v = self.term()?;
        loop {
            self.skip_ws();
            match self.chars.peek() {
                Some('+') => {
                    self.chars.next();
                    v += self.term()?;
                }
                Some('-') => {
                    self.chars.next();
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> std::result::Result<f64, String> {
        let mut v = self.factor()?;
        loop {
            self.skip_ws();
            match self.chars.peek() {
                Some('*') => {
                    self.chars.next();
                    v *= self.factor()?;
                }
                Some('/') => {
                    self.chars.next();
                    v /= self.factor()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn factor(&mut self) -> std::result::Result<f64, String> {
        self.skip_ws();
        match self.chars.peek().copied() {
            Some('-') => {
                self.chars.next();
                Ok(-self.factor()?)
            }
            Some('+') => {
                self.chars.next();
                self.factor()
            }
            Some('(') => {
                self.chars.next();
                let v = self.expr()?;
                self.skip_ws();
                match self.chars.next() {
                    Some(')') => Ok(v),
                    _ => Err("expected `)`".into()),
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let mut ident = String::new();
                while let Some(&c) = self.chars.peek() {
                    if !c.is_ascii_alphanumeric() {
                        break;
                    }
                    ident.push(c);
                    self.chars.next();
                }
                if ident == "pi" {
                    Ok(PI)
                } else {
                    Err(format!("unknown identifier `{ident}`"))
                }
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let mut lit = String::new();
                while let Some(&c) = self.chars.peek() {
                    let exp_sign = matches!(c, '+' | '-') && lit.ends_with(['e', 'E']);
                    if !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign) {
                        break;
                    }
                    lit.push(c);
                    self.chars.next();
                }
                lit.parse::<f64>().map_err(|e| format!("bad number `{lit}`: {e}"))
            }
            other => Err(format!("unexpected {other:?} in expression")),
        }
    }
}

fn parse_expr(text: &str) -> std::result::Result<f64, String> {
    let mut p = ExprParser {
        chars: text.chars().peekable(),
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.chars.peek().is_some() {
        return Err(format!("trailing input in `{text}`"));
    }
    Ok(v)
}

/// Strips `//` comments and returns `(line, statement)` pairs split on `;`.
fn statements(text: &str) -> std::result::Result<Vec<(usize, String)>, (usize, String)> {
    let mut out = Vec::new();
    let mut pending = String::new();
    let mut start = 1;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("");
        for ch in line.chars() {
            if ch == ';' {
                let stmt = pending.trim().to_string();
                if stmt.is_empty() {
                    return Err((i + 1, "empty statement".into()));
                }
                out.push((start, stmt));
                pending.clear();
            } else {
                if pending.trim().is_empty() {
                    start = i + 1;
                }
                pending.push(ch);
            }
        }
        pending.push(' ');
    }
    if !pending.trim().is_empty() {
        return Err((start, "missing `;`".into()));
    }
    Ok(out)
}

fn parse_operand(
    text: &str,
    reg: &str,
    size: usize,
) -> std::result::Result<usize, String> {
    let text = text.trim();
    let inner = text
        .strip_prefix(reg)
        .and_then(|r| r.trim_start().strip_prefix('['))
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected `{reg}[i]`, got `{text}`"))?;
    let idx: usize = inner
        .trim()
        .parse()
        .map_err(|_| format!("bad index in `{text}`"))?;
    if idx >= size {
        return Err(format!("index {idx} out of range for `{reg}` of size {size}"));
    }
    Ok(idx)
}

/// Grammar check and parse for the OpenQASM 2.0 subset used here:
/// header, `include "qelib1.inc"`, one `qreg`, one `creg`, gates
/// `h x rx ry cx ccx`, `barrier` and `measure`.
pub fn parse_qasm(text: &str) -> Result<Program> {
    let err = |line: usize, message: String| Error::QasmParse { line, message };
    let stmts = statements(text).map_err(|(l, m)| err(l, m))?;
    let mut iter = stmts.into_iter();
    match iter.next() {
        Some((_, s)) if s.split_whitespace().collect::<Vec<_>>() == ["OPENQASM", "2.0"] => {}
        Some((l, s)) => return Err(err(l, format!("expected `OPENQASM 2.0`, got `{s}`"))),
        None => return Err(err(1, "empty program".into())),
    }
    let mut qreg: Option<(String, usize)> = None;
    let mut creg: Option<(String, usize)> = None;
    let mut gates = Vec::new();
    for (line, stmt) in iter {
        let (head, rest) = match stmt.find(|c: char| c.is_whitespace() || c == '(') {
            Some(i) => (&stmt[..i], stmt[i..].trim()),
            None => (stmt.as_str(), ""),
        };
        let decl = |rest: &str| -> std::result::Result<(String, usize), String> {
            let open = rest.find('[').ok_or("expected `name[size]`")?;
            let name = rest[..open].trim();
            let size = rest[open + 1..]
                .strip_suffix(']')
                .ok_or("expected `]`")?
                .trim()
                .parse::<usize>()
                .map_err(|_| "bad register size")?;
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(format!("bad register name `{name}`"));
            }
            Ok((name.to_string(), size))
        };
        match head {
            "include" => {
                if rest != "\"qelib1.inc\"" {
                    return Err(err(line, format!("unsupported include {rest}")));
                }
            }
            "qreg" => {
                if qreg.is_some() {
                    return Err(err(line, "only one qreg supported".into()));
                }
                qreg = Some(decl(rest).map_err(|m| err(line, m))?);
            }
            "creg" => {
                if creg.is_some() {
                    return Err(err(line, "only one creg supported".into()));
                }
                creg = Some(decl(rest).map_err(|m| err(line, m))?);
            }
            _ => {
                let (qname, qsize) = qreg
                    .clone()
                    .ok_or_else(|| err(line, "gate before qreg declaration".into()))?;
                let q = |s: &str| parse_operand(s, &qname, qsize).map_err(|m| err(line, m));
                let (params, operands) = if let Some(after) = rest.strip_prefix('(') {
                    let close = after
                        .rfind(')')
                        .ok_or_else(|| err(line, "unclosed parameter list".into()))?;
                    (Some(&after[..close]), after[close + 1..].trim())
                } else {
                    (None, rest)
                };
                let args: Vec<&str> = if operands.is_empty() {
                    vec![]
                } else {
                    operands.split(',').map(str::trim).collect()
                };
                let angle = || -> Result<f64> {
                    let p = params.ok_or_else(|| err(line, format!("`{head}` needs an angle")))?;
                    parse_expr(p).map_err(|m| err(line, m))
                };
                let arity = |n: usize| -> Result<()> {
                    if args.len() != n {
                        return Err(err(line, format!("`{head}` takes {n} operand(s), got {}", args.len())));
                    }
                    Ok(())
                };
                if params.is_some() && !matches!(head, "rx" | "ry") {
                    return Err(err(line, format!("`{head}` takes no parameters")));
                }
                let gate = match head {
                    "h" => {
                        arity(1)?;
                        Gate::H(q(args[0])?)
                    }
                    "x" => {
                        arity(1)?;
                        Gate::X(q(args[0])?)
                    }
                    "rx" => {
                        arity(1)?;
                        Gate::Rx(angle()?, q(args[0])?)
                    }
                    "ry" => {
                        arity(1)?;
                        Gate::Ry(angle()?, q(args[0])?)
                    }
                    "cx" => {
                        arity(2)?;
                        let (c, t) = (q(args[0])?, q(args[1])?);
                        if c == t {
                            return Err(err(line, "cx operands must differ".into()));
                        }
                        Gate::Cx(c, t)
                    }
                    "ccx" => {
                        arity(3)?;
                        let (a, b, t) = (q(args[0])?, q(args[1])?, q(args[2])?);
                        if a == b || a == t || b == t {
                            return Err(err(line, "ccx operands must differ".into()));
                        }
                        Gate::Ccx(a, b, t)
                    }
                    "barrier" => {
                        if args != [qname.as_str()] {
                            for a in &args {
                                q(a)?;
                            }
                        }
                        Gate::Barrier
                    }
                    "measure" => {
                        let (lhs, rhs) = operands
                            .split_once("->")
                            .ok_or_else(|| err(line, "measure needs `->`".into()))?;
                        let (cname, csize) = creg
                            .clone()
                            .ok_or_else(|| err(line, "measure before creg declaration".into()))?;
                        let c = parse_operand(rhs, &cname, csize).map_err(|m| err(line, m))?;
                        Gate::Measure(q(lhs)?, c)
                    }
                    other => return Err(err(line, format!("unsupported statement `{other}`"))),
                };
                gates.push(gate);
            }
        }
    }
    let n_qubits = qreg.map(|r| r.1).ok_or_else(|| err(0, "missing qreg".into()))?;
    Ok(Program {
        n_qubits,
        n_clbits: creg.map_or(0, |r| r.1),
        gates,
    })
}

/// Applies `gates` to a statevector where qubit `i` is bit `i` of the index.
/// Measurements and barriers are ignored.
pub fn simulate_gates(n_qubits: usize, gates: &[Gate], state: &mut [Complex64]) {
    assert_eq!(state.len(), 1 << n_qubits);
    let single = |state: &mut [Complex64], q: usize, m: [[Complex64; 2]; 2]| {
        let bit = 1 << q;
        for i in 0..state.len() {
            if i & bit == 0 {
                let (a, b) = (state[i], state[i | bit]);
                state[i] = m[0][0] * a + m[0][1] * b;
                state[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    };
    let re = |x: f64| Complex64::new(x, 0.0);
    for gate in gates {
        match *gate {
            Gate::H(q) => single(state, q, [[re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)], [re(FRAC_1_SQRT_2), re(-FRAC_1_SQRT_2)]]),
            Gate::X(q) => single(state, q, [[re(0.0), re(1.0)], [re(1.0), re(0.0)]]),
            Gate::Ry(t, q) => {
                let (s, c) = (0.5 * t).sin_cos();
                single(state, q, [[re(c), re(-s)], [re(s), re(c)]]);
            }
            Gate::Rx(t, q) => {
                let (s, c) = (0.5 * t).sin_cos();
                let mis = Complex64::new(0.0, -s);
                single(state, q, [[re(c), mis], [mis, re(c)]]);
            }
            Gate::Cx(c, t) => {
                for i in 0..state.len() {
                    if i & (1 << c) != 0 && i & (1 << t) == 0 {
                        state.swap(i, i | (1 << t));
                    }
                }
            }
            Gate::Ccx(a, b, t) => {
                for i in 0..state.len() {
                    if i & (1 << a) != 0 && i & (1 << b) != 0 && i & (1 << t) == 0 {
                        state.swap(i, i | (1 << t));
                    }
                }
            }
            Gate::Barrier | Gate::Measure(..) => {}
        }
    }
}

/// Runs a parsed program from `|0000>` and returns the probability of each
/// angle configuration `2 * phi + psi`, tracing out move and coin.
pub fn simulate_configuration_marginal(program: &Program) -> Result<[f64; 4]> {
    if program.n_qubits != N_QUBITS {
        return Err(Error::Unsupported(format!(
            "expected a {N_QUBITS}-qubit program, got {}",
            program.n_qubits
        )));
    }
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << N_QUBITS];
    state[0] = Complex64::new(1.0, 0.0);
    simulate_gates(N_QUBITS, &program.gates, &mut state);
    let mut marginal = [0.0; 4];
    for (i, a) in state.iter().enumerate() {
        let phi = (i >> PHI) & 1;
        let psi = (i >> PSI) & 1;
        marginal[2 * phi + psi] += a.norm_sqr();
    }
    Ok(marginal)
}
