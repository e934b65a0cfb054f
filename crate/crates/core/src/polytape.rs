//! A machine tape stored as a polynomial.
//!
//! Cell `n` of the tape is the coefficient of `x^n`; blanks are absent terms.
//! Reading is a coefficient extraction (also available the long way, through
//! the formal derivative), writing subtracts the old monomial and adds the
//! new one, and whole-tape shifts multiply by `x^t`. A small Turing-machine
//! runner executes on this representation and on a plain growable array at
//! the same time, checking after every step that the two never diverge.

use std::collections::{BTreeMap, HashMap};

use num::{BigInt, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfunc::SparsePoly;

/// Polynomial-backed tape over an alphabet `{0, .., k-1}`, symbol 0 blank.
///
/// `head_offset` records the cumulative right shift applied so far; logical
/// cell `i` lives at exponent `i + head_offset`. Tracking it makes left
/// shifts safe: they are only legal while they cannot push exponents
/// negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyTape {
    poly: SparsePoly,
    alphabet: u32,
    head_offset: u64,
}

impl PolyTape {
    pub fn blank(alphabet: u32) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::AlphabetTooSmall(alphabet));
        }
        Ok(PolyTape {
            poly: SparsePoly::zero(),
            alphabet,
            head_offset: 0,
        })
    }

    pub fn from_symbols(alphabet: u32, symbols: &[u32]) -> Result<Self> {
        let mut tape = PolyTape::blank(alphabet)?;
        for (i, &s) in symbols.iter().enumerate() {
            tape = tape.write_cell(i as u64, s)?;
        }
        Ok(tape)
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn head_offset(&self) -> u64 {
        self.head_offset
    }

    pub fn poly(&self) -> &SparsePoly {
        &self.poly
    }

    /// Direct coefficient lookup; absent cells read as blank.
    pub fn read_cell(&self, n: u64) -> u32 {
        self.poly
            .coefficient(&BigInt::from(n))
            .to_u32()
            .expect("tape coefficients stay inside the alphabet")
    }

    /// The same read routed through the n-th formal derivative at zero.
    /// Exists purely so the slow route can be checked against the lookup.
    pub fn read_cell_derivative(&self, n: u64) -> Result<u32> {
        let value = self.poly.derivative_read(n)?;
        Ok(value.to_u32().expect("tape coefficients stay inside the alphabet"))
    }

    /// Replaces cell `i`: subtracts the current monomial there, then adds
    /// the new symbol's monomial.
    pub fn write_cell(&self, i: u64, symbol: u32) -> Result<PolyTape> {
        if symbol >= self.alphabet {
            return Err(Error::SymbolOutOfAlphabet {
                symbol,
                alphabet: self.alphabet,
            });
        }
        let mut poly = self.poly.clone();
        let exponent = BigInt::from(i);
        let old = poly.coefficient(&exponent);
        poly.add_term(exponent.clone(), -old);
        poly.add_term(exponent, BigInt::from(symbol));
        Ok(PolyTape {
            poly,
            alphabet: self.alphabet,
            head_offset: self.head_offset,
        })
    }

    /// Shifts every cell `t` places right (`poly * x^t`); the vacated cells
    /// are blank.
    pub fn shift_right(&self, t: u64) -> PolyTape {
        let shift = BigInt::from(t);
        let poly = SparsePoly::from_terms(
            self.poly.terms().map(|(e, c)| (e + &shift, c.clone())),
        );
        PolyTape {
            poly,
            alphabet: self.alphabet,
            head_offset: self.head_offset + t,
        }
    }

    /// Shifts left (`poly * x^-t`), legal only up to the accumulated right
    /// shift; anything further would need negative exponents.
    pub fn shift_left(&self, t: u64) -> Result<PolyTape> {
        if t > self.head_offset {
            return Err(Error::InvalidLeftShift {
                shift: t,
                offset: self.head_offset,
            });
        }
        let shift = BigInt::from(t);
        let poly = SparsePoly::from_terms(
            self.poly.terms().map(|(e, c)| (e - &shift, c.clone())),
        );
        Ok(PolyTape {
            poly,
            alphabet: self.alphabet,
            head_offset: self.head_offset - t,
        })
    }

    /// Occupied cells by absolute position.
    pub fn symbols(&self) -> BTreeMap<u64, u32> {
        self.poly
            .terms()
            .map(|(e, c)| {
                (
                    e.to_u64().expect("tape exponents are non-negative"),
                    c.to_u32().expect("tape coefficients stay inside the alphabet"),
                )
            })
            .collect()
    }

    /// Occupied cells in logical coordinates (absolute minus the accumulated
    /// shift), for comparison against a reference tape.
    pub fn logical_symbols(&self) -> BTreeMap<i64, u32> {
        self.symbols()
            .into_iter()
            .map(|(i, s)| (i as i64 - self.head_offset as i64, s))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

/// One table row: `(state, read) -> (state', write, move)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRule(pub String, pub u32, pub String, pub u32, pub Move);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmDescription {
    /// Alphabet size; symbols are integers `0..k` with 0 blank.
    pub k: u32,
    pub states: Vec<String>,
    pub transitions: Vec<TransitionRule>,
    pub start: String,
    pub accept: String,
    pub reject: String,
}

impl TmDescription {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::AlphabetTooSmall(self.k));
        }
        for name in [&self.start, &self.accept, &self.reject] {
            if !self.states.contains(name) {
                return Err(Error::UnknownState(name.clone()));
            }
        }
        for rule in &self.transitions {
            for name in [&rule.0, &rule.2] {
                if !self.states.contains(name) {
                    return Err(Error::UnknownState(name.clone()));
                }
            }
            for symbol in [rule.1, rule.3] {
                if symbol >= self.k {
                    return Err(Error::SymbolOutOfAlphabet {
                        symbol,
                        alphabet: self.k,
                    });
                }
            }
        }
        Ok(())
    }

    fn table(&self) -> HashMap<(&str, u32), &TransitionRule> {
        self.transitions
            .iter()
            .map(|r| ((r.0.as_str(), r.1), r))
            .collect()
    }
}

/// Plain growable-array tape used as the reference in lockstep runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayTape {
    cells: Vec<u32>,
    /// Logical index of `cells[0]`; goes negative as the tape grows left.
    origin: i64,
    head: i64,
}

impl ArrayTape {
    pub fn new(input: &[u32]) -> Self {
        ArrayTape {
            cells: input.to_vec(),
            origin: 0,
            head: 0,
        }
    }

    pub fn head(&self) -> i64 {
        self.head
    }

    pub fn read(&self) -> u32 {
        let idx = self.head - self.origin;
        if idx < 0 || idx as usize >= self.cells.len() {
            0
        } else {
            self.cells[idx as usize]
        }
    }

    pub fn write(&mut self, symbol: u32) {
        let mut idx = self.head - self.origin;
        while idx < 0 {
            self.cells.insert(0, 0);
            self.origin -= 1;
            idx += 1;
        }
        while idx as usize >= self.cells.len() {
            self.cells.push(0);
        }
        self.cells[idx as usize] = symbol;
    }

    pub fn step(&mut self, mv: Move) {
        match mv {
            Move::Left => self.head -= 1,
            Move::Right => self.head += 1,
        }
    }

    pub fn nonblank(&self) -> BTreeMap<i64, u32> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(i, &s)| (self.origin + i as i64, s))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaltStatus {
    Accepted,
    Rejected,
    StepLimitExceeded,
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub step: usize,
    pub state: String,
    pub head: i64,
    pub read: u32,
    pub write: u32,
    pub mv: Move,
}

#[derive(Clone, Debug)]
pub struct TmRun {
    pub status: HaltStatus,
    pub steps: usize,
    pub tape: PolyTape,
    pub reference: ArrayTape,
    /// Physical head position on the polynomial tape.
    pub head: u64,
    pub trace: Vec<TraceStep>,
}

impl TmRun {
    /// Logical head position, comparable with the reference tape's.
    pub fn logical_head(&self) -> i64 {
        self.head as i64 - self.tape.head_offset() as i64
    }
}

/// Headroom added whenever the head would fall off the left edge.
const LEFT_GROWTH: u64 = 8;

/// Executes a machine on a polynomial tape and a reference array tape in
/// lockstep, verifying tape contents and head positions after every step.
pub fn run_tm(machine: &TmDescription, input: &[u32], max_steps: usize) -> Result<TmRun> {
    machine.validate()?;
    let table = machine.table();

    let mut tape = PolyTape::from_symbols(machine.k, input)?;
    let mut head: u64 = 0;
    let mut reference = ArrayTape::new(input);
    let mut state = machine.start.clone();
    let mut trace = Vec::new();

    let mut steps = 0;
    let status = loop {
        if state == machine.accept {
            break HaltStatus::Accepted;
        }
        if state == machine.reject {
            break HaltStatus::Rejected;
        }
        if steps >= max_steps {
            break HaltStatus::StepLimitExceeded;
        }

        let read = tape.read_cell(head);
        if read != reference.read() {
            return Err(Error::LockstepDivergence { step: steps });
        }
        let rule = table
            .get(&(state.as_str(), read))
            .ok_or_else(|| Error::MissingTransition {
                state: state.clone(),
                symbol: read,
            })?;

        tape = tape.write_cell(head, rule.3)?;
        reference.write(rule.3);
        match rule.4 {
            Move::Right => head += 1,
            Move::Left => {
                if head == 0 {
                    tape = tape.shift_right(LEFT_GROWTH);
                    head = LEFT_GROWTH;
                }
                head -= 1;
            }
        }
        reference.step(rule.4);

        steps += 1;
        trace.push(TraceStep {
            step: steps,
            state: state.clone(),
            head: head as i64 - tape.head_offset() as i64,
            read,
            write: rule.3,
            mv: rule.4,
        });
        state = rule.2.clone();

        if tape.logical_symbols() != reference.nonblank()
            || head as i64 - tape.head_offset() as i64 != reference.head()
        {
            return Err(Error::LockstepDivergence { step: steps });
        }
    };

    Ok(TmRun {
        status,
        steps,
        tape,
        reference,
        head,
        trace,
    })
}

/// Ready-made demonstration machines.
pub mod machines {
    use super::{Move, TmDescription, TransitionRule};

    fn rule(s: &str, r: u32, s2: &str, w: u32, mv: Move) -> TransitionRule {
        TransitionRule(s.into(), r, s2.into(), w, mv)
    }

    /// Appends one mark to a unary string: runs right over the 1s and writes
    /// a 1 into the first blank.
    pub fn unary_incrementer() -> TmDescription {
        TmDescription {
            k: 2,
            states: vec!["scan".into(), "accept".into(), "reject".into()],
            transitions: vec![
                rule("scan", 1, "scan", 1, Move::Right),
                rule("scan", 0, "accept", 1, Move::Right),
            ],
            start: "scan".into(),
            accept: "accept".into(),
            reject: "reject".into(),
        }
    }

    /// Adds one to a binary numeral written most-significant-digit first
    /// with digits encoded 1 => '0', 2 => '1' (0 stays the blank). Walks to
    /// the last digit, then carries leftward.
    pub fn binary_successor() -> TmDescription {
        TmDescription {
            k: 3,
            states: vec![
                "seek".into(),
                "carry".into(),
                "accept".into(),
                "reject".into(),
            ],
            transitions: vec![
                rule("seek", 1, "seek", 1, Move::Right),
                rule("seek", 2, "seek", 2, Move::Right),
                rule("seek", 0, "carry", 0, Move::Left),
                rule("carry", 2, "carry", 1, Move::Left),
                rule("carry", 1, "accept", 2, Move::Left),
                // Carry past the most significant digit grows the numeral.
                rule("carry", 0, "accept", 2, Move::Right),
            ],
            start: "seek".into(),
            accept: "accept".into(),
            reject: "reject".into(),
        }
    }

    /// Two working states that sweep back and forth over the input,
    /// swapping the two non-blank symbols on every pass. Never halts; runs
    /// are bounded by the step limit.
    pub fn pingpong_scanner() -> TmDescription {
        TmDescription {
            k: 3,
            states: vec![
                "right".into(),
                "left".into(),
                "accept".into(),
                "reject".into(),
            ],
            transitions: vec![
                rule("right", 1, "right", 2, Move::Right),
                rule("right", 2, "right", 1, Move::Right),
                rule("right", 0, "left", 0, Move::Left),
                rule("left", 1, "left", 2, Move::Left),
                rule("left", 2, "left", 1, Move::Left),
                rule("left", 0, "right", 0, Move::Right),
            ],
            start: "right".into(),
            accept: "accept".into(),
            reject: "reject".into(),
        }
    }

    /// Accepts immediately without touching the tape.
    pub fn immediate_accept() -> TmDescription {
        TmDescription {
            k: 2,
            states: vec!["accept".into(), "reject".into()],
            transitions: vec![],
            start: "accept".into(),
            accept: "accept".into(),
            reject: "reject".into(),
        }
    }
}
