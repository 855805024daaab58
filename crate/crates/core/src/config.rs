//! Scenario configuration: a small closed expression grammar for the weight
//! function, schedule and solver knobs, and hypothesis validation.
//!
//! The weight f is a polynomial in t built from constants, `t`, powers,
//! `(1 - t^2)^m`-style groups, sums, products and scalar multiples, plus the
//! symbol `Q_h` for the background curvature. Keeping f symbolic makes the
//! evenness check exact and runs reproducible from the config alone.

use serde::{Deserialize, Serialize};

use crate::error::{QcurvError, Result};
use crate::solver::{Schedule, SolveOptions, SymmetryGroup};
use crate::sphere::SphereContext;

const MAX_POLY_DEGREE: usize = 512;

/// Dense polynomial in t, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Polynomial(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.0
            .iter()
            .rposition(|c| *c != 0.0)
            .unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.0.len() <= 1 {
            return Polynomial::constant(0.0);
        }
        Polynomial(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| (i as f64 + 1.0) * c)
                .collect(),
        )
    }

    fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0.0; n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        Polynomial(out)
    }

    fn neg(&self) -> Polynomial {
        Polynomial(self.0.iter().map(|c| -c).collect())
    }

    fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        let deg = self.degree() + other.degree();
        if deg > MAX_POLY_DEGREE {
            return Err(QcurvError::Expr(format!(
                "polynomial degree {deg} exceeds the limit {MAX_POLY_DEGREE}"
            )));
        }
        let mut out = vec![0.0; deg + 1];
        for (i, a) in self.0.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                if i + j <= deg {
                    out[i + j] += a * b;
                }
            }
        }
        Ok(Polynomial(out))
    }

    fn powi(&self, e: u32) -> Result<Polynomial> {
        let mut out = Polynomial::constant(1.0);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Largest odd coefficient relative to the largest coefficient.
    pub fn odd_part_magnitude(&self) -> f64 {
        let max = self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if max == 0.0 {
            return 0.0;
        }
        self.0
            .iter()
            .skip(1)
            .step_by(2)
            .fold(0.0_f64, |m, c| m.max(c.abs()))
            / max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Number(f64),
    Var,
    QH,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' | '−' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' | '·' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            't' => {
                out.push(Token::Var);
                i += 1;
            }
            '²' => {
                // postfix square as sugar
                out.push(Token::Caret);
                out.push(Token::Number(2.0));
                i += 1;
            }
            'Q' => {
                let rest: String = bytes[i..].iter().take(3).collect();
                if rest == "Q_h" {
                    out.push(Token::QH);
                    i += 3;
                } else {
                    return Err(QcurvError::Expr(format!("unknown symbol at '{rest}'")));
                }
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || bytes[i] == 'e'
                        || bytes[i] == 'E'
                        || ((bytes[i] == '+' || bytes[i] == '-')
                            && i > start
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| QcurvError::Expr(format!("bad number '{text}'")))?;
                out.push(Token::Number(v));
            }
            other => {
                return Err(QcurvError::Expr(format!("unexpected character '{other}'")));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    q_h: f64,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = match self.peek() {
            Some(Token::Minus) => {
                self.next();
                self.term()?.neg()
            }
            _ => self.term()?,
        };
        while let Some(tok) = self.peek() {
            match tok {
                Token::Plus => {
                    self.next();
                    acc = acc.add(&self.term()?);
                }
                Token::Minus => {
                    self.next();
                    acc = acc.add(&self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.next();
                    acc = acc.mul(&self.factor()?)?;
                }
                // juxtaposition: `0.3t`, `2(1-t^2)`
                Some(Token::Number(_)) | Some(Token::Var) | Some(Token::QH)
                | Some(Token::LParen) => {
                    acc = acc.mul(&self.factor()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.primary()?;
        if self.peek() == Some(Token::Caret) {
            self.next();
            match self.next() {
                Some(Token::Number(v)) if v >= 0.0 && v.fract() == 0.0 => {
                    base.powi(v as u32)
                }
                other => Err(QcurvError::Expr(format!(
                    "exponent must be a non-negative integer, got {other:?}"
                ))),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Polynomial> {
        match self.next() {
            Some(Token::Number(v)) => Ok(Polynomial::constant(v)),
            Some(Token::Var) => Ok(Polynomial(vec![0.0, 1.0])),
            Some(Token::QH) => Ok(Polynomial::constant(self.q_h)),
            Some(Token::Minus) => Ok(self.primary()?.neg()),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(QcurvError::Expr("missing closing parenthesis".into())),
                }
            }
            other => Err(QcurvError::Expr(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parse a weight expression; `Q_h` resolves against the context.
pub fn parse_weight(src: &str, ctx: &SphereContext) -> Result<Polynomial> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(QcurvError::Expr("empty expression".into()));
    }
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        q_h: ctx.q_h,
    };
    let poly = p.expr()?;
    if p.pos != tokens.len() {
        return Err(QcurvError::Expr("trailing input after expression".into()));
    }
    Ok(poly)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleName {
    North,
    South,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputPaths {
    pub report: Option<String>,
    pub table: Option<String>,
    pub curves: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: u32,
    pub k: u32,
    #[serde(alias = "lmax", alias = "L")]
    pub l_max: usize,
    pub group: SymmetryGroup,
    /// Weight expression over t, e.g. "1.5 + t^2" or "Q_h + 0.3t".
    pub f: String,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub solver: SolveOptions,
    /// Optional scenario tag; "theorem:main" enforces n = 2k + 1 and a
    /// fixed-point-free group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    /// Optional pole at which the weight must be flat to order n - 2k.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_pole: Option<PoleName>,
    /// Bubble parameters probed by the bubble subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    /// Concentration of the trial field in the obstruction subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputPaths>,
}

/// A config that passed every hypothesis check, with the parsed weight.
#[derive(Debug, Clone)]
pub struct ValidatedScenario {
    pub config: ScenarioConfig,
    pub ctx: SphereContext,
    pub f_poly: Polynomial,
}

const PROBE_POINTS: usize = 1024;

pub fn validate(config: &ScenarioConfig) -> Result<ValidatedScenario> {
    let ctx = SphereContext::new(config.n, config.k)
        .map_err(|e| QcurvError::Config(format!("{e}")))?;
    if config.l_max < 8 {
        return Err(QcurvError::Config(format!(
            "l_max = {} too small, need at least 8",
            config.l_max
        )));
    }
    let f_poly = parse_weight(&config.f, &ctx)?;
    if f_poly.degree() > config.l_max {
        return Err(QcurvError::Config(format!(
            "weight degree {} exceeds the band limit {}",
            f_poly.degree(),
            config.l_max
        )));
    }
    if config.group == SymmetryGroup::Antipodal && f_poly.odd_part_magnitude() > 1e-12 {
        return Err(QcurvError::Config(
            "f not antipodally even — violates G-invariance".into(),
        ));
    }
    // positivity probe on a uniform grid in t (hits 0 and the poles exactly)
    for j in 0..=PROBE_POINTS {
        let t = -1.0 + 2.0 * j as f64 / PROBE_POINTS as f64;
        let v = f_poly.eval(t);
        if v <= 0.0 {
            return Err(QcurvError::Config(format!(
                "f must be positive; f({t:.4}) = {v:.6e}"
            )));
        }
    }
    if let Some(tag) = &config.tag {
        if tag == "theorem:main" {
            if config.n != 2 * config.k + 1 {
                return Err(QcurvError::Config(format!(
                    "theorem:main scenarios require n = 2k + 1, got n={}, k={}",
                    config.n, config.k
                )));
            }
            if config.group != SymmetryGroup::Antipodal {
                return Err(QcurvError::Config(
                    "theorem:main scenarios require a group acting without fixed point".into(),
                ));
            }
        }
    }
    if let Some(pole) = config.flat_pole {
        let t0 = match pole {
            PoleName::North => 1.0,
            PoleName::South => -1.0,
        };
        // vanishing of the first n-2k sphere derivatives at the pole reduces
        // to f^{(j)}(t0) = 0 for j <= (n-2k)/2
        let order = (config.n - 2 * config.k) as usize / 2;
        let mut d = f_poly.clone();
        let scale = f_poly.eval(t0).abs().max(1.0);
        for j in 1..=order {
            d = d.derivative();
            let v = d.eval(t0);
            if v.abs() > 1e-10 * scale {
                return Err(QcurvError::Config(format!(
                    "declared flat pole fails: derivative order {j} of f at the pole is {v:.3e}"
                )));
            }
        }
    }
    if !(config.solver.damping > 0.0 && config.solver.damping <= 1.0) {
        return Err(QcurvError::Config(format!(
            "damping must lie in (0, 1], got {}",
            config.solver.damping
        )));
    }
    if config.schedule.steps == 0 {
        return Err(QcurvError::Config("schedule needs at least one step".into()));
    }
    Ok(ValidatedScenario {
        config: config.clone(),
        ctx,
        f_poly,
    })
}
