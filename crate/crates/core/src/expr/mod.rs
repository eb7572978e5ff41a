//! Analytic expressions in the radial variable `r`.
//!
//! Expressions are parsed from ordinary infix text (see `docs/grammar.md` in
//! the repository root), evaluated with domain checking, and differentiated
//! symbolically. Weight functions `h(r)` and base potentials are supplied this
//! way so that `h'` and `h''` are exact rather than finite-differenced.

mod diff;
mod parser;

use std::fmt;

use crate::grid::{RadialGrid, SampledField};

pub use parser::ParseError;

/// Elementary functions accepted in call syntax `f(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sech,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Why an evaluation was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainViolation {
    LogNonPositive,
    SqrtNegative,
    DivisionByZero,
    NegativeBaseFractionalPower,
    NonFinite,
}

impl fmt::Display for DomainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainViolation::LogNonPositive => "log of a non-positive value",
            DomainViolation::SqrtNegative => "sqrt of a negative value",
            DomainViolation::DivisionByZero => "division by zero",
            DomainViolation::NegativeBaseFractionalPower => "non-integer power of a non-positive base",
            DomainViolation::NonFinite => "non-finite intermediate value",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("{violation} at r = {r}")]
pub struct EvalError {
    pub violation: DomainViolation,
    pub r: f64,
}

/// A parsed expression in `r`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticExpr {
    root: Node,
}

impl AnalyticExpr {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parser::parse(text).map(|root| AnalyticExpr { root })
    }

    pub fn from_node(root: Node) -> Self {
        AnalyticExpr { root }
    }

    pub fn constant(value: f64) -> Self {
        AnalyticExpr {
            root: Node::Const(value),
        }
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    /// True when the tree does not reference `r`.
    pub fn is_constant(&self) -> bool {
        !contains_var(&self.root)
    }

    pub fn eval(&self, r: f64) -> Result<f64, EvalError> {
        eval_node(&self.root, r)
    }

    /// Exact symbolic derivative d/dr.
    pub fn derivative(&self) -> AnalyticExpr {
        AnalyticExpr {
            root: diff::differentiate(&self.root),
        }
    }

    /// Values and symbolic first derivatives at every node of `grid`.
    pub fn evaluate_on_grid(&self, grid: &RadialGrid) -> Result<SampledField, GridEvalError> {
        let d = self.derivative();
        let n = grid.len();
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for (node, r) in grid.nodes().enumerate() {
            let v = self.eval(r).map_err(|source| GridEvalError { node, source })?;
            let dv = d.eval(r).map_err(|source| GridEvalError { node, source })?;
            values.push(v);
            derivs.push(dv);
        }
        Ok(SampledField::from_parts(*grid, values, derivs))
    }

    /// Plain values at every node (no derivative channel).
    pub fn sample(&self, grid: &RadialGrid) -> Result<Vec<f64>, GridEvalError> {
        grid.nodes()
            .enumerate()
            .map(|(node, r)| self.eval(r).map_err(|source| GridEvalError { node, source }))
            .collect()
    }
}

impl std::str::FromStr for AnalyticExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AnalyticExpr::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("expression undefined at grid node {node}: {source}")]
pub struct GridEvalError {
    pub node: usize,
    #[source]
    pub source: EvalError,
}

fn contains_var(node: &Node) -> bool {
    match node {
        Node::Const(_) => false,
        Node::Var => true,
        Node::Neg(a) | Node::Call(_, a) => contains_var(a),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            contains_var(a) || contains_var(b)
        }
    }
}

fn checked(value: f64, r: f64) -> Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError {
            violation: DomainViolation::NonFinite,
            r,
        })
    }
}

fn eval_node(node: &Node, r: f64) -> Result<f64, EvalError> {
    let fail = |violation| Err(EvalError { violation, r });
    let v = match node {
        Node::Const(c) => *c,
        Node::Var => r,
        Node::Neg(a) => -eval_node(a, r)?,
        Node::Add(a, b) => eval_node(a, r)? + eval_node(b, r)?,
        Node::Sub(a, b) => eval_node(a, r)? - eval_node(b, r)?,
        Node::Mul(a, b) => eval_node(a, r)? * eval_node(b, r)?,
        Node::Div(a, b) => {
            let num = eval_node(a, r)?;
            let den = eval_node(b, r)?;
            if den == 0.0 {
                return fail(DomainViolation::DivisionByZero);
            }
            num / den
        }
        Node::Pow(a, b) => {
            let base = eval_node(a, r)?;
            let exponent = eval_node(b, r)?;
            power(base, exponent).map_err(|violation| EvalError { violation, r })?
        }
        Node::Call(func, a) => {
            let x = eval_node(a, r)?;
            match func {
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return fail(DomainViolation::LogNonPositive);
                    }
                    x.ln()
                }
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Sech => 1.0 / x.cosh(),
                Func::Sqrt => {
                    if x < 0.0 {
                        return fail(DomainViolation::SqrtNegative);
                    }
                    x.sqrt()
                }
            }
        }
    };
    checked(v, r)
}

fn power(base: f64, exponent: f64) -> Result<f64, DomainViolation> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(DomainViolation::DivisionByZero);
        }
        return Ok(base.powi(exponent as i32));
    }
    if base > 0.0 || (base == 0.0 && exponent > 0.0) {
        Ok(base.powf(exponent))
    } else {
        Err(DomainViolation::NegativeBaseFractionalPower)
    }
}

// Printing is fully parenthesized so that parse(print(e)) rebuilds the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Node::Var => f.write_str("r"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl fmt::Display for AnalyticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
