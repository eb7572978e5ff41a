//! Symbolic d/dr with light constant folding.
//!
//! Folding only removes the obvious zeros and ones produced by the chain rule
//! so that second derivatives stay a manageable size. No other simplification
//! is attempted.

use super::{contains_var, Func, Node};

fn c(v: f64) -> Node {
    Node::Const(v)
}

fn b(n: Node) -> Box<Node> {
    Box::new(n)
}

fn as_const(n: &Node) -> Option<f64> {
    match n {
        Node::Const(v) => Some(*v),
        _ => None,
    }
}

fn add(x: Node, y: Node) -> Node {
    match (as_const(&x), as_const(&y)) {
        (Some(0.0), _) => y,
        (_, Some(0.0)) => x,
        (Some(p), Some(q)) => c(p + q),
        _ => Node::Add(b(x), b(y)),
    }
}

fn sub(x: Node, y: Node) -> Node {
    match (as_const(&x), as_const(&y)) {
        (_, Some(0.0)) => x,
        (Some(0.0), _) => neg(y),
        (Some(p), Some(q)) => c(p - q),
        _ => Node::Sub(b(x), b(y)),
    }
}

fn mul(x: Node, y: Node) -> Node {
    match (as_const(&x), as_const(&y)) {
        (Some(0.0), _) | (_, Some(0.0)) => c(0.0),
        (Some(1.0), _) => y,
        (_, Some(1.0)) => x,
        (Some(p), Some(q)) => c(p * q),
        _ => Node::Mul(b(x), b(y)),
    }
}

fn div(x: Node, y: Node) -> Node {
    match (as_const(&x), as_const(&y)) {
        (Some(0.0), _) => c(0.0),
        (_, Some(1.0)) => x,
        _ => Node::Div(b(x), b(y)),
    }
}

fn neg(x: Node) -> Node {
    match x {
        Node::Const(v) => c(-v),
        Node::Neg(inner) => *inner,
        other => Node::Neg(b(other)),
    }
}

fn pow(x: Node, y: Node) -> Node {
    match as_const(&y) {
        Some(1.0) => x,
        Some(0.0) => c(1.0),
        _ => Node::Pow(b(x), b(y)),
    }
}

fn call(f: Func, x: Node) -> Node {
    Node::Call(f, b(x))
}

pub(super) fn differentiate(node: &Node) -> Node {
    if !contains_var(node) {
        return c(0.0);
    }
    match node {
        Node::Const(_) => c(0.0),
        Node::Var => c(1.0),
        Node::Neg(a) => neg(differentiate(a)),
        Node::Add(x, y) => add(differentiate(x), differentiate(y)),
        Node::Sub(x, y) => sub(differentiate(x), differentiate(y)),
        Node::Mul(x, y) => add(
            mul(differentiate(x), (**y).clone()),
            mul((**x).clone(), differentiate(y)),
        ),
        Node::Div(x, y) => {
            let num = sub(
                mul(differentiate(x), (**y).clone()),
                mul((**x).clone(), differentiate(y)),
            );
            div(num, pow((**y).clone(), c(2.0)))
        }
        Node::Pow(base, exponent) => {
            let du = differentiate(base);
            if !contains_var(exponent) {
                // v * u^(v-1) * u'
                let lowered = match as_const(exponent) {
                    Some(v) => c(v - 1.0),
                    None => sub((**exponent).clone(), c(1.0)),
                };
                mul(mul((**exponent).clone(), pow((**base).clone(), lowered)), du)
            } else {
                // u^v * (v' log u + v u'/u)
                let dv = differentiate(exponent);
                let inner = add(
                    mul(dv, call(Func::Log, (**base).clone())),
                    div(mul((**exponent).clone(), du), (**base).clone()),
                );
                mul(node.clone(), inner)
            }
        }
        Node::Call(f, arg) => {
            let u = (**arg).clone();
            let du = differentiate(arg);
            let outer = match f {
                Func::Exp => node.clone(),
                Func::Log => div(c(1.0), u),
                Func::Sin => call(Func::Cos, u),
                Func::Cos => neg(call(Func::Sin, u)),
                Func::Sinh => call(Func::Cosh, u),
                Func::Cosh => call(Func::Sinh, u),
                Func::Tanh => pow(call(Func::Sech, u), c(2.0)),
                Func::Sech => neg(mul(call(Func::Sech, u.clone()), call(Func::Tanh, u))),
                Func::Sqrt => div(c(0.5), node.clone()),
            };
            mul(outer, du)
        }
    }
}
