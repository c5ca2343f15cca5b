use super::{BinOp, Func, Node};

// Products and sums with literal 0 or 1 are dropped while building
// derivatives; otherwise repeated differentiation grows the tree quickly.

fn is(n: &Node, v: f64) -> bool {
    n.as_const() == Some(v)
}

fn sum(a: Node, b: Node) -> Node {
    if is(&a, 0.0) {
        b
    } else if is(&b, 0.0) {
        a
    } else {
        Node::plus(a, b)
    }
}

fn difference(a: Node, b: Node) -> Node {
    if is(&b, 0.0) {
        a
    } else if is(&a, 0.0) {
        Node::negate(b)
    } else {
        Node::minus(a, b)
    }
}

fn product(a: Node, b: Node) -> Node {
    if is(&a, 0.0) || is(&b, 0.0) {
        Node::Const(0.0)
    } else if is(&a, 1.0) {
        b
    } else if is(&b, 1.0) {
        a
    } else {
        Node::times(a, b)
    }
}

fn quotient(a: Node, b: Node) -> Node {
    if is(&a, 0.0) {
        Node::Const(0.0)
    } else if is(&b, 1.0) {
        a
    } else {
        Node::over(a, b)
    }
}

pub(super) fn derivative(node: &Node) -> Node {
    match node {
        Node::Const(_) => Node::Const(0.0),
        Node::Var => Node::Const(1.0),
        Node::Neg(a) => Node::negate(derivative(a)),
        Node::Call(f, a) => {
            let inner = derivative(a);
            let u = (**a).clone();
            let outer = match f {
                Func::Exp => Node::call(Func::Exp, u),
                Func::Log => return quotient(inner, u),
                Func::Sin => Node::call(Func::Cos, u),
                Func::Cos => Node::negate(Node::call(Func::Sin, u)),
                Func::Sqrt => {
                    return quotient(inner, product(Node::Const(2.0), Node::call(Func::Sqrt, u)))
                }
            };
            product(outer, inner)
        }
        Node::Binary(op, a, b) => {
            let (da, db) = (derivative(a), derivative(b));
            let (u, v) = ((**a).clone(), (**b).clone());
            match op {
                BinOp::Add => sum(da, db),
                BinOp::Sub => difference(da, db),
                BinOp::Mul => sum(product(da, v), product(u, db)),
                BinOp::Div => quotient(
                    difference(product(da, v.clone()), product(u, db)),
                    Node::pow(v, 2),
                ),
            }
        }
        Node::Pow(a, k) => {
            let k = *k;
            if k == 0 {
                return Node::Const(0.0);
            }
            let da = derivative(a);
            let base = if k == 1 {
                Node::Const(1.0)
            } else {
                Node::pow((**a).clone(), k - 1)
            };
            product(product(Node::Const(k as f64), base), da)
        }
    }
}
