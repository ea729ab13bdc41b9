//! Guard and action expressions.
//!
//! Integer and text literals, attribute references, `+ -`, comparisons
//! `= != < <= > >=`, and assignments `attr := expr`. Binary operators are
//! left-associative; comparisons bind looser than arithmetic.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    Text(String),
    Attr(String),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

/// `target := value`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stmt {
    pub target: String,
    pub value: Expr,
}

/// A stored attribute value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Int(i64),
    Text(String),
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Int(i) => write!(f, "{i}"),
            AttrValue::Text(s) => write_quoted(f, s),
        }
    }
}

pub type Attributes = BTreeMap<String, AttrValue>;

/// Result of evaluating an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Text(_) => "text",
            Value::Bool(_) => "bool",
        }
    }
}

impl From<&AttrValue> for Value {
    fn from(v: &AttrValue) -> Self {
        match v {
            AttrValue::Int(i) => Value::Int(*i),
            AttrValue::Text(s) => Value::Text(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("type error: `{op}` cannot combine {lhs} and {rhs}")]
    Mismatch {
        op: &'static str,
        lhs: &'static str,
        rhs: &'static str,
    },
    #[error("type error: expected {expected}, found {found}")]
    Expected {
        expected: &'static str,
        found: &'static str,
    },
    #[error("integer overflow")]
    Overflow,
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn attr(name: &str) -> Expr {
        Expr::Attr(name.to_string())
    }

    /// Attribute names referenced anywhere in the expression.
    pub fn attributes(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_attrs(&mut out);
        out
    }

    fn collect_attrs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Attr(a) => out.push(a),
            Expr::Neg(e) => e.collect_attrs(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_attrs(out);
                rhs.collect_attrs(out);
            }
            Expr::Int(_) | Expr::Text(_) => {}
        }
    }

    pub fn eval(&self, attrs: &Attributes) -> Result<Value, EvalError> {
        match self {
            Expr::Int(i) => Ok(Value::Int(*i)),
            Expr::Text(s) => Ok(Value::Text(s.clone())),
            Expr::Attr(a) => attrs
                .get(a)
                .map(Value::from)
                .ok_or_else(|| EvalError::UnknownAttribute(a.clone())),
            Expr::Neg(e) => match e.eval(attrs)? {
                Value::Int(i) => i.checked_neg().map(Value::Int).ok_or(EvalError::Overflow),
                other => Err(EvalError::Expected {
                    expected: "int",
                    found: other.type_name(),
                }),
            },
            Expr::Binary { op, lhs, rhs } => {
                let l = lhs.eval(attrs)?;
                let r = rhs.eval(attrs)?;
                apply(*op, l, r)
            }
        }
    }

    /// Evaluate as a guard; non-boolean results are type errors.
    pub fn eval_guard(&self, attrs: &Attributes) -> Result<bool, EvalError> {
        match self.eval(attrs)? {
            Value::Bool(b) => Ok(b),
            other => Err(EvalError::Expected {
                expected: "bool",
                found: other.type_name(),
            }),
        }
    }
}

fn apply(op: BinOp, l: Value, r: Value) -> Result<Value, EvalError> {
    use std::cmp::Ordering;
    let mismatch = |l: &Value, r: &Value| EvalError::Mismatch {
        op: op.symbol(),
        lhs: l.type_name(),
        rhs: r.type_name(),
    };
    match op {
        BinOp::Add | BinOp::Sub => match (&l, &r) {
            (Value::Int(a), Value::Int(b)) => {
                let v = if op == BinOp::Add {
                    a.checked_add(*b)
                } else {
                    a.checked_sub(*b)
                };
                v.map(Value::Int).ok_or(EvalError::Overflow)
            }
            _ => Err(mismatch(&l, &r)),
        },
        BinOp::Eq | BinOp::Ne => {
            let eq = match (&l, &r) {
                (Value::Int(a), Value::Int(b)) => a == b,
                (Value::Text(a), Value::Text(b)) => a == b,
                (Value::Bool(a), Value::Bool(b)) => a == b,
                _ => return Err(mismatch(&l, &r)),
            };
            Ok(Value::Bool(if op == BinOp::Eq { eq } else { !eq }))
        }
        _ => {
            let ord: Ordering = match (&l, &r) {
                (Value::Int(a), Value::Int(b)) => a.cmp(b),
                (Value::Text(a), Value::Text(b)) => a.cmp(b),
                _ => return Err(mismatch(&l, &r)),
            };
            let b = match op {
                BinOp::Lt => ord.is_lt(),
                BinOp::Le => ord.is_le(),
                BinOp::Gt => ord.is_gt(),
                _ => ord.is_ge(),
            };
            Ok(Value::Bool(b))
        }
    }
}

impl Stmt {
    /// Evaluate the right-hand side and store it into `attrs`. The target
    /// must already exist and keep its type.
    pub fn execute(&self, attrs: &mut Attributes) -> Result<(), EvalError> {
        let v = self.value.eval(attrs)?;
        let slot = attrs
            .get_mut(&self.target)
            .ok_or_else(|| EvalError::UnknownAttribute(self.target.clone()))?;
        *slot = match (&*slot, v) {
            (AttrValue::Int(_), Value::Int(i)) => AttrValue::Int(i),
            (AttrValue::Text(_), Value::Text(s)) => AttrValue::Text(s),
            (AttrValue::Int(_), other) => {
                return Err(EvalError::Expected {
                    expected: "int",
                    found: other.type_name(),
                })
            }
            (AttrValue::Text(_), other) => {
                return Err(EvalError::Expected {
                    expected: "text",
                    found: other.type_name(),
                })
            }
        };
        Ok(())
    }
}

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

impl Expr {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        match self {
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Text(s) => write_quoted(f, s),
            Expr::Attr(a) => f.write_str(a),
            Expr::Neg(e) => {
                f.write_str("-(")?;
                e.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                let paren = p < min;
                if paren {
                    f.write_str("(")?;
                }
                lhs.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                rhs.fmt_prec(f, p + 1)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} := {}", self.target, self.value)
    }
}
