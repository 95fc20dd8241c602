use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use super::shape::Shape;
use crate::syntax::{Expr, FunctorParam, ModExpr, Pattern};

/// A run-time exception constructor. Every evaluation of an `exception`
/// declaration yields a new id.
#[derive(Clone, Debug)]
pub struct ExnTag {
    pub id: u64,
    pub name: Rc<str>,
}

impl PartialEq for ExnTag {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Lt,
    Eq,
    Not,
    Print,
    StringOfInt,
    Incr,
    Decr,
    MkRef,
    Deref,
    Assign,
}

impl Prim {
    pub fn arity(self) -> usize {
        match self {
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Lt | Prim::Eq | Prim::Assign => 2,
            _ => 1,
        }
    }

    pub const ALL: &'static [(&'static str, Prim)] = &[
        ("+", Prim::Add),
        ("-", Prim::Sub),
        ("*", Prim::Mul),
        ("<", Prim::Lt),
        ("=", Prim::Eq),
        ("not", Prim::Not),
        ("print", Prim::Print),
        ("string_of_int", Prim::StringOfInt),
        ("incr", Prim::Incr),
        ("decr", Prim::Decr),
        ("ref", Prim::MkRef),
        ("!", Prim::Deref),
        (":=", Prim::Assign),
    ];
}

#[derive(Clone, Debug)]
pub enum Value<'a> {
    Int(i64),
    Bool(bool),
    Str(Rc<str>),
    Unit,
    Tuple(Rc<Vec<Value<'a>>>),
    Constr(Rc<str>, Option<Rc<Value<'a>>>),
    Exn(ExnTag, Option<Rc<Value<'a>>>),
    Ref(usize),
    Closure(Rc<Closure<'a>>),
    /// A builtin applied to fewer arguments than its arity.
    Prim(Prim, Rc<Vec<Value<'a>>>),
}

#[derive(Debug)]
pub struct Closure<'a> {
    pub env: Fields<'a>,
    pub params: &'a [Pattern],
    pub body: &'a Expr,
    pub recs: Option<Rc<Vec<RecFun<'a>>>>,
}

/// One function of a `let rec` group.
#[derive(Debug)]
pub struct RecFun<'a> {
    pub name: String,
    pub params: &'a [Pattern],
    pub body: &'a Expr,
}

/// What a constructor name denotes at run time.
#[derive(Clone, Debug)]
pub enum CtorRt {
    Variant,
    Exn(ExnTag),
}

#[derive(Clone, Debug)]
pub enum ModValue<'a> {
    Struct(Fields<'a>),
    Functor(Rc<FunctorClosure<'a>>),
}

#[derive(Debug)]
pub struct FunctorClosure<'a> {
    pub env: Fields<'a>,
    pub param: String,
    pub param_shape: Shape,
    /// Parameters still to be supplied, for `module F (X : S) (Y : T) = ...`.
    pub rest: &'a [FunctorParam],
    pub body: &'a ModExpr,
}

/// Name maps of a scope or of a structure's exported components.
#[derive(Clone, Debug, Default)]
pub struct Fields<'a> {
    pub values: Rc<HashMap<String, Value<'a>>>,
    pub ctors: Rc<HashMap<String, CtorRt>>,
    pub modules: Rc<HashMap<String, ModValue<'a>>>,
    pub modtypes: Rc<HashMap<String, Shape>>,
}

impl<'a> Fields<'a> {
    pub fn set_value(&mut self, name: &str, v: Value<'a>) {
        Rc::make_mut(&mut self.values).insert(name.to_string(), v);
    }

    pub fn set_ctor(&mut self, name: &str, c: CtorRt) {
        Rc::make_mut(&mut self.ctors).insert(name.to_string(), c);
    }

    pub fn set_module(&mut self, name: &str, m: ModValue<'a>) {
        Rc::make_mut(&mut self.modules).insert(name.to_string(), m);
    }

    pub fn set_modtype(&mut self, name: &str, s: Shape) {
        Rc::make_mut(&mut self.modtypes).insert(name.to_string(), s);
    }

    /// Adds every component of `other`, shadowing existing names.
    pub fn merge(&mut self, other: &Fields<'a>) {
        for (k, v) in other.values.iter() {
            self.set_value(k, v.clone());
        }
        for (k, v) in other.ctors.iter() {
            self.set_ctor(k, v.clone());
        }
        for (k, v) in other.modules.iter() {
            self.set_module(k, v.clone());
        }
        for (k, v) in other.modtypes.iter() {
            self.set_modtype(k, v.clone());
        }
    }
}

fn fmt_arg(v: &Value<'_>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match v {
        Value::Constr(_, Some(_)) | Value::Exn(_, Some(_)) => write!(f, "({v})"),
        Value::Int(n) if *n < 0 => write!(f, "({v})"),
        _ => write!(f, "{v}"),
    }
}

impl fmt::Display for Value<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Unit => f.write_str("()"),
            Value::Tuple(vs) => {
                f.write_str("(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            Value::Constr(n, None) => f.write_str(n),
            Value::Exn(t, None) => f.write_str(&t.name),
            Value::Constr(n, Some(a)) => {
                write!(f, "{n} ")?;
                fmt_arg(a, f)
            }
            Value::Exn(t, Some(a)) => {
                write!(f, "{} ", t.name)?;
                fmt_arg(a, f)
            }
            Value::Ref(_) => f.write_str("<ref>"),
            Value::Closure(_) | Value::Prim(..) => f.write_str("<fun>"),
        }
    }
}
