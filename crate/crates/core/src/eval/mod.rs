//! Big-step evaluation of elaborated programs.

mod shape;
mod value;

pub use shape::{FieldNs, Shape, ShapeField};
pub use value::{Closure, CtorRt, ExnTag, Fields, FunctorClosure, ModValue, Prim, RecFun, Value};

use std::io::Write;
use std::rc::Rc;

use thiserror::Error;

use crate::core_typing::builtins::{ASSERT_FAILURE, FAILURE, MATCH_FAILURE};
use crate::syntax::*;

/// An exception propagating out of an expression.
#[derive(Clone, Debug)]
pub struct Raised<'a> {
    pub value: Value<'a>,
    pub span: SourceSpan,
}

/// An exception that reached the top of the program.
#[derive(Clone, Debug, Error)]
#[error("Exception: {exception}")]
pub struct UncaughtException {
    pub exception: String,
    pub span: SourceSpan,
}

/// Outcome of running a program.
#[derive(Debug)]
pub struct RunResult<'a> {
    /// Top-level components bound by the program.
    pub exports: Fields<'a>,
    /// Number of `print` calls and assertions evaluated.
    pub effects: usize,
    pub uncaught: Option<UncaughtException>,
}

type Eval<'a, T> = Result<T, Raised<'a>>;

pub struct Evaluator<'a, 'w> {
    out: &'w mut dyn Write,
    store: Vec<Value<'a>>,
    next_tag: u64,
    effects: usize,
    assert_failure: ExnTag,
    match_failure: ExnTag,
    failure: ExnTag,
}

impl<'a, 'w> Evaluator<'a, 'w> {
    pub fn new(out: &'w mut dyn Write) -> Evaluator<'a, 'w> {
        let mut tag = 0;
        let mut mk = |name: &str| {
            tag += 1;
            ExnTag {
                id: tag,
                name: name.into(),
            }
        };
        let assert_failure = mk(ASSERT_FAILURE);
        let match_failure = mk(MATCH_FAILURE);
        let failure = mk(FAILURE);
        Evaluator {
            out,
            store: Vec::new(),
            next_tag: tag,
            effects: 0,
            assert_failure,
            match_failure,
            failure,
        }
    }

    pub fn effects(&self) -> usize {
        self.effects
    }

    /// Contents of a reference cell.
    pub fn deref(&self, cell: usize) -> Option<&Value<'a>> {
        self.store.get(cell)
    }

    /// Builtin values, constructors and exceptions.
    pub fn initial_env(&self) -> Fields<'a> {
        let mut env = Fields::default();
        for (name, p) in Prim::ALL {
            env.set_value(name, Value::Prim(*p, Rc::new(Vec::new())));
        }
        for c in ["None", "Some", "Ok", "Error"] {
            env.set_ctor(c, CtorRt::Variant);
        }
        for t in [&self.assert_failure, &self.match_failure, &self.failure] {
            env.set_ctor(&t.name, CtorRt::Exn(t.clone()));
        }
        env
    }

    pub fn eval_program(&mut self, program: &'a Program) -> RunResult<'a> {
        let env = self.initial_env();
        let mut exports = Fields::default();
        let uncaught = match self.eval_items(env, &program.items, &mut exports) {
            Ok(_) => None,
            Err(r) => Some(UncaughtException {
                exception: r.value.to_string(),
                span: r.span,
            }),
        };
        RunResult {
            exports,
            effects: self.effects,
            uncaught,
        }
    }

    fn fresh_tag(&mut self, name: &str) -> ExnTag {
        self.next_tag += 1;
        ExnTag {
            id: self.next_tag,
            name: name.into(),
        }
    }

    fn raise<T>(&self, tag: &ExnTag, arg: Option<Value<'a>>, span: &SourceSpan) -> Eval<'a, T> {
        Err(Raised {
            value: Value::Exn(tag.clone(), arg.map(Rc::new)),
            span: span.clone(),
        })
    }

    /// Failure for states the type checker rules out.
    fn internal<T>(&self, what: String, span: &SourceSpan) -> Eval<'a, T> {
        self.raise(&self.failure.clone(), Some(Value::Str(what.into())), span)
    }

    // ---------------------------------------------------------------
    // Structures and modules

    /// Evaluates `items` in order, recording exported components in
    /// `exports`. Returns the scope after the last item.
    fn eval_items(&mut self, mut env: Fields<'a>, items: &'a [StructItem], exports: &mut Fields<'a>) -> Eval<'a, Fields<'a>> {
        for it in items {
            let mut bound = Fields::default();
            self.eval_item(&env, it, &mut bound, exports)?;
            env.merge(&bound);
        }
        Ok(env)
    }

    /// `local` bindings land in `scope` only; everything else lands in both.
    fn eval_item(
        &mut self,
        env: &Fields<'a>,
        it: &'a StructItem,
        scope: &mut Fields<'a>,
        exports: &mut Fields<'a>,
    ) -> Eval<'a, ()> {
        let mut exported = Fields::default();
        match &it.kind {
            StructItemKind::Let { rec_flag, bindings } => {
                exported = self.eval_bindings(env, *rec_flag, bindings)?;
            }
            StructItemKind::Type { defs, .. } => {
                for d in defs {
                    if let TypeRepr::Variant { ctors, .. } = &d.repr {
                        for c in ctors {
                            exported.set_ctor(&c.name, CtorRt::Variant);
                        }
                    }
                }
            }
            StructItemKind::Module { name, params, body } => {
                let m = if params.is_empty() {
                    self.eval_mod_expr(env, body)?
                } else {
                    self.curried_functor(env, params, body)
                };
                exported.set_module(name, m);
            }
            StructItemKind::ModType { name, mty } => {
                exported.set_modtype(name, self.shape_of(env, mty));
            }
            StructItemKind::Exception { name, .. } => {
                let tag = self.fresh_tag(name);
                exported.set_ctor(name, CtorRt::Exn(tag));
            }
            StructItemKind::Open(m) => {
                let fields = self.struct_fields(env, m)?;
                scope.merge(&fields);
            }
            StructItemKind::Include(m) => {
                exported = self.struct_fields(env, m)?;
            }
            StructItemKind::Local(d1, d2) => {
                let inner = self.eval_items(env.clone(), d1, &mut Fields::default())?;
                self.eval_items(inner, d2, &mut exported)?;
            }
            StructItemKind::Private(inner) => {
                let mut hidden = Fields::default();
                self.eval_item(env, inner, scope, &mut hidden)?;
                scope.merge(&hidden);
            }
            StructItemKind::Expr(e) => {
                self.eval_expr(env, e)?;
            }
        }
        scope.merge(&exported);
        exports.merge(&exported);
        Ok(())
    }

    fn curried_functor(&mut self, env: &Fields<'a>, params: &'a [FunctorParam], body: &'a ModExpr) -> ModValue<'a> {
        let (first, rest) = params.split_first().expect("non-empty parameter list");
        ModValue::Functor(Rc::new(FunctorClosure {
            env: env.clone(),
            param: first.name.clone(),
            param_shape: self.shape_of(env, &first.mty),
            rest,
            body,
        }))
    }

    fn struct_fields(&mut self, env: &Fields<'a>, m: &'a ModExpr) -> Eval<'a, Fields<'a>> {
        match self.eval_mod_expr(env, m)? {
            ModValue::Struct(f) => Ok(f),
            ModValue::Functor(_) => self.internal("cannot open a functor".into(), &m.span),
        }
    }

    pub fn eval_mod_expr(&mut self, env: &Fields<'a>, m: &'a ModExpr) -> Eval<'a, ModValue<'a>> {
        match &m.kind {
            ModExprKind::Path(p) => self.module_path(env, p, &m.span),
            ModExprKind::Struct(items) => {
                let mut exports = Fields::default();
                self.eval_items(env.clone(), items, &mut exports)?;
                Ok(ModValue::Struct(exports))
            }
            ModExprKind::Functor(param, body) => Ok(ModValue::Functor(Rc::new(FunctorClosure {
                env: env.clone(),
                param: param.name.clone(),
                param_shape: self.shape_of(env, &param.mty),
                rest: &[],
                body,
            }))),
            ModExprKind::Apply(f, a) => {
                let fv = self.eval_mod_expr(env, f)?;
                let av = self.eval_mod_expr(env, a)?;
                self.apply_functor(fv, av, &m.span)
            }
            ModExprKind::Ascribe(inner, mty) => {
                let v = self.eval_mod_expr(env, inner)?;
                let shape = self.shape_of(env, mty);
                Ok(restrict(v, &shape))
            }
        }
    }

    fn apply_functor(&mut self, f: ModValue<'a>, arg: ModValue<'a>, span: &SourceSpan) -> Eval<'a, ModValue<'a>> {
        let ModValue::Functor(clo) = f else {
            return self.internal("not a functor".into(), span);
        };
        let mut env = clo.env.clone();
        env.set_module(&clo.param, restrict(arg, &clo.param_shape));
        if clo.rest.is_empty() {
            self.eval_mod_expr(&env, clo.body)
        } else {
            Ok(self.curried_functor(&env, clo.rest, clo.body))
        }
    }

    fn module_path(&mut self, env: &Fields<'a>, p: &ModPath, span: &SourceSpan) -> Eval<'a, ModValue<'a>> {
        match p {
            ModPath::Name(n) => match env.modules.get(n) {
                Some(m) => Ok(m.clone()),
                None => self.internal(format!("unbound module {n}"), span),
            },
            ModPath::Dot(q, n) => match self.module_path(env, q, span)? {
                ModValue::Struct(f) => match f.modules.get(n) {
                    Some(m) => Ok(m.clone()),
                    None => self.internal(format!("unbound module {n}"), span),
                },
                ModValue::Functor(_) => self.internal("functor has no components".into(), span),
            },
            ModPath::Apply(f, a) => {
                let fv = self.module_path(env, f, span)?;
                let av = self.module_path(env, a, span)?;
                self.apply_functor(fv, av, span)
            }
        }
    }

    /// The components of the structure at `li.module`, or the scope itself.
    fn scope_of(&mut self, env: &Fields<'a>, li: &LongIdent, span: &SourceSpan) -> Eval<'a, Fields<'a>> {
        match &li.module {
            None => Ok(env.clone()),
            Some(mp) => match self.module_path(env, mp, span)? {
                ModValue::Struct(f) => Ok(f),
                ModValue::Functor(_) => self.internal("functor has no components".into(), span),
            },
        }
    }

    // ---------------------------------------------------------------
    // Shapes

    fn shape_of(&mut self, env: &Fields<'a>, mty: &ModTypeExpr) -> Shape {
        match &mty.kind {
            ModTypeKind::Path(li) => {
                let fields = match &li.module {
                    None => Some(env.clone()),
                    Some(mp) => match self.module_path(env, mp, &mty.span) {
                        Ok(ModValue::Struct(f)) => Some(f),
                        _ => None,
                    },
                };
                fields
                    .and_then(|f| f.modtypes.get(&li.name).cloned())
                    .unwrap_or(Shape::Any)
            }
            ModTypeKind::Sig(specs) => {
                let mut fields = Vec::new();
                let mut env = env.clone();
                self.spec_fields(&mut env, specs, &mut fields);
                Shape::Sig(Rc::new(fields))
            }
            ModTypeKind::Functor(..) => Shape::Any,
            ModTypeKind::With(base, _) => self.shape_of(env, base),
        }
    }

    /// Collects the run-time components declared by `specs`. Module types
    /// declared inside are made visible to later specs through `env`.
    fn spec_fields(&mut self, env: &mut Fields<'a>, specs: &[SpecItem], out: &mut Vec<ShapeField>) {
        let field = |ns, name: &str, sub| ShapeField {
            ns,
            name: name.to_string(),
            sub,
        };
        for s in specs {
            match &s.kind {
                SpecItemKind::Val { name, .. } => out.push(field(FieldNs::Value, name, None)),
                SpecItemKind::Type { defs, .. } => {
                    for d in defs {
                        if let TypeRepr::Variant { ctors, .. } = &d.repr {
                            for c in ctors {
                                out.push(field(FieldNs::Ctor, &c.name, None));
                            }
                        }
                    }
                }
                SpecItemKind::TypeSubst { .. } | SpecItemKind::Open(_) => {}
                SpecItemKind::Module { name, params, mty } => {
                    let sub = if params.is_empty() {
                        self.shape_of(env, mty)
                    } else {
                        Shape::Any
                    };
                    out.push(field(FieldNs::Module, name, Some(sub)));
                }
                SpecItemKind::ModType { name, mty } => {
                    let sub = mty.as_ref().map(|m| self.shape_of(env, m));
                    if let Some(s) = &sub {
                        env.set_modtype(name, s.clone());
                    }
                    out.push(field(FieldNs::ModType, name, sub));
                }
                SpecItemKind::Exception { name, .. } => out.push(field(FieldNs::Ctor, name, None)),
                SpecItemKind::Include(m) => {
                    if let Shape::Sig(fs) = self.shape_of(env, m) {
                        out.extend(fs.iter().cloned());
                    }
                }
                SpecItemKind::Local(d1, d2) => {
                    let mut inner = env.clone();
                    self.spec_fields(&mut inner, d1, &mut Vec::new());
                    self.spec_fields(&mut inner, d2, out);
                }
            }
        }
    }

    // ---------------------------------------------------------------
    // Expressions

    fn eval_bindings(&mut self, env: &Fields<'a>, rec_flag: bool, bindings: &'a [Binding]) -> Eval<'a, Fields<'a>> {
        let mut bound = Fields::default();
        if rec_flag {
            let mut recs = Vec::new();
            let mut others = Vec::new();
            for b in bindings {
                let PatternKind::Var(name) = &b.pat.kind else {
                    others.push(b);
                    continue;
                };
                match (&b.params[..], &b.body.kind) {
                    ([], ExprKind::Fun(p, body)) => recs.push(RecFun {
                        name: name.clone(),
                        params: std::slice::from_ref(p),
                        body,
                    }),
                    ([], _) => others.push(b),
                    (ps, _) => recs.push(RecFun {
                        name: name.clone(),
                        params: ps,
                        body: &b.body,
                    }),
                }
            }
            let recs = Rc::new(recs);
            for f in recs.iter() {
                bound.set_value(&f.name, rec_closure(env, f, &recs));
            }
            let mut inner = env.clone();
            inner.merge(&bound);
            for b in others {
                let v = self.eval_expr(&inner, &b.body)?;
                self.bind_pattern(&b.pat, v, &mut bound, &b.span)?;
            }
            return Ok(bound);
        }
        for b in bindings {
            let v = if b.params.is_empty() {
                self.eval_expr(env, &b.body)?
            } else {
                Value::Closure(Rc::new(Closure {
                    env: env.clone(),
                    params: &b.params,
                    body: &b.body,
                    recs: None,
                }))
            };
            self.bind_pattern(&b.pat, v, &mut bound, &b.span)?;
        }
        Ok(bound)
    }

    fn bind_pattern(&mut self, p: &Pattern, v: Value<'a>, into: &mut Fields<'a>, span: &SourceSpan) -> Eval<'a, ()> {
        let mut binds = Vec::new();
        if !self.match_pattern(into, p, &v, &mut binds, span)? {
            return self.raise(&self.match_failure.clone(), None, span);
        }
        for (n, v) in binds {
            into.set_value(&n, v);
        }
        Ok(())
    }

    pub fn eval_expr(&mut self, env: &Fields<'a>, e: &'a Expr) -> Eval<'a, Value<'a>> {
        let span = &e.span;
        match &e.kind {
            ExprKind::Lit(l) => Ok(literal(l)),
            ExprKind::Var(li) => {
                let scope = self.scope_of(env, li, span)?;
                match scope.values.get(&li.name) {
                    Some(v) => Ok(v.clone()),
                    None => self.internal(format!("unbound value {}", li.name), span),
                }
            }
            ExprKind::Constr(li, arg) => {
                let arg = match arg {
                    Some(a) => Some(Rc::new(self.eval_expr(env, a)?)),
                    None => None,
                };
                match self.ctor(env, li, span)? {
                    CtorRt::Variant => Ok(Value::Constr(li.name.as_str().into(), arg)),
                    CtorRt::Exn(tag) => Ok(Value::Exn(tag, arg)),
                }
            }
            ExprKind::Tuple(es) => {
                let vs = es.iter().map(|x| self.eval_expr(env, x)).collect::<Result<Vec<_>, _>>()?;
                Ok(Value::Tuple(Rc::new(vs)))
            }
            ExprKind::Fun(p, body) => Ok(Value::Closure(Rc::new(Closure {
                env: env.clone(),
                params: std::slice::from_ref(p),
                body,
                recs: None,
            }))),
            ExprKind::Apply(f, a) => {
                let fv = self.eval_expr(env, f)?;
                let av = self.eval_expr(env, a)?;
                self.apply(fv, av, span)
            }
            ExprKind::LetIn { rec_flag, bindings, body } => {
                let bound = self.eval_bindings(env, *rec_flag, bindings)?;
                let mut inner = env.clone();
                inner.merge(&bound);
                self.eval_expr(&inner, body)
            }
            ExprKind::Match(scrut, cases) => {
                let (handlers, value_cases): (Vec<&Case>, Vec<&Case>) = cases.iter().partition(|c| c.exception);
                match self.eval_expr(env, scrut) {
                    Ok(v) => match self.select(env, &value_cases, &v, span)? {
                        Some((inner, body)) => self.eval_expr(&inner, body),
                        None => self.raise(&self.match_failure.clone(), None, span),
                    },
                    Err(r) => match self.select(env, &handlers, &r.value, span)? {
                        Some((inner, body)) => self.eval_expr(&inner, body),
                        None => Err(r),
                    },
                }
            }
            ExprKind::TryWith(body, cases) => match self.eval_expr(env, body) {
                Ok(v) => Ok(v),
                Err(r) => {
                    let all: Vec<&Case> = cases.iter().collect();
                    match self.select(env, &all, &r.value, span)? {
                        Some((inner, body)) => self.eval_expr(&inner, body),
                        None => Err(r),
                    }
                }
            },
            ExprKind::Raise(x) => {
                let v = self.eval_expr(env, x)?;
                Err(Raised { value: v, span: span.clone() })
            }
            ExprKind::Assert(x) => {
                self.effects += 1;
                match self.eval_expr(env, x)? {
                    Value::Bool(true) => Ok(Value::Unit),
                    _ => self.raise(&self.assert_failure.clone(), None, span),
                }
            }
            ExprKind::Sequence(a, b) => {
                self.eval_expr(env, a)?;
                self.eval_expr(env, b)
            }
            ExprKind::LetModuleIn(name, m, body) => {
                let mv = self.eval_mod_expr(env, m)?;
                let mut inner = env.clone();
                inner.set_module(name, mv);
                self.eval_expr(&inner, body)
            }
            ExprKind::LetExceptionIn(name, _, body) => {
                let tag = self.fresh_tag(name);
                let mut inner = env.clone();
                inner.set_ctor(name, CtorRt::Exn(tag));
                self.eval_expr(&inner, body)
            }
            ExprKind::LetOpenIn(m, body) => {
                let fields = self.struct_fields(env, m)?;
                let mut inner = env.clone();
                inner.merge(&fields);
                self.eval_expr(&inner, body)
            }
            ExprKind::If(c, t, f) => match self.eval_expr(env, c)? {
                Value::Bool(true) => self.eval_expr(env, t),
                _ => match f {
                    Some(f) => self.eval_expr(env, f),
                    None => Ok(Value::Unit),
                },
            },
            ExprKind::Annot(x, _) => self.eval_expr(env, x),
        }
    }

    fn ctor(&mut self, env: &Fields<'a>, li: &LongIdent, span: &SourceSpan) -> Eval<'a, CtorRt> {
        let scope = self.scope_of(env, li, span)?;
        match scope.ctors.get(&li.name) {
            Some(c) => Ok(c.clone()),
            // Constructors of types reached only through a path.
            None => Ok(CtorRt::Variant),
        }
    }

    /// The first case whose pattern matches `v`, with its bindings added.
    fn select(
        &mut self,
        env: &Fields<'a>,
        cases: &[&'a Case],
        v: &Value<'a>,
        span: &SourceSpan,
    ) -> Eval<'a, Option<(Fields<'a>, &'a Expr)>> {
        for c in cases {
            let mut binds = Vec::new();
            if self.match_pattern(env, &c.pat, v, &mut binds, span)? {
                let mut inner = env.clone();
                for (n, b) in binds {
                    inner.set_value(&n, b);
                }
                return Ok(Some((inner, &c.body)));
            }
        }
        Ok(None)
    }

    fn match_pattern(
        &mut self,
        env: &Fields<'a>,
        p: &Pattern,
        v: &Value<'a>,
        binds: &mut Vec<(String, Value<'a>)>,
        span: &SourceSpan,
    ) -> Eval<'a, bool> {
        match (&p.kind, v) {
            (PatternKind::Wildcard, _) => Ok(true),
            (PatternKind::Var(n), _) => {
                binds.push((n.clone(), v.clone()));
                Ok(true)
            }
            (PatternKind::Annot(q, _), _) => self.match_pattern(env, q, v, binds, span),
            (PatternKind::Lit(l), _) => Ok(values_equal(&self.store, &literal(l), v).unwrap_or(false)),
            (PatternKind::Tuple(ps), Value::Tuple(vs)) if ps.len() == vs.len() => {
                for (q, w) in ps.iter().zip(vs.iter()) {
                    if !self.match_pattern(env, q, w, binds, span)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (PatternKind::Constr(li, sub), _) => {
                let arg = match (self.ctor(env, li, span)?, v) {
                    (CtorRt::Variant, Value::Constr(n, arg)) if **n == *li.name => arg,
                    (CtorRt::Exn(tag), Value::Exn(t, arg)) if tag == *t => arg,
                    _ => return Ok(false),
                };
                match (sub, arg) {
                    (None, _) => Ok(true),
                    (Some(q), Some(a)) => self.match_pattern(env, q, a, binds, span),
                    (Some(q), None) => Ok(matches!(q.kind, PatternKind::Wildcard)),
                }
            }
            _ => Ok(false),
        }
    }

    fn apply(&mut self, f: Value<'a>, arg: Value<'a>, span: &SourceSpan) -> Eval<'a, Value<'a>> {
        match f {
            Value::Closure(clo) => {
                let mut env = clo.env.clone();
                if let Some(recs) = &clo.recs {
                    for r in recs.iter() {
                        env.set_value(&r.name, rec_closure(&clo.env, r, recs));
                    }
                }
                let (first, rest) = clo.params.split_first().expect("closure has a parameter");
                let mut binds = Fields::default();
                self.bind_pattern(first, arg, &mut binds, span)?;
                env.merge(&binds);
                if rest.is_empty() {
                    self.eval_expr(&env, clo.body)
                } else {
                    Ok(Value::Closure(Rc::new(Closure {
                        env,
                        params: rest,
                        body: clo.body,
                        recs: None,
                    })))
                }
            }
            Value::Prim(p, args) => {
                let mut args = (*args).clone();
                args.push(arg);
                if args.len() < p.arity() {
                    Ok(Value::Prim(p, Rc::new(args)))
                } else {
                    self.prim(p, args, span)
                }
            }
            _ => self.internal("not a function".into(), span),
        }
    }

    fn prim(&mut self, p: Prim, args: Vec<Value<'a>>, span: &SourceSpan) -> Eval<'a, Value<'a>> {
        use Value::{Bool, Int, Ref, Str, Unit};
        Ok(match (p, args.as_slice()) {
            (Prim::Add, [Int(a), Int(b)]) => Int(a.wrapping_add(*b)),
            (Prim::Sub, [Int(a), Int(b)]) => Int(a.wrapping_sub(*b)),
            (Prim::Mul, [Int(a), Int(b)]) => Int(a.wrapping_mul(*b)),
            (Prim::Lt, [Int(a), Int(b)]) => Bool(a < b),
            (Prim::Eq, [a, b]) => match values_equal(&self.store, a, b) {
                Some(r) => Bool(r),
                None => {
                    let msg = Str("compare: functional value".into());
                    return self.raise(&self.failure.clone(), Some(msg), span);
                }
            },
            (Prim::Not, [Bool(b)]) => Bool(!b),
            (Prim::Print, [Str(s)]) => {
                self.effects += 1;
                // A closed output stream does not stop the program.
                let _ = self.out.write_all(s.as_bytes());
                Unit
            }
            (Prim::StringOfInt, [Int(n)]) => Str(n.to_string().into()),
            (Prim::Incr | Prim::Decr, [Ref(c)]) => {
                let delta = if p == Prim::Incr { 1 } else { -1 };
                if let Some(Int(n)) = self.store.get(*c) {
                    self.store[*c] = Int(n.wrapping_add(delta));
                }
                Unit
            }
            (Prim::MkRef, [v]) => {
                self.store.push(v.clone());
                Ref(self.store.len() - 1)
            }
            (Prim::Deref, [Ref(c)]) => self.store[*c].clone(),
            (Prim::Assign, [Ref(c), v]) => {
                self.store[*c] = v.clone();
                Unit
            }
            _ => return self.internal(format!("ill-typed primitive {p:?}"), span),
        })
    }
}

fn rec_closure<'a>(env: &Fields<'a>, f: &RecFun<'a>, recs: &Rc<Vec<RecFun<'a>>>) -> Value<'a> {
    Value::Closure(Rc::new(Closure {
        env: env.clone(),
        params: f.params,
        body: f.body,
        recs: Some(recs.clone()),
    }))
}

fn literal<'a>(l: &Literal) -> Value<'a> {
    match l {
        Literal::Int(n) => Value::Int(*n),
        Literal::Str(s) => Value::Str(s.as_str().into()),
        Literal::Bool(b) => Value::Bool(*b),
        Literal::Unit => Value::Unit,
    }
}

/// Structural equality; `None` when a function is compared.
fn values_equal(store: &[Value<'_>], a: &Value<'_>, b: &Value<'_>) -> Option<bool> {
    use Value::*;
    let all = |xs: &[Value<'_>], ys: &[Value<'_>]| -> Option<bool> {
        let mut eq = xs.len() == ys.len();
        for (x, y) in xs.iter().zip(ys) {
            eq &= values_equal(store, x, y)?;
        }
        Some(eq)
    };
    let opt = |x: &Option<Rc<Value<'_>>>, y: &Option<Rc<Value<'_>>>| match (x, y) {
        (Some(x), Some(y)) => values_equal(store, x, y),
        (None, None) => Some(true),
        _ => Some(false),
    };
    match (a, b) {
        (Int(x), Int(y)) => Some(x == y),
        (Bool(x), Bool(y)) => Some(x == y),
        (Str(x), Str(y)) => Some(x == y),
        (Unit, Unit) => Some(true),
        (Tuple(xs), Tuple(ys)) => all(xs, ys),
        (Constr(n, x), Constr(m, y)) => Some(n == m && opt(x, y)?),
        (Exn(s, x), Exn(t, y)) => Some(s == t && opt(x, y)?),
        (Ref(c), Ref(d)) => values_equal(store, &store[*c], &store[*d]),
        (Closure(_) | Prim(..), _) | (_, Closure(_) | Prim(..)) => None,
        _ => Some(false),
    }
}

/// Keeps only the components listed in `shape`.
fn restrict<'a>(m: ModValue<'a>, shape: &Shape) -> ModValue<'a> {
    let (ModValue::Struct(f), Shape::Sig(fields)) = (&m, shape) else {
        return m;
    };
    let mut out = Fields::default();
    for sf in fields.iter() {
        match sf.ns {
            FieldNs::Value => {
                if let Some(v) = f.values.get(&sf.name) {
                    out.set_value(&sf.name, v.clone());
                }
            }
            FieldNs::Ctor => {
                if let Some(c) = f.ctors.get(&sf.name) {
                    out.set_ctor(&sf.name, c.clone());
                }
            }
            FieldNs::Module => {
                if let Some(sub) = f.modules.get(&sf.name) {
                    let sub = match &sf.sub {
                        Some(s) => restrict(sub.clone(), s),
                        None => sub.clone(),
                    };
                    out.set_module(&sf.name, sub);
                }
            }
            FieldNs::ModType => {
                let def = sf.sub.clone().or_else(|| f.modtypes.get(&sf.name).cloned());
                if let Some(d) = def {
                    out.set_modtype(&sf.name, d);
                }
            }
        }
    }
    ModValue::Struct(out)
}

/// Runs a checked program, writing `print` output to `out`.
pub fn eval_program<'a>(program: &'a Program, out: &mut dyn Write) -> RunResult<'a> {
    Evaluator::new(out).eval_program(program)
}
