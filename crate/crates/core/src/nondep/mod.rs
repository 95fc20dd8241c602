//! Dependency elimination: the least-changed supertype of a signature that
//! does not mention a given set of hidden idents.

use std::collections::HashSet;

use crate::semobj::*;
use crate::syntax::SourceSpan;

/// What introduced the hidden module.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HiddenOrigin {
    Open,
    FunctorArgument,
}

impl HiddenOrigin {
    pub fn phrase(self) -> &'static str {
        match self {
            HiddenOrigin::Open => "this open",
            HiddenOrigin::FunctorArgument => "this functor argument",
        }
    }
}

/// A component whose type cannot avoid the hidden idents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Victim {
    pub kind: ItemKind,
    pub name: String,
    pub span: Option<SourceSpan>,
    /// The hidden component the victim depends on.
    pub blocking: Ident,
    pub blocking_kind: ItemKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationError {
    pub hidden: Ident,
    pub origin: HiddenOrigin,
    pub open_span: SourceSpan,
    pub victims: Vec<Victim>,
}

impl EliminationError {
    /// First line of the report, e.g. `The type t/12 introduced by this open appears in the signature`.
    pub fn headline(&self) -> String {
        let (kind, id) = match self.victims.first() {
            Some(v) => (v.blocking_kind, v.blocking.clone()),
            None => (ItemKind::Module, self.hidden.clone()),
        };
        format!(
            "The {} {} introduced by {} appears in the signature",
            kind.word(),
            id.with_stamp(),
            self.origin.phrase()
        )
    }
}

/// The hidden module ident together with every ident declared inside its signature.
pub fn hidden_set(hidden: &Ident, mty: &ModType) -> HashSet<Ident> {
    let mut set = HashSet::new();
    set.insert(hidden.clone());
    collect_decl_idents(mty, &mut set);
    set
}

fn collect_decl_idents(m: &ModType, set: &mut HashSet<Ident>) {
    match m {
        ModType::Sig(items) => {
            for it in items {
                set.insert(it.ident().clone());
                match it {
                    SigItem::Module(_, m) | SigItem::ModType(_, Some(m)) => collect_decl_idents(m, set),
                    _ => {}
                }
            }
        }
        ModType::Functor(..) | ModType::Named(_) => {}
    }
}

/// The type path that could not be eliminated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blocked(pub Path);

impl std::fmt::Display for Blocked {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Rewrites `t` so that it mentions no hidden ident, expanding abbreviations
/// that go through the hidden idents.
pub fn eliminate_type(sess: &Session, hidden: &HashSet<Ident>, t: &Ty) -> Result<Ty, Blocked> {
    eliminate_fuel(sess, hidden, t, 256)
}

fn eliminate_fuel(sess: &Session, hidden: &HashSet<Ident>, t: &Ty, fuel: usize) -> Result<Ty, Blocked> {
    let t = sess.head(t);
    match &t {
        Ty::Var(_) => Ok(t),
        Ty::Arrow(a, b) => Ok(Ty::arrow(
            eliminate_fuel(sess, hidden, a, fuel)?,
            eliminate_fuel(sess, hidden, b, fuel)?,
        )),
        Ty::Tuple(ts) => Ok(Ty::Tuple(
            ts.iter()
                .map(|t| eliminate_fuel(sess, hidden, t, fuel))
                .collect::<Result<_, _>>()?,
        )),
        Ty::Constr(p, args) => {
            let direct = if p.mentions(hidden) {
                Err(Blocked(p.clone()))
            } else {
                args.iter()
                    .map(|a| eliminate_fuel(sess, hidden, a, fuel))
                    .collect::<Result<Vec<_>, _>>()
                    .map(|args| Ty::Constr(p.clone(), args))
            };
            match direct {
                Ok(t) => Ok(t),
                Err(blocked) => match sess.expand_head(&t) {
                    Some(exp) if fuel > 0 => eliminate_fuel(sess, hidden, &exp, fuel - 1),
                    _ => Err(blocked),
                },
            }
        }
    }
}

/// Mentions of hidden idents, syntactically.
pub fn mentions(hidden: &Ident, t: &Ty) -> bool {
    let set: HashSet<Ident> = [hidden.clone()].into_iter().collect();
    t.mentions(&set)
}

pub fn modtype_mentions_ident(hidden: &Ident, m: &ModType) -> bool {
    let set: HashSet<Ident> = [hidden.clone()].into_iter().collect();
    modtype_mentions(m, &set)
}

struct Eliminator<'a> {
    sess: &'a Session,
    hidden: &'a HashSet<Ident>,
    victims: Vec<Victim>,
}

impl Eliminator<'_> {
    fn victim(&mut self, kind: ItemKind, id: &Ident, blocked: &Blocked) {
        let (blocking_kind, blocking) = self.blocking_ident(&blocked.0);
        self.victims.push(Victim {
            kind,
            name: id.name.clone(),
            span: self.sess.span_of(id).cloned(),
            blocking,
            blocking_kind,
        });
    }

    /// Ident of the hidden declaration a blocked path denotes.
    fn blocking_ident(&self, p: &Path) -> (ItemKind, Ident) {
        if let Path::Dot(q, name) = p {
            for kind in [ItemKind::Type, ItemKind::ModType, ItemKind::Module] {
                if let Ok(it) = self.sess.find_component(q, kind, name) {
                    return (kind, it.ident().clone());
                }
            }
        }
        let kind = if self.sess.type_decl(p).is_ok() {
            ItemKind::Type
        } else {
            ItemKind::Module
        };
        (kind, p.head().clone())
    }

    fn ty(&self, t: &Ty) -> Result<Ty, Blocked> {
        eliminate_type(self.sess, self.hidden, t)
    }

    fn tys(&self, ts: &[Ty]) -> Result<Vec<Ty>, Blocked> {
        ts.iter().map(|t| self.ty(t)).collect()
    }

    /// `strict`: manifests may not be dropped (inside module types, which
    /// must be preserved exactly).
    fn items(&mut self, items: &[SigItem], strict: bool) -> Vec<SigItem> {
        let mut out = Vec::with_capacity(items.len());
        for it in items {
            match it {
                SigItem::Val(id, s) => match self.ty(&s.body) {
                    Ok(body) => out.push(SigItem::Val(id.clone(), Scheme { vars: s.vars.clone(), body })),
                    Err(b) => self.victim(ItemKind::Value, id, &b),
                },
                SigItem::Exn(id, args) => match self.tys(args) {
                    Ok(args) => out.push(SigItem::Exn(id.clone(), args)),
                    Err(b) => self.victim(ItemKind::Exception, id, &b),
                },
                SigItem::Type(id, d) => {
                    let manifest = match &d.manifest {
                        None => None,
                        Some(m) => match self.ty(m) {
                            Ok(m) => Some(m),
                            Err(b) if strict => {
                                self.victim(ItemKind::Type, id, &b);
                                None
                            }
                            Err(_) => None,
                        },
                    };
                    let mut variant = None;
                    if let Some(cs) = &d.variant {
                        let mut ok = Vec::new();
                        for c in cs {
                            match self.tys(&c.args) {
                                Ok(args) => ok.push(CtorSig {
                                    name: c.name.clone(),
                                    args,
                                }),
                                Err(b) => self.victim(ItemKind::Type, id, &b),
                            }
                        }
                        variant = Some(ok);
                    }
                    out.push(SigItem::Type(
                        id.clone(),
                        TypeDecl {
                            params: d.params.clone(),
                            manifest,
                            variant,
                        },
                    ));
                }
                SigItem::Module(id, m) => match self.modtype(m, strict) {
                    Ok(m) => out.push(SigItem::Module(id.clone(), m)),
                    Err(b) => self.victim(ItemKind::Module, id, &b),
                },
                SigItem::ModType(_, None) => out.push(it.clone()),
                SigItem::ModType(id, Some(m)) => match self.modtype(m, true) {
                    Ok(m) => out.push(SigItem::ModType(id.clone(), Some(m))),
                    Err(b) => self.victim(ItemKind::ModType, id, &b),
                },
            }
        }
        out
    }

    fn modtype(&mut self, m: &ModType, strict: bool) -> Result<ModType, Blocked> {
        match m {
            ModType::Sig(items) => Ok(ModType::Sig(self.items(items, strict))),
            ModType::Functor(x, p, r) => {
                let p = self.modtype(p, true)?;
                let r = self.modtype(r, strict)?;
                Ok(ModType::Functor(x.clone(), Box::new(p), Box::new(r)))
            }
            ModType::Named(p) if p.mentions(self.hidden) => match self.sess.modtype_decl_of_path(p) {
                Ok(Some(def)) => self.modtype(&def, strict),
                _ => Err(Blocked(p.clone())),
            },
            ModType::Named(_) => Ok(m.clone()),
        }
    }
}

/// Eliminates the `hidden` idents from `items`. On failure returns every
/// victim, in signature order.
pub fn nondep_items(sess: &Session, hidden: &HashSet<Ident>, items: &[SigItem]) -> Result<Vec<SigItem>, Vec<Victim>> {
    let mut e = Eliminator {
        sess,
        hidden,
        victims: Vec::new(),
    };
    let out = e.items(items, false);
    if e.victims.is_empty() {
        Ok(out)
    } else {
        Err(e.victims)
    }
}

pub fn nondep_modtype(sess: &Session, hidden: &HashSet<Ident>, m: &ModType) -> Result<ModType, Vec<Victim>> {
    let mut e = Eliminator {
        sess,
        hidden,
        victims: Vec::new(),
    };
    match e.modtype(m, false) {
        Ok(out) if e.victims.is_empty() => Ok(out),
        Ok(_) => Err(e.victims),
        Err(b) => {
            let h = b.0.head().clone();
            e.victim(ItemKind::Module, &h, &b);
            Err(e.victims)
        }
    }
}

/// `nondep_items` for the hidden module `hidden`, packaged as an error.
pub fn nondep_signature(
    sess: &Session,
    hidden: &Ident,
    hidden_type: &ModType,
    items: &[SigItem],
    origin: HiddenOrigin,
    open_span: &SourceSpan,
) -> Result<Vec<SigItem>, EliminationError> {
    let set = hidden_set(hidden, hidden_type);
    nondep_items(sess, &set, items).map_err(|victims| EliminationError {
        hidden: hidden.clone(),
        origin,
        open_span: open_span.clone(),
        victims,
    })
}
