//! Run-time shapes: which components of a structure survive an ascription.
//! Computed from the syntax of module types, never by evaluating them.

use std::rc::Rc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldNs {
    Value,
    Ctor,
    Module,
    ModType,
}

#[derive(Clone, Debug)]
pub struct ShapeField {
    pub ns: FieldNs,
    pub name: String,
    /// Shape of a module component, or definition of a module type component.
    pub sub: Option<Shape>,
}

#[derive(Clone, Debug)]
pub enum Shape {
    Sig(Rc<Vec<ShapeField>>),
    /// Functors and abstract module types: nothing is removed.
    Any,
}
