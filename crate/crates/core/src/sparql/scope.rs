use super::ast::*;
use super::{ScopeError, ScopeViolation};
use crate::lexical::SourcePosition;
use crate::query::Variable;
use std::collections::BTreeSet;

/// Variables in scope at the end of each group, innermost groups first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScopeReport {
    pub groups: Vec<(SourcePosition, BTreeSet<Variable>)>,
}

/// Checks that no `BIND` target is already in scope where it appears.
///
/// Variables inside embedded triple patterns count as in scope at any
/// nesting level.
pub fn check_scope(query: &Query) -> Result<ScopeReport, ScopeError> {
    let mut report = ScopeReport::default();
    let mut violations = Vec::new();
    group(&query.pattern, &mut report, &mut violations);
    if violations.is_empty() {
        Ok(report)
    } else {
        Err(ScopeError { violations })
    }
}

fn group(
    g: &GroupPattern,
    report: &mut ScopeReport,
    violations: &mut Vec<ScopeViolation>,
) -> BTreeSet<Variable> {
    let mut scope = BTreeSet::new();
    for element in &g.elements {
        match element {
            GroupElement::Triples(block) => {
                let mut vars = Vec::new();
                block.iter().for_each(|t| t.variables(&mut vars));
                scope.extend(vars);
            }
            GroupElement::Bind(b) => {
                let target = &b.variable.node;
                if scope.contains(target) {
                    violations.push(ScopeViolation {
                        variable: target.clone(),
                        position: b.variable.position,
                        message: "is already in scope".to_owned(),
                    });
                }
                if let BindExpression::Embedded(t) = &b.expression {
                    let mut vars = Vec::new();
                    t.variables(&mut vars);
                    if vars.contains(target) {
                        violations.push(ScopeViolation {
                            variable: target.clone(),
                            position: b.variable.position,
                            message: "occurs in its own embedded triple pattern".to_owned(),
                        });
                    }
                    scope.extend(vars);
                }
                scope.insert(target.clone());
            }
            GroupElement::Filter(_) => {}
            GroupElement::Optional(inner) | GroupElement::Group(inner) => {
                scope.extend(group(inner, report, violations));
            }
            GroupElement::Union(groups) => {
                for inner in groups {
                    scope.extend(group(inner, report, violations));
                }
            }
        }
    }
    report.groups.push((g.position, scope.clone()));
    scope
}
