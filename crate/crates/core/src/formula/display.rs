//! Canonical text form. Binary connectives are always parenthesized so the output parses back
//! to the same tree.

use core::fmt;

use super::{Formula, TimeBound, Value};

impl<T: fmt::Display> fmt::Display for Value<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Lit(v) => write!(f, "{v}"),
            Value::Param(p) => write!(f, "?{p}"),
        }
    }
}

impl fmt::Display for TimeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeBound::Unbounded => Ok(()),
            TimeBound::AtLeast(v) => write!(f, "[>={v}]"),
            TimeBound::AtMost(v) => write!(f, "[<={v}]"),
            TimeBound::Window(lo, hi) => write!(f, "[>={lo}][<={hi}]"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("TRUE"),
            Formula::False => f.write_str("FALSE"),
            Formula::Atom(a) => write!(f, "(x {} {})", a.cmp.symbol(), a.threshold),
            Formula::Exists { count, chain, body } => {
                write!(f, "E {count}")?;
                for rho in chain {
                    write!(f, " via (y {} {})", rho.cmp.symbol(), rho.threshold)?;
                }
                write!(f, " : {body}")
            }
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Until { bound, lhs, rhs } => write!(f, "({lhs} U{bound} {rhs})"),
            Formula::Eventually { bound, body } => write!(f, "F{bound} {body}"),
            Formula::Always { bound, body } => write!(f, "G{bound} {body}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Atom, EdgeAtom};
    use super::*;
    use crate::graph::Comparison;
    use alloc::boxed::Box;
    use alloc::string::{String, ToString};
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn prints_canonical_text() {
        let f = parse("G ((x >= 181.1) -> G[<=6] E 8 via (y <= 2) : (x <= ?b))").unwrap();
        assert_eq!(
            f.to_string(),
            "G ((x >= 181.1) -> G[<=6] E 8 via (y <= 2) : (x <= ?b))"
        );
        let g = parse("!x>=1 U[>=1][<=3] F[>=?i] TRUE").unwrap();
        assert_eq!(g.to_string(), "(!(x >= 1) U[>=1][<=3] F[>=?i] TRUE)");
    }

    fn arb_cmp() -> impl Strategy<Value = Comparison> {
        prop_oneof![Just(Comparison::Le), Just(Comparison::Ge)]
    }

    fn arb_real(names: &'static str) -> impl Strategy<Value = Value<f64>> {
        prop_oneof![
            (-1e6f64..1e6).prop_map(Value::Lit),
            (0u32..50).prop_map(|n| Value::Lit(n as f64 / 8.0)),
            "[a-z][a-z0-9_]{0,3}".prop_map(move |s| Value::Param(String::from(names) + &s)),
        ]
    }

    fn arb_int(names: &'static str) -> impl Strategy<Value = Value<u32>> {
        prop_oneof![
            (0u32..20).prop_map(Value::Lit),
            "[a-z][a-z0-9_]{0,3}".prop_map(move |s| Value::Param(String::from(names) + &s)),
        ]
    }

    fn arb_bound() -> impl Strategy<Value = TimeBound> {
        prop_oneof![
            Just(TimeBound::Unbounded),
            arb_int("lo").prop_map(TimeBound::AtLeast),
            arb_int("hi").prop_map(TimeBound::AtMost),
            (arb_int("lo"), arb_int("hi")).prop_map(|(a, b)| TimeBound::Window(a, b)),
        ]
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::True),
            Just(Formula::False),
            (arb_cmp(), arb_real("c")).prop_map(|(cmp, threshold)| Formula::Atom(Atom {
                cmp,
                threshold
            })),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.implies(b)),
                (arb_bound(), inner.clone(), inner.clone())
                    .prop_map(|(bd, a, b)| Formula::until(bd, a, b)),
                (arb_bound(), inner.clone()).prop_map(|(bd, a)| Formula::eventually(bd, a)),
                (arb_bound(), inner.clone()).prop_map(|(bd, a)| Formula::always(bd, a)),
                (
                    arb_int("n"),
                    proptest::collection::vec((arb_cmp(), arb_real("d")), 1..3),
                    inner
                )
                    .prop_map(|(count, chain, body)| Formula::Exists {
                        count,
                        chain: chain
                            .into_iter()
                            .map(|(cmp, threshold)| EdgeAtom { cmp, threshold })
                            .collect::<Vec<_>>(),
                        body: Box::new(body),
                    }),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_round_trips(f in arb_formula()) {
            // Random parameter names may collide; uniqueness is a parse-time rule, so rename.
            let counter = core::cell::Cell::new(0usize);
            let f = f.rename_params(&|p| {
                counter.set(counter.get() + 1);
                alloc::format!("{p}_{}", counter.get())
            });
            let text = f.to_string();
            let back = parse(&text).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
