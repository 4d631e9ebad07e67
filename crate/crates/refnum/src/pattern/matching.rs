//! Pattern matching over phrase nodes.
//!
//! Matching is pure: the result depends only on the pattern, the node, and
//! the context. A match succeeds when at least one alignment of globs and
//! child assignments satisfies the whole pattern; the matcher therefore
//! threads sets of binding environments through the pattern rather than a
//! single candidate, and `numguard` filters those environments. Globs are
//! tried shortest-first, with backtracking through the environment sets.

use std::collections::BTreeSet;

use super::{
    Bindings, Cmp, FieldItem, FieldPattern, MatchContext, MatchResult, MorphItem, NodeTemplate,
    Pattern,
};
use crate::tree::{Morpheme, NodeId};

/// Matches `pattern` against one node of `ctx.sentence`.
pub fn matches(pattern: &Pattern, node: NodeId, ctx: &MatchContext) -> MatchResult {
    let envs = solve(pattern, node, ctx, &[Bindings::new()]);
    MatchResult {
        matched: !envs.is_empty(),
        bindings: envs,
    }
}

/// Refines a set of binding environments; an empty result means failure.
fn solve(pattern: &Pattern, node: NodeId, ctx: &MatchContext, envs: &[Bindings]) -> Vec<Bindings> {
    if envs.is_empty() {
        return Vec::new();
    }
    match pattern {
        Pattern::AnySubtree => envs.to_vec(),
        Pattern::Template(t) => solve_template(t, node, ctx, envs),
        Pattern::And(parts) => {
            // Guards run after the other conjuncts so that they see every
            // binding established inside the same `and`.
            let (guards, others): (Vec<_>, Vec<_>) = parts
                .iter()
                .partition(|p| matches!(p, Pattern::NumGuard { .. }));
            let mut current = envs.to_vec();
            for p in others.into_iter().chain(guards) {
                current = solve(p, node, ctx, &current);
                if current.is_empty() {
                    return current;
                }
            }
            current
        }
        Pattern::Or(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(solve(p, node, ctx, envs));
            }
            dedup(out)
        }
        Pattern::Not(inner) => {
            // An environment survives iff no extension of it satisfies the
            // inner pattern; negation contributes no bindings.
            envs.iter()
                .filter(|env| solve(inner, node, ctx, std::slice::from_ref(env)).is_empty())
                .cloned()
                .collect()
        }
        Pattern::Modee(inner) => match ctx.sentence.node(node).parent() {
            Some(parent) => solve(inner, parent, ctx, envs),
            None => Vec::new(),
        },
        Pattern::ModeeStar(inner) => {
            let mut out = Vec::new();
            let mut cursor = ctx.sentence.node(node).parent();
            while let Some(ancestor) = cursor {
                out.extend(solve(inner, ancestor, ctx, envs));
                cursor = ctx.sentence.node(ancestor).parent();
            }
            dedup(out)
        }
        Pattern::NumGuard { binder, cmp, value } => envs
            .iter()
            .filter(|env| match env.get(binder) {
                Some(bound) => match cmp {
                    Cmp::Eq => bound == value,
                    Cmp::Ge => bound >= value,
                    Cmp::Le => bound <= value,
                },
                None => false,
            })
            .cloned()
            .collect(),
        Pattern::RefPropIs(c) => {
            if ctx.sentence.node(node).refprop == Some(*c) {
                envs.to_vec()
            } else {
                Vec::new()
            }
        }
        Pattern::NumberIs(c) => {
            if ctx.sentence.node(node).number == Some(*c) {
                envs.to_vec()
            } else {
                Vec::new()
            }
        }
        Pattern::SeenBefore => {
            if ctx
                .discourse
                .seen_before(&ctx.sentence.node(node).head().lemma)
            {
                envs.to_vec()
            } else {
                Vec::new()
            }
        }
    }
}

fn solve_template(
    t: &NodeTemplate,
    node: NodeId,
    ctx: &MatchContext,
    envs: &[Bindings],
) -> Vec<Bindings> {
    let phrase = ctx.sentence.node(node);
    let after_morphemes = align_morphemes(&t.morphemes, &phrase.morphemes, envs);
    if after_morphemes.is_empty() {
        return after_morphemes;
    }
    let kids = phrase.children();
    if !t.allow_extra && t.children.len() != kids.len() {
        return Vec::new();
    }
    if t.children.len() > kids.len() {
        return Vec::new();
    }
    let mut used = vec![false; kids.len()];
    let out = assign_children(&t.children, kids, &mut used, ctx, &after_morphemes);
    dedup(out)
}

/// Injective, order-insensitive assignment of child patterns to modifiers.
fn assign_children(
    templates: &[Pattern],
    kids: &[NodeId],
    used: &mut [bool],
    ctx: &MatchContext,
    envs: &[Bindings],
) -> Vec<Bindings> {
    let Some((first, rest)) = templates.split_first() else {
        return envs.to_vec();
    };
    let mut out = Vec::new();
    for (i, &kid) in kids.iter().enumerate() {
        if used[i] {
            continue;
        }
        let here = solve(first, kid, ctx, envs);
        if here.is_empty() {
            continue;
        }
        used[i] = true;
        out.extend(assign_children(rest, kids, used, ctx, &here));
        used[i] = false;
    }
    out
}

/// Ordered alignment of morpheme items over the entire morpheme list.
fn align_morphemes(items: &[MorphItem], seq: &[Morpheme], envs: &[Bindings]) -> Vec<Bindings> {
    fn go(items: &[MorphItem], seq: &[Morpheme], envs: &[Bindings], out: &mut Vec<Bindings>) {
        match items.split_first() {
            None => {
                if seq.is_empty() {
                    out.extend(envs.iter().cloned());
                }
            }
            Some((MorphItem::Gap, rest)) => {
                for skip in 0..=seq.len() {
                    go(rest, &seq[skip..], envs, out);
                }
            }
            Some((MorphItem::Template(mt), rest)) => {
                if let Some((m, tail)) = seq.split_first() {
                    let here = align_fields(&mt.items, &m.fields(), envs);
                    if !here.is_empty() {
                        go(rest, tail, &here, out);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    go(items, seq, envs, &mut out);
    dedup(out)
}

/// Ordered alignment of field items over a morpheme's six fields.
fn align_fields(items: &[FieldItem], fields: &[&str], envs: &[Bindings]) -> Vec<Bindings> {
    fn go(items: &[FieldItem], fields: &[&str], envs: &[Bindings], out: &mut Vec<Bindings>) {
        match items.split_first() {
            None => {
                if fields.is_empty() {
                    out.extend(envs.iter().cloned());
                }
            }
            Some((FieldItem::Gap, rest)) => {
                for skip in 0..=fields.len() {
                    go(rest, &fields[skip..], envs, out);
                }
            }
            Some((FieldItem::Pat(p), rest)) => {
                if let Some((&f, tail)) = fields.split_first() {
                    match p {
                        FieldPattern::Any => go(rest, tail, envs, out),
                        FieldPattern::Literal(want) => {
                            if f == want {
                                go(rest, tail, envs, out);
                            }
                        }
                        FieldPattern::Regex(re) => {
                            if re.is_match(f) {
                                go(rest, tail, envs, out);
                            }
                        }
                        FieldPattern::NumBind(name) => {
                            if let Some(v) = super::parse_numeral(f) {
                                let extended: Vec<Bindings> = envs
                                    .iter()
                                    .filter(|env| env.get(name).is_none_or(|prev| *prev == v))
                                    .map(|env| {
                                        let mut env = env.clone();
                                        env.insert(name.clone(), v);
                                        env
                                    })
                                    .collect();
                                if !extended.is_empty() {
                                    go(rest, tail, &extended, out);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    go(items, fields, envs, &mut out);
    dedup(out)
}

fn dedup(envs: Vec<Bindings>) -> Vec<Bindings> {
    let set: BTreeSet<Bindings> = envs.into_iter().collect();
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::DiscourseContext;
    use crate::pattern::parse_pattern;
    use crate::tree::{parse_tree, Sentence};

    const FIG1C: &str = include_str!("../../fixtures/corpus/s12_bengoshi.trees");
    const FIG2: &str =
        "( <[noun -] - >\n   ( <[referential-pronominal   _ _ _ `SONO' `SONO']> ) - )";

    fn matching_lemmas(pattern_text: &str, s: &Sentence) -> Vec<String> {
        let p = parse_pattern(pattern_text).unwrap();
        let discourse = DiscourseContext::new();
        let ctx = MatchContext::new(s, &discourse);
        s.node_ids()
            .filter(|&id| matches(&p, id, &ctx).matched)
            .map(|id| s.node(id).head().lemma.clone())
            .collect()
    }

    #[test]
    fn sono_pattern_matches_exactly_the_lawyer() {
        let s = parse_tree(FIG1C).unwrap();
        assert_eq!(matching_lemmas(FIG2, &s), ["BENGOSHI"]);
    }

    #[test]
    fn bare_glob_matches_every_node() {
        let s = parse_tree(FIG1C).unwrap();
        assert_eq!(matching_lemmas("-", &s).len(), 5);
    }

    #[test]
    fn negation_complements_a_template() {
        let s = parse_tree(FIG1C).unwrap();
        let hits = matching_lemmas("(not ( <[referential-pronominal - - - 'SONO' -]> ))", &s);
        assert_eq!(hits, ["HITORI", "MUSUKO", "BENGOSHI", "KARE"]);
    }

    #[test]
    fn modee_checks_the_modifiee() {
        let s = parse_tree(FIG1C).unwrap();
        // Nouns whose modifiee contains a copula: MUSUKO and KARE, both of
        // which modify HITORI-DESU.
        let text = "(and ( <[noun -] - > - ) (modee ( < - [copula -] - > - )))";
        assert_eq!(matching_lemmas(text, &s), ["MUSUKO", "KARE"]);
        // Nothing has a parent with pos `noun` and lemma `BENGOSHI` except SONO.
        let text = "(modee ( <[noun - - - 'BENGOSHI' -] - > - ))";
        assert_eq!(matching_lemmas(text, &s), ["SONO"]);
    }

    #[test]
    fn modee_star_reaches_all_ancestors() {
        let s = parse_tree(FIG1C).unwrap();
        // Every non-root node is dominated by the copula-bearing root.
        let text = "(modee* ( < - [copula -] - > - ))";
        assert_eq!(
            matching_lemmas(text, &s),
            ["MUSUKO", "BENGOSHI", "SONO", "KARE"]
        );
        let direct = "(modee ( < - [copula -] - > - ))";
        assert_eq!(matching_lemmas(direct, &s), ["MUSUKO", "KARE"]);
    }

    #[test]
    fn exact_child_lists_without_glob() {
        let s = parse_tree(FIG1C).unwrap();
        // No trailing glob after the child: only nodes with exactly one
        // modifier, itself childless, qualify.
        let one_child = "( < - > ( < - > ) )";
        assert_eq!(matching_lemmas(one_child, &s), ["BENGOSHI"]);
        let childless = "( < - > )";
        assert_eq!(matching_lemmas(childless, &s), ["SONO", "KARE"]);
    }

    #[test]
    fn numeral_binding_and_guards() {
        let text = "\
( <[verb _ _ basic-form 'TABERU' 'TABERU']> #3
  ( <[noun common-noun _ _ 'RINGO' 'RINGO']
     [postpositional-particle case-marking-postposition _ _ 'O' 'O']> #1 )
  ( <[numeral _ _ _ '2' 'NIKO']> #2 ))";
        let s = parse_tree(text).unwrap();
        let discourse = DiscourseContext::new();
        let ctx = MatchContext::new(&s, &discourse);
        let ringo = s
            .node_ids()
            .find(|&id| s.node(id).head().lemma == "RINGO")
            .unwrap();
        let two_or_more = parse_pattern(
            "(and ( <[noun -] - [postpositional-particle - - - /WA|GA|MO|O/ -] - > - )\
             (modee ( < - > ( <[_ _ _ _ $x _] - > - ) - ))\
             (numguard x >= 2))",
        )
        .unwrap();
        let res = matches(&two_or_more, ringo, &ctx);
        assert!(res.matched);
        assert_eq!(
            res.bindings,
            vec![std::iter::once(("x".to_string(), 2)).collect()]
        );
        let exactly_one = parse_pattern(
            "(and ( <[noun -] - [postpositional-particle - - - /WA|GA|MO|O/ -] - > - )\
             (modee ( < - > ( <[_ _ _ _ $x _] - > - ) - ))\
             (numguard x = 1))",
        )
        .unwrap();
        assert!(!matches(&exactly_one, ringo, &ctx).matched);
    }

    #[test]
    fn annotation_atoms_read_decided_categories() {
        let s = parse_tree("( <[noun common-noun _ _ 'INU' 'INU' generic plural]> )").unwrap();
        let discourse = DiscourseContext::new();
        let ctx = MatchContext::new(&s, &discourse);
        let root = s.root();
        assert!(matches(&parse_pattern("(refprop generic)").unwrap(), root, &ctx).matched);
        assert!(!matches(&parse_pattern("(refprop definite)").unwrap(), root, &ctx).matched);
        assert!(matches(&parse_pattern("(number plural)").unwrap(), root, &ctx).matched);
        assert!(!matches(&parse_pattern("(number singular)").unwrap(), root, &ctx).matched);
    }

    #[test]
    fn seen_before_consults_discourse_state() {
        let s = parse_tree("( <[noun common-noun _ _ 'INU' 'INU']> )").unwrap();
        let mut discourse = DiscourseContext::new();
        {
            let ctx = MatchContext::new(&s, &discourse);
            assert!(!matches(&Pattern::SeenBefore, s.root(), &ctx).matched);
        }
        discourse.observe_refprop("INU", "s0", crate::tree::RefProp::Indefinite);
        let ctx = MatchContext::new(&s, &discourse);
        assert!(matches(&Pattern::SeenBefore, s.root(), &ctx).matched);
    }

    #[test]
    fn matching_is_deterministic() {
        let s = parse_tree(FIG1C).unwrap();
        let p = parse_pattern(FIG2).unwrap();
        let discourse = DiscourseContext::new();
        let ctx = MatchContext::new(&s, &discourse);
        let first = matches(&p, s.root(), &ctx);
        for _ in 0..10 {
            assert_eq!(matches(&p, s.root(), &ctx), first);
        }
    }
}
