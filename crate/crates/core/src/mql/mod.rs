//! Translation of SPARQL queries into aggregation pipelines over the
//! subject-grouped document collection.
//!
//! The translator walks the query graph breadth-first from its single source.
//! The source's patterns become one `$match`. Every other node with outgoing
//! edges is fetched with a self-`$lookup` on the predicate that reaches it,
//! followed by a `$match` on its own patterns under the lookup alias.
//!
//! Document-level matching cannot tell which element of a multi-valued field
//! or joined array satisfied which condition, so every translation carries a
//! [`BindingPlan`]. The plan re-reads the projected rows and rebuilds the
//! exact variable bindings.

mod expr;
mod pipeline;

pub use expr::{translate_expression, translate_expression_with};
pub use pipeline::{MqlPipeline, MqlStage, StageKind};

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::model::Term;
use crate::ntriples::{field_key, term_to_json};
use crate::shape::{
    build_query_graph, classify, find_source_nodes, label_query, NodeId, QueryGraph, QueryLabel, Shape,
};
use crate::sparql::{Direction, FilterExpr, ModifierSet, OrderKey, QueryAst, TriplePattern};

pub const DEFAULT_COLLECTION: &str = "kg";
pub const SUBJECT_FIELD: &str = "subject_id";
pub const JOIN_ALIAS: &str = "join_field";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MqlError {
    #[error("untranslatable query: {0}")]
    UntranslatableQuery(String),
    #[error("unsupported expression: {0}")]
    UnsupportedExpression(String),
    #[error("malformed pipeline: {0}")]
    MalformedPipeline(String),
}

fn untranslatable(msg: impl Into<String>) -> MqlError {
    MqlError::UntranslatableQuery(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternRole {
    /// Pattern on the source node, checked by the first `$match`.
    RootMatch,
    /// Pattern whose predicate drives a `$lookup`.
    LookupStep,
    /// Pattern on a looked-up node, checked after its `$lookup`.
    PostMatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub pattern: TriplePattern,
    pub role: PatternRole,
    /// Edge index in the query graph.
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct LookupNode {
    node: NodeId,
    bridge: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorGraph {
    pub projection: Vec<String>,
    pub join_kind: Shape,
    pub pattern_chain: Vec<ChainStep>,
    pub conditions: Option<FilterExpr>,
    pub modifiers: ModifierSet,
    graph: QueryGraph,
    root: NodeId,
    lookups: Vec<LookupNode>,
}

impl OperatorGraph {
    pub fn graph(&self) -> &QueryGraph {
        &self.graph
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Looked-up nodes in emission order.
    pub fn lookup_nodes(&self) -> Vec<NodeId> {
        self.lookups.iter().map(|l| l.node).collect()
    }
}

pub fn build_operator_graph(ast: &QueryAst, label: &QueryLabel) -> Result<OperatorGraph, MqlError> {
    if !ast.optional_blocks.is_empty() {
        return Err(untranslatable("OPTIONAL patterns are not translated"));
    }
    if let Some(p) = ast.patterns.iter().find(|p| p.predicate.is_variable()) {
        return Err(untranslatable(format!("variable predicate in pattern `{p}`")));
    }
    let graph = build_query_graph(ast);
    classify(&graph).map_err(|e| untranslatable(e.to_string()))?;
    let sources = find_source_nodes(&graph).map_err(|e| untranslatable(e.to_string()))?;
    let [root] = sources[..] else {
        return Err(untranslatable(format!(
            "query graph has {} source nodes",
            sources.len()
        )));
    };

    let bound: HashSet<String> = ast.pattern_variables().into_iter().collect();
    let unbound = |v: &str| !bound.contains(v);
    if let Some(v) = ast.filter.iter().flat_map(|f| f.variables()).find(|v| unbound(v)) {
        return Err(untranslatable(format!(
            "filter variable ?{v} is not bound by a pattern"
        )));
    }
    if let Some(k) = ast.modifiers.order_by.as_ref().filter(|k| unbound(&k.variable)) {
        return Err(untranslatable(format!(
            "ORDER BY variable ?{} is not bound by a pattern",
            k.variable
        )));
    }
    let projection = ast.projected_variables();
    if let Some(v) = projection.iter().find(|v| unbound(v)) {
        return Err(untranslatable(format!(
            "projected variable ?{v} is not bound by a pattern"
        )));
    }

    // breadth-first discovery; the discovering edge of each node is its bridge
    let mut discovered = vec![false; graph.node_count()];
    let mut order = vec![root];
    let mut bridge_of: HashMap<NodeId, usize> = HashMap::new();
    discovered[root] = true;
    let mut i = 0;
    while i < order.len() {
        let n = order[i];
        for (idx, e) in graph.edges().iter().enumerate().filter(|(_, e)| e.from == n) {
            if !discovered[e.to] {
                discovered[e.to] = true;
                bridge_of.insert(e.to, idx);
                order.push(e.to);
            }
        }
        i += 1;
    }
    let lookups: Vec<LookupNode> = order[1..]
        .iter()
        .filter(|&&n| graph.out_degree(n) > 0)
        .map(|&n| LookupNode {
            node: n,
            bridge: bridge_of[&n],
        })
        .collect();
    let lookup_bridges: HashSet<usize> = lookups.iter().map(|l| l.bridge).collect();

    let step = |idx: usize, role| ChainStep {
        pattern: ast.patterns[graph.edges()[idx].pattern].clone(),
        role,
        edge: idx,
    };
    let out_edges = |n: NodeId| {
        graph
            .edges()
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.from == n)
            .map(|(i, _)| i)
    };
    let mut chain: Vec<ChainStep> = out_edges(root)
        .filter(|i| !lookup_bridges.contains(i))
        .map(|i| step(i, PatternRole::RootMatch))
        .collect();
    for l in &lookups {
        chain.push(step(l.bridge, PatternRole::LookupStep));
        chain.extend(
            out_edges(l.node)
                .filter(|i| !lookup_bridges.contains(i))
                .map(|i| step(i, PatternRole::PostMatch)),
        );
    }

    Ok(OperatorGraph {
        projection,
        join_kind: label.shape,
        pattern_chain: chain,
        conditions: ast.filter.clone(),
        modifiers: ast.modifiers.clone(),
        graph,
        root,
        lookups,
    })
}

/// One term position the binding plan reads back from a result row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSlot {
    /// Index into [`BindingPlan::aliases`], `None` for the root document.
    pub alias: Option<usize>,
    /// Encoded field key, or `subject_id`.
    pub field: String,
    /// Variable to bind or constant that must be present.
    pub term: Term,
}

/// How to turn projected pipeline rows back into variable bindings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingPlan {
    pub aliases: Vec<String>,
    pub slots: Vec<PlanSlot>,
    /// Variable to the index of its home slot, the first slot that mentions it.
    pub homes: IndexMap<String, usize>,
    pub projection: Vec<String>,
    pub filter: Option<FilterExpr>,
    /// Solution modifiers. The emitted `$sort`/`$skip`/`$limit` act on
    /// documents, which is exact only while each yields one solution.
    pub order_by: Option<OrderKey>,
    pub offset: Option<u64>,
    pub limit: Option<u64>,
}

impl BindingPlan {
    pub fn slot_path(&self, slot: &PlanSlot) -> String {
        scoped(slot.alias.map(|a| self.aliases[a].as_str()), &slot.field)
    }

    /// Document path a variable is read from.
    pub fn home_path(&self, var: &str) -> Option<String> {
        self.homes.get(var).map(|&i| self.slot_path(&self.slots[i]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub pipeline: MqlPipeline,
    pub plan: BindingPlan,
}

fn scoped(alias: Option<&str>, field: &str) -> String {
    match alias {
        Some(a) => format!("{a}.{field}"),
        None => field.to_string(),
    }
}

pub fn alias_name(i: usize) -> String {
    if i == 0 {
        JOIN_ALIAS.to_string()
    } else {
        format!("{JOIN_ALIAS}{}", i + 1)
    }
}

fn exists() -> Value {
    json!({ "$exists": true })
}

fn is_exists(v: &Value) -> bool {
    v.as_object().is_some_and(|m| m.contains_key("$exists"))
}

/// Adds a field condition, folding repeated keys: a constant subsumes
/// `$exists`, and distinct constants collect under `$all`.
fn put_condition(m: &mut Map<String, Value>, key: String, cond: Value) {
    let Some(old) = m.get_mut(&key) else {
        m.insert(key, cond);
        return;
    };
    if is_exists(&cond) || *old == cond {
        return;
    }
    if is_exists(old) {
        *old = cond;
        return;
    }
    match old
        .as_object_mut()
        .and_then(|o| o.get_mut("$all"))
        .and_then(Value::as_array_mut)
    {
        Some(all) => {
            if !all.contains(&cond) {
                all.push(cond);
            }
        }
        None => *old = json!({ "$all": [old.take(), cond] }),
    }
}

fn condition(object: &Term) -> Value {
    if object.is_variable() {
        exists()
    } else {
        term_to_json(object)
    }
}

pub fn translate_query(og: &OperatorGraph, collection: &str) -> Result<Translation, MqlError> {
    let g = &og.graph;
    let aliases: Vec<String> = (0..og.lookups.len()).map(alias_name).collect();
    let mut scope: HashMap<NodeId, Option<usize>> = HashMap::from([(og.root, None)]);
    for (i, l) in og.lookups.iter().enumerate() {
        scope.insert(l.node, Some(i));
    }
    let bridges: HashSet<usize> = og.lookups.iter().map(|l| l.bridge).collect();
    // chains check the bridging predicate through the lookup itself
    let skip_bridges = og.join_kind == Shape::SubjectObject;
    let alias_of = |n: NodeId| scope[&n].map(|a| aliases[a].as_str());

    let mut slots = Vec::new();
    let mut stages = Vec::new();

    let edge_conditions = |n: NodeId, slots: &mut Vec<PlanSlot>| -> Map<String, Value> {
        let mut body = Map::new();
        for (idx, e) in g.edges().iter().enumerate().filter(|(_, e)| e.from == n) {
            let key = field_key(e.predicate.lexical()).into_owned();
            let object = g.term(e.to);
            slots.push(PlanSlot {
                alias: scope[&n],
                field: key.clone(),
                term: object.clone(),
            });
            if !(skip_bridges && bridges.contains(&idx)) {
                put_condition(&mut body, scoped(alias_of(n), &key), condition(object));
            }
        }
        body
    };

    let root_term = g.term(og.root).clone();
    let mut root_body = Map::new();
    root_body.insert(
        SUBJECT_FIELD.into(),
        if root_term.is_variable() {
            exists()
        } else {
            Value::String(root_term.lexical().to_string())
        },
    );
    slots.push(PlanSlot {
        alias: None,
        field: SUBJECT_FIELD.into(),
        term: root_term,
    });
    for (k, v) in edge_conditions(og.root, &mut slots) {
        root_body.insert(k, v);
    }
    stages.push(MqlStage::new(StageKind::Match, Value::Object(root_body)));

    for (i, l) in og.lookups.iter().enumerate() {
        let e = &g.edges()[l.bridge];
        let local = scoped(alias_of(e.from), &field_key(e.predicate.lexical()));
        stages.push(MqlStage::new(
            StageKind::Lookup,
            json!({ "from": collection, "localField": local, "foreignField": SUBJECT_FIELD, "as": aliases[i] }),
        ));
        slots.push(PlanSlot {
            alias: Some(i),
            field: SUBJECT_FIELD.into(),
            term: g.term(l.node).clone(),
        });
        let body = edge_conditions(l.node, &mut slots);
        if !body.is_empty() {
            stages.push(MqlStage::new(StageKind::Match, Value::Object(body)));
        }
    }

    let mut homes: IndexMap<String, usize> = IndexMap::new();
    for (i, s) in slots.iter().enumerate() {
        if let Some(v) = s.term.as_variable() {
            homes.entry(v.to_string()).or_insert(i);
        }
    }
    let path_of = |s: &PlanSlot| scoped(s.alias.map(|a| aliases[a].as_str()), &s.field);
    let home = |v: &str| homes.get(v).map(|&i| path_of(&slots[i]));

    if let Some(f) = &og.conditions {
        let frag = translate_expression_with(f, &home)?;
        merge_into_last_match(&mut stages, frag);
    }

    let m = &og.modifiers;
    if let Some(key) = &m.order_by {
        let mut sort = Map::new();
        let dir = if key.direction == Direction::Asc { 1 } else { -1 };
        sort.insert(home(&key.variable).expect("validated order variable"), json!(dir));
        // ties fall back to the projected columns
        for v in &og.projection {
            let p = home(v).expect("validated projection");
            sort.entry(p).or_insert(json!(1));
        }
        stages.push(MqlStage::new(StageKind::Sort, Value::Object(sort)));
    }
    if let Some(n) = m.offset {
        stages.push(MqlStage::new(StageKind::Skip, json!(n)));
    }
    if let Some(n) = m.limit {
        stages.push(MqlStage::new(StageKind::Limit, json!(n)));
    }

    let mut project = Map::new();
    for s in &slots {
        project.entry(path_of(s)).or_insert(json!(1));
    }
    stages.push(MqlStage::new(StageKind::Project, Value::Object(project)));

    Ok(Translation {
        pipeline: MqlPipeline::new(collection, stages),
        plan: BindingPlan {
            aliases,
            slots,
            homes,
            projection: og.projection.clone(),
            filter: og.conditions.clone(),
            order_by: m.order_by.clone(),
            offset: m.offset,
            limit: m.limit,
        },
    })
}

fn merge_into_last_match(stages: &mut Vec<MqlStage>, frag: Value) {
    let Value::Object(frag) = frag else {
        unreachable!("filter fragments are objects")
    };
    match stages.last_mut() {
        Some(MqlStage {
            kind: StageKind::Match,
            body: Value::Object(body),
        }) => {
            if frag.keys().any(|k| body.contains_key(k)) {
                let old = std::mem::take(body);
                body.insert("$and".into(), json!([Value::Object(old), Value::Object(frag)]));
            } else {
                body.extend(frag);
            }
        }
        _ => stages.push(MqlStage::new(StageKind::Match, Value::Object(frag))),
    }
}

/// Labels, plans and translates in one step.
pub fn translate(ast: &QueryAst, collection: &str) -> Result<Translation, MqlError> {
    let label = label_query(ast).map_err(|e| untranslatable(e.to_string()))?;
    translate_with_label(ast, &label, collection)
}

pub fn translate_with_label(ast: &QueryAst, label: &QueryLabel, collection: &str) -> Result<Translation, MqlError> {
    translate_query(&build_operator_graph(ast, label)?, collection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparql::parse_query;

    fn stages(q: &str) -> Vec<String> {
        let ast = parse_query(q).unwrap();
        let t = translate(&ast, "colc_name").unwrap();
        t.pipeline.stages.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn operator_graph_roles() {
        let ast = parse_query(r#"SELECT ?x WHERE { ?x UNII "Q20Q" . ?x adverse_reaction "Nausea" . }"#).unwrap();
        let og = build_operator_graph(&ast, &label_query(&ast).unwrap()).unwrap();
        assert_eq!(og.join_kind, Shape::SubjectSubject);
        let roles: Vec<PatternRole> = og.pattern_chain.iter().map(|s| s.role).collect();
        assert_eq!(roles, [PatternRole::RootMatch, PatternRole::RootMatch]);

        let ast = parse_query("SELECT ?y WHERE { ?x CUI 2555 . ?y FDA_Code ?x . }").unwrap();
        let og = build_operator_graph(&ast, &label_query(&ast).unwrap()).unwrap();
        let chain: Vec<(PatternRole, String)> = og
            .pattern_chain
            .iter()
            .map(|s| (s.role, s.pattern.predicate.to_string()))
            .collect();
        assert_eq!(
            chain,
            [
                (PatternRole::LookupStep, "FDA_Code".into()),
                (PatternRole::PostMatch, "CUI".into())
            ]
        );
        assert_eq!(og.graph().term(og.root()), &Term::var("y"));
    }

    #[test]
    fn rejections() {
        for q in [
            r#"SELECT * WHERE { ?x ?p "v" }"#,
            "SELECT * WHERE { ?x p ?y OPTIONAL { ?y q ?z } }",
            "SELECT * WHERE { ?a p ?o . ?b q ?o }",
            "SELECT * WHERE { ?x p ?y . ?y q ?x }",
            "SELECT ?z WHERE { ?x p ?y . FILTER(EXISTS(?z)) }",
        ] {
            let ast = parse_query(q).unwrap();
            assert!(
                matches!(translate(&ast, "kg"), Err(MqlError::UntranslatableQuery(_))),
                "{q}"
            );
        }
    }

    #[test]
    fn tree_like_listing() {
        let s = stages(r#"SELECT ?y WHERE { ?x UNII "Q20Q" . ?x FDA_Code ?z . ?z CUI 2555 . ?z Xref ?y . }"#);
        assert_eq!(
            s[0],
            r#"{"$match":{"subject_id":{"$exists":true},"UNII":"Q20Q","FDA_Code":{"$exists":true}}}"#
        );
        assert_eq!(
            s[1],
            r#"{"$lookup":{"from":"colc_name","localField":"FDA_Code","foreignField":"subject_id","as":"join_field"}}"#
        );
        assert_eq!(
            s[2],
            r#"{"$match":{"join_field.CUI":2555,"join_field.Xref":{"$exists":true}}}"#
        );
        assert!(s[3].starts_with(r#"{"$project":"#));
    }

    #[test]
    fn longer_chains_use_numbered_aliases() {
        let s = stages("SELECT ?a WHERE { ?a p1 ?b . ?b p2 ?c . ?c p3 \"x\" }");
        assert_eq!(s[0], r#"{"$match":{"subject_id":{"$exists":true}}}"#);
        assert!(s[1].contains(r#""localField":"p1""#) && s[1].contains(r#""as":"join_field""#));
        assert!(s[2].contains(r#""localField":"join_field.p2""#) && s[2].contains(r#""as":"join_field2""#));
        assert_eq!(s[3], r#"{"$match":{"join_field2.p3":"x"}}"#);
    }

    #[test]
    fn filter_merges_into_final_match() {
        let s = stages("SELECT ?x WHERE { ?x ID ?id . ?x FDA_Code ?c . FILTER(?id > 300) }");
        assert_eq!(
            s[0],
            r#"{"$match":{"$and":[{"subject_id":{"$exists":true},"ID":{"$exists":true},"FDA_Code":{"$exists":true}},{"ID":{"$gt":300}}]}}"#
        );
        let s = stages("SELECT ?x WHERE { ?x ID ?id . FILTER(?x != \"a\") }");
        assert_eq!(
            s[0],
            r#"{"$match":{"$and":[{"subject_id":{"$exists":true},"ID":{"$exists":true}},{"subject_id":{"$ne":"a"}}]}}"#
        );
        let s = stages("SELECT ?y WHERE { ?x CUI ?n . ?y FDA_Code ?x . FILTER(?n >= 2) }");
        assert_eq!(
            s[2],
            r#"{"$match":{"$and":[{"join_field.CUI":{"$exists":true}},{"join_field.CUI":{"$gte":2}}]}}"#
        );
        let s = stages("SELECT ?x WHERE { ?x ID ?id . ?x p ?q . FILTER(?q = 1 || ?id = 2) }");
        assert!(
            s[0].ends_with(r#""p":{"$exists":true},"$or":[{"p":{"$eq":1}},{"ID":{"$eq":2}}]}}"#),
            "{}",
            s[0]
        );
    }

    #[test]
    fn duplicate_keys_fold() {
        let s = stages(r#"SELECT ?x WHERE { ?x p ?a . ?x p "k" . ?x p "j" }"#);
        assert_eq!(
            s[0],
            r#"{"$match":{"subject_id":{"$exists":true},"p":{"$all":["k","j"]}}}"#
        );
    }

    #[test]
    fn modifiers_and_projection() {
        let s = stages("SELECT ?n WHERE { ?d name ?n . ?d kind \"small\" } ORDER BY DESC(?n) LIMIT 10 OFFSET 5");
        assert_eq!(s[1], r#"{"$sort":{"name":-1}}"#);
        assert_eq!(s[2], r#"{"$skip":5}"#);
        assert_eq!(s[3], r#"{"$limit":10}"#);
        assert_eq!(s[4], r#"{"$project":{"subject_id":1,"name":1,"kind":1}}"#);
    }

    #[test]
    fn dotted_predicates_are_encoded() {
        let s = stages("SELECT ?v WHERE { ?x <http://ex.org/p> ?v }");
        assert_eq!(
            s[0],
            r#"{"$match":{"subject_id":{"$exists":true},"http://ex%2Eorg/p":{"$exists":true}}}"#
        );
    }

    #[test]
    fn plan_homes() {
        let ast = parse_query("SELECT ?y ?z WHERE { ?y FDA_Code ?z . ?z CUI ?c }").unwrap();
        let t = translate(&ast, "kg").unwrap();
        assert_eq!(t.plan.home_path("y").unwrap(), "subject_id");
        assert_eq!(t.plan.home_path("z").unwrap(), "FDA_Code");
        assert_eq!(t.plan.home_path("c").unwrap(), "join_field.CUI");
        assert_eq!(t.plan.aliases, ["join_field"]);
    }
}
