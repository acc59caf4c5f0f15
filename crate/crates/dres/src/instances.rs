//! Instance file format, built-in benchmark instances and a seeded random
//! instance generator.
//!
//! The on-disk format is line oriented UTF-8. `#` starts a comment line and
//! blank lines are ignored. Sections must appear in the order `RESOURCES`,
//! `NODE`+, `TASK`+, `ASSIGN`+, with exactly one `ASSIGN` line per task:
//!
//! ```text
//! RESOURCES CPU Memory Network
//! NODE Node1 60 60 50
//! TASK J01 7 15 7 4          # id, one demand per resource, migration cost
//! ASSIGN J01 Node1
//! ```

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Assignment, Instance, Node, ResourceVector, Task};

const TEST1: &str = include_str!("fixtures/test1.txt");
const TEST2: &str = include_str!("fixtures/test2.txt");
const TEST3: &str = include_str!("fixtures/test3.txt");

/// Errors raised while reading the instance text format.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
}

impl ParseError {
    fn syntax(line: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            message: message.into(),
        }
    }

    fn semantic(line: usize, message: impl Into<String>) -> Self {
        ParseError::Semantic {
            line,
            message: message.into(),
        }
    }
}

/// Requested built-in instance does not exist.
#[derive(Debug, Error)]
#[error("unknown builtin instance {name:?} (available: test1, test2, test3)")]
pub struct UnknownFixture {
    pub name: String,
}

/// Names of the built-in instances, in size order.
pub const BUILTIN_NAMES: [&str; 3] = ["test1", "test2", "test3"];

/// Look up one of the built-in benchmark instances by name.
pub fn builtin_fixture(name: &str) -> Result<Instance, UnknownFixture> {
    let text = match name {
        "test1" => TEST1,
        "test2" => TEST2,
        "test3" => TEST3,
        _ => {
            return Err(UnknownFixture {
                name: name.to_string(),
            })
        }
    };
    Ok(parse_instance(text).expect("builtin fixture must parse"))
}

/// The full eight-node capacity table the built-in instances draw from.
pub fn experiment_node_table() -> Vec<Node> {
    let test3 = builtin_fixture("test3").expect("builtin");
    test3.nodes
}

/// The full forty-task demand/cost table the built-in instances draw from.
pub fn experiment_task_table() -> Vec<Task> {
    let test3 = builtin_fixture("test3").expect("builtin");
    test3.tasks
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
enum Section {
    Resources,
    Nodes,
    Tasks,
    Assignments,
}

/// Parse the text format into an [`Instance`].
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut resources: Vec<String> = Vec::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut tasks: Vec<Task> = Vec::new();
    let mut node_index: HashMap<String, usize> = HashMap::new();
    let mut task_index: HashMap<String, usize> = HashMap::new();
    let mut assignment: Vec<Option<usize>> = Vec::new();
    let mut assign_lines: Vec<usize> = Vec::new();
    let mut section = None;

    let enter = |current: &mut Option<Section>, next: Section, line: usize, keyword: &str| {
        match *current {
            Some(prev) if prev > next => Err(ParseError::syntax(
                line,
                format!("{keyword} line out of order"),
            )),
            _ => {
                *current = Some(next);
                Ok(())
            }
        }
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let keyword = fields.next().expect("non-empty line");
        let rest: Vec<&str> = fields.collect();
        match keyword {
            "RESOURCES" => {
                enter(&mut section, Section::Resources, line, keyword)?;
                if !resources.is_empty() {
                    return Err(ParseError::syntax(line, "duplicate RESOURCES line"));
                }
                if rest.is_empty() {
                    return Err(ParseError::syntax(line, "RESOURCES needs at least one name"));
                }
                for name in &rest {
                    if resources.iter().any(|r| r == name) {
                        return Err(ParseError::semantic(
                            line,
                            format!("duplicate resource name {name:?}"),
                        ));
                    }
                    resources.push((*name).to_string());
                }
            }
            "NODE" => {
                enter(&mut section, Section::Nodes, line, keyword)?;
                if resources.is_empty() {
                    return Err(ParseError::syntax(line, "NODE before RESOURCES"));
                }
                let (id, levels) = parse_record(line, &rest, resources.len(), "NODE")?;
                if node_index.contains_key(&id) {
                    return Err(ParseError::semantic(
                        line,
                        format!("duplicate node id {id:?}"),
                    ));
                }
                node_index.insert(id.clone(), nodes.len());
                nodes.push(Node {
                    id,
                    capacity: ResourceVector::new(levels),
                });
            }
            "TASK" => {
                enter(&mut section, Section::Tasks, line, keyword)?;
                if nodes.is_empty() {
                    return Err(ParseError::syntax(line, "TASK before any NODE"));
                }
                let (id, mut levels) = parse_record(line, &rest, resources.len() + 1, "TASK")?;
                if task_index.contains_key(&id) {
                    return Err(ParseError::semantic(
                        line,
                        format!("duplicate task id {id:?}"),
                    ));
                }
                let migration_cost = levels.pop().expect("cost field");
                task_index.insert(id.clone(), tasks.len());
                tasks.push(Task {
                    id,
                    demand: ResourceVector::new(levels),
                    migration_cost,
                });
                assignment.push(None);
                assign_lines.push(0);
            }
            "ASSIGN" => {
                enter(&mut section, Section::Assignments, line, keyword)?;
                if tasks.is_empty() {
                    return Err(ParseError::syntax(line, "ASSIGN before any TASK"));
                }
                if rest.len() != 2 {
                    return Err(ParseError::syntax(
                        line,
                        "ASSIGN needs a task id and a node id",
                    ));
                }
                let task = *task_index.get(rest[0]).ok_or_else(|| {
                    ParseError::semantic(line, format!("unknown task {:?} in ASSIGN", rest[0]))
                })?;
                let node = *node_index.get(rest[1]).ok_or_else(|| {
                    ParseError::semantic(line, format!("unknown node {:?} in ASSIGN", rest[1]))
                })?;
                if assignment[task].is_some() {
                    return Err(ParseError::semantic(
                        line,
                        format!("task {:?} assigned twice", rest[0]),
                    ));
                }
                assignment[task] = Some(node);
                assign_lines[task] = line;
            }
            other => {
                return Err(ParseError::syntax(
                    line,
                    format!("unknown keyword {other:?}"),
                ));
            }
        }
    }

    let last = text.lines().count();
    if resources.is_empty() {
        return Err(ParseError::syntax(last, "missing RESOURCES section"));
    }
    if nodes.is_empty() {
        return Err(ParseError::syntax(last, "missing NODE section"));
    }
    if tasks.is_empty() {
        return Err(ParseError::syntax(last, "missing TASK section"));
    }
    let mut node_of = Vec::with_capacity(tasks.len());
    for (t, slot) in assignment.iter().enumerate() {
        match slot {
            Some(node) => node_of.push(*node),
            None => {
                return Err(ParseError::semantic(
                    last,
                    format!("task {:?} has no ASSIGN line", tasks[t].id),
                ));
            }
        }
    }

    let instance = Instance {
        resources,
        nodes,
        tasks,
        initial_assignment: Assignment::new(node_of),
    };
    let report = instance.validate();
    if !report.is_valid() {
        return Err(ParseError::semantic(last, report.errors.join("; ")));
    }
    Ok(instance)
}

fn parse_record(
    line: usize,
    fields: &[&str],
    values: usize,
    keyword: &str,
) -> Result<(String, Vec<u64>), ParseError> {
    if fields.len() != values + 1 {
        return Err(ParseError::syntax(
            line,
            format!(
                "{keyword} needs an id and {values} integer values, got {} fields",
                fields.len()
            ),
        ));
    }
    let id = fields[0].to_string();
    let mut parsed = Vec::with_capacity(values);
    for field in &fields[1..] {
        let value: u64 = field.parse().map_err(|_| {
            ParseError::syntax(line, format!("invalid integer {field:?}"))
        })?;
        parsed.push(value);
    }
    Ok((id, parsed))
}

/// Render an instance in canonical form: fixed section order, single spaces,
/// one record per line, no comments. `parse_instance` inverts it.
pub fn serialize_instance(instance: &Instance) -> String {
    let mut out = String::new();
    out.push_str("RESOURCES");
    for r in &instance.resources {
        out.push(' ');
        out.push_str(r);
    }
    out.push('\n');
    for node in &instance.nodes {
        out.push_str("NODE ");
        out.push_str(&node.id);
        for level in node.capacity.levels() {
            out.push_str(&format!(" {level}"));
        }
        out.push('\n');
    }
    for task in &instance.tasks {
        out.push_str("TASK ");
        out.push_str(&task.id);
        for level in task.demand.levels() {
            out.push_str(&format!(" {level}"));
        }
        out.push_str(&format!(" {}\n", task.migration_cost));
    }
    for (t, task) in instance.tasks.iter().enumerate() {
        let node = instance.initial_assignment.node_of(t);
        out.push_str(&format!("ASSIGN {} {}\n", task.id, instance.nodes[node].id));
    }
    out
}

/// Knobs for [`generate_random_instance`]. All ranges are inclusive.
#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub task_count: usize,
    pub node_count: usize,
    pub resource_count: usize,
    pub demand_range: (u64, u64),
    pub capacity_range: (u64, u64),
    pub cost_range: (u64, u64),
    pub seed: u64,
}

/// Draw an instance with uniform demands, capacities, costs and initial
/// assignment. Deterministic for a given seed.
pub fn generate_random_instance(params: &GeneratorParams) -> Instance {
    assert!(params.task_count >= 1 && params.node_count >= 1 && params.resource_count >= 1);
    for (lo, hi) in [
        params.demand_range,
        params.capacity_range,
        params.cost_range,
    ] {
        assert!(lo <= hi, "range minimum above maximum");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let d = params.resource_count;
    let resources = (0..d).map(|i| format!("R{}", i + 1)).collect();
    let nodes = (0..params.node_count)
        .map(|i| Node {
            id: format!("Node{}", i + 1),
            capacity: draw_vector(&mut rng, d, params.capacity_range),
        })
        .collect();
    let width = if params.task_count < 100 { 2 } else { 3 };
    let tasks = (0..params.task_count)
        .map(|i| Task {
            id: format!("J{:0width$}", i + 1),
            demand: draw_vector(&mut rng, d, params.demand_range),
            migration_cost: rng.gen_range(params.cost_range.0..=params.cost_range.1),
        })
        .collect();
    let initial_assignment = Assignment::new(
        (0..params.task_count)
            .map(|_| rng.gen_range(0..params.node_count))
            .collect(),
    );
    Instance {
        resources,
        nodes,
        tasks,
        initial_assignment,
    }
}

fn draw_vector(rng: &mut ChaCha8Rng, dims: usize, range: (u64, u64)) -> ResourceVector {
    ResourceVector::new((0..dims).map(|_| rng.gen_range(range.0..=range.1)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_shapes() {
        let t1 = builtin_fixture("test1").unwrap();
        assert_eq!((t1.task_count(), t1.node_count(), t1.resource_count()), (20, 4, 3));
        let t2 = builtin_fixture("test2").unwrap();
        assert_eq!((t2.task_count(), t2.node_count()), (30, 6));
        let t3 = builtin_fixture("test3").unwrap();
        assert_eq!((t3.task_count(), t3.node_count()), (40, 8));
    }

    #[test]
    fn unknown_fixture_name_is_an_error() {
        let err = builtin_fixture("test9").unwrap_err();
        assert!(err.to_string().contains("test9"));
    }

    #[test]
    fn fixture_cost_checksums() {
        for (name, sum) in [("test1", 104), ("test2", 156), ("test3", 211)] {
            let inst = builtin_fixture(name).unwrap();
            assert_eq!(inst.max_migration_cost(), sum, "{name}");
        }
    }

    #[test]
    fn node2_capacity_matches_table() {
        let inst = builtin_fixture("test1").unwrap();
        let node2 = inst.nodes.iter().find(|n| n.id == "Node2").unwrap();
        assert_eq!(node2.capacity, ResourceVector::new(vec![70, 40, 50]));
    }

    #[test]
    fn j14_starts_on_node1() {
        let inst = builtin_fixture("test1").unwrap();
        let j14 = inst.tasks.iter().position(|t| t.id == "J14").unwrap();
        let node = inst.initial_assignment.node_of(j14);
        assert_eq!(inst.nodes[node].id, "Node1");
    }

    #[test]
    fn test3_covers_every_task_exactly_once() {
        let inst = builtin_fixture("test3").unwrap();
        assert_eq!(inst.task_count(), 40);
        for i in 0..40 {
            let id = format!("J{:02}", i + 1);
            assert_eq!(
                inst.tasks.iter().filter(|t| t.id == id).count(),
                1,
                "{id} should appear exactly once"
            );
        }
        // The corrected entry: J38 starts on Node6.
        let j38 = inst.tasks.iter().position(|t| t.id == "J38").unwrap();
        assert_eq!(inst.nodes[inst.initial_assignment.node_of(j38)].id, "Node6");
    }

    #[test]
    fn component_tables_expose_the_full_configuration() {
        let nodes = experiment_node_table();
        assert_eq!(nodes.len(), 8);
        assert_eq!(nodes[7].capacity, ResourceVector::new(vec![80, 90, 60]));
        let tasks = experiment_task_table();
        assert_eq!(tasks.len(), 40);
        assert_eq!(tasks[0].demand, ResourceVector::new(vec![7, 15, 7]));
        assert_eq!(tasks[0].migration_cost, 4);
    }

    #[test]
    fn serialized_test1_reproduces_task_rows() {
        let inst = builtin_fixture("test1").unwrap();
        let text = serialize_instance(&inst);
        assert!(text.contains("TASK J01 7 15 7 4"));
        assert!(text.contains("NODE Node2 70 40 50"));
        assert!(text.contains("ASSIGN J14 Node1"));
    }

    #[test]
    fn serialize_is_canonical() {
        for name in BUILTIN_NAMES {
            let inst = builtin_fixture(name).unwrap();
            let once = serialize_instance(&inst);
            let twice = serialize_instance(&parse_instance(&once).unwrap());
            assert_eq!(once, twice, "{name}");
        }
    }

    #[test]
    fn minimal_instance_parses() {
        let inst = parse_instance("RESOURCES R1\nNODE N1 5\nTASK T1 3 2\nASSIGN T1 N1\n").unwrap();
        assert_eq!((inst.task_count(), inst.node_count(), inst.resource_count()), (1, 1, 1));
        assert_eq!(inst.tasks[0].migration_cost, 2);
    }

    #[test]
    fn unknown_node_in_assign_is_reported_by_name() {
        let text = "RESOURCES R1\nNODE N1 5\nTASK T1 3 2\nASSIGN T1 Node9\n";
        let err = parse_instance(text).unwrap_err();
        assert!(matches!(err, ParseError::Semantic { .. }));
        assert!(err.to_string().contains("Node9"));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "RESOURCES R1\nNODE N1 five\nTASK T1 3 2\nASSIGN T1 N1\n";
        let err = parse_instance(text).unwrap_err();
        assert_eq!(err.to_string(), "line 2: syntax error: invalid integer \"five\"");
    }

    #[test]
    fn out_of_order_sections_are_rejected() {
        let text = "RESOURCES R1\nNODE N1 5\nTASK T1 3 2\nASSIGN T1 N1\nNODE N2 9\n";
        let err = parse_instance(text).unwrap_err();
        assert!(err.to_string().contains("out of order"));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = "RESOURCES R1\nNODE N1 5\nNODE N1 9\nTASK T1 3 2\nASSIGN T1 N1\n";
        let err = parse_instance(text).unwrap_err();
        assert!(err.to_string().contains("duplicate node id"));
        let text = "RESOURCES R1\nNODE N1 5\nTASK T1 3 2\nTASK T1 1 1\nASSIGN T1 N1\n";
        let err = parse_instance(text).unwrap_err();
        assert!(err.to_string().contains("duplicate task id"));
    }

    #[test]
    fn missing_assign_is_rejected() {
        let text = "RESOURCES R1\nNODE N1 5\nTASK T1 3 2\nTASK T2 1 1\nASSIGN T1 N1\n";
        let err = parse_instance(text).unwrap_err();
        assert!(err.to_string().contains("has no ASSIGN line"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header\nRESOURCES R1\n\nNODE N1 5  # five\nTASK T1 3 2\nASSIGN T1 N1\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.nodes[0].capacity, ResourceVector::new(vec![5]));
    }

    #[test]
    fn generator_is_deterministic() {
        let params = GeneratorParams {
            task_count: 6,
            node_count: 3,
            resource_count: 2,
            demand_range: (1, 10),
            capacity_range: (10, 30),
            cost_range: (1, 10),
            seed: 7,
        };
        let a = generate_random_instance(&params);
        let b = generate_random_instance(&params);
        assert_eq!(a, b);
        assert!(a.validate().is_valid());
    }

    #[test]
    fn zero_demand_instances_start_stable() {
        for seed in 0..20 {
            let params = GeneratorParams {
                task_count: 8,
                node_count: 3,
                resource_count: 3,
                demand_range: (0, 0),
                capacity_range: (0, 10),
                cost_range: (1, 5),
                seed,
            };
            let inst = generate_random_instance(&params);
            assert!(inst.is_stable(&inst.initial_assignment));
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        prop_compose! {
            fn arbitrary_params()(
                task_count in 1usize..10,
                node_count in 1usize..5,
                resource_count in 1usize..4,
                demand_hi in 0u64..30,
                capacity_hi in 0u64..60,
                cost_hi in 0u64..15,
                seed in any::<u64>(),
            ) -> GeneratorParams {
                GeneratorParams {
                    task_count,
                    node_count,
                    resource_count,
                    demand_range: (0, demand_hi),
                    capacity_range: (0, capacity_hi),
                    cost_range: (0, cost_hi),
                    seed,
                }
            }
        }

        proptest! {
            #[test]
            fn parse_inverts_serialize(params in arbitrary_params()) {
                let inst = generate_random_instance(&params);
                let text = serialize_instance(&inst);
                let reparsed = parse_instance(&text).unwrap();
                prop_assert_eq!(reparsed, inst);
            }
        }
    }
}
