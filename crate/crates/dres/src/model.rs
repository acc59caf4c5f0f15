//! Core domain model: tasks, nodes, assignments and the cost/stability
//! arithmetic every solver is measured against.
//!
//! A problem instance consists of `l` mobile tasks, `m` fixed nodes and `d`
//! resource kinds. Every task demands a fixed amount of each resource and
//! carries a migration cost that is paid once iff the task ends up on a node
//! other than its initial one. An assignment is *stable* when no node's
//! summed demand exceeds its capacity in any resource; the objective is a
//! stable assignment of minimum total migration cost.

use std::fmt;

/// Per-resource integer levels, one entry per resource kind of the instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceVector(Vec<u64>);

impl ResourceVector {
    pub fn new(levels: Vec<u64>) -> Self {
        ResourceVector(levels)
    }

    pub fn zero(dims: usize) -> Self {
        ResourceVector(vec![0; dims])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn level(&self, resource: usize) -> u64 {
        self.0[resource]
    }

    pub fn levels(&self) -> &[u64] {
        &self.0
    }

    /// Componentwise `self <= other`.
    pub fn fits_within(&self, other: &ResourceVector) -> bool {
        debug_assert_eq!(self.0.len(), other.0.len());
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add_assign(&mut self, other: &ResourceVector) {
        debug_assert_eq!(self.0.len(), other.0.len());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }
}

impl fmt::Display for ResourceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A mobile task: what it consumes and what one migration of it costs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: String,
    pub demand: ResourceVector,
    pub migration_cost: u64,
}

/// A fixed node with its available resource levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub capacity: ResourceVector,
}

/// A full task-to-node mapping: entry `j` is the node index of task `j`.
///
/// The search space is the set of all `m^l` such vectors; it is only ever
/// represented implicitly through values of this type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(node_of: Vec<usize>) -> Self {
        Assignment(node_of)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Node index the given task is mapped to.
    pub fn node_of(&self, task: usize) -> usize {
        self.0[task]
    }

    pub fn genes(&self) -> &[usize] {
        &self.0
    }

    pub fn set(&mut self, task: usize, node: usize) {
        self.0[task] = node;
    }

    /// Copy of this assignment with one task remapped.
    pub fn with_move(&self, task: usize, node: usize) -> Assignment {
        let mut next = self.clone();
        next.set(task, node);
        next
    }
}

/// A complete problem statement: resource kinds, nodes, tasks and the
/// initial assignment every migration cost is measured against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub resources: Vec<String>,
    pub nodes: Vec<Node>,
    pub tasks: Vec<Task>,
    pub initial_assignment: Assignment,
}

impl Instance {
    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    /// Summed demand of all tasks the assignment maps to `node_index`.
    ///
    /// Panics if `node_index` is out of range.
    pub fn resource_usage(&self, assignment: &Assignment, node_index: usize) -> ResourceVector {
        assert!(
            node_index < self.node_count(),
            "node index {node_index} out of range ({} nodes)",
            self.node_count()
        );
        let mut usage = ResourceVector::zero(self.resource_count());
        for (task, node) in assignment.genes().iter().enumerate() {
            if *node == node_index {
                usage.add_assign(&self.tasks[task].demand);
            }
        }
        usage
    }

    /// True iff every node's usage stays within its capacity in every
    /// resource. False means the system is overloaded.
    pub fn is_stable(&self, assignment: &Assignment) -> bool {
        debug_assert_eq!(assignment.len(), self.task_count());
        let d = self.resource_count();
        let mut usage = vec![0u64; self.node_count() * d];
        for (task, &node) in assignment.genes().iter().enumerate() {
            let demand = self.tasks[task].demand.levels();
            let slot = &mut usage[node * d..(node + 1) * d];
            for (u, r) in slot.iter_mut().zip(demand) {
                *u += r;
            }
        }
        self.nodes.iter().enumerate().all(|(n, node)| {
            usage[n * d..(n + 1) * d]
                .iter()
                .zip(node.capacity.levels())
                .all(|(u, c)| u <= c)
        })
    }

    /// Cost of where the assignment puts one task: zero if it stays on its
    /// initial node, the task's migration cost otherwise.
    ///
    /// Panics if `task_index` is out of range.
    pub fn reassign_cost(&self, assignment: &Assignment, task_index: usize) -> u64 {
        assert!(
            task_index < self.task_count(),
            "task index {task_index} out of range ({} tasks)",
            self.task_count()
        );
        if assignment.node_of(task_index) == self.initial_assignment.node_of(task_index) {
            0
        } else {
            self.tasks[task_index].migration_cost
        }
    }

    /// Total migration cost of transforming the initial assignment into the
    /// given one.
    pub fn transformation_cost(&self, assignment: &Assignment) -> u64 {
        (0..self.task_count())
            .map(|t| self.reassign_cost(assignment, t))
            .sum()
    }

    /// Sum of all migration costs: the cost of moving every single task.
    pub fn max_migration_cost(&self) -> u64 {
        self.tasks.iter().map(|t| t.migration_cost).sum()
    }

    /// Fitness of a genotype: `max_migration_cost - transformation_cost`.
    /// Higher is better; an untouched initial assignment scores the maximum.
    pub fn fitness(&self, genotype: &Assignment) -> u64 {
        self.max_migration_cost() - self.transformation_cost(genotype)
    }

    /// Structural validation: dimension checks, assignment range checks and
    /// a warning for tasks that cannot fit on any node at all.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let d = self.resource_count();
        if d == 0 {
            report.error("instance declares no resource kinds".to_string());
        }
        if self.node_count() == 0 {
            report.error("instance declares no nodes".to_string());
        }
        if self.task_count() == 0 {
            report.error("instance declares no tasks".to_string());
        }
        for node in &self.nodes {
            if node.capacity.len() != d {
                report.error(format!(
                    "capacity dimension mismatch for {}: {} levels, expected {}",
                    node.id,
                    node.capacity.len(),
                    d
                ));
            }
        }
        for task in &self.tasks {
            if task.demand.len() != d {
                report.error(format!(
                    "demand dimension mismatch for {}: {} levels, expected {}",
                    task.id,
                    task.demand.len(),
                    d
                ));
            }
        }
        if self.initial_assignment.len() != self.task_count() {
            report.error(format!(
                "initial assignment covers {} tasks, expected {}",
                self.initial_assignment.len(),
                self.task_count()
            ));
        }
        for (task, &node) in self.initial_assignment.genes().iter().enumerate() {
            if node >= self.node_count() {
                report.error(format!(
                    "assignment entry out of range: task {} mapped to node index {} ({} nodes)",
                    task,
                    node,
                    self.node_count()
                ));
            }
        }
        if report.errors.is_empty() {
            for task in &self.tasks {
                let fits_somewhere = self
                    .nodes
                    .iter()
                    .any(|node| task.demand.fits_within(&node.capacity));
                if !fits_somewhere {
                    report.warning(format!(
                        "task {} exceeds every node's capacity; no stable assignment exists",
                        task.id
                    ));
                }
            }
        }
        report
    }
}

/// Outcome of [`Instance::validate`]: errors break the instance contract,
/// warnings flag solvable-in-name-only setups (e.g. a task that fits nowhere).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    fn error(&mut self, message: String) {
        self.errors.push(message);
    }

    fn warning(&mut self, message: String) {
        self.warnings.push(message);
    }

    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// What a solver hands back: the best assignment it found, its cost, and
/// bookkeeping about the search itself.
///
/// `cost` is always the transformation cost of `best`, whether or not the
/// result is stable. `complete` is false when a search budget expired before
/// the strategy finished (optimality not certified).
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub best: Assignment,
    pub cost: u64,
    pub stable: bool,
    /// Work counter: evolution cycles, search-tree nodes or heuristic moves,
    /// depending on the strategy.
    pub cycles_or_nodes: u64,
    pub elapsed_ms: u64,
    pub complete: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn test1() -> Instance {
        instances::builtin_fixture("test1").unwrap()
    }

    fn task_index(instance: &Instance, id: &str) -> usize {
        instance.tasks.iter().position(|t| t.id == id).unwrap()
    }

    fn node_index(instance: &Instance, id: &str) -> usize {
        instance.nodes.iter().position(|n| n.id == id).unwrap()
    }

    #[test]
    fn usage_sums_demands_per_node() {
        let inst = test1();
        let mu0 = inst.initial_assignment.clone();
        let node3 = node_index(&inst, "Node3");
        assert_eq!(
            inst.resource_usage(&mu0, node3),
            ResourceVector::new(vec![60, 59, 73])
        );
        let node2 = node_index(&inst, "Node2");
        assert_eq!(
            inst.resource_usage(&mu0, node2),
            ResourceVector::new(vec![40, 48, 44])
        );
    }

    #[test]
    fn usage_of_empty_node_is_zero() {
        let inst = test1();
        // Map everything to node 0; nodes 1..3 are then empty.
        let all_first = Assignment::new(vec![0; inst.task_count()]);
        assert_eq!(
            inst.resource_usage(&all_first, 2),
            ResourceVector::zero(3)
        );
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn usage_rejects_bad_node_index() {
        let inst = test1();
        let mu0 = inst.initial_assignment.clone();
        inst.resource_usage(&mu0, inst.node_count());
    }

    #[test]
    fn initial_assignment_of_test1_is_overloaded() {
        let inst = test1();
        assert!(!inst.is_stable(&inst.initial_assignment));
    }

    #[test]
    fn zero_demand_task_is_always_stable() {
        let inst = Instance {
            resources: vec!["R1".into()],
            nodes: vec![Node {
                id: "N1".into(),
                capacity: ResourceVector::new(vec![0]),
            }],
            tasks: vec![Task {
                id: "T1".into(),
                demand: ResourceVector::new(vec![0]),
                migration_cost: 3,
            }],
            initial_assignment: Assignment::new(vec![0]),
        };
        assert!(inst.is_stable(&inst.initial_assignment));
    }

    #[test]
    fn known_optimum_of_test1_is_stable() {
        // Moving J13 to Node4 and J15 to Node3 repairs both overloads.
        let inst = test1();
        let mut best = inst.initial_assignment.clone();
        best.set(task_index(&inst, "J13"), node_index(&inst, "Node4"));
        best.set(task_index(&inst, "J15"), node_index(&inst, "Node3"));
        assert!(inst.is_stable(&best));
        assert_eq!(inst.transformation_cost(&best), 5);
    }

    #[test]
    fn moving_both_repairs_onto_node4_overloads_its_memory() {
        let inst = test1();
        let mut attempt = inst.initial_assignment.clone();
        attempt.set(task_index(&inst, "J13"), node_index(&inst, "Node4"));
        attempt.set(task_index(&inst, "J15"), node_index(&inst, "Node4"));
        assert!(!inst.is_stable(&attempt));
    }

    #[test]
    fn reassign_cost_is_zero_until_a_task_moves() {
        let inst = test1();
        let mu0 = inst.initial_assignment.clone();
        for t in 0..inst.task_count() {
            assert_eq!(inst.reassign_cost(&mu0, t), 0);
        }
        let j13 = task_index(&inst, "J13");
        let moved = mu0.with_move(j13, node_index(&inst, "Node4"));
        assert_eq!(inst.reassign_cost(&moved, j13), 4);
        let j05 = task_index(&inst, "J05");
        let moved = mu0.with_move(j05, node_index(&inst, "Node1"));
        assert_eq!(inst.reassign_cost(&moved, j05), 10);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn reassign_cost_rejects_bad_task_index() {
        let inst = test1();
        let mu0 = inst.initial_assignment.clone();
        inst.reassign_cost(&mu0, inst.task_count());
    }

    #[test]
    fn transformation_cost_totals() {
        let inst = test1();
        let mu0 = inst.initial_assignment.clone();
        assert_eq!(inst.transformation_cost(&mu0), 0);

        let mut two_moves = mu0.clone();
        two_moves.set(task_index(&inst, "J15"), node_index(&inst, "Node4"));
        two_moves.set(task_index(&inst, "J13"), node_index(&inst, "Node4"));
        assert_eq!(inst.transformation_cost(&two_moves), 5);

        let all_moved = Assignment::new(
            mu0.genes()
                .iter()
                .map(|&n| (n + 1) % inst.node_count())
                .collect(),
        );
        assert_eq!(inst.transformation_cost(&all_moved), 104);
    }

    #[test]
    fn fitness_is_max_cost_minus_transformation_cost() {
        let inst = test1();
        let mu0 = inst.initial_assignment.clone();
        assert_eq!(inst.fitness(&mu0), 104);

        let mut optimal = mu0.clone();
        optimal.set(task_index(&inst, "J13"), node_index(&inst, "Node4"));
        optimal.set(task_index(&inst, "J15"), node_index(&inst, "Node3"));
        assert_eq!(inst.fitness(&optimal), 99);

        let all_moved = Assignment::new(
            mu0.genes()
                .iter()
                .map(|&n| (n + 1) % inst.node_count())
                .collect(),
        );
        assert_eq!(inst.fitness(&all_moved), 0);
    }

    #[test]
    fn validate_accepts_fixture() {
        let report = test1().validate();
        assert!(report.is_valid(), "unexpected violations: {report}");
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn validate_flags_assignment_out_of_range() {
        let mut inst = test1();
        let m = inst.node_count();
        inst.initial_assignment.set(0, m);
        let report = inst.validate();
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].contains("assignment entry out of range"));
    }

    #[test]
    fn validate_flags_demand_dimension_mismatch() {
        let mut inst = test1();
        inst.tasks[4].demand = ResourceVector::new(vec![1, 2]);
        let report = inst.validate();
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].contains("demand dimension mismatch"));
    }

    #[test]
    fn validate_warns_when_a_task_fits_nowhere() {
        let mut inst = test1();
        inst.tasks[0].demand = ResourceVector::new(vec![1000, 1, 1]);
        let report = inst.validate();
        assert!(report.is_valid());
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].contains("J01"));
    }

    #[test]
    fn overload_is_exactly_node2_memory_and_node3_network() {
        let inst = test1();
        let mu0 = &inst.initial_assignment;
        let mut violations = Vec::new();
        for (n, node) in inst.nodes.iter().enumerate() {
            let usage = inst.resource_usage(mu0, n);
            for (i, resource) in inst.resources.iter().enumerate() {
                if usage.level(i) > node.capacity.level(i) {
                    violations.push((node.id.clone(), resource.clone()));
                }
            }
        }
        assert_eq!(
            violations,
            vec![
                ("Node2".to_string(), "Memory".to_string()),
                ("Node3".to_string(), "Network".to_string()),
            ]
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arbitrary_assignment(l: usize, m: usize) -> impl Strategy<Value = Assignment> {
            prop::collection::vec(0..m, l).prop_map(Assignment::new)
        }

        proptest! {
            #[test]
            fn fitness_and_cost_partition_the_maximum(
                genes in arbitrary_assignment(20, 4)
            ) {
                let inst = test1();
                let cost = inst.transformation_cost(&genes);
                prop_assert!(cost <= inst.max_migration_cost());
                prop_assert_eq!(inst.fitness(&genes) + cost, inst.max_migration_cost());
            }

            #[test]
            fn moving_one_more_task_never_lowers_the_cost(
                genes in arbitrary_assignment(20, 4),
                task in 0usize..20,
                offset in 1usize..4,
            ) {
                let inst = test1();
                let mut resting = genes.clone();
                let home = inst.initial_assignment.node_of(task);
                resting.set(task, home);
                let moved = resting.with_move(task, (home + offset) % inst.node_count());
                prop_assert!(
                    inst.transformation_cost(&moved) >= inst.transformation_cost(&resting)
                );
            }
        }
    }
}
