//! Shared fixtures for the integration and acceptance suites: deterministic
//! random-network generation, exact-joint databases, the frozen benchmark
//! networks, and an independent contingency-table G² oracle.
#![allow(dead_code)]

use rand::Rng;

use kutato::model::{
    joint_probability, Assignment, BeliefNetwork, CaseDatabase, Cpt, Variable,
};

/// A random sparse DAG over `n_min..=n_max` variables with arities 2..=4,
/// capping the joint-table size at `max_joint_cells`. CPT entries stay well
/// inside (0, 1).
pub fn random_network(rng: &mut impl Rng, n_min: usize, n_max: usize, max_joint_cells: usize) -> BeliefNetwork {
    let n = rng.random_range(n_min..=n_max);

    let mut arities = vec![2usize; n];
    let mut cells: usize = 1 << n;
    assert!(cells <= max_joint_cells, "cap too small for {n} variables");
    for a in arities.iter_mut() {
        let upgrade = rng.random_range(2..=4usize);
        if cells / 2 * upgrade <= max_joint_cells {
            cells = cells / 2 * upgrade;
            *a = upgrade;
        }
    }

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let density = 2.5 / n as f64;
    for to in 1..n {
        for from in 0..to {
            if parents[to].len() < 3 && rng.random::<f64>() < density {
                parents[to].push(from);
            }
        }
    }

    let variables: Vec<Variable> = (0..n)
        .map(|i| {
            let labels: Vec<String> = (0..arities[i]).map(|v| format!("v{v}")).collect();
            Variable::new(format!("X{i}"), labels)
        })
        .collect();
    let cpts: Vec<Cpt> = (0..n)
        .map(|x| {
            let rows: usize = parents[x].iter().map(|&p| arities[p]).product();
            let table: Vec<Vec<f64>> = (0..rows)
                .map(|_| {
                    let raw: Vec<f64> = (0..arities[x])
                        .map(|_| rng.random_range(0.05..1.0))
                        .collect();
                    let sum: f64 = raw.iter().sum();
                    raw.into_iter().map(|p| p / sum).collect()
                })
                .collect();
            Cpt::new(table)
        })
        .collect();
    BeliefNetwork::new("random", variables, parents, cpts).unwrap()
}

/// The network's exact joint distribution as a weighted database: one row
/// per assignment, weight = probability × `scale`.
pub fn exact_joint_db(net: &BeliefNetwork, scale: f64) -> CaseDatabase {
    let arities = net.arities();
    let total: usize = arities.iter().product();
    let mut rows = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut values = vec![0usize; net.num_variables()];
    for _ in 0..total {
        let p = joint_probability(net, &Assignment::new(values.clone()));
        rows.push(values.iter().map(|&v| Some(v)).collect());
        weights.push(p * scale);
        for i in (0..values.len()).rev() {
            values[i] += 1;
            if values[i] < arities[i] {
                break;
            }
            values[i] = 0;
        }
    }
    CaseDatabase::new(net.variables().to_vec(), rows, weights).unwrap()
}

fn binary_net(name: &str, n: usize, arcs: &[(usize, usize)], p_true: &[Vec<f64>]) -> BeliefNetwork {
    let vars: Vec<Variable> = (0..n).map(|i| Variable::binary(format!("X{i}"))).collect();
    let mut parents = vec![Vec::new(); n];
    for &(f, t) in arcs {
        parents[t].push(f);
        parents[t].sort_unstable();
    }
    let cpts: Vec<Cpt> = p_true
        .iter()
        .map(|row_pts| {
            Cpt::new(row_pts.iter().map(|&pt| vec![1.0 - pt, pt]).collect())
        })
        .collect();
    BeliefNetwork::new(name, vars, parents, cpts).unwrap()
}

/// Five binary nodes, five arcs, CPT entries within [0.1, 0.9]; joint
/// probabilities range from 0.00018 to 0.2142.
pub fn five_node_net() -> BeliefNetwork {
    binary_net(
        "five",
        5,
        &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)],
        &[
            vec![0.3],
            vec![0.2, 0.8],
            vec![0.4, 0.9],
            vec![0.15, 0.4, 0.7, 0.9],
            vec![0.25, 0.8],
        ],
    )
}

/// Twelve binary nodes, fourteen arcs, monotone parent effects.
pub fn twelve_node_net() -> BeliefNetwork {
    let parents: [&[usize]; 12] = [
        &[],
        &[0],
        &[0],
        &[1],
        &[1, 2],
        &[2],
        &[3],
        &[4, 5],
        &[4],
        &[6, 7],
        &[8],
        &[9],
    ];
    let mut arcs = Vec::new();
    let mut p_true = Vec::new();
    for (x, ps) in parents.iter().enumerate() {
        for &p in ps.iter() {
            arcs.push((p, x));
        }
        if ps.is_empty() {
            p_true.push(vec![0.35 + 0.05 * (x % 3) as f64]);
            continue;
        }
        let rows = 1usize << ps.len();
        let base = 0.14 + 0.01 * (x % 5) as f64;
        let mut pts = Vec::with_capacity(rows);
        for config in 0..rows {
            let mut pt = base;
            for (k, _) in ps.iter().enumerate() {
                let bit = (config >> (ps.len() - 1 - k)) & 1;
                if bit == 1 {
                    pt += (0.62 - 0.07 * k as f64) / ps.len() as f64;
                }
            }
            pts.push(pt.clamp(0.1, 0.9));
        }
        p_true.push(pts);
    }
    binary_net("twelve", 12, &arcs, &p_true)
}

/// Four binary nodes in a diamond, used for sampling-fidelity checks.
pub fn four_node_net() -> BeliefNetwork {
    binary_net(
        "diamond",
        4,
        &[(0, 1), (0, 2), (1, 3), (2, 3)],
        &[
            vec![0.4],
            vec![0.25, 0.75],
            vec![0.7, 0.2],
            vec![0.1, 0.45, 0.6, 0.85],
        ],
    )
}

/// A 37-node, 46-arc network with arities up to 4 and at most 3 parents per
/// node, built deterministically from a seed.
pub fn alarm_scale_net(seed: u64) -> BeliefNetwork {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = 37usize;
    let arity_pattern = [2usize, 3, 2, 4, 2, 2, 3, 2, 4, 2];
    let arities: Vec<usize> = (0..n).map(|i| arity_pattern[i % arity_pattern.len()]).collect();

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for to in 1..n {
        let window = to.saturating_sub(6);
        parents[to].push(rng.random_range(window..to));
    }
    // 36 chain arcs so far; six second parents plus two nodes upgraded to
    // three parents make 46.
    for &to in &[5usize, 9, 17, 21, 29, 33] {
        add_distinct_parent(&mut rng, &mut parents, to);
    }
    for &to in &[12usize, 24] {
        add_distinct_parent(&mut rng, &mut parents, to);
        add_distinct_parent(&mut rng, &mut parents, to);
    }
    let total: usize = parents.iter().map(Vec::len).sum();
    assert_eq!(total, 46);
    assert!(parents.iter().all(|p| p.len() <= 3));

    let variables: Vec<Variable> = (0..n)
        .map(|i| {
            let labels: Vec<String> = (0..arities[i]).map(|v| format!("v{v}")).collect();
            Variable::new(format!("N{i:02}"), labels)
        })
        .collect();
    let cpts: Vec<Cpt> = (0..n)
        .map(|x| {
            let rows: usize = parents[x].iter().map(|&p| arities[p]).product();
            let table: Vec<Vec<f64>> = (0..rows)
                .map(|_| {
                    let raw: Vec<f64> = (0..arities[x])
                        .map(|_| rng.random_range(0.05..1.0))
                        .collect();
                    let sum: f64 = raw.iter().sum();
                    raw.into_iter().map(|p| p / sum).collect()
                })
                .collect();
            Cpt::new(table)
        })
        .collect();
    BeliefNetwork::new("alarm-scale", variables, parents, cpts).unwrap()
}

fn add_distinct_parent(rng: &mut impl Rng, parents: &mut [Vec<usize>], to: usize) {
    let window = to.saturating_sub(6);
    loop {
        let candidate = rng.random_range(window..to);
        if !parents[to].contains(&candidate) {
            parents[to].push(candidate);
            parents[to].sort_unstable();
            // keep at most 3 parents
            assert!(parents[to].len() <= 3);
            return;
        }
    }
}

/// Independent G² oracle: builds the (child × new-parent × existing-config)
/// contingency table straight from the rows — no shared code with the
/// library's entropy path — and evaluates
/// `2·Σ O·ln(O·O(e) / (O(c,e)·O(f,e)))` over complete rows.
pub fn g2_oracle(
    db: &CaseDatabase,
    child: usize,
    new_parent: usize,
    existing: &[usize],
) -> f64 {
    let child_arity = db.variables()[child].arity();
    let parent_arity = db.variables()[new_parent].arity();
    let config_count: usize = existing.iter().map(|&p| db.variables()[p].arity()).product();

    let mut table = vec![vec![vec![0.0f64; config_count]; parent_arity]; child_arity];
    'rows: for r in 0..db.num_rows() {
        let row = db.row(r);
        let (Some(c), Some(f)) = (row[child], row[new_parent]) else {
            continue;
        };
        let mut e = 0usize;
        for &p in existing {
            match row[p] {
                Some(v) => e = e * db.variables()[p].arity() + v,
                None => continue 'rows,
            }
        }
        table[c][f][e] += db.weight(r);
    }

    let mut g2 = 0.0;
    for e in 0..config_count {
        let o_e: f64 = (0..child_arity)
            .map(|c| (0..parent_arity).map(|f| table[c][f][e]).sum::<f64>())
            .sum();
        if o_e <= 0.0 {
            continue;
        }
        for c in 0..child_arity {
            let o_ce: f64 = (0..parent_arity).map(|f| table[c][f][e]).sum();
            for f in 0..parent_arity {
                let o = table[c][f][e];
                if o <= 0.0 {
                    continue;
                }
                let o_fe: f64 = (0..child_arity).map(|c2| table[c2][f][e]).sum();
                g2 += o * (o * o_e / (o_ce * o_fe)).ln();
            }
        }
    }
    2.0 * g2
}
