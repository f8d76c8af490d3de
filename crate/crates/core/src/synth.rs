//! Seeded synthetic corpus generator with known ground truth.
//!
//! Builds a benchmark corpus of authors who collide on LN-FI block keys:
//! most keys carry six distinct authors (same first initial, different first
//! names), a few carry a single low-volume author so that rare blocks are
//! exercised too. Authors work in small collaboration groups that share a
//! topic vocabulary, journals, and an institution, so references by the same
//! person look alike across all of their papers while same-key strangers do
//! not. Attribute noise mimics real metadata: title tokens drop out, most
//! author slots lack an email, and half lack an affiliation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::corpus::RefId;
use crate::pipeline::ClusterLine;

/// Generator knobs. The defaults are the committed benchmark settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub citations: usize,
    /// Probability that a title token is dropped.
    pub token_dropout: f64,
    /// Probability that an author slot omits its email.
    pub missing_email: f64,
    /// Probability that an author slot omits its affiliation.
    pub missing_affiliation: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            citations: 1000,
            token_dropout: 0.10,
            missing_email: 0.70,
            missing_affiliation: 0.50,
        }
    }
}

/// A generated corpus: raw JSONL ready for ingestion plus the gold
/// partition in cluster-line form.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub jsonl: String,
    pub gold: Vec<ClusterLine>,
    pub author_count: usize,
    pub key_count: usize,
}

const CONTESTED_KEYS: usize = 32;
const AUTHORS_PER_KEY: usize = 6;
const RARE_KEYS: usize = 8;
const RARE_CITATIONS_EACH: usize = 5;
const GROUP_SIZE: usize = 4;

const LAST_NAMES: [&str; 40] = [
    "Aldana", "Bennett", "Carver", "Dietrich", "Ellington", "Farrow", "Galvan", "Hartman",
    "Iverson", "Jacobsen", "Kessler", "Lindqvist", "Moreau", "Navarro", "Okafor", "Petrov",
    "Quintana", "Rosales", "Sandoval", "Thackeray", "Ulrich", "Vasquez", "Whitfield", "Xiong",
    "Yamada", "Zielinski", "Abara", "Bhatt", "Castellano", "Dubois", "Eriksen", "Fontaine",
    "Grushin", "Herrera", "Ibarra", "Joshi", "Kobayashi", "Laurent", "Medina", "Novak",
];

const FIRST_GROUPS: [[&str; 6]; 8] = [
    ["james", "julia", "jonas", "jacob", "jasmine", "joel"],
    ["maria", "marco", "miguel", "mira", "moses", "marta"],
    ["anna", "albert", "amara", "arjun", "alice", "andre"],
    ["sofia", "samuel", "sven", "sara", "simon", "selma"],
    ["elena", "erik", "emma", "emil", "esther", "edgar"],
    ["lucas", "lena", "liam", "lara", "leo", "lidia"],
    ["tomas", "tara", "theo", "tina", "tobias", "talia"],
    ["nina", "noel", "nadia", "nikolai", "nora", "nestor"],
];

const JOURNALS: [&str; 30] = [
    "Journal of Computational Biology",
    "Annals of Applied Statistics",
    "Machine Learning Review",
    "Nature Methods",
    "Bioinformatics Quarterly",
    "Journal of Chemical Theory",
    "Physical Review E",
    "Neural Computation",
    "Genome Research",
    "Journal of Graph Algorithms",
    "Cell Systems",
    "Artificial Intelligence Journal",
    "Journal of Molecular Biology",
    "Statistics and Computing",
    "IEEE Transactions on Knowledge Engineering",
    "Journal of Theoretical Ecology",
    "Quantum Information Processing",
    "Journal of Climate Modeling",
    "Proteomics Letters",
    "Discrete Applied Mathematics",
    "Journal of Neuroscience Methods",
    "Computational Linguistics Review",
    "Journal of Materials Informatics",
    "Epidemiology and Inference",
    "Astrophysical Data Analysis",
    "Journal of Systems Biology",
    "Pattern Recognition Letters",
    "Journal of Numerical Analysis",
    "Ecological Modelling Advances",
    "Journal of Medical Imaging",
];

const SUBJECTS: [&str; 60] = [
    "protein folding", "gene expression", "neural networks", "graph theory", "bayesian inference",
    "molecular dynamics", "rna sequencing", "deep learning", "markov models", "cell signaling",
    "genome assembly", "drug discovery", "spectral methods", "convex optimization",
    "population genetics", "climate dynamics", "quantum computing", "epidemic modeling",
    "image segmentation", "natural language", "knowledge graphs", "causal inference",
    "time series", "clustering algorithms", "metabolic pathways", "chromatin structure",
    "enzyme kinetics", "statistical physics", "random matrices", "network topology",
    "immune response", "protein interactions", "sparse regression", "variational methods",
    "sequence alignment", "phylogenetics", "crystallography", "mass spectrometry",
    "reinforcement learning", "generative models", "ocean circulation", "atmospheric chemistry",
    "stellar evolution", "dark matter", "materials screening", "catalysis", "polymer physics",
    "membrane transport", "synaptic plasticity", "brain connectivity", "microbiome analysis",
    "antibiotic resistance", "tumor evolution", "stem cells", "morphogenesis", "biomechanics",
    "speech recognition", "information retrieval", "compiler optimization", "distributed systems",
];

const VOCAB: [&str; 120] = [
    "adaptive", "algorithm", "analysis", "approach", "assembly", "automated", "bounds",
    "cascade", "cellular", "characterization", "comparative", "complexity", "computational",
    "convergence", "coupling", "decomposition", "density", "detection", "diffusion", "dynamic",
    "efficient", "embedding", "empirical", "estimation", "evaluation", "evolution", "evidence",
    "experimental", "framework", "functional", "gradient", "heterogeneous", "hierarchical",
    "identification", "inference", "integration", "interaction", "invariant", "kernel",
    "landscape", "latent", "learning", "likelihood", "linear", "localization", "mapping",
    "mechanism", "metric", "model", "modular", "multiscale", "network", "nonlinear", "optimal",
    "parallel", "parameter", "partition", "pathway", "pattern", "perturbation", "prediction",
    "probabilistic", "profile", "propagation", "quantitative", "random", "reconstruction",
    "regularization", "representation", "resolution", "response", "robust", "sampling",
    "scalable", "scaling", "selection", "sensitivity", "signal", "simulation", "sparse",
    "spatial", "spectral", "stability", "stochastic", "structure", "synthesis", "systematic",
    "temporal", "theory", "topology", "tracking", "tradeoff", "transfer", "transition",
    "transport", "uncertainty", "unified", "validation", "variation", "visualization",
    "architecture", "benchmark", "calibration", "classification", "correlation", "dataset",
    "dimension", "distribution", "ensemble", "equilibrium", "feedback", "flux", "geometry",
    "heuristic", "hypothesis", "kinetics", "manifold", "measurement", "regression", "symmetry",
];

const INSTITUTIONS: [&str; 25] = [
    "Department of Computer Science, University of Halden",
    "Institute for Systems Biology, Aldergate University",
    "School of Mathematics, Pellworth Institute of Technology",
    "Center for Genomics, University of Brindlemark",
    "Department of Physics, Calloway State University",
    "Laboratory of Molecular Medicine, Strand Institute",
    "Department of Statistics, University of Veldt",
    "Institute of Marine Science, Corvid Bay University",
    "School of Engineering, Tallis Polytechnic",
    "Department of Chemistry, University of Norwich Vale",
    "Center for Neural Computation, Eastbrook University",
    "Department of Ecology, Greenholm University",
    "Institute for Advanced Materials, Quarry Ridge University",
    "School of Public Health, Merriton University",
    "Department of Astronomy, Skyfield Observatory Institute",
    "Computational Biology Unit, Harrowgate Medical School",
    "Department of Linguistics, University of Coldwater",
    "Institute of Climate Research, Polar Crest University",
    "School of Information, Redmoor University",
    "Department of Biochemistry, University of Lantern Hill",
    "Center for Quantum Technologies, Ashgrove Institute",
    "Department of Epidemiology, Westerly College of Medicine",
    "Institute of Applied Geometry, University of Stonebridge",
    "School of Biosciences, Fernvale University",
    "Department of Mechanical Engineering, Ironwood University",
];

const MIDDLE_INITIALS: [&str; 12] = ["a", "b", "c", "d", "e", "f", "g", "h", "k", "l", "m", "r"];

struct SynthAuthor {
    last: &'static str,
    first: &'static str,
    middle: Option<&'static str>,
    suffix: Option<&'static str>,
    email: String,
    group: usize,
}

struct Group {
    journals: Vec<&'static str>,
    subjects: Vec<&'static str>,
    themes: Vec<&'static str>,
    institution: &'static str,
    members: Vec<usize>,
}

fn sample_distinct<T: Copy>(pool: &[T], n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut indices: Vec<usize> = (0..pool.len()).collect();
    indices.shuffle(rng);
    indices.into_iter().take(n).map(|i| pool[i]).collect()
}

/// Generates the benchmark corpus. Deterministic for a fixed config.
pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // --- authors ----------------------------------------------------------
    // contested keys first (AUTHORS_PER_KEY authors each), then rare keys
    let mut authors: Vec<SynthAuthor> = Vec::new();
    for slot in 0..AUTHORS_PER_KEY {
        for key in 0..CONTESTED_KEYS {
            let firsts = &FIRST_GROUPS[key % FIRST_GROUPS.len()];
            let idx = authors.len();
            authors.push(SynthAuthor {
                last: LAST_NAMES[key],
                first: firsts[slot],
                middle: if rng.random_bool(0.8) {
                    Some(MIDDLE_INITIALS[rng.random_range(0..MIDDLE_INITIALS.len())])
                } else {
                    None
                },
                suffix: if rng.random_bool(0.05) { Some("jr") } else { None },
                email: format!("{}.{}{}@mail.example", firsts[slot], LAST_NAMES[key].to_lowercase(), idx),
                group: usize::MAX, // assigned below
            });
        }
    }
    let contested_count = authors.len();
    for rare in 0..RARE_KEYS {
        let key = CONTESTED_KEYS + rare;
        let firsts = &FIRST_GROUPS[key % FIRST_GROUPS.len()];
        let idx = authors.len();
        authors.push(SynthAuthor {
            last: LAST_NAMES[key],
            first: firsts[0],
            middle: Some(MIDDLE_INITIALS[rng.random_range(0..MIDDLE_INITIALS.len())]),
            suffix: None,
            email: format!("{}.{}{}@mail.example", firsts[0], LAST_NAMES[key].to_lowercase(), idx),
            group: usize::MAX,
        });
    }

    // --- collaboration groups ---------------------------------------------
    // consecutive contested authors share a group; consecutive indices have
    // consecutive keys, so group members never collide on a block key
    let group_count = contested_count / GROUP_SIZE;
    let mut groups: Vec<Group> = (0..group_count)
        .map(|_| Group {
            journals: sample_distinct(&JOURNALS, 2, &mut rng),
            subjects: sample_distinct(&SUBJECTS, 5, &mut rng),
            themes: sample_distinct(&VOCAB, 5, &mut rng),
            institution: INSTITUTIONS[rng.random_range(0..INSTITUTIONS.len())],
            members: Vec::new(),
        })
        .collect();
    for (idx, author) in authors.iter_mut().enumerate().take(contested_count) {
        let group = idx / GROUP_SIZE;
        author.group = group;
        groups[group].members.push(idx);
    }
    // each rare author gets a private topic profile and a host group whose
    // members appear as coauthors on their papers
    let mut rare_groups: Vec<Group> = Vec::new();
    for idx in contested_count..authors.len() {
        let host = rng.random_range(0..group_count);
        let mut group = Group {
            journals: sample_distinct(&JOURNALS, 2, &mut rng),
            subjects: sample_distinct(&SUBJECTS, 5, &mut rng),
            themes: sample_distinct(&VOCAB, 5, &mut rng),
            institution: INSTITUTIONS[rng.random_range(0..INSTITUTIONS.len())],
            members: groups[host].members.clone(),
        };
        group.members.retain(|&m| m != idx);
        authors[idx].group = group_count + rare_groups.len();
        rare_groups.push(group);
    }
    groups.extend(rare_groups);

    // --- focal schedule -----------------------------------------------------
    let rare_total = RARE_KEYS * RARE_CITATIONS_EACH;
    let contested_citations = config.citations.saturating_sub(rare_total);
    let mut focal_schedule: Vec<usize> = (0..contested_citations)
        .map(|c| c % contested_count)
        .collect();
    for rare in 0..RARE_KEYS {
        for _ in 0..RARE_CITATIONS_EACH {
            focal_schedule.push(contested_count + rare);
        }
    }

    // --- citations ----------------------------------------------------------
    let mut jsonl = String::new();
    let mut gold_by_author: Vec<Vec<RefId>> = vec![Vec::new(); authors.len()];

    for (c, &focal) in focal_schedule.iter().enumerate() {
        let id = format!("p{c:04}");
        let group = &groups[authors[focal].group];

        // coauthors from the focal author's group
        let mut pool: Vec<usize> = group.members.iter().copied().filter(|&m| m != focal).collect();
        pool.shuffle(&mut rng);
        let max_coauthors = pool.len().clamp(1, 3);
        let coauthor_count = rng.random_range(1..=max_coauthors);
        let mut slots: Vec<usize> = vec![focal];
        slots.extend(pool.into_iter().take(coauthor_count));
        slots.shuffle(&mut rng);

        // title: three theme words plus filler, with token dropout
        let mut title_words = sample_distinct(&group.themes, 3, &mut rng);
        title_words.extend(sample_distinct(&VOCAB, 3, &mut rng));
        title_words.shuffle(&mut rng);
        let kept: Vec<&str> = title_words
            .iter()
            .filter(|_| !rng.random_bool(config.token_dropout))
            .copied()
            .collect();
        let title = if kept.len() >= 2 {
            kept.join(" ")
        } else {
            title_words.join(" ")
        };

        let journal = group.journals[rng.random_range(0..group.journals.len())];
        let n_subjects = rng.random_range(2..=4);
        let subjects = sample_distinct(&group.subjects, n_subjects, &mut rng);
        let language = match rng.random_range(0..10) {
            0 => "ger",
            _ => "eng",
        };
        let year = 1990 + rng.random_range(0..30);

        let author_values: Vec<serde_json::Value> = slots
            .iter()
            .map(|&a| {
                let author = &authors[a];
                let email = if rng.random_bool(config.missing_email) {
                    serde_json::Value::Null
                } else {
                    json!(author.email)
                };
                let affiliation = if rng.random_bool(config.missing_affiliation) {
                    serde_json::Value::Null
                } else {
                    json!(groups[author.group].institution)
                };
                json!({
                    "last": author.last,
                    "first": author.first,
                    "middle": author.middle.unwrap_or(""),
                    "suffix": author.suffix.unwrap_or(""),
                    "email": email,
                    "affiliation": affiliation,
                })
            })
            .collect();

        for (position, &a) in slots.iter().enumerate() {
            gold_by_author[a].push(RefId::new(id.clone(), position as u32));
        }

        let record = json!({
            "id": id,
            "title": title,
            "journal": journal,
            "authors": author_values,
            "subjects": subjects,
            "language": language,
            "year": year,
        });
        jsonl.push_str(&record.to_string());
        jsonl.push('\n');
    }

    // --- gold clusters -------------------------------------------------------
    let mut gold: Vec<ClusterLine> = Vec::new();
    let mut entries: Vec<(String, Vec<RefId>)> = gold_by_author
        .into_iter()
        .enumerate()
        .filter(|(_, refs)| !refs.is_empty())
        .map(|(a, mut refs)| {
            refs.sort();
            let author = &authors[a];
            let key = format!(
                "{}_{}",
                author.last.to_lowercase(),
                author.first.chars().next().unwrap()
            );
            (key, refs)
        })
        .collect();
    entries.sort();
    let mut current_block = String::new();
    let mut next_id = 0u32;
    for (block, refs) in entries {
        if block != current_block {
            current_block = block.clone();
            next_id = 0;
        }
        gold.push(ClusterLine {
            block,
            cluster_id: next_id,
            refs,
        });
        next_id += 1;
    }

    SynthCorpus {
        jsonl,
        gold,
        author_count: authors.len(),
        key_count: CONTESTED_KEYS + RARE_KEYS,
    }
}
