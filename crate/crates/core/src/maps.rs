//! Generators for maps on rank-`n` projections.
//!
//! Maps are described by a [`MapSpec`], usually read from JSON:
//!
//! ```json
//! {"type": "conjugation", "matrix": "V.json", "antiunitary": false}
//! {"type": "complement"}
//! {"type": "noisy", "base": {"type": "identity"}, "sigma": 0.001, "seed": 42}
//! {"type": "compose", "maps": [{"type": "complement"}, {"type": "identity"}]}
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GwError, Result};
use crate::extension::{check_map_input, RankNMap};
use crate::linalg::{gaussian_matrix, seeded_rng, Field, Matrix, MatrixJson, ToleranceConfig};
use crate::projection::Projection;
use crate::reconstruction::apply_conjugation;

/// A unitary given inline or as a path to a Matrix JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Path(PathBuf),
    Inline(Matrix),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MapSpec {
    /// `P ↦ V·τ(P)·V*`, `τ` entrywise conjugation when antiunitary.
    Conjugation {
        matrix: MatrixSource,
        #[serde(default)]
        antiunitary: bool,
    },
    /// `P ↦ I − P`; only defined when `d = 2n`.
    Complement,
    /// Right-to-left composition.
    Compose { maps: Vec<MapSpec> },
    /// The base map followed by conjugation with an input-dependent
    /// near-identity unitary `exp(i·sigma·H)`.
    Noisy {
        base: Box<MapSpec>,
        sigma: f64,
        #[serde(default)]
        seed: u64,
    },
    Identity,
}

impl MapSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Instantiates a spec with relative matrix paths resolved against the
/// current directory and default tolerances.
pub fn instantiate(spec: &MapSpec, d: usize, n: usize, field: Field) -> Result<Box<dyn RankNMap>> {
    instantiate_in(spec, d, n, field, Path::new("."), &ToleranceConfig::default())
}

/// Instantiates a spec, resolving relative matrix paths against `base_dir`.
pub fn instantiate_in(
    spec: &MapSpec,
    d: usize,
    n: usize,
    field: Field,
    base_dir: &Path,
    tol: &ToleranceConfig,
) -> Result<Box<dyn RankNMap>> {
    if n == 0 || n > d {
        return Err(GwError::BadRank(format!("rank {n} must lie in 1..={d}")));
    }
    Ok(match spec {
        MapSpec::Identity => Box::new(IdentityMap::new(d, n, field)),
        MapSpec::Complement => Box::new(ComplementMap::new(d, n, field)?),
        MapSpec::Conjugation {
            matrix,
            antiunitary,
        } => {
            let v = match matrix {
                MatrixSource::Inline(m) => m.clone(),
                MatrixSource::Path(p) => {
                    let path = if p.is_absolute() {
                        p.clone()
                    } else {
                        base_dir.join(p)
                    };
                    let text = std::fs::read_to_string(&path)?;
                    let j: MatrixJson = serde_json::from_str(&text)?;
                    Matrix::try_from(&j)?
                }
            };
            Box::new(ConjugationMap::new(v, *antiunitary, n, field, tol)?)
        }
        MapSpec::Compose { maps } => {
            if maps.is_empty() {
                return Err(GwError::InvalidMapSpec("compose needs at least one map".into()));
            }
            let inner = maps
                .iter()
                .map(|m| instantiate_in(m, d, n, field, base_dir, tol))
                .collect::<Result<Vec<_>>>()?;
            Box::new(ComposeMap::new(inner)?)
        }
        MapSpec::Noisy { base, sigma, seed } => {
            let base = instantiate_in(base, d, n, field, base_dir, tol)?;
            Box::new(NoisyMap::new(base, *sigma, *seed)?)
        }
    })
}

#[derive(Debug, Clone)]
pub struct IdentityMap {
    d: usize,
    n: usize,
    field: Field,
}

impl IdentityMap {
    pub fn new(d: usize, n: usize, field: Field) -> Self {
        Self { d, n, field }
    }
}

impl RankNMap for IdentityMap {
    fn ambient_dim(&self) -> usize {
        self.d
    }
    fn rank(&self) -> usize {
        self.n
    }
    fn field(&self) -> Field {
        self.field
    }
    fn evaluate(&self, p: &Projection) -> Result<Projection> {
        check_map_input(self, p)?;
        Ok(p.clone())
    }
    fn descriptor(&self) -> String {
        "identity".into()
    }
}

/// `P ↦ V·P·V*`, or `P ↦ V·conj(P)·V*` when antiunitary.
#[derive(Debug, Clone)]
pub struct ConjugationMap {
    v: Matrix,
    antiunitary: bool,
    n: usize,
    field: Field,
}

impl ConjugationMap {
    pub fn new(
        v: Matrix,
        antiunitary: bool,
        n: usize,
        field: Field,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        if !v.is_square() {
            return Err(GwError::InvalidMapSpec(format!(
                "conjugating matrix is {}x{}, not square",
                v.rows(),
                v.cols()
            )));
        }
        let defect = v.unitarity_defect();
        if defect > tol.eq_tol {
            return Err(GwError::InvalidMapSpec(format!(
                "conjugating matrix is not unitary (defect {defect:.3e})"
            )));
        }
        if field == Field::Real && v.field() != Field::Real {
            return Err(GwError::InvalidMapSpec(
                "a real-field map needs a real orthogonal matrix".into(),
            ));
        }
        if n == 0 || n > v.rows() {
            return Err(GwError::BadRank(format!("rank {n} must lie in 1..={}", v.rows())));
        }
        Ok(Self {
            v,
            antiunitary,
            n,
            field,
        })
    }

    pub fn unitary(&self) -> &Matrix {
        &self.v
    }

    pub fn is_antiunitary(&self) -> bool {
        self.antiunitary
    }
}

impl RankNMap for ConjugationMap {
    fn ambient_dim(&self) -> usize {
        self.v.rows()
    }
    fn rank(&self) -> usize {
        self.n
    }
    fn field(&self) -> Field {
        self.field
    }
    fn evaluate(&self, p: &Projection) -> Result<Projection> {
        check_map_input(self, p)?;
        apply_conjugation(&self.v, self.antiunitary, p)
    }
    fn descriptor(&self) -> String {
        if self.antiunitary {
            "antiunitary conjugation".into()
        } else {
            "unitary conjugation".into()
        }
    }
}

/// `P ↦ I − P` on rank-`n` projections of a `2n`-dimensional space.
#[derive(Debug, Clone)]
pub struct ComplementMap {
    n: usize,
    field: Field,
}

impl ComplementMap {
    pub fn new(d: usize, n: usize, field: Field) -> Result<Self> {
        if d != 2 * n {
            return Err(GwError::BadRank(format!(
                "the complement map needs d = 2n, got d = {d}, n = {n}"
            )));
        }
        Ok(Self { n, field })
    }
}

impl RankNMap for ComplementMap {
    fn ambient_dim(&self) -> usize {
        2 * self.n
    }
    fn rank(&self) -> usize {
        self.n
    }
    fn field(&self) -> Field {
        self.field
    }
    fn evaluate(&self, p: &Projection) -> Result<Projection> {
        check_map_input(self, p)?;
        Ok(p.complement())
    }
    fn descriptor(&self) -> String {
        "complement".into()
    }
}

/// Composition `f₁ ∘ f₂ ∘ … ∘ f_k`: the last map is applied first.
pub struct ComposeMap {
    maps: Vec<Box<dyn RankNMap>>,
}

impl ComposeMap {
    pub fn new(maps: Vec<Box<dyn RankNMap>>) -> Result<Self> {
        let Some(first) = maps.first() else {
            return Err(GwError::InvalidMapSpec("compose needs at least one map".into()));
        };
        let (d, n) = (first.ambient_dim(), first.rank());
        if maps.iter().any(|m| m.ambient_dim() != d || m.rank() != n) {
            return Err(GwError::InvalidMapSpec(
                "composed maps must share dimension and rank".into(),
            ));
        }
        Ok(Self { maps })
    }
}

impl RankNMap for ComposeMap {
    fn ambient_dim(&self) -> usize {
        self.maps[0].ambient_dim()
    }
    fn rank(&self) -> usize {
        self.maps[0].rank()
    }
    fn field(&self) -> Field {
        self.maps[0].field()
    }
    fn evaluate(&self, p: &Projection) -> Result<Projection> {
        self.maps
            .iter()
            .rev()
            .try_fold(p.clone(), |acc, m| m.evaluate(&acc))
    }
    fn descriptor(&self) -> String {
        let parts: Vec<String> = self.maps.iter().map(|m| m.descriptor()).collect();
        format!("compose({})", parts.join(" ∘ "))
    }
}

/// Base map followed by conjugation with `exp(i·sigma·H)`, where the
/// Hermitian `H` is drawn from a hash of the input and the seed. In the real
/// field `H` is imaginary antisymmetric so the unitary is a real rotation.
pub struct NoisyMap {
    base: Box<dyn RankNMap>,
    sigma: f64,
    seed: u64,
}

impl NoisyMap {
    pub fn new(base: Box<dyn RankNMap>, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(GwError::InvalidMapSpec(format!(
                "sigma must be a nonnegative number, got {sigma}"
            )));
        }
        Ok(Self { base, sigma, seed })
    }

    fn noise_unitary(&self, p: &Projection) -> Matrix {
        let mut hasher = Sha256::new();
        hasher.update(p.matrix().canonical_key());
        hasher.update(self.seed.to_le_bytes());
        let digest = hasher.finalize();
        let mut seed_bytes = [0u8; 8];
        seed_bytes.copy_from_slice(&digest[..8]);
        let mut rng = seeded_rng(u64::from_le_bytes(seed_bytes));

        let d = self.base.ambient_dim();
        let field = self.base.field();
        let g = gaussian_matrix(&mut rng, d, d, field);
        let generator = match field {
            Field::Real => (&g - &g.adjoint()).scale(0.5 * self.sigma),
            Field::Complex => (&g + &g.adjoint()).scale_complex(Complex64::new(0.0, 0.5 * self.sigma)),
        };
        generator.exp()
    }
}

impl RankNMap for NoisyMap {
    fn ambient_dim(&self) -> usize {
        self.base.ambient_dim()
    }
    fn rank(&self) -> usize {
        self.base.rank()
    }
    fn field(&self) -> Field {
        self.base.field()
    }
    fn evaluate(&self, p: &Projection) -> Result<Projection> {
        let out = self.base.evaluate(p)?;
        if self.sigma == 0.0 {
            return Ok(out);
        }
        apply_conjugation(&self.noise_unitary(p), false, &out)
    }
    fn descriptor(&self) -> String {
        format!("noisy(sigma = {}, {})", self.sigma, self.base.descriptor())
    }
}

/// One captured evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntry {
    pub input: MatrixJson,
    pub output: MatrixJson,
}

/// Serialized input/output pairs of a map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapTable {
    pub ambient_dim: usize,
    pub rank: usize,
    pub field: Field,
    pub entries: Vec<TableEntry>,
}

/// Evaluates `phi` on every input and records the pairs.
pub fn map_to_table(phi: &(impl RankNMap + ?Sized), inputs: &[Projection]) -> Result<MapTable> {
    let entries = inputs
        .iter()
        .map(|p| {
            Ok(TableEntry {
                input: p.to_json(),
                output: phi.evaluate(p)?.to_json(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MapTable {
        ambient_dim: phi.ambient_dim(),
        rank: phi.rank(),
        field: phi.field(),
        entries,
    })
}

/// A map backed by a [`MapTable`]. Unknown inputs are an error; lookup uses
/// the 12-decimal canonical key.
pub struct TableMap {
    d: usize,
    n: usize,
    field: Field,
    entries: HashMap<Vec<u8>, Projection>,
}

impl TableMap {
    pub fn from_table(table: &MapTable, tol: &ToleranceConfig) -> Result<Self> {
        let mut entries = HashMap::with_capacity(table.entries.len());
        for e in &table.entries {
            let input = Projection::from_json(&e.input, tol)?;
            let output = Projection::from_json(&e.output, tol)?;
            for p in [&input, &output] {
                if p.ambient_dim() != table.ambient_dim || p.rank() != table.rank {
                    return Err(GwError::InvalidMapSpec(format!(
                        "table entry has dimension {} and rank {}, expected {} and {}",
                        p.ambient_dim(),
                        p.rank(),
                        table.ambient_dim,
                        table.rank
                    )));
                }
            }
            entries.insert(input.matrix().canonical_key(), output);
        }
        Ok(Self {
            d: table.ambient_dim,
            n: table.rank,
            field: table.field,
            entries,
        })
    }
}

impl RankNMap for TableMap {
    fn ambient_dim(&self) -> usize {
        self.d
    }
    fn rank(&self) -> usize {
        self.n
    }
    fn field(&self) -> Field {
        self.field
    }
    fn evaluate(&self, p: &Projection) -> Result<Projection> {
        check_map_input(self, p)?;
        self.entries
            .get(&p.matrix().canonical_key())
            .cloned()
            .ok_or(GwError::UnknownInput)
    }
    fn descriptor(&self) -> String {
        "table".into()
    }
}
