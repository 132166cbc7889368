//! Loading inputs from JSON files, the corpus directory and built-in names.
//!
//! A reference such as the `lattice` field of a family file is resolved in
//! order: as a path relative to the referencing file, as `<name>.json` in the
//! directory named by `OBS_CORPUS_DIR`, and as a built-in corpus name.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::classical::{FiniteTopSpace, PointFunctionFile, TopologyFile};
use crate::context::{self, ContextDiagram, DiagramFile, GlobalSection, MatrixSpec, SectionFile};
use crate::corpus;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeFile};
use crate::linalg::CMatrix;
use crate::observable::{ObservableFunction, ObservableTableFile};
use crate::presheaf::{LatticePresheaf, PresheafFile};
use crate::spectral::{SpectralFamily, SpectralFamilyFile};
use crate::stone::StoneSpectrum;
use crate::vn::Tolerances;

pub const CORPUS_ENV: &str = "OBS_CORPUS_DIR";

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Resolves references against files and the corpus.
#[derive(Debug, Clone, Default)]
pub struct Loader {
    corpus_dir: Option<PathBuf>,
    cap: Option<usize>,
}

impl Loader {
    /// Reads the corpus directory from the environment.
    pub fn from_env() -> Self {
        Loader {
            corpus_dir: std::env::var_os(CORPUS_ENV).map(PathBuf::from),
            cap: None,
        }
    }

    pub fn with_corpus_dir(mut self, dir: Option<PathBuf>) -> Self {
        self.corpus_dir = dir;
        self
    }

    /// Bound on the number of dual ideals enumerated for a spectrum.
    pub fn with_cap(mut self, cap: Option<usize>) -> Self {
        self.cap = cap;
        self
    }

    /// The file a reference points to, if any.
    pub fn locate(&self, reference: &str, base: Option<&Path>) -> Option<PathBuf> {
        let direct = match base.and_then(Path::parent) {
            Some(dir) => dir.join(reference),
            None => PathBuf::from(reference),
        };
        if direct.is_file() {
            return Some(direct);
        }
        let dir = self.corpus_dir.as_ref()?;
        [dir.join(reference), dir.join(format!("{reference}.json"))]
            .into_iter()
            .find(|p| p.is_file())
    }

    pub fn lattice(&self, reference: &str, base: Option<&Path>) -> Result<Arc<Lattice>> {
        if let Some(path) = self.locate(reference, base) {
            return Ok(Arc::new(read_json::<LatticeFile>(&path)?.build()?));
        }
        corpus::lattice_by_name(reference)
            .map(Arc::new)
            .ok_or_else(|| Error::Input(format!("no lattice file or corpus lattice named `{reference}`")))
    }

    pub fn spectrum(&self, lattice: Arc<Lattice>) -> Result<Arc<StoneSpectrum>> {
        Ok(Arc::new(match self.cap {
            Some(cap) => StoneSpectrum::with_cap(lattice, cap)?,
            None => StoneSpectrum::new(lattice)?,
        }))
    }

    pub fn family(&self, path: &Path) -> Result<SpectralFamily> {
        let file: SpectralFamilyFile = read_json(path)?;
        file.build(self.lattice(&file.lattice, Some(path))?)
    }

    /// An observable table, not yet checked against the axioms.
    pub fn table(&self, path: &Path) -> Result<ObservableFunction> {
        let file: ObservableTableFile = read_json(path)?;
        let spectrum = self.spectrum(self.lattice(&file.lattice, Some(path))?)?;
        file.build(spectrum)
    }

    pub fn matrix(&self, path: &Path) -> Result<CMatrix> {
        let spec: MatrixSpec = read_json(path)?;
        self.resolve_matrix(&spec, Some(path))
    }

    pub fn resolve_matrix(&self, spec: &MatrixSpec, base: Option<&Path>) -> Result<CMatrix> {
        match spec.inline() {
            Some(m) => m,
            None => {
                let MatrixSpec::Path(reference) = spec else {
                    unreachable!("inline handles the rest")
                };
                let path = self
                    .locate(reference, base)
                    .ok_or_else(|| Error::Input(format!("no matrix file `{reference}`")))?;
                let inner: MatrixSpec = read_json(&path)?;
                inner
                    .inline()
                    .unwrap_or_else(|| Err(Error::Input(format!("{} refers to another file", path.display()))))
            }
        }
    }

    /// A list of matrices, each inline or a path.
    pub fn matrices(&self, path: &Path) -> Result<Vec<CMatrix>> {
        let specs: Vec<MatrixSpec> = read_json(path)?;
        specs.iter().map(|s| self.resolve_matrix(s, Some(path))).collect()
    }

    pub fn topology(&self, reference: &str, base: Option<&Path>) -> Result<FiniteTopSpace> {
        if let Some(path) = self.locate(reference, base) {
            return read_json::<TopologyFile>(&path)?.build();
        }
        match reference {
            "sierpinski3" => Ok(corpus::sierpinski3()),
            _ => Err(Error::Input(format!(
                "no topology file or corpus space named `{reference}`"
            ))),
        }
    }

    pub fn point_function(&self, path: &Path, space: &FiniteTopSpace) -> Result<Vec<f64>> {
        read_json::<PointFunctionFile>(path)?.build(space)
    }

    pub fn diagram(&self, reference: &str, tol: &Tolerances) -> Result<ContextDiagram> {
        match self.locate(reference, None) {
            Some(path) => {
                let file: DiagramFile = read_json(&path)?;
                file.build(tol, |m| self.resolve_matrix(m, Some(&path)))
            }
            None if reference == "qubit" => context::qubit_diagram(tol),
            None => Err(Error::Input(format!("no diagram file `{reference}`"))),
        }
    }

    pub fn sections(&self, path: &Path, diagram: &ContextDiagram) -> Result<GlobalSection> {
        let file: SectionFile = read_json(path)?;
        file.build(diagram, |m| self.resolve_matrix(m, Some(path)))
    }

    pub fn presheaf(&self, path: &Path) -> Result<LatticePresheaf> {
        let file: PresheafFile = read_json(path)?;
        file.build(self.lattice(&file.lattice, Some(path))?)
    }
}

/// Writes the built-in corpus and the standard fixtures as JSON files.
pub fn write_corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, json: serde_json::Value| -> Result<()> {
        let path = dir.join(name);
        write_json(&path, &json)?;
        written.push(path);
        Ok(())
    };
    for (name, lattice) in corpus::lattices() {
        put(&format!("{name}.json"), serde_json::to_value(lattice.to_file())?)?;
    }
    put(
        "sierpinski3.json",
        serde_json::to_value(corpus::sierpinski3().to_file())?,
    )?;

    put(
        "mo2_family.json",
        serde_json::json!({"lattice": "mo2", "breakpoints": [[1.0, "a"], [2.0, "1"]]}),
    )?;
    let mo2 = Arc::new(corpus::mo(2));
    let spectrum = Arc::new(StoneSpectrum::new(mo2.clone())?);
    let family = SpectralFamily::new(mo2.clone(), vec![(1.0, mo2.index_of("a")?), (2.0, mo2.one())])?;
    let table = ObservableFunction::from_spectral(spectrum.clone(), &family)?;
    put("mo2_table.json", serde_json::to_value(table.to_file("mo2"))?)?;
    let mut bad = table.to_file("mo2");
    if let Some(v) = bad.values.get_mut("a,1") {
        *v = 3.0;
    }
    put("bad.json", serde_json::to_value(bad)?)?;

    put("pz.json", serde_json::json!([[1.0, 0.0], [0.0, 0.0]]))?;
    put("px.json", serde_json::json!([[0.5, 0.5], [0.5, 0.5]]))?;
    put("diag12.json", serde_json::json!([[1.0, 0.0], [0.0, 2.0]]))?;
    put("az_gens.json", serde_json::json!(["pz.json"]))?;
    put(
        "qubit_diagram.json",
        serde_json::json!({"ambient_dim": 2, "contexts": {"Az": ["pz.json"], "Ax": ["px.json"]}}),
    )?;
    let tol = Tolerances::default();
    let diagram = context::qubit_diagram(&tol)?;
    let section = context::non_operator_section(&diagram)?;
    put("qubit_sections.json", serde_json::to_value(section.to_file(&diagram))?)?;

    put(
        "mo2_presheaf.json",
        serde_json::json!({"lattice": "mo2", "spectral": [1.0, 2.0]}),
    )?;
    put(
        "id_fn.json",
        serde_json::json!({"values": {"1": 1.0, "2": 2.0, "3": 3.0}}),
    )?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_round_trip() {
        let dir = std::env::temp_dir().join(format!("qobs-corpus-{}", std::process::id()));
        write_corpus(&dir).unwrap();
        let loader = Loader::default().with_corpus_dir(Some(dir.clone()));
        let from_file = loader.lattice("mo2", None).unwrap();
        assert_eq!(*from_file, corpus::mo(2));
        let family = loader.family(&dir.join("mo2_family.json")).unwrap();
        assert_eq!(family.spectrum(), vec![1.0, 2.0]);
        let table = loader.table(&dir.join("mo2_table.json")).unwrap();
        assert!(table.verify().is_ok());
        let bad = loader.table(&dir.join("bad.json")).unwrap();
        assert!(bad.verify().is_err());
        let tol = Tolerances::default();
        let diagram = loader
            .diagram(dir.join("qubit_diagram.json").to_str().unwrap(), &tol)
            .unwrap();
        assert_eq!(diagram.domain().len(), 5);
        let sections = loader.sections(&dir.join("qubit_sections.json"), &diagram).unwrap();
        assert!(context::is_global_section(&sections, &diagram).unwrap().holds());
        let presheaf = loader.presheaf(&dir.join("mo2_presheaf.json")).unwrap();
        assert!(presheaf.check_presheaf().holds());
        let space = loader.topology("sierpinski3", None).unwrap();
        let f = loader.point_function(&dir.join("id_fn.json"), &space).unwrap();
        assert_eq!(f, vec![1.0, 2.0, 3.0]);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn builtin_names_resolve_without_a_corpus() {
        let loader = Loader::default();
        assert_eq!(loader.lattice("bool3", None).unwrap().len(), 8);
        assert!(loader.lattice("nonexistent", None).is_err());
        assert!(loader.topology("sierpinski3", None).is_ok());
    }
}
