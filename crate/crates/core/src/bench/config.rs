use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::{MethodKind, PointStrategy};
use crate::error::{Error, Result};
use crate::geometry::{self, NurbsSurface, Side};
use crate::problems::{CosCos, Cubic, Equation, ExactSolution, LogSource, Problem, Rotated};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeometryId {
    Annulus,
    /// The annulus with a single knot span per direction.
    AnnulusOneSpan,
    Oblique,
    CSurface,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BcMode {
    Dirichlet,
    /// Neumann on the outer arc (`s2 = 1`), Dirichlet elsewhere.
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    Lb,
    Ac,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExactId {
    /// `-(1/2pi) log|x - (1,1,0)|`
    Log,
    /// `cos(x2) cos(x3)`
    CosCos,
    /// `x1^2 - x2^3`
    Cubic,
}

/// Refinement levels of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Levels {
    /// Degrees `pmin..=pmax` on a fixed element mesh.
    Degrees { pmin: usize, pmax: usize },
    /// k-refinement steps `0..=max` of the geometry knots.
    KSteps { max: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: u8,
    pub methods: Vec<MethodKind>,
    pub levels: Levels,
    pub bc: BcMode,
    pub geometry: GeometryId,
    pub problem: ProblemKind,
    pub exact: ExactId,
    pub points: PointStrategy,
    pub elements: (usize, usize),
    pub tol: f64,
    pub max_iter: usize,
    /// Replaces the built-in geometry when set.
    pub geometry_file: Option<PathBuf>,
    /// Record wall time per cell; off keeps output reproducible.
    pub wall_time: bool,
}

const DEFAULT_TOL: f64 = 1e-15;
const DEFAULT_MAX_ITER: usize = 50;

impl ExperimentConfig {
    /// Defaults of the six benchmark experiments.
    pub fn table(id: u8) -> Result<Self> {
        let base = ExperimentConfig {
            id,
            methods: MethodKind::ALL.to_vec(),
            levels: Levels::Degrees { pmin: 2, pmax: 16 },
            bc: BcMode::Dirichlet,
            geometry: GeometryId::Annulus,
            problem: ProblemKind::Lb,
            exact: ExactId::Log,
            points: PointStrategy::Greville,
            elements: (2, 2),
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            geometry_file: None,
            wall_time: false,
        };
        Ok(match id {
            1 => base,
            2 => ExperimentConfig {
                methods: vec![MethodKind::IC],
                geometry: GeometryId::AnnulusOneSpan,
                elements: (1, 1),
                ..base
            },
            3 => ExperimentConfig {
                methods: vec![MethodKind::SG, MethodKind::IG, MethodKind::CC, MethodKind::CG, MethodKind::LG],
                bc: BcMode::Mixed,
                ..base
            },
            4 => ExperimentConfig {
                geometry: GeometryId::CSurface,
                exact: ExactId::CosCos,
                elements: (3, 5),
                ..base
            },
            5 => ExperimentConfig {
                levels: Levels::KSteps { max: 10 },
                ..base
            },
            6 => ExperimentConfig {
                levels: Levels::KSteps { max: 10 },
                problem: ProblemKind::Ac,
                exact: ExactId::Cubic,
                ..base
            },
            _ => return Err(Error::InvalidInput(format!("experiment must be 1..6, got {id}"))),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("no methods selected".into()));
        }
        if let Levels::Degrees { pmin, pmax } = self.levels {
            if pmin < 1 || pmax < pmin {
                return Err(Error::InvalidInput(format!("bad degree range {pmin}..{pmax}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.elements.0 == 0 || self.elements.1 == 0 {
            return Err(Error::InvalidInput("element counts must be positive".into()));
        }
        Ok(())
    }

    pub fn surface(&self) -> Result<NurbsSurface> {
        if let Some(path) = &self.geometry_file {
            return geometry::read_geometry(path);
        }
        Ok(match self.geometry {
            GeometryId::Annulus => geometry::make_quarter_annulus(),
            GeometryId::AnnulusOneSpan => geometry::make_quarter_annulus_one_span(),
            GeometryId::Oblique => {
                geometry::make_oblique_plane(&geometry::make_quarter_annulus(), geometry::oblique_rotation())?
            }
            GeometryId::CSurface => geometry::make_c_surface(),
        })
    }

    pub fn problem(&self) -> Problem {
        let inner: Arc<dyn ExactSolution> = match self.exact {
            ExactId::Log => Arc::new(LogSource::default()),
            ExactId::CosCos => Arc::new(CosCos),
            ExactId::Cubic => Arc::new(Cubic),
        };
        let exact: Arc<dyn ExactSolution> = match (self.geometry, &self.geometry_file) {
            (GeometryId::Oblique, None) => Arc::new(Rotated {
                inner,
                rotation: geometry::oblique_rotation(),
            }),
            _ => inner,
        };
        let equation = match self.problem {
            ProblemKind::Lb => Equation::LaplaceBeltrami,
            ProblemKind::Ac => Equation::AllenCahn,
        };
        let p = Problem::dirichlet(equation, exact);
        match self.bc {
            BcMode::Dirichlet => p,
            BcMode::Mixed => p.with_neumann(Side::V1),
        }
    }
}

macro_rules! keyword_enum {
    ($ty:ident { $($text:literal => $var:ident),* $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok($ty::$var),)*
                    other => Err(Error::Parse(format!("unknown {} '{other}'", stringify!($ty)))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$var => $text,)* })
            }
        }
    };
}

keyword_enum!(BcMode { "dirichlet" => Dirichlet, "mixed" => Mixed });
keyword_enum!(ProblemKind { "lb" => Lb, "ac" => Ac });
keyword_enum!(GeometryId { "annulus" => Annulus, "annulus-one-span" => AnnulusOneSpan, "oblique" => Oblique, "c-surface" => CSurface });
keyword_enum!(ExactId { "log" => Log, "coscos" => CosCos, "cubic" => Cubic });

/// Parses a comma separated method list such as `SG,LG`.
pub fn parse_methods(s: &str) -> Result<Vec<MethodKind>> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let k: MethodKind = part.parse()?;
        if !out.contains(&k) {
            out.push(k);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty method list".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use MethodKind::*;

    #[test]
    fn table_snapshot() {
        let rows: Vec<_> = (1..=6)
            .map(|i| {
                let c = ExperimentConfig::table(i).unwrap();
                (c.geometry, c.exact, c.problem, c.bc, c.levels, c.elements, c.methods)
            })
            .collect();
        let p = Levels::Degrees { pmin: 2, pmax: 16 };
        let k = Levels::KSteps { max: 10 };
        use BcMode::*;
        use ExactId::*;
        use GeometryId::*;
        use ProblemKind::*;
        let all = MethodKind::ALL.to_vec();
        assert_eq!(
            rows,
            vec![
                (Annulus, Log, Lb, Dirichlet, p, (2, 2), all.clone()),
                (AnnulusOneSpan, Log, Lb, Dirichlet, p, (1, 1), vec![IC]),
                (Annulus, Log, Lb, Mixed, p, (2, 2), vec![SG, IG, CC, CG, LG]),
                (CSurface, ExactId::CosCos, Lb, Dirichlet, p, (3, 5), all.clone()),
                (Annulus, Log, Lb, Dirichlet, k, (2, 2), all.clone()),
                (Annulus, ExactId::Cubic, Ac, Dirichlet, k, (2, 2), all),
            ]
        );
        assert_eq!(ExperimentConfig::table(6).unwrap().tol, 1e-15);
        assert!(ExperimentConfig::table(0).is_err());
        assert!(ExperimentConfig::table(7).is_err());
    }

    #[test]
    fn keywords_round_trip() {
        for b in [BcMode::Dirichlet, BcMode::Mixed] {
            assert_eq!(b.to_string().parse::<BcMode>().unwrap(), b);
        }
        for g in [GeometryId::Annulus, GeometryId::AnnulusOneSpan, GeometryId::Oblique, GeometryId::CSurface] {
            assert_eq!(g.to_string().parse::<GeometryId>().unwrap(), g);
        }
        assert_eq!("AC".parse::<ProblemKind>().unwrap(), ProblemKind::Ac);
        assert!("navier".parse::<ProblemKind>().is_err());
    }

    #[test]
    fn method_lists() {
        assert_eq!(parse_methods("SG,lg, CC").unwrap(), vec![SG, LG, CC]);
        assert!(parse_methods("SG,XX").is_err());
        assert!(parse_methods("").is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::table(1).unwrap();
        assert!(c.validate().is_ok());
        c.levels = Levels::Degrees { pmin: 5, pmax: 3 };
        assert!(c.validate().is_err());
        c = ExperimentConfig::table(1).unwrap();
        c.tol = 0.0;
        assert!(c.validate().is_err());
    }
}
