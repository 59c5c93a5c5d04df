pub mod coefficients;
pub mod englis;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod invariants;
pub mod kahler;
pub mod oracle;
pub mod polarized;
pub mod quadrature;
pub mod quotient;
pub mod symbol;

pub use coefficients::{CoefficientTable, Provenance};
pub use englis::{EnglisOperators, ExpansionReport, QuadratureConfig};
pub use error::{Error, Result};
pub use experiments::{run, ExperimentConfig, ExperimentKind, ExperimentReport};
pub use fit::{fit_coefficients, FitResult};
pub use kahler::{KahlerChart, MetricAtPoint};
pub use oracle::{EquivariantBasis, ExactNorm, Hlc, Precision, WeightedProjectiveOracle};
pub use polarized::{
    combine, CombineOp, DerivativeRequest, DomainHint, PolarizedScalar, MAX_ORDER,
};
pub use quotient::{CircleAction, HamiltonianCircleModel, QuotientChart};
pub use symbol::{AdmissibleSymbol, SymbolTerm};
