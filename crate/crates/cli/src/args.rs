use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "onshell",
    version,
    about = "Exact on-shell extension of distributions across the origin"
)]
pub struct Cli {
    #[command(flatten)]
    pub output: Output,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Output {
    /// JSON on standard output (the default).
    #[arg(long, global = true, conflicts_with = "text")]
    pub json: bool,
    /// Human-readable text instead of JSON.
    #[arg(long, global = true)]
    pub text: bool,
}

#[derive(Debug, Args, Clone)]
pub struct Space {
    /// Dimension n of the ambient space.
    #[arg(long)]
    pub dim: usize,
    /// Diagonal metric as a sign string such as `+---`; defaults to
    /// `+` followed by `n-1` minus signs.
    #[arg(long)]
    pub metric: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct Problem {
    #[command(flatten)]
    pub space: Space,
    /// Operator expression, e.g. `x1*d1 + 1` or `box(1)`.
    #[arg(long = "op", required = true, allow_hyphen_values = true)]
    pub ops: Vec<String>,
    /// Degree of divergence r; rational values are floored.
    #[arg(long, allow_hyphen_values = true)]
    pub degree: String,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Residues {
    /// Residue `IDX=JSON` for operator number IDX (0 if omitted); `-` reads
    /// the JSON from standard input.
    #[arg(long = "residue", allow_hyphen_values = true)]
    pub residues: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Matrix of Q restricted to deltas of order <= r.
    Restrict {
        #[command(flatten)]
        problem: Problem,
        /// Delta vector to push through the restriction.
        #[arg(long)]
        vector: Option<String>,
    },
    /// Adjoint of the restriction, with optional pairing checks.
    Adjoint {
        #[command(flatten)]
        problem: Problem,
        /// Vector v of order <= r+q for inner(v, Q w) = inner(Q* v, w).
        #[arg(long)]
        left: Option<String>,
        /// Vector w of order <= r.
        #[arg(long)]
        right: Option<String>,
        /// Polynomial test function (an expression without derivatives).
        #[arg(long, allow_hyphen_values = true)]
        poly: Option<String>,
    },
    /// Normal form and essential order; with two operators also the
    /// commutator.
    Essord {
        #[command(flatten)]
        space: Space,
        #[arg(long = "op", required = true, allow_hyphen_values = true)]
        ops: Vec<String>,
        /// Highest delta order probed when pullbacks are present.
        #[arg(long, default_value_t = 3)]
        probe_depth: u32,
    },
    /// Minimal polynomials of the restriction (when square) and of its Gram
    /// matrix.
    Minpoly {
        #[command(flatten)]
        problem: Problem,
    },
    /// Kernel projection polynomial and projector.
    Projpoly {
        #[command(flatten)]
        problem: Problem,
    },
    /// Kernel basis; with a residue also range membership and the
    /// pseudoinverse correction.
    Kernel {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        residues: Residues,
    },
    /// Whether the residue lies in the range of the restriction.
    ExtendCheck {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        residues: Residues,
    },
    /// On-shell counterterm for one operator or a commuting family.
    Counterterm {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        residues: Residues,
    },
    /// Counterterm clearing the residue of R^(k+1); the residue given is that
    /// of R^k (of R when k = 0).
    OrderRaise {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        residues: Residues,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Casimir hypotheses and correction. Without --op the Lorentz Casimir
    /// is used; otherwise the first --op is C and the rest are generators.
    /// Residue 0 belongs to C, residue k >= 1 to generator k-1 (for Lorentz,
    /// L(mu,nu) with mu<nu in lexicographic order).
    CasimirCheck {
        #[command(flatten)]
        space: Space,
        #[arg(long = "op", allow_hyphen_values = true)]
        ops: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        degree: String,
        /// Word `c:i,j,...` with coefficient c in generators i, j, ...
        #[arg(long = "word", allow_hyphen_values = true)]
        words: Vec<String>,
        #[command(flatten)]
        residues: Residues,
    },
    /// Composite counterterm for P = prod euler(a_j)^N_j. Residue 0 belongs
    /// to P; with --lorentz residue k >= 1 belongs to generator k-1.
    Renorm {
        #[command(flatten)]
        space: Space,
        #[arg(long, allow_hyphen_values = true)]
        degree: String,
        /// Comma-separated `a:N` pairs.
        #[arg(long, allow_hyphen_values = true)]
        degrees: String,
        #[arg(long)]
        lorentz: bool,
        #[command(flatten)]
        residues: Residues,
    },
    /// Whether x.d - a has a unique homogeneous extension of degree r.
    HomogUnique {
        #[arg(long)]
        dim: usize,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        degree: String,
    },
    /// chi of a derivative monomial.
    Chi {
        #[command(flatten)]
        space: Space,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        m2: String,
        /// Comma-separated indices in 0..n-1; empty for the identity.
        #[arg(long, default_value = "")]
        indices: String,
        /// Normalisation constant c as `re,im` or a constant expression.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        c: String,
        /// `projection` or `explicit`.
        #[arg(long, default_value = "projection")]
        route: String,
    },
    /// Compare both chi routes on all monomials up to order k-max and check
    /// covariance under the discrete isometries.
    ChiVerify {
        #[arg(long)]
        dim: usize,
        /// Only this metric; by default both signs are checked.
        #[arg(long)]
        metric: Option<String>,
        /// Comma-separated list of m^2 values.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        m2: String,
        #[arg(long = "k-max", default_value_t = 2)]
        k_max: u32,
    },
    /// Degree bookkeeping.
    Degree {
        #[arg(long)]
        dim: usize,
        /// Delta vector whose exact degree is reported.
        #[arg(long = "residue", allow_hyphen_values = true)]
        residue: Option<String>,
        /// Starting bound: a rational or `-inf`.
        #[arg(long, allow_hyphen_values = true)]
        bound: Option<String>,
        #[arg(long = "op", allow_hyphen_values = true)]
        op: Option<String>,
        /// Derivative multi-index, comma-separated.
        #[arg(long)]
        gamma: Option<String>,
        /// Monomial multi-index, comma-separated.
        #[arg(long)]
        beta: Option<String>,
        /// Order of vanishing of a smooth factor.
        #[arg(long)]
        vanish: Option<u32>,
        /// Second factor `d:m` of a tensor product.
        #[arg(long, allow_hyphen_values = true)]
        tensor: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Restrict { .. } => "restrict",
            Command::Adjoint { .. } => "adjoint",
            Command::Essord { .. } => "essord",
            Command::Minpoly { .. } => "minpoly",
            Command::Projpoly { .. } => "projpoly",
            Command::Kernel { .. } => "kernel",
            Command::ExtendCheck { .. } => "extend-check",
            Command::Counterterm { .. } => "counterterm",
            Command::OrderRaise { .. } => "order-raise",
            Command::CasimirCheck { .. } => "casimir-check",
            Command::Renorm { .. } => "renorm",
            Command::HomogUnique { .. } => "homog-unique",
            Command::Chi { .. } => "chi",
            Command::ChiVerify { .. } => "chi-verify",
            Command::Degree { .. } => "degree",
        }
    }
}
