use alloc::string::String;
use core::fmt;

/// Failures raised by the solvers and designers.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    UnknownNode(u32),
    UnknownMember(u32),
    UnknownMaterial(String),
    UnknownSection(String),
    UnknownCombination(String),
    ZeroLength(u32),
    /// Stiffness matrix lost positive definiteness at this free DOF.
    Unstable {
        node: u32,
        axis: Axis,
    },
    /// Plate system singular at a global plate DOF.
    UnstablePlate {
        dof: usize,
    },
    SingularConstitutive,
    InvalidParameter(String),
    BisectionBracket,
    DesignInfeasible {
        member: u32,
    },
    MeshTooCoarse {
        member: u32,
    },
    InfeasibleStart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownNode(id) => write!(f, "unknown node {id}"),
            Error::UnknownMember(id) => write!(f, "unknown member {id}"),
            Error::UnknownMaterial(n) => write!(f, "unknown material {n:?}"),
            Error::UnknownSection(n) => write!(f, "unknown section {n:?}"),
            Error::UnknownCombination(n) => write!(f, "unknown load combination {n:?}"),
            Error::ZeroLength(id) => write!(f, "member {id} has zero length"),
            Error::Unstable { node, axis } => {
                write!(f, "mechanism / unstable structure: near-zero pivot at node {node} {axis}")
            }
            Error::UnstablePlate { dof } => write!(f, "unstable plate: near-zero pivot at dof {dof}"),
            Error::SingularConstitutive => f.write_str("singular constitutive matrix (nu = 0.5 in plane strain)"),
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::BisectionBracket => f.write_str("volume constraint cannot be bracketed by the multiplier search"),
            Error::DesignInfeasible { member } => {
                write!(f, "member {member}: no section in the library satisfies the checks")
            }
            Error::MeshTooCoarse { member } => {
                write!(f, "member {member}: weld footprint contains no mesh nodes, refine the plate mesh")
            }
            Error::InfeasibleStart => f.write_str("size optimization start point violates the constraints"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
