//! Solution groups of linear systems over `Z_p`: classical solvability,
//! hypergraph girth checks, pictures and their reduction, graph covers,
//! monomial operator solutions and facts about the order of `J`.

pub mod error;
pub mod export;
pub mod graph_games;
pub mod hypergraph;
pub mod order_calc;
pub mod pauli_rep;
pub mod picture;
pub mod plane_map;
pub mod zmod_linalg;

pub use error::{Error, Result};

pub use graph_games::gallery::{gallery, GalleryInstance};
pub use graph_games::{incidence_matrix, CoverMap, Graph, ZColouring};
pub use hypergraph::{berge_girth, theorem_hypothesis, Girth, Hypergraph, TheoremHypothesis};
pub use order_calc::{deduce, Closure, FactKind, Order, OrderFact, Subject};
pub use pauli_rep::{verify_operator_solution, MonomialOperator, OperatorAssignment, VerifiedSolution};
pub use picture::{certify, reduce, verify, Certificate, LinearSystem, Picture};
pub use plane_map::CombinatorialMap;
pub use zmod_linalg::{solve_mod, IntMatrix, IntVector, Modulus};
