use thiserror::Error;

pub type Result<T> = std::result::Result<T, LayeredError>;

#[derive(Debug, Error)]
pub enum LayeredError {
    #[error("model contract violated: {0}")]
    ModelContract(String),

    #[error("cannot build a frontier from an empty candidate set")]
    EmptyCandidates,

    #[error("prior over an empty frontier")]
    EmptyPrior,

    #[error(
        "frontier maximization mismatch at state {state:?}: frontier max {frontier_max}, \
         exhaustive max {exhaustive_max} from internal profile {witness:?}"
    )]
    FrontierEquivalence {
        state: Vec<usize>,
        frontier_max: f64,
        exhaustive_max: f64,
        witness: Vec<usize>,
    },

    #[error("service preservation violated at layer {layer}, state {state}, internal action {action}: {detail}")]
    PreservationViolated {
        layer: usize,
        state: usize,
        action: usize,
        detail: String,
    },

    #[error(transparent)]
    Mdp(#[from] mdp_core::MdpError),
}
