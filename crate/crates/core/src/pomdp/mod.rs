//! Partially observed models: exact state inference, variational free
//! energy, risk plus ambiguity, and the two planners over beliefs.

mod inference;
mod planning;

pub use inference::{
    belief_update, exact_posterior, exact_trajectory_posterior, joint_log_prob, variational_free_energy,
    BeliefState, PosteriorBundle,
};
pub use planning::{
    efe_pomdp, sophisticated_plan_pomdp, standard_plan_pomdp, standard_plan_from_belief, BeliefBranch, BeliefNode,
    PomdpEfe, SophisticatedPomdpPlan,
};
