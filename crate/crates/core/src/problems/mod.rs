//! Bundled case studies.

pub mod input_design;
pub mod pole_placement;
pub mod roots;

pub use input_design::{
    build_input_design_lp, build_robust_input_lp, final_state_cost, reachability_matrix,
    relative_cost, sample_input_design_scenarios, InputDesign, InputDesignDecision,
    InputDesignSpec, InputMatrixSampler, InputScenario,
};
pub use pole_placement::{
    build_pole_placement_lp, closed_loop_coeffs, in_conic_sector, pendulum_plant_coeffs,
    pole_placement_postdesign_ok, sample_pendulum_scenarios, ConicSector, ControllerDecision,
    PendulumSampler, PendulumScenario, PolePlacement, PolePlacementSpec, GRAVITY,
};
pub use roots::polynomial_roots;
