#pragma once

// Deterministic large-volume limit: the concentration rate equations of a
// model, a fixed-step RK4 integrator, and a constant-delay integrator
// (method of steps with cubic Hermite dense output) for compartment
// networks with transport lags.

#include <cstddef>
#include <vector>

#include "okin/model.hpp"
#include "okin/trajectory.hpp"

namespace okin::net {
struct CompartmentNetwork;
}

namespace okin::meanfield {

// Right-hand side of the rate equations:
//   D_j(c) = sum_r nu_{jr} a_r prod_{k: nu_{kr}<0} c_k^{-nu_{kr}}
//            + input_j(c_j) - output_j(c_j).
// Elastic channels do not move concentrations and are skipped.
std::vector<double> drift(const NetworkModel& model, const std::vector<double>& c);

struct OdeOptions {
    double t_end = 1.0;
    double dt = 1e-3;            // step size; steps are shortened to land on samples
    int samples = 101;           // uniform grid when `grid` is empty
    std::vector<double> grid;    // explicit sample times
    double blowup_norm = 1e9;    // BlowupError beyond this max-norm
};

struct OdeResult {
    Trajectory trajectory;
    std::size_t negative_clips = 0;  // components clipped to zero after a step
};

// Classical RK4 with fixed step dt (the final step of each sampling interval
// is shortened to hit the sample time exactly).  Negative overshoots are
// clipped to zero and counted; a non-finite or blown-up state raises
// BlowupError.
OdeResult integrate_ode(const NetworkModel& model, const std::vector<double>& c0,
                        const OdeOptions& opts);

struct DdeResult {
    std::vector<Trajectory> per_compartment;  // aligned with network order
    std::size_t negative_clips = 0;
};

// Method-of-steps RK4 for a compartment network whose transport edges carry
// constant delays.  `history` holds one constant pre-start concentration
// vector per compartment (the state on [-tau_max, 0]).  Delayed transport
// terms are evaluated by cubic Hermite interpolation of the integration
// history; zero-delay edges couple through the current RK4 stage values, so
// a zero-delay network integrates exactly like the equivalent merged ODE.
// dt must not exceed the smallest positive delay (StepSizeError).
DdeResult integrate_dde(const net::CompartmentNetwork& network,
                        const std::vector<std::vector<double>>& history,
                        const OdeOptions& opts);

}  // namespace okin::meanfield
