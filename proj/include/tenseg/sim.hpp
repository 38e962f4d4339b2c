#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tenseg {

using Vec3 = Eigen::Vector3d;

enum class Variant { intact, damaged, rigid };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct SimParams {
    double dt = 2e-4;                  // s; resolves full motor speed at >=25 steps/cycle
    double gravity = 9.81;             // m/s^2
    double ground_stiffness = 4e4;     // N/m penalty spring
    double ground_damping = 30.0;      // N*s/m on normal penetration velocity
    double friction_mu = 0.6;          // Coulomb coefficient
    double structural_damping = 0.25;  // N*s/m axial dashpot per tensile/rigid link
    double spring_stiffness = 120.0;   // N/m
    double spring_rest_length = 0.02;  // m
    double strut_length = 0.094;       // m
    double total_mass = 0.12;          // kg, split equally across the 12 nodes
    double motor_node_extra_mass = 0.005; // kg per motor-strut end node
    double motor_mere = 1e-5;          // kg*m, eccentric mass * radius
    double motor_omega_max = 1200.0;   // rad/s at |command| = 1
    double relaxation_drag = 0.5;      // N*s/m global drag, rest-pose search only
    double penetration_tolerance = 2e-3; // m, contact-model invariant bound
    bool ground_enabled = true;

    void validate() const;
};

struct MotorMount {
    int strut = 0;       // which strut carries the motor
    double offset = 0.5; // mount position along the strut, 0 = first node
    double mere = 1e-5;  // kg*m
    double omega_max = 1200.0;
};

struct Topology {
    std::array<std::pair<int, int>, 6> struts;
    double strut_length = 0.094;
    std::vector<std::pair<int, int>> springs;     // tension-only, up to 24
    std::vector<std::pair<int, int>> rigid_links; // rigid replica: 24 fixed rods
    std::vector<double> rigid_link_lengths;
    std::array<double, 12> node_mass{};
    std::array<MotorMount, 3> motors;
    // motion-capture balls sit on the four highest strut ends of the rest
    // pose, clear of the ground triangle
    std::array<int, 4> marker_nodes{2, 6, 10, 0};

    int spring_degree(int node) const;
};

struct TensegrityState {
    std::array<Vec3, 12> positions;
    std::array<Vec3, 12> velocities;
    std::array<double, 3> motor_phases{0.0, 0.0, 0.0};
    double time = 0.0;

    Vec3 centroid() const;
    double kinetic_energy(const Topology& topo) const;
    double max_node_speed() const;
};

struct BuildResult {
    Topology topology;
    TensegrityState state; // rest pose after dynamic relaxation
};

// Expanded-octahedron six-strut layout (three orthogonal pairs of parallel
// struts), relaxed on the ground until it stops moving. damaged_spring is
// only read for Variant::damaged.
BuildResult build_tr6(Variant variant, const SimParams& params,
                      int damaged_spring = 0);

// hooked helical springs pull when stretched and go slack when short:
// max(0, length - rest_length) * stiffness
double spring_tension(double stiffness, double rest_length, double length);

struct MotorForceResult {
    Vec3 force;
    double new_phase = 0.0;
};

// Eccentric-rotating-mass force: magnitude mere*omega^2, direction rotating
// in the plane perpendicular to the strut axis; the command sign sets the
// rotation sense.
MotorForceResult motor_force(const MotorMount& mount, const Vec3& strut_axis,
                             double command, double phase, double dt);

// One dt of dynamics: gravity, tension-only springs, axial structural
// damping, motor forces, penalty ground normal force plus impulse-clamped
// Coulomb friction; semi-implicit Euler, then rigid-length projection.
TensegrityState step(const Topology& topo, const TensegrityState& state,
                     const std::array<double, 3>& commands,
                     const SimParams& params);

// planar rotation of the best-fit rigid alignment between the two poses,
// ground-projected and centroid-removed; in (-pi, pi]
double measure_yaw(const TensegrityState& initial, const TensegrityState& current);

std::array<double, 4> marker_heights(const Topology& topo,
                                     const TensegrityState& state);

// kinetic + gravitational + spring + ground-penalty energy
double mechanical_energy(const Topology& topo, const TensegrityState& state,
                         const SimParams& params);

// trajectory dump: time, 12 node positions (x,y,z per node), yaw
void write_trajectory_header(std::ostream& os);
void write_trajectory_record(std::ostream& os, const TensegrityState& state,
                             double yaw);

namespace detail {
// step() with an extra per-node viscous drag; used by dynamic relaxation
TensegrityState step_with_drag(const Topology& topo, const TensegrityState& state,
                               const std::array<double, 3>& commands,
                               const SimParams& params, double extra_drag);
} // namespace detail

} // namespace tenseg
