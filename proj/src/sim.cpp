#include "tenseg/sim.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tenseg {

std::string variant_name(Variant v) {
    switch (v) {
    case Variant::intact:
        return "intact";
    case Variant::damaged:
        return "damaged";
    case Variant::rigid:
        return "rigid";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "intact")
        return Variant::intact;
    if (name == "damaged")
        return Variant::damaged;
    if (name == "rigid")
        return Variant::rigid;
    throw std::invalid_argument("unknown variant: " + name);
}

void SimParams::validate() const {
    if (!(dt > 0.0))
        throw std::invalid_argument("SimParams: dt must be > 0");
    for (double s : {ground_stiffness, ground_damping, spring_stiffness,
                     structural_damping, relaxation_drag})
        if (!(s >= 0.0))
            throw std::invalid_argument("SimParams: stiffness/damping must be >= 0");
    if (!(strut_length > 0.0) || !(total_mass > 0.0))
        throw std::invalid_argument("SimParams: strut_length and total_mass must be > 0");
    if (!(spring_rest_length >= 0.0))
        throw std::invalid_argument("SimParams: spring_rest_length must be >= 0");
}

double spring_tension(double stiffness, double rest_length, double length) {
    return length > rest_length ? stiffness * (length - rest_length) : 0.0;
}

int Topology::spring_degree(int node) const {
    int d = 0;
    for (const auto& [i, j] : springs)
        d += (i == node) + (j == node);
    return d;
}

Vec3 TensegrityState::centroid() const {
    Vec3 c = Vec3::Zero();
    for (const auto& p : positions)
        c += p;
    return c / 12.0;
}

double TensegrityState::kinetic_energy(const Topology& topo) const {
    double e = 0.0;
    for (int i = 0; i < 12; ++i)
        e += 0.5 * topo.node_mass[i] * velocities[i].squaredNorm();
    return e;
}

double TensegrityState::max_node_speed() const {
    double s = 0.0;
    for (const auto& v : velocities)
        s = std::max(s, v.norm());
    return s;
}

namespace {

// Expanded-octahedron node layout: strut s owns nodes 2s and 2s+1.
// Struts 0,1 run along x (offset +-b in z), 2,3 along y (offset +-b in x),
// 4,5 along z (offset +-b in y). b = a/2 is the prestress equilibrium of
// the 24-tendon network for identical springs.
std::array<Vec3, 12> reference_layout(double strut_length) {
    const double a = strut_length / 2.0;
    const double b = a / 2.0;
    return {Vec3(-a, 0, b),  Vec3(a, 0, b),   // strut 0
            Vec3(-a, 0, -b), Vec3(a, 0, -b),  // strut 1
            Vec3(b, -a, 0),  Vec3(b, a, 0),   // strut 2
            Vec3(-b, -a, 0), Vec3(-b, a, 0),  // strut 3
            Vec3(0, b, -a),  Vec3(0, b, a),   // strut 4
            Vec3(0, -b, -a), Vec3(0, -b, a)}; // strut 5
}

// 24 tendons, four per strut end, joining struts of different axes only.
constexpr std::array<std::pair<int, int>, 24> kTendons{{
    {0, 6},  {0, 7},  {0, 9},  {0, 11}, // strut 0, left end
    {1, 4},  {1, 5},  {1, 9},  {1, 11}, // strut 0, right end
    {2, 6},  {2, 7},  {2, 8},  {2, 10},
    {3, 4},  {3, 5},  {3, 8},  {3, 10},
    {4, 10}, {4, 11}, {5, 8},  {5, 9},
    {6, 10}, {6, 11}, {7, 8},  {7, 9},
}};

struct Forces {
    std::array<Vec3, 12> f;
    std::array<double, 12> normal{}; // ground normal force, for friction
    std::array<double, 3> new_phase;
};

Forces accumulate_forces(const Topology& topo, const TensegrityState& state,
                         const std::array<double, 3>& commands,
                         const SimParams& params, double extra_drag) {
    Forces out;
    for (int i = 0; i < 12; ++i)
        out.f[i] = Vec3(0, 0, -topo.node_mass[i] * params.gravity);

    // hooked helical springs: pull when stretched, go slack when short
    for (const auto& [i, j] : topo.springs) {
        const Vec3 d = state.positions[j] - state.positions[i];
        const double len = d.norm();
        if (len <= 1e-12)
            continue;
        const Vec3 u = d / len;
        double axial =
            spring_tension(params.spring_stiffness, params.spring_rest_length, len);
        axial += params.structural_damping *
                 (state.velocities[j] - state.velocities[i]).dot(u);
        out.f[i] += axial * u;
        out.f[j] -= axial * u;
    }

    // rigid links carry no elastic force (the projection enforces length)
    // but share the same axial dashpot
    for (const auto& [i, j] : topo.rigid_links) {
        const Vec3 d = state.positions[j] - state.positions[i];
        const double len = d.norm();
        if (len <= 1e-12)
            continue;
        const Vec3 u = d / len;
        const double axial = params.structural_damping *
                             (state.velocities[j] - state.velocities[i]).dot(u);
        out.f[i] += axial * u;
        out.f[j] -= axial * u;
    }

    for (int m = 0; m < 3; ++m) {
        const MotorMount& mount = topo.motors[m];
        const auto [ni, nj] = topo.struts[mount.strut];
        const Vec3 axis = (state.positions[nj] - state.positions[ni]).normalized();
        const MotorForceResult r =
            motor_force(mount, axis, commands[m], state.motor_phases[m], params.dt);
        out.f[ni] += (1.0 - mount.offset) * r.force;
        out.f[nj] += mount.offset * r.force;
        out.new_phase[m] = r.new_phase;
    }

    if (params.ground_enabled) {
        for (int i = 0; i < 12; ++i) {
            const double z = state.positions[i].z();
            if (z >= 0.0)
                continue;
            const double depth = -z;
            const double vz = state.velocities[i].z();
            const double normal =
                std::max(0.0, params.ground_stiffness * depth - params.ground_damping * vz);
            out.f[i].z() += normal;
            out.normal[i] = normal; // friction is applied as an impulse in step
        }
    }

    if (extra_drag > 0.0)
        for (int i = 0; i < 12; ++i)
            out.f[i] -= extra_drag * state.velocities[i];

    return out;
}

// Rigid members (struts, and every link of the rigid replica) are handled as
// hard constraints: an exact mass-weighted velocity projection each step plus
// a Gauss-Newton position cleanup, both via the normal matrix J M^-1 J^T.
// Nothing rewrites velocities from positions afterwards, which would
// re-inject motion that friction or damping already removed.

struct RigidPair {
    int i, j;
    double target;
};

std::vector<RigidPair> gather_rigid_pairs(const Topology& topo) {
    std::vector<RigidPair> cons;
    cons.reserve(6 + topo.rigid_links.size());
    for (const auto& [i, j] : topo.struts)
        cons.push_back({i, j, topo.strut_length});
    for (std::size_t k = 0; k < topo.rigid_links.size(); ++k)
        cons.push_back({topo.rigid_links[k].first, topo.rigid_links[k].second,
                        topo.rigid_link_lengths[k]});
    return cons;
}

void fill_directions(const std::vector<RigidPair>& cons,
                     const std::array<Vec3, 12>& pos, std::vector<Vec3>& u) {
    for (std::size_t a = 0; a < cons.size(); ++a) {
        const Vec3 d = pos[cons[a].j] - pos[cons[a].i];
        const double len = d.norm();
        u[a] = len > 1e-12 ? Vec3(d / len) : Vec3::UnitZ();
    }
}

void fill_normal_matrix(const Topology& topo, const std::vector<RigidPair>& cons,
                        const std::vector<Vec3>& u, Eigen::MatrixXd& A) {
    const int m = int(cons.size());
    A.setZero();
    for (int a = 0; a < m; ++a) {
        const double wi = 1.0 / topo.node_mass[cons[a].i];
        const double wj = 1.0 / topo.node_mass[cons[a].j];
        A(a, a) = wi + wj;
        for (int b = a + 1; b < m; ++b) {
            double s = 0.0;
            if (cons[a].i == cons[b].i)
                s += u[a].dot(u[b]) / topo.node_mass[cons[a].i];
            if (cons[a].i == cons[b].j)
                s -= u[a].dot(u[b]) / topo.node_mass[cons[a].i];
            if (cons[a].j == cons[b].j)
                s += u[a].dot(u[b]) / topo.node_mass[cons[a].j];
            if (cons[a].j == cons[b].i)
                s -= u[a].dot(u[b]) / topo.node_mass[cons[a].j];
            A(a, b) = A(b, a) = s;
        }
    }
}

// removes the relative axial velocity along every rigid member in one exact
// solve (the constraint is linear in velocities); mass-weighted, hence
// dissipative and momentum-preserving
void project_velocities(const Topology& topo, const std::array<Vec3, 12>& pos,
                        std::array<Vec3, 12>& vel) {
    const std::vector<RigidPair> cons = gather_rigid_pairs(topo);
    const int m = int(cons.size());
    std::vector<Vec3> u(m);
    fill_directions(cons, pos, u);

    Eigen::VectorXd rhs(m);
    double worst = 0.0;
    for (int a = 0; a < m; ++a) {
        rhs(a) = (vel[cons[a].j] - vel[cons[a].i]).dot(u[a]);
        worst = std::max(worst, std::abs(rhs(a)));
    }
    if (worst < 1e-14)
        return;

    Eigen::MatrixXd A(m, m);
    fill_normal_matrix(topo, cons, u, A);
    const Eigen::VectorXd lambda = A.ldlt().solve(rhs);
    for (int a = 0; a < m; ++a) {
        const Vec3 corr = lambda(a) * u[a];
        vel[cons[a].i] += corr / topo.node_mass[cons[a].i];
        vel[cons[a].j] -= corr / topo.node_mass[cons[a].j];
    }
}

// Gauss-Newton distance projection: 2-3 iterations even for the rigid
// replica's 30 coupled constraints, where Gauss-Seidel sweeps crawl near
// impact transients. A loose hard ceiling sits behind the nominal tolerance
// because round-off bounds the reachable residual.
void project_constraints(const Topology& topo, std::array<Vec3, 12>& pos) {
    constexpr double kRelTol = 1e-9;
    constexpr double kHardTol = 1e-6;
    constexpr int kMaxIters = 50;

    const std::vector<RigidPair> cons = gather_rigid_pairs(topo);
    const int m = int(cons.size());
    std::vector<Vec3> u(m);
    Eigen::VectorXd err(m);
    Eigen::MatrixXd A(m, m);
    double worst = 0.0;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        fill_directions(cons, pos, u);
        worst = 0.0;
        for (int a = 0; a < m; ++a) {
            err(a) = (pos[cons[a].j] - pos[cons[a].i]).norm() - cons[a].target;
            worst = std::max(worst, std::abs(err(a)) / cons[a].target);
        }
        if (worst < kRelTol)
            return;

        fill_normal_matrix(topo, cons, u, A);
        const Eigen::VectorXd lambda = A.ldlt().solve(err);
        for (int a = 0; a < m; ++a) {
            const Vec3 corr = lambda(a) * u[a];
            pos[cons[a].i] += corr / topo.node_mass[cons[a].i];
            pos[cons[a].j] -= corr / topo.node_mass[cons[a].j];
        }
    }
    if (worst > kHardTol)
        throw std::runtime_error(
            "project_constraints: rigid-length projection did not converge");
}

void check_finite(const TensegrityState& s) {
    for (const auto& p : s.positions)
        if (!p.allFinite())
            throw std::runtime_error(
                "step: non-finite state detected (unstable SimParams?)");
}

} // namespace

MotorForceResult motor_force(const MotorMount& mount, const Vec3& strut_axis,
                             double command, double phase, double dt) {
    if (!(std::abs(command) <= 1.0))
        throw std::invalid_argument("motor_force: |command| must be <= 1");
    const double omega = command * mount.omega_max;

    MotorForceResult r;
    r.new_phase = std::remainder(phase + omega * dt, 2.0 * M_PI);
    const double mag = mount.mere * omega * omega;
    if (mag == 0.0) {
        r.force = Vec3::Zero();
        r.new_phase = phase;
        return r;
    }

    // rotation plane basis: e1 is the most-vertical direction perpendicular
    // to the strut, e2 completes it; near-vertical struts fall back to x
    Vec3 e1 = Vec3::UnitZ() - strut_axis.z() * strut_axis;
    if (e1.norm() < 0.05)
        e1 = Vec3::UnitX() - strut_axis.x() * strut_axis;
    e1.normalize();
    const Vec3 e2 = strut_axis.cross(e1);

    r.force = mag * (std::cos(phase) * e1 + std::sin(phase) * e2);
    return r;
}

TensegrityState detail::step_with_drag(const Topology& topo,
                                       const TensegrityState& state,
                                       const std::array<double, 3>& commands,
                                       const SimParams& params, double extra_drag) {
    const Forces forces = accumulate_forces(topo, state, commands, params, extra_drag);

    TensegrityState next = state;
    next.motor_phases = forces.new_phase;
    next.time = state.time + params.dt;

    // semi-implicit Euler velocity update from the explicit forces
    for (int i = 0; i < 12; ++i)
        next.velocities[i] += (params.dt / topo.node_mass[i]) * forces.f[i];

    // the struts' axial reactions must balance the tendon pull before
    // friction is applied, or friction acts on the unbalanced force kick
    // F*dt/m instead of the physical sliding velocity
    project_velocities(topo, next.positions, next.velocities);

    // Coulomb friction as a velocity impulse clamped to the friction cone
    // (mu*N*dt of tangential momentum per step); saturation at the full
    // tangential speed gives true stiction instead of perpetual creep
    for (int i = 0; i < 12; ++i) {
        if (forces.normal[i] <= 0.0)
            continue;
        const Eigen::Vector2d vt = next.velocities[i].head<2>();
        const double speed = vt.norm();
        if (speed <= 0.0)
            continue;
        const double dv_max = params.friction_mu * forces.normal[i] * params.dt /
                              topo.node_mass[i];
        next.velocities[i].head<2>() = vt * (1.0 - std::min(speed, dv_max) / speed);
    }

    // redistribute the small axial component the friction impulses introduced
    project_velocities(topo, next.positions, next.velocities);

    for (int i = 0; i < 12; ++i)
        next.positions[i] += params.dt * next.velocities[i];

    // position-level cleanup of the residual rigid-length drift
    project_constraints(topo, next.positions);

    check_finite(next);
    return next;
}

TensegrityState step(const Topology& topo, const TensegrityState& state,
                     const std::array<double, 3>& commands, const SimParams& params) {
    return detail::step_with_drag(topo, state, commands, params, 0.0);
}

BuildResult build_tr6(Variant variant, const SimParams& params, int damaged_spring) {
    params.validate();
    if (variant == Variant::damaged && (damaged_spring < 0 || damaged_spring >= 24))
        throw std::invalid_argument("build_tr6: damaged spring index must lie in [0,24)");

    BuildResult out;
    Topology& topo = out.topology;
    topo.strut_length = params.strut_length;
    for (int s = 0; s < 6; ++s)
        topo.struts[s] = {2 * s, 2 * s + 1};

    const std::array<Vec3, 12> layout = reference_layout(params.strut_length);

    if (variant == Variant::rigid) {
        topo.rigid_links.assign(kTendons.begin(), kTendons.end());
        for (const auto& [i, j] : topo.rigid_links)
            topo.rigid_link_lengths.push_back((layout[j] - layout[i]).norm());
    } else {
        topo.springs.assign(kTendons.begin(), kTendons.end());
        if (variant == Variant::damaged)
            topo.springs.erase(topo.springs.begin() + damaged_spring);
    }

    // one motor per orthogonal strut pair, mounted mid-strut
    for (int m = 0; m < 3; ++m)
        topo.motors[m] = MotorMount{2 * m, 0.5, params.motor_mere, params.motor_omega_max};

    topo.node_mass.fill(params.total_mass / 12.0);
    for (const auto& mount : topo.motors) {
        topo.node_mass[topo.struts[mount.strut].first] += params.motor_node_extra_mass;
        topo.node_mass[topo.struts[mount.strut].second] += params.motor_node_extra_mass;
    }

    // rest the tendon triangle {1,5,9} (outward normal ~(1,1,1)) on the ground
    const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(
        Vec3(1, 1, 1).normalized(), Vec3(0, 0, -1));
    TensegrityState& st = out.state;
    double min_z = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 12; ++i) {
        st.positions[i] = q * layout[i];
        st.velocities[i] = Vec3::Zero();
        min_z = std::min(min_z, st.positions[i].z());
    }
    for (auto& p : st.positions)
        p.z() += 5e-4 - min_z; // small clearance, then settle under gravity

    // dynamic relaxation: damped, motor-free settling until motion stops
    constexpr std::array<double, 3> no_commands{0.0, 0.0, 0.0};
    constexpr long kMaxSteps = 1000000;
    constexpr int kCheckEvery = 100;
    int calm_checks = 0;
    long steps = 0;
    while (steps < kMaxSteps) {
        for (int k = 0; k < kCheckEvery; ++k)
            st = detail::step_with_drag(topo, st, no_commands, params,
                                        params.relaxation_drag);
        steps += kCheckEvery;
        if (st.max_node_speed() < 1e-4 && st.kinetic_energy(topo) < 1e-7)
            ++calm_checks;
        else
            calm_checks = 0;
        if (calm_checks >= 3)
            break;
    }
    if (calm_checks < 3) {
        std::ostringstream msg;
        msg << "build_tr6: dynamic relaxation did not settle within " << kMaxSteps
            << " steps (max node speed " << st.max_node_speed()
            << " m/s); SimParams are likely inconsistent";
        throw std::runtime_error(msg.str());
    }

    for (auto& v : st.velocities)
        v = Vec3::Zero();
    st.motor_phases = {0.0, 0.0, 0.0};
    st.time = 0.0;
    return out;
}

double measure_yaw(const TensegrityState& initial, const TensegrityState& current) {
    Eigen::Vector2d c0 = Eigen::Vector2d::Zero(), c1 = Eigen::Vector2d::Zero();
    for (int i = 0; i < 12; ++i) {
        c0 += initial.positions[i].head<2>();
        c1 += current.positions[i].head<2>();
    }
    c0 /= 12.0;
    c1 /= 12.0;

    // orthogonal Procrustes in the plane: argmax_theta sum y_i . R(theta) x_i
    double dot = 0.0, cross = 0.0;
    for (int i = 0; i < 12; ++i) {
        const Eigen::Vector2d x = initial.positions[i].head<2>() - c0;
        const Eigen::Vector2d y = current.positions[i].head<2>() - c1;
        dot += x.dot(y);
        cross += x.x() * y.y() - x.y() * y.x();
    }
    if (std::hypot(dot, cross) < 1e-18)
        throw std::runtime_error("measure_yaw: degenerate projected geometry");
    return std::atan2(cross, dot);
}

std::array<double, 4> marker_heights(const Topology& topo, const TensegrityState& state) {
    std::array<double, 4> h{};
    for (int k = 0; k < 4; ++k) {
        const int node = topo.marker_nodes[k];
        if (node < 0 || node >= 12)
            throw std::invalid_argument("marker_heights: marker node out of range");
        h[k] = state.positions[node].z();
    }
    return h;
}

double mechanical_energy(const Topology& topo, const TensegrityState& state,
                         const SimParams& params) {
    double e = state.kinetic_energy(topo);
    for (int i = 0; i < 12; ++i) {
        e += topo.node_mass[i] * params.gravity * state.positions[i].z();
        if (params.ground_enabled && state.positions[i].z() < 0.0) {
            const double d = -state.positions[i].z();
            e += 0.5 * params.ground_stiffness * d * d;
        }
    }
    for (const auto& [i, j] : topo.springs) {
        const double ext =
            (state.positions[j] - state.positions[i]).norm() - params.spring_rest_length;
        if (ext > 0.0)
            e += 0.5 * params.spring_stiffness * ext * ext;
    }
    return e;
}

void write_trajectory_header(std::ostream& os) {
    os << "time";
    for (int i = 0; i < 12; ++i)
        os << ",n" << i << "x,n" << i << "y,n" << i << "z";
    os << ",yaw\n";
}

void write_trajectory_record(std::ostream& os, const TensegrityState& state, double yaw) {
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    put(state.time);
    for (const auto& p : state.positions)
        for (int k = 0; k < 3; ++k) {
            os << ',';
            put(p[k]);
        }
    os << ',';
    put(yaw);
    os << '\n';
}

} // namespace tenseg
