#include "tenseg/sim.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

using namespace tenseg;

namespace {

double max_strut_length_error(const Topology& topo, const TensegrityState& state) {
    double worst = 0.0;
    for (const auto& [i, j] : topo.struts) {
        const double len = (state.positions[j] - state.positions[i]).norm();
        worst = std::max(worst, std::abs(len - topo.strut_length) / topo.strut_length);
    }
    return worst;
}

double min_node_z(const TensegrityState& state) {
    double z = std::numeric_limits<double>::infinity();
    for (const auto& p : state.positions) z = std::min(z, p.z());
    return z;
}

} // namespace

TEST_CASE("intact build: topology and relaxed rest pose") {
    SimParams params;
    BuildResult built = build_tr6(Variant::intact, params);
    const Topology& topo = built.topology;

    CHECK(topo.springs.size() == 24);
    CHECK(topo.rigid_links.empty());
    CHECK(topo.strut_length == params.strut_length);

    // struts pair up the twelve nodes disjointly
    std::set<int> seen;
    for (int s = 0; s < 6; ++s) {
        auto [i, j] = topo.struts[s];
        CHECK(i == 2 * s);
        CHECK(j == 2 * s + 1);
        seen.insert(i);
        seen.insert(j);
    }
    CHECK(seen.size() == 12);

    // four tendons meet every strut end, none duplicated, none along a strut
    std::set<std::pair<int, int>> unique_springs;
    for (auto [i, j] : topo.springs) {
        CHECK(i != j);
        CHECK(i / 2 != j / 2); // springs join different struts only
        unique_springs.insert({std::min(i, j), std::max(i, j)});
    }
    CHECK(unique_springs.size() == 24);
    for (int n = 0; n < 12; ++n) CHECK(topo.spring_degree(n) == 4);

    // six motor-carrying end nodes weigh extra; total mass adds up
    double total = 0.0;
    for (double m : topo.node_mass) total += m;
    CHECK(total == doctest::Approx(params.total_mass + 6 * params.motor_node_extra_mass)
                       .epsilon(1e-12));
    std::set<int> motor_struts;
    for (const auto& mount : topo.motors) {
        motor_struts.insert(mount.strut);
        CHECK(mount.offset == 0.5);
        const auto [i, j] = topo.struts[mount.strut];
        CHECK(topo.node_mass[i] ==
              doctest::Approx(params.total_mass / 12 + params.motor_node_extra_mass));
        CHECK(topo.node_mass[j] ==
              doctest::Approx(params.total_mass / 12 + params.motor_node_extra_mass));
    }
    CHECK(motor_struts.size() == 3); // one motor per orthogonal strut pair

    // the relaxed pose is still, on the ground, with exact strut lengths
    const TensegrityState& rest = built.state;
    CHECK(rest.max_node_speed() == 0.0);
    CHECK(rest.time == 0.0);
    CHECK(max_strut_length_error(topo, rest) < 1e-7);
    CHECK(min_node_z(rest) > -1e-4);          // penalty ground sag only
    CHECK(min_node_z(rest) < 1e-3);           // actually resting, not floating
    for (double h : marker_heights(topo, rest)) {
        CHECK(std::isfinite(h));
        CHECK(h >= 0.0);
    }
}

TEST_CASE("damaged build removes exactly the requested spring") {
    SimParams params;
    const auto intact = build_tr6(Variant::intact, params).topology.springs;

    for (int k : {0, 7, 23}) {
        BuildResult built = build_tr6(Variant::damaged, params, k);
        const auto& springs = built.topology.springs;
        REQUIRE(springs.size() == 23);
        auto expected = intact;
        expected.erase(expected.begin() + k);
        CHECK(springs == expected);
        CHECK(built.state.max_node_speed() == 0.0);
        CHECK(max_strut_length_error(built.topology, built.state) < 1e-7);
    }

    CHECK_THROWS_AS(build_tr6(Variant::damaged, params, -1), std::invalid_argument);
    CHECK_THROWS_AS(build_tr6(Variant::damaged, params, 24), std::invalid_argument);
}

TEST_CASE("rigid build swaps every tendon for a fixed rod") {
    SimParams params;
    BuildResult built = build_tr6(Variant::rigid, params);
    const Topology& topo = built.topology;

    CHECK(topo.springs.empty());
    REQUIRE(topo.rigid_links.size() == 24);
    REQUIRE(topo.rigid_link_lengths.size() == 24);
    for (double len : topo.rigid_link_lengths) {
        CHECK(len > 0.0);
        CHECK(len < params.strut_length);
    }

    // the same node pairs as the intact tendons
    const auto intact = build_tr6(Variant::intact, params).topology.springs;
    CHECK(topo.rigid_links == intact);

    // rigid links hold their build lengths through the rest pose
    for (std::size_t k = 0; k < topo.rigid_links.size(); ++k) {
        const auto [i, j] = topo.rigid_links[k];
        const double len = (built.state.positions[j] - built.state.positions[i]).norm();
        CHECK(len == doctest::Approx(topo.rigid_link_lengths[k]).epsilon(1e-6));
    }
}

TEST_CASE("spring_tension pulls when stretched, goes slack when short") {
    CHECK(spring_tension(120.0, 0.02, 0.03) == doctest::Approx(1.2));
    CHECK(spring_tension(120.0, 0.02, 0.02) == 0.0);
    CHECK(spring_tension(120.0, 0.02, 0.01) == 0.0);
    CHECK(spring_tension(120.0, 0.02, 0.0) == 0.0);
    CHECK(spring_tension(50.0, 0.0, 0.1) == doctest::Approx(5.0));
}

TEST_CASE("motor_force") {
    MotorMount mount;
    mount.mere = 1.0;
    mount.omega_max = 2.0;
    const Vec3 axis = Vec3::UnitY();
    const double dt = 1e-3;

    SUBCASE("a stopped motor exerts nothing and holds its phase") {
        MotorForceResult r = motor_force(mount, axis, 0.0, 1.234, dt);
        CHECK(r.force == Vec3::Zero());
        CHECK(r.new_phase == 1.234);
    }

    SUBCASE("magnitude scales with the square of the command") {
        const double full = motor_force(mount, axis, 1.0, 0.3, dt).force.norm();
        const double half = motor_force(mount, axis, 0.5, 0.3, dt).force.norm();
        CHECK(full == doctest::Approx(mount.mere * 4.0).epsilon(1e-12));
        CHECK(full / half == doctest::Approx(4.0).epsilon(1e-12));
    }

    SUBCASE("the force rotates in the plane perpendicular to the strut") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int t = 0; t < 50; ++t) {
            const Vec3 a = Vec3(u(rng), u(rng), u(rng)).normalized();
            const double phase = 3.0 * u(rng);
            const Vec3 f = motor_force(mount, a, 0.8, phase, dt).force;
            CHECK(std::abs(f.dot(a)) < 1e-12 * f.norm());
            CHECK(f.norm() == doctest::Approx(mount.mere * 1.6 * 1.6).epsilon(1e-12));
        }
    }

    SUBCASE("phase advances by omega*dt, sign following the command") {
        MotorForceResult fwd = motor_force(mount, axis, 1.0, 0.1, dt);
        CHECK(fwd.new_phase == doctest::Approx(0.1 + 2.0 * dt).epsilon(1e-15));
        MotorForceResult rev = motor_force(mount, axis, -1.0, 0.1, dt);
        CHECK(rev.new_phase == doctest::Approx(0.1 - 2.0 * dt).epsilon(1e-15));
        // the wheel turns the other way but spins just as hard
        CHECK(rev.force.norm() == doctest::Approx(fwd.force.norm()).epsilon(1e-12));
    }

    SUBCASE("phase output stays wrapped to (-pi, pi]") {
        const double big_dt = 2.0; // one step sweeps more than a full turn
        MotorForceResult r = motor_force(mount, axis, 1.0, 3.0, big_dt);
        CHECK(r.new_phase <= M_PI);
        CHECK(r.new_phase > -M_PI);
        CHECK(std::remainder(r.new_phase - (3.0 + 2.0 * big_dt), 2 * M_PI) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("vertical struts use the fallback rotation plane") {
        const MotorForceResult r = motor_force(mount, Vec3::UnitZ(), 1.0, 0.0, dt);
        // phase 0 points the force along e1 = x for a z-aligned strut
        CHECK(r.force.x() == doctest::Approx(mount.mere * 4.0).epsilon(1e-12));
        CHECK(std::abs(r.force.y()) < 1e-12);
        CHECK(std::abs(r.force.z()) < 1e-12);
    }

    SUBCASE("command magnitude is capped at 1") {
        CHECK_THROWS_AS(motor_force(mount, axis, 1.2, 0.0, dt), std::invalid_argument);
        CHECK_THROWS_AS(motor_force(mount, axis, -1.01, 0.0, dt), std::invalid_argument);
        CHECK_THROWS_AS(
            motor_force(mount, axis, std::numeric_limits<double>::quiet_NaN(), 0.0, dt),
            std::invalid_argument);
    }
}

TEST_CASE("free fall matches the ballistic solution to 0.1%") {
    SimParams params;
    params.dt = 2e-5;
    params.ground_enabled = false;
    BuildResult built = build_tr6(Variant::intact, SimParams{});
    built.topology.springs.clear(); // struts only: every node falls identically

    TensegrityState state = built.state;
    for (auto& p : state.positions) p.z() += 0.5;
    const std::array<Vec3, 12> start = state.positions;

    const double t = 0.1;
    const int steps = int(std::lround(t / params.dt));
    for (int s = 0; s < steps; ++s) state = step(built.topology, state, {0, 0, 0}, params);

    const double expected = 0.5 * params.gravity * t * t;
    for (int i = 0; i < 12; ++i) {
        const Vec3 d = state.positions[i] - start[i];
        CHECK(std::abs(d.z() + expected) < 1e-3 * expected);
        CHECK(d.head<2>().norm() < 1e-9); // nothing pushes sideways
        CHECK(state.velocities[i].z() ==
              doctest::Approx(-params.gravity * t).epsilon(1e-9));
    }
}

TEST_CASE("a motionless robot stays put for three simulated seconds") {
    SimParams params;
    BuildResult built = build_tr6(Variant::intact, params);
    TensegrityState state = built.state;
    const Vec3 c0 = state.centroid();

    const int steps = int(std::lround(3.0 / params.dt));
    for (int s = 0; s < steps; ++s) state = step(built.topology, state, {0, 0, 0}, params);

    const Vec3 drift = state.centroid() - c0;
    CHECK(drift.head<2>().norm() < 0.01); // metres: under a centimetre
    CHECK(std::abs(drift.z()) < 0.01);
    CHECK(std::abs(measure_yaw(built.state, state)) < 0.05);
}

TEST_CASE("passive dynamics dissipate energy") {
    SimParams params;
    BuildResult built = build_tr6(Variant::intact, params);
    TensegrityState state = built.state;

    // kick the rest pose with random velocities, then let it ring down
    std::mt19937_64 rng(17);
    std::normal_distribution<double> kick(0.0, 0.05);
    for (auto& v : state.velocities) v = Vec3(kick(rng), kick(rng), kick(rng));

    double prev = mechanical_energy(built.topology, state, params);
    const double initial = prev;
    constexpr int kCheckpoints = 12;
    constexpr int kStepsPerCheckpoint = 250;
    for (int c = 0; c < kCheckpoints; ++c) {
        for (int s = 0; s < kStepsPerCheckpoint; ++s)
            state = step(built.topology, state, {0, 0, 0}, params);
        const double e = mechanical_energy(built.topology, state, params);
        // integrator wobble within a checkpoint window stays far below the
        // damping losses, so the checkpoint sequence must fall monotonically
        CHECK(e <= prev + 1e-7);
        prev = e;
    }
    CHECK(prev < initial); // the kick energy is gone, not rearranged
    CHECK(initial - prev > 0.5 * (0.5 * 0.15 * 3 * 0.05 * 0.05));
}

TEST_CASE("struts never stretch and nothing tunnels through the floor") {
    SimParams params;
    BuildResult built = build_tr6(Variant::intact, params);

    for (const std::array<double, 3> commands :
         {std::array<double, 3>{1.0, 1.0, 1.0}, std::array<double, 3>{0.4, -0.4, 0.2}}) {
        TensegrityState state = built.state;
        double worst_len = 0.0, worst_z = 0.0;
        const int steps = int(std::lround(3.0 / params.dt));
        for (int s = 0; s < steps; ++s) {
            state = step(built.topology, state, commands, params);
            if (s % 10 == 0)
                worst_len = std::max(worst_len,
                                     max_strut_length_error(built.topology, state));
            worst_z = std::min(worst_z, min_node_z(state));
        }
        worst_len = std::max(worst_len, max_strut_length_error(built.topology, state));
        CHECK(worst_len < 1e-6);
        CHECK(worst_z > -params.penetration_tolerance);
        CHECK(state.max_node_speed() < 10.0); // bounded, not blowing up
    }
}

TEST_CASE("stepping is bitwise deterministic") {
    SimParams params;
    BuildResult built = build_tr6(Variant::intact, params);
    const std::array<double, 3> commands{0.9, -0.3, 0.5};

    TensegrityState a = built.state;
    TensegrityState b = built.state;
    for (int s = 0; s < 500; ++s) {
        a = step(built.topology, a, commands, params);
        b = step(built.topology, b, commands, params);
    }
    for (int i = 0; i < 12; ++i) {
        CHECK(a.positions[i] == b.positions[i]);
        CHECK(a.velocities[i] == b.velocities[i]);
    }
    CHECK(a.motor_phases == b.motor_phases);
    CHECK(a.time == b.time);
}

TEST_CASE("dynamics are covariant under a mirror flip") {
    // reflect through the x-z plane; a mirrored robot driven by mirrored
    // commands (reversed spin, reversed phase) must trace the mirrored path
    SimParams params;
    BuildResult built = build_tr6(Variant::intact, params);
    const auto mirror = [](const Vec3& v) { return Vec3(v.x(), -v.y(), v.z()); };

    TensegrityState fwd = built.state;
    TensegrityState mir = built.state;
    for (int i = 0; i < 12; ++i) {
        mir.positions[i] = mirror(fwd.positions[i]);
        mir.velocities[i] = mirror(fwd.velocities[i]);
    }
    fwd.motor_phases = {0.3, -0.8, 1.1};
    for (int m = 0; m < 3; ++m) mir.motor_phases[m] = -fwd.motor_phases[m];

    const std::array<double, 3> commands{0.9, -0.7, 0.4};
    const std::array<double, 3> mirrored_commands{-0.9, 0.7, -0.4};
    for (int s = 0; s < 1000; ++s) {
        fwd = step(built.topology, fwd, commands, params);
        mir = step(built.topology, mir, mirrored_commands, params);
    }

    for (int i = 0; i < 12; ++i) {
        CHECK((mir.positions[i] - mirror(fwd.positions[i])).norm() < 1e-6);
        CHECK((mir.velocities[i] - mirror(fwd.velocities[i])).norm() < 1e-4);
    }
    for (int m = 0; m < 3; ++m)
        CHECK(mir.motor_phases[m] == doctest::Approx(-fwd.motor_phases[m]).epsilon(1e-9));
}

TEST_CASE("measure_yaw") {
    SimParams params;
    BuildResult built = build_tr6(Variant::intact, params);
    const TensegrityState& rest = built.state;

    SUBCASE("zero for the unmoved pose") { CHECK(measure_yaw(rest, rest) == 0.0); }

    SUBCASE("pure translation reads as zero") {
        TensegrityState moved = rest;
        for (auto& p : moved.positions) p += Vec3(0.3, -0.2, 0.1);
        CHECK(std::abs(measure_yaw(rest, moved)) < 1e-9);
    }

    SUBCASE("recovers a rigid rotation about the vertical axis") {
        for (double angle : {0.5, -0.5, 1.4, 3.0}) {
            TensegrityState turned = rest;
            const Eigen::AngleAxisd rot(angle, Vec3::UnitZ());
            const Vec3 c = rest.centroid();
            for (int i = 0; i < 12; ++i)
                turned.positions[i] = c + rot * (rest.positions[i] - c);
            CHECK(measure_yaw(rest, turned) == doctest::Approx(angle).epsilon(1e-9));
        }
    }

    SUBCASE("robust to millimetre marker noise") {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> noise(-1e-3, 1e-3);
        const Eigen::AngleAxisd rot(0.5, Vec3::UnitZ());
        const Vec3 c = rest.centroid();
        for (int trial = 0; trial < 20; ++trial) {
            TensegrityState turned = rest;
            for (int i = 0; i < 12; ++i)
                turned.positions[i] = c + rot * (rest.positions[i] - c) +
                                      Vec3(noise(rng), noise(rng), noise(rng));
            CHECK(measure_yaw(rest, turned) == doctest::Approx(0.5).epsilon(0.05));
        }
    }

    SUBCASE("degenerate geometry is an error, not a junk angle") {
        TensegrityState line = rest;
        for (int i = 0; i < 12; ++i) line.positions[i] = Vec3(0.0, 0.0, 0.01 * i);
        CHECK_THROWS_AS(measure_yaw(line, line), std::runtime_error);
    }
}

TEST_CASE("marker_heights reads the four motion-capture nodes") {
    SimParams params;
    BuildResult built = build_tr6(Variant::intact, params);
    CHECK(built.topology.marker_nodes == std::array<int, 4>{2, 6, 10, 0});

    TensegrityState state = built.state;
    state.positions[6].z() = 0.321;
    const std::array<double, 4> h = marker_heights(built.topology, state);
    CHECK(h[1] == 0.321);
    CHECK(h[0] == state.positions[2].z());
    CHECK(h[3] == state.positions[0].z());

    Topology bad = built.topology;
    bad.marker_nodes[2] = 99;
    CHECK_THROWS_AS(marker_heights(bad, state), std::invalid_argument);
}

TEST_CASE("variant names round-trip") {
    for (Variant v : {Variant::intact, Variant::damaged, Variant::rigid})
        CHECK(variant_from_name(variant_name(v)) == v);
    CHECK_THROWS_AS(variant_from_name("bionic"), std::invalid_argument);
}

TEST_CASE("SimParams validation") {
    SimParams ok;
    CHECK_NOTHROW(ok.validate());

    auto bad = [](auto&& tweak) {
        SimParams p;
        tweak(p);
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    };
    bad([](SimParams& p) { p.dt = 0.0; });
    bad([](SimParams& p) { p.dt = -1e-4; });
    bad([](SimParams& p) { p.ground_stiffness = -1.0; });
    bad([](SimParams& p) { p.structural_damping = -0.1; });
    bad([](SimParams& p) { p.strut_length = 0.0; });
    bad([](SimParams& p) { p.total_mass = 0.0; });
    bad([](SimParams& p) { p.spring_rest_length = -0.01; });
}

TEST_CASE("a corrupted state fails loudly instead of propagating NaNs") {
    SimParams params;
    BuildResult built = build_tr6(Variant::intact, params);
    TensegrityState state = built.state;
    state.positions[0].x() = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(step(built.topology, state, {0, 0, 0}, params),
                    std::runtime_error);
}
