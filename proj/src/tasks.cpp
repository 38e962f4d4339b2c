#include "tenseg/tasks.hpp"

#include "tenseg/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace tenseg {

void TaskParams::validate() const {
    if (!(episode_seconds > 0.0))
        throw std::invalid_argument("TaskParams: episode_seconds must be > 0");
    if (!(yaw_limit > 0.0))
        throw std::invalid_argument("TaskParams: yaw_limit must be > 0");
    if (!(yaw_check_interval > 0.0))
        throw std::invalid_argument("TaskParams: yaw_check_interval must be > 0");
}

TaskContext::TaskContext(Variant variant, const SimParams& sim, const TaskParams& task,
                         int damaged_spring)
    : variant_(variant), sim_(sim), task_(task) {
    task_.validate();
    build_ = build_tr6(variant, sim_, damaged_spring);
}

namespace {

struct EpisodeRun {
    EpisodeResult result;
    TensegrityState final_state;
};

EpisodeRun run_episode(const Topology& topo, const TensegrityState& rest,
                       const SimParams& sim, const TaskParams& task,
                       const Policy& policy, std::uint64_t seed, bool yaw_abort,
                       std::ostream* dump) {
    policy.validate();
    TensegrityState state = rest;
    if (task.randomize_motor_phase) {
        Rng rng(seed);
        for (auto& phase : state.motor_phases)
            phase = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }

    const std::array<double, 3> commands = policy.commands();
    const TensegrityState initial = state;
    const Eigen::Vector2d start = initial.centroid().head<2>();

    const long steps_per_check =
        std::max(1L, std::lround(task.yaw_check_interval / sim.dt));
    const long total_steps = std::lround(task.episode_seconds / sim.dt);

    EpisodeRun run;
    run.result.marker_trace.push_back(marker_heights(topo, state));
    if (dump) {
        write_trajectory_header(*dump);
        write_trajectory_record(*dump, state, 0.0);
    }

    double yaw = 0.0;
    long done = 0;
    try {
        while (done < total_steps) {
            const long burst = std::min(steps_per_check, total_steps - done);
            for (long k = 0; k < burst; ++k)
                state = step(topo, state, commands, sim);
            done += burst;
            yaw = measure_yaw(initial, state);
            run.result.marker_trace.push_back(marker_heights(topo, state));
            if (dump)
                write_trajectory_record(*dump, state, yaw);
            if (yaw_abort && std::abs(yaw) > task.yaw_limit) {
                run.result.aborted_by_yaw = true;
                break;
            }
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("episode failed at chi=(") +
                                 std::to_string(policy.chi[0]) + "," +
                                 std::to_string(policy.chi[1]) + "," +
                                 std::to_string(policy.chi[2]) + "): " + e.what());
    }

    const Eigen::Vector2d end = state.centroid().head<2>();
    run.result.distance_cm = (end - start).norm() * 100.0;
    run.result.performance = run.result.distance_cm / task.episode_seconds;
    run.result.duration_simulated = double(done) * sim.dt;
    run.result.yaw_final = yaw;
    run.final_state = state;
    return run;
}

} // namespace

EpisodeResult TaskContext::evaluate(const Policy& policy, std::uint64_t seed,
                                    std::ostream* trajectory_dump) const {
    return run_episode(build_.topology, build_.state, sim_, task_, policy, seed,
                       /*yaw_abort=*/true, trajectory_dump)
        .result;
}

EpisodeResult TaskContext::evaluate_from(const TensegrityState& start,
                                         const Policy& policy, std::uint64_t seed,
                                         std::ostream* trajectory_dump) const {
    return run_episode(build_.topology, start, sim_, task_, policy, seed,
                       /*yaw_abort=*/true, trajectory_dump)
        .result;
}

std::vector<double> TaskContext::random_gait_amplitudes(int n_gaits,
                                                        std::uint64_t seed) const {
    if (n_gaits < 1)
        throw std::invalid_argument("random_gait_amplitudes: n_gaits must be >= 1");
    std::vector<double> amplitudes;
    amplitudes.reserve(n_gaits);
    Rng rng(seed);
    for (int g = 0; g < n_gaits; ++g) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        const double c = rng.uniform();
        const Policy policy(a, b, c);
        const EpisodeRun run =
            run_episode(build_.topology, build_.state, sim_, task_, policy,
                        Rng::derive(seed, std::uint64_t(g)),
                        task_.amplitude_yaw_abort, nullptr);
        // max-minus-min of the marker-height excursions from the rest pose
        // (markers rest at unequal heights, so raw heights would mostly
        // measure the static spread; a motionless robot must score ~0)
        const auto& trace = run.result.marker_trace;
        const std::array<double, 4> rest = trace.front();
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& sample : trace)
            for (int k = 0; k < 4; ++k) {
                lo = std::min(lo, sample[k] - rest[k]);
                hi = std::max(hi, sample[k] - rest[k]);
            }
        amplitudes.push_back(hi - lo);
    }
    return amplitudes;
}

EpisodeResult evaluate(const Policy& policy, Variant variant, const SimParams& sim,
                       const TaskParams& task, std::uint64_t seed, int damaged_spring) {
    return TaskContext(variant, sim, task, damaged_spring).evaluate(policy, seed);
}

} // namespace tenseg
