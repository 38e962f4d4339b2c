#pragma once

#include "tenseg/policy.hpp"
#include "tenseg/sim.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace tenseg {

struct TaskParams {
    double episode_seconds = 3.0;
    double yaw_limit = 1.0;           // rad; exceeding it aborts the episode
    double yaw_check_interval = 0.01; // s, motion-capture-like cadence
    bool randomize_motor_phase = true; // episode seed draws initial ERM phases
    bool amplitude_yaw_abort = false;  // the amplitude study runs the full 3 s

    void validate() const;
};

struct EpisodeResult {
    double performance = 0.0;      // cm/s, distance / episode_seconds
    double distance_cm = 0.0;      // horizontal start-to-end displacement
    double duration_simulated = 0.0;
    bool aborted_by_yaw = false;
    double yaw_final = 0.0;
    std::vector<std::array<double, 4>> marker_trace; // sampled at yaw cadence
};

// Owns a variant's topology and relaxed rest pose so that repeated episodes
// skip the (expensive) dynamic relaxation. Immutable; episodes on the same
// context are independent and may run in parallel.
class TaskContext {
public:
    TaskContext(Variant variant, const SimParams& sim, const TaskParams& task,
                int damaged_spring = 0);

    // Constant motor commands for up to episode_seconds; yaw checked every
    // yaw_check_interval, |yaw| > yaw_limit stops the episode early. The
    // performance divisor stays episode_seconds even on an abort.
    EpisodeResult evaluate(const Policy& policy, std::uint64_t seed,
                           std::ostream* trajectory_dump = nullptr) const;

    // same protocol from an arbitrary start state instead of the cached rest
    // pose; performance is invariant under horizontal translations of it
    EpisodeResult evaluate_from(const TensegrityState& start, const Policy& policy,
                                std::uint64_t seed,
                                std::ostream* trajectory_dump = nullptr) const;

    // one 3 s episode per uniform-random policy; returns max-minus-min
    // marker-height excursion from the rest pose, over time and markers,
    // per gait (a motionless robot scores ~0)
    std::vector<double> random_gait_amplitudes(int n_gaits, std::uint64_t seed) const;

    Variant variant() const { return variant_; }
    const Topology& topology() const { return build_.topology; }
    const TensegrityState& rest_state() const { return build_.state; }
    const SimParams& sim_params() const { return sim_; }
    const TaskParams& task_params() const { return task_; }

private:
    Variant variant_;
    SimParams sim_;
    TaskParams task_;
    BuildResult build_;
};

// convenience wrapper that builds the variant from scratch
EpisodeResult evaluate(const Policy& policy, Variant variant, const SimParams& sim,
                       const TaskParams& task, std::uint64_t seed,
                       int damaged_spring = 0);

} // namespace tenseg
