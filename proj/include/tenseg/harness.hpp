#pragma once

#include "tenseg/bo.hpp"
#include "tenseg/profiles.hpp"
#include "tenseg/stats.hpp"
#include "tenseg/tasks.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tenseg {

enum class Treatment { bo_prior, bo_noprior, random_search };

std::string treatment_name(Treatment t);
Treatment treatment_from_name(const std::string& name);

struct ExperimentConfig {
    Variant variant = Variant::intact;
    std::vector<Treatment> treatments{Treatment::bo_prior, Treatment::bo_noprior,
                                      Treatment::random_search};
    int replicates = 20;
    int budget = 30;
    std::uint64_t base_seed = 1;
    int damaged_spring = 0;
    int n_init_random = 10; // random initialization trials for prior-free BO
    double prior_scale = 1.0;
    SimParams sim;
    TaskParams task;
    KernelParams gp;
    AcquisitionParams acquisition;
    std::string output_dir = "out";
    int threads = 0; // 0 = hardware concurrency

    void validate() const;
};

struct ReplicateResult {
    OptimizationTrace trace;
    std::vector<bool> aborted; // per trial, from the episode protocol
};

struct TreatmentResult {
    Treatment treatment = Treatment::random_search;
    std::vector<ReplicateResult> replicates;
    std::vector<double> final_best; // per replicate, error-free replicates only
    StatsSummary summary;
    std::vector<std::string> errors; // "replicate 3: <what>"
};

struct ObservationRecord {
    Treatment treatment = Treatment::random_search;
    int replicate = 0;
    int trial = 0;
    Policy policy;
    double performance = 0.0;
    double best_so_far = 0.0;
    bool aborted = false;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<TreatmentResult> treatments;
    std::vector<ObservationRecord> observations; // all trials, all treatments

    const TreatmentResult& treatment(Treatment t) const;
};

// Runs replicates x budget trials for every configured treatment on one
// robot variant. Replicate r uses seed base_seed + r; replicates run in
// parallel, aggregation is deterministic. A replicate that errors is
// recorded and skipped in the statistics; the rest proceed.
ExperimentResult run_experiment(const ExperimentConfig& config);

// CSV emission (see README for the frozen schemas). Returns written paths.
std::vector<std::string> write_experiment_csvs(const ExperimentResult& result,
                                               const std::string& output_dir);

void write_observations_csv(const std::vector<ObservationRecord>& observations,
                            Variant variant, std::ostream& os);
std::vector<Observation> read_observations_csv(std::istream& is);

// final best performances, one per replicate: header + (replicate, value)
void write_finals_csv(const TreatmentResult& result, std::ostream& os);
std::vector<double> read_finals_csv(std::istream& is);

// the same gait on two variants, same episode seed; used by the
// damage-adaptation analysis
std::pair<EpisodeResult, EpisodeResult> cross_test(const Policy& gait,
                                                   const TaskContext& from_variant,
                                                   const TaskContext& to_variant,
                                                   std::uint64_t seed);

} // namespace tenseg
