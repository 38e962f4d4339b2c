#include "tenseg/harness.hpp"

#include "tenseg/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tenseg {

namespace {

// shortest round-trip-exact decimal form; keeps CSV output byte-stable
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

constexpr const char* kTrialHeader =
    "replicate,trial,chi1,chi2,chi3,performance,best_so_far,aborted";
constexpr const char* kFinalsHeader = "replicate,final_best";

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("bad ") + what + " field: '" + s + "'");
    }
}

void write_trial_rows(std::ostream& os, const ReplicateResult& rep, int replicate) {
    const auto& trials = rep.trace.trials;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const TrialRecord& t = trials[i];
        bool aborted = i < rep.aborted.size() && rep.aborted[i];
        os << replicate << ',' << i << ',' << fmt(t.policy.chi[0]) << ','
           << fmt(t.policy.chi[1]) << ',' << fmt(t.policy.chi[2]) << ','
           << fmt(t.performance) << ',' << fmt(t.best_so_far) << ','
           << (aborted ? 1 : 0) << '\n';
    }
}

ReplicateResult run_one_replicate(Treatment treatment, const ExperimentConfig& config,
                                  const TaskContext& context, const PriorSpec& prior,
                                  std::uint64_t seed) {
    ReplicateResult result;
    int trial = 0;
    Evaluator evaluate = [&](const Policy& policy) {
        // each episode gets its own derived seed so motor-phase randomization
        // differs across trials but replays exactly for a fixed config
        EpisodeResult ep = context.evaluate(policy, Rng::derive(seed, trial));
        ++trial;
        result.aborted.push_back(ep.aborted_by_yaw);
        return ep.performance;
    };
    switch (treatment) {
    case Treatment::bo_prior:
        result.trace = run_bo(evaluate, config.budget, &prior, 0, seed, config.gp,
                              config.acquisition);
        break;
    case Treatment::bo_noprior:
        result.trace = run_bo(evaluate, config.budget, nullptr, config.n_init_random,
                              seed, config.gp, config.acquisition);
        break;
    case Treatment::random_search:
        result.trace = run_random_search(evaluate, config.budget, seed);
        break;
    }
    return result;
}

} // namespace

std::string treatment_name(Treatment t) {
    switch (t) {
    case Treatment::bo_prior: return "bo_prior";
    case Treatment::bo_noprior: return "bo_noprior";
    case Treatment::random_search: return "random";
    }
    throw std::logic_error("unknown treatment");
}

Treatment treatment_from_name(const std::string& name) {
    if (name == "bo_prior") return Treatment::bo_prior;
    if (name == "bo_noprior") return Treatment::bo_noprior;
    if (name == "random") return Treatment::random_search;
    throw std::invalid_argument("unknown treatment '" + name +
                                "' (expected bo_prior, bo_noprior, or random)");
}

void ExperimentConfig::validate() const {
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (treatments.empty()) throw std::invalid_argument("at least one treatment");
    for (std::size_t i = 0; i < treatments.size(); ++i)
        for (std::size_t j = i + 1; j < treatments.size(); ++j)
            if (treatments[i] == treatments[j])
                throw std::invalid_argument("duplicate treatment " +
                                            treatment_name(treatments[i]));
    if (n_init_random < 0 || n_init_random > budget)
        throw std::invalid_argument("n_init_random must be in [0, budget]");
    if (!(prior_scale > 0.0) || !std::isfinite(prior_scale))
        throw std::invalid_argument("prior_scale must be positive and finite");
    if (damaged_spring < 0 || damaged_spring >= 24)
        throw std::invalid_argument("damaged_spring must lie in [0,24)");
    if (threads < 0) throw std::invalid_argument("threads must be >= 0");
    if (output_dir.empty()) throw std::invalid_argument("output_dir must be set");
    sim.validate();
    task.validate();
    gp.validate();
    acquisition.validate();
}

const TreatmentResult& ExperimentResult::treatment(Treatment t) const {
    for (const auto& tr : treatments)
        if (tr.treatment == t) return tr;
    throw std::out_of_range("treatment " + treatment_name(t) + " not in result");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();

    ExperimentResult result;
    result.config = config;

    const TaskContext context(config.variant, config.sim, config.task,
                              config.damaged_spring);
    const PriorSpec prior = PriorSpec::hand_picked(config.prior_scale);

    int n_threads = config.threads > 0
                        ? config.threads
                        : std::max(1, int(std::thread::hardware_concurrency()));
    n_threads = std::min(n_threads, config.replicates);

    for (Treatment treatment : config.treatments) {
        TreatmentResult tr;
        tr.treatment = treatment;
        tr.replicates.resize(config.replicates);

        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                int r = next.fetch_add(1);
                if (r >= config.replicates) return;
                std::uint64_t seed = config.base_seed + std::uint64_t(r);
                try {
                    tr.replicates[r] =
                        run_one_replicate(treatment, config, context, prior, seed);
                } catch (const std::exception& e) {
                    // replicate-level failure: keep whatever ran, note it, move on
                    tr.replicates[r].trace.rng_seed = seed;
                    tr.replicates[r].trace.error = e.what();
                }
            }
        };
        if (n_threads <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(n_threads);
            for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        for (int r = 0; r < config.replicates; ++r) {
            const auto& rep = tr.replicates[r];
            if (rep.trace.error) {
                tr.errors.push_back("replicate " + std::to_string(r) + ": " +
                                    *rep.trace.error);
            } else {
                tr.final_best.push_back(rep.trace.final_best());
            }
        }
        if (!tr.final_best.empty()) tr.summary = summarize(tr.final_best);
        result.treatments.push_back(std::move(tr));
    }

    for (const auto& tr : result.treatments) {
        for (std::size_t r = 0; r < tr.replicates.size(); ++r) {
            const auto& rep = tr.replicates[r];
            for (std::size_t i = 0; i < rep.trace.trials.size(); ++i) {
                const TrialRecord& t = rep.trace.trials[i];
                ObservationRecord rec;
                rec.treatment = tr.treatment;
                rec.replicate = int(r);
                rec.trial = int(i);
                rec.policy = t.policy;
                rec.performance = t.performance;
                rec.best_so_far = t.best_so_far;
                rec.aborted = i < rep.aborted.size() && rep.aborted[i];
                result.observations.push_back(rec);
            }
        }
    }
    return result;
}

std::vector<std::string> write_experiment_csvs(const ExperimentResult& result,
                                               const std::string& output_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(output_dir);
    const std::string vname = variant_name(result.config.variant);
    std::vector<std::string> written;

    auto open = [&](const std::string& name) {
        std::string path = (fs::path(output_dir) / name).string();
        std::ofstream os(path, std::ios::binary); // '\n' endings on all platforms
        if (!os) throw std::runtime_error("cannot write " + path);
        written.push_back(path);
        return os;
    };

    for (const auto& tr : result.treatments) {
        const std::string tname = treatment_name(tr.treatment);
        {
            auto os = open("trials_" + vname + "_" + tname + ".csv");
            os << kTrialHeader << '\n';
            for (std::size_t r = 0; r < tr.replicates.size(); ++r)
                write_trial_rows(os, tr.replicates[r], int(r));
        }
        {
            auto os = open("finals_" + vname + "_" + tname + ".csv");
            write_finals_csv(tr, os);
        }
    }

    {
        auto os = open("observations_" + vname + ".csv");
        write_observations_csv(result.observations, result.config.variant, os);
    }

    {
        auto os = open("summary_" + vname + ".csv");
        os << "treatment,n,median,p5,p25,p75,p95\n";
        for (const auto& tr : result.treatments) {
            if (tr.summary.n == 0) continue;
            os << treatment_name(tr.treatment) << ',' << tr.summary.n << ','
               << fmt(tr.summary.median) << ',' << fmt(tr.summary.p5) << ','
               << fmt(tr.summary.p25) << ',' << fmt(tr.summary.p75) << ','
               << fmt(tr.summary.p95) << '\n';
        }
    }

    {
        auto os = open("tests_" + vname + ".csv");
        os << "treatment_a,treatment_b,u,p,stars,method\n";
        for (std::size_t i = 0; i < result.treatments.size(); ++i) {
            for (std::size_t j = i + 1; j < result.treatments.size(); ++j) {
                const auto& a = result.treatments[i];
                const auto& b = result.treatments[j];
                if (a.final_best.empty() || b.final_best.empty()) continue;
                MannWhitneyResult mw = mann_whitney_u(a.final_best, b.final_best);
                os << treatment_name(a.treatment) << ','
                   << treatment_name(b.treatment) << ',' << fmt(mw.u) << ','
                   << fmt(mw.p) << ',' << star_code(mw.p) << ','
                   << (mw.exact ? "exact" : "normal_approx") << '\n';
            }
        }
    }
    return written;
}

void write_observations_csv(const std::vector<ObservationRecord>& observations,
                            Variant /*variant*/, std::ostream& os) {
    os << kTrialHeader << '\n';
    for (const auto& rec : observations) {
        os << rec.replicate << ',' << rec.trial << ',' << fmt(rec.policy.chi[0])
           << ',' << fmt(rec.policy.chi[1]) << ',' << fmt(rec.policy.chi[2]) << ','
           << fmt(rec.performance) << ',' << fmt(rec.best_so_far) << ','
           << (rec.aborted ? 1 : 0) << '\n';
    }
}

std::vector<Observation> read_observations_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty observation CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTrialHeader)
        throw std::runtime_error("unexpected observation CSV header: '" + line +
                                 "' (expected '" + kTrialHeader + "')");
    std::vector<Observation> observations;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 8)
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": expected 8 fields, got " +
                                     std::to_string(fields.size()));
        Policy policy(parse_double(fields[2], "chi1"), parse_double(fields[3], "chi2"),
                      parse_double(fields[4], "chi3"));
        observations.emplace_back(policy, parse_double(fields[5], "performance"));
    }
    return observations;
}

void write_finals_csv(const TreatmentResult& result, std::ostream& os) {
    os << kFinalsHeader << '\n';
    for (std::size_t r = 0; r < result.replicates.size(); ++r) {
        const auto& rep = result.replicates[r];
        if (rep.trace.error) continue;
        os << r << ',' << fmt(rep.trace.final_best()) << '\n';
    }
}

std::vector<double> read_finals_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty finals CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kFinalsHeader)
        throw std::runtime_error("unexpected finals CSV header: '" + line +
                                 "' (expected '" + kFinalsHeader + "')");
    std::vector<double> finals;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 2)
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": expected 2 fields, got " +
                                     std::to_string(fields.size()));
        finals.push_back(parse_double(fields[1], "final_best"));
    }
    return finals;
}

std::pair<EpisodeResult, EpisodeResult> cross_test(const Policy& gait,
                                                   const TaskContext& from_variant,
                                                   const TaskContext& to_variant,
                                                   std::uint64_t seed) {
    return {from_variant.evaluate(gait, seed), to_variant.evaluate(gait, seed)};
}

} // namespace tenseg
