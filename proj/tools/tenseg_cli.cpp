#include "tenseg/config.hpp"
#include "tenseg/harness.hpp"
#include "tenseg/profiles.hpp"
#include "tenseg/stats.hpp"
#include "tenseg/tasks.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tenseg;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

void print_summary_line(const std::string& label, const StatsSummary& s) {
    std::cout << "  " << label << ": n=" << s.n << " median=" << fmt(s.median)
              << " p5=" << fmt(s.p5) << " p25=" << fmt(s.p25)
              << " p75=" << fmt(s.p75) << " p95=" << fmt(s.p95)
              << " outliers=" << s.outliers.size() << "\n";
}

void print_pairwise(const std::vector<std::string>& labels,
                    const std::vector<std::vector<double>>& samples) {
    std::cout << "pairwise two-tailed Mann-Whitney U:\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            MannWhitneyResult mw = mann_whitney_u(samples[i], samples[j]);
            std::cout << "  " << labels[i] << " vs " << labels[j]
                      << ": U=" << fmt(mw.u) << " p=" << fmt(mw.p) << " ["
                      << star_code(mw.p) << ", "
                      << (mw.exact ? "exact" : "normal approx") << "]\n";
        }
    }
}

int cmd_run(const std::string& config_path, const std::string& output_dir_flag,
            bool dump_config) {
    ExperimentConfig config;
    if (!config_path.empty()) config = load_experiment_config(config_path);
    if (!output_dir_flag.empty()) config.output_dir = output_dir_flag;

    if (dump_config) {
        std::cout << experiment_config_to_json(config);
        return 0;
    }

    ExperimentResult result = run_experiment(config);
    auto written = write_experiment_csvs(result, config.output_dir);

    std::cout << "variant: " << variant_name(config.variant) << ", "
              << config.replicates << " replicates x " << config.budget
              << " trials, base seed " << config.base_seed << "\n";
    std::cout << "final best performance (cm/s):\n";
    std::vector<std::string> labels;
    std::vector<std::vector<double>> finals;
    bool partial = false;
    for (const auto& tr : result.treatments) {
        print_summary_line(treatment_name(tr.treatment), tr.summary);
        for (const auto& err : tr.errors) {
            std::cerr << "error: " << treatment_name(tr.treatment) << " " << err
                      << "\n";
            partial = true;
        }
        if (!tr.final_best.empty()) {
            labels.push_back(treatment_name(tr.treatment));
            finals.push_back(tr.final_best);
        }
    }
    if (finals.size() > 1) print_pairwise(labels, finals);
    std::cout << "wrote:\n";
    for (const auto& path : written) std::cout << "  " << path << "\n";
    return partial ? 2 : 0;
}

int cmd_evaluate(const CLI::App& sub, const std::string& config_path,
                 std::vector<double> chi, std::string variant_str,
                 std::uint64_t seed, int damaged_spring,
                 const std::string& dump_path) {
    SimParams sim;
    TaskParams task;
    Variant variant = Variant::intact;
    if (!config_path.empty()) {
        ExperimentConfig config = load_experiment_config(config_path);
        sim = config.sim;
        task = config.task;
        variant = config.variant;
        if (sub.count("--damaged-spring") == 0) damaged_spring = config.damaged_spring;
    }
    if (sub.count("--variant") > 0 || config_path.empty())
        variant = variant_from_name(variant_str);

    TaskContext context(variant, sim, task, damaged_spring);
    Policy policy(chi[0], chi[1], chi[2]);

    EpisodeResult ep;
    if (dump_path.empty()) {
        ep = context.evaluate(policy, seed);
    } else {
        auto os = open_out(dump_path);
        ep = context.evaluate(policy, seed, &os);
    }

    std::cout << "variant: " << variant_name(variant) << "\n"
              << "chi: (" << fmt(policy.chi[0]) << ", " << fmt(policy.chi[1])
              << ", " << fmt(policy.chi[2]) << "), seed " << seed << "\n"
              << "performance: " << fmt(ep.performance) << " cm/s\n"
              << "distance: " << fmt(ep.distance_cm) << " cm\n"
              << "simulated: " << fmt(ep.duration_simulated) << " s\n"
              << "aborted_by_yaw: " << (ep.aborted_by_yaw ? "yes" : "no")
              << " (final yaw " << fmt(ep.yaw_final) << " rad)\n";
    if (!dump_path.empty()) std::cout << "trajectory: " << dump_path << "\n";
    return 0;
}

void write_grid_files(const ProfileGrid& grid, const fs::path& dir,
                      const std::string& stem) {
    {
        auto os = open_out(dir / (stem + ".csv"));
        write_profile_csv(grid, os);
    }
    {
        auto os = open_out(dir / (stem + ".pgm"));
        write_profile_pgm(grid, os);
    }
    std::cout << "  " << (dir / stem).string() << ".{csv,pgm}\n";
}

int cmd_profiles(const std::string& input, const std::string& output_dir,
                 const std::string& prefix, bool with_prior, double prior_scale) {
    fs::create_directories(output_dir);
    const fs::path dir(output_dir);

    std::ifstream is(input, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + input);
    auto observations = read_observations_csv(is);
    std::cout << observations.size() << " observations from " << input << "\n";

    auto grids = compute_profiles(observations);
    static const char* kPairNames[3] = {"v1v2", "v1v3", "v2v3"};
    std::cout << "wrote:\n";
    for (int g = 0; g < 3; ++g)
        write_grid_files(grids[g], dir, prefix + "_" + kPairNames[g]);

    if (with_prior) {
        auto prior_grids = compute_prior_profile(PriorSpec::hand_picked(prior_scale));
        for (int g = 0; g < 3; ++g)
            write_grid_files(prior_grids[g], dir, prefix + "_prior_" + kPairNames[g]);
    }
    return 0;
}

int cmd_stats(const std::vector<std::string>& files) {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> samples;
    for (const auto& file : files) {
        std::ifstream is(file, std::ios::binary);
        if (!is) throw std::runtime_error("cannot open " + file);
        auto finals = read_finals_csv(is);
        if (finals.empty())
            throw std::runtime_error(file + " holds no usable replicates");
        labels.push_back(fs::path(file).stem().string());
        samples.push_back(std::move(finals));
    }
    std::cout << "summaries:\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
        print_summary_line(labels[i], summarize(samples[i]));
    if (samples.size() > 1) print_pairwise(labels, samples);
    return 0;
}

int cmd_amplitude(const std::string& config_path, int gaits, std::uint64_t seed,
                  const std::string& output_dir) {
    SimParams sim;
    TaskParams task;
    if (!config_path.empty()) {
        ExperimentConfig config = load_experiment_config(config_path);
        sim = config.sim;
        task = config.task;
    }

    std::cout << "marker amplitude over " << gaits
              << " random gaits (same gaits on both variants), seed " << seed
              << "\n";
    TaskContext soft(Variant::intact, sim, task);
    auto soft_amp = soft.random_gait_amplitudes(gaits, seed);
    TaskContext rigid(Variant::rigid, sim, task);
    auto rigid_amp = rigid.random_gait_amplitudes(gaits, seed);

    std::vector<double> soft_cm(soft_amp), rigid_cm(rigid_amp);
    for (double& v : soft_cm) v *= 100.0;
    for (double& v : rigid_cm) v *= 100.0;

    StatsSummary s = summarize(soft_cm), r = summarize(rigid_cm);
    print_summary_line("soft (intact)", s);
    print_summary_line("rigid", r);
    std::cout << "median ratio soft/rigid: "
              << fmt(r.median > 0.0 ? s.median / r.median : 0.0) << "\n";

    if (!output_dir.empty()) {
        fs::create_directories(output_dir);
        fs::path path = fs::path(output_dir) / "amplitude.csv";
        auto os = open_out(path);
        os << "gait,soft_cm,rigid_cm\n";
        char buf[96];
        for (int g = 0; g < gaits; ++g) {
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", g, soft_cm[g],
                          rigid_cm[g]);
            os << buf;
        }
        std::cout << "wrote: " << path.string() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gait learning for a vibration-driven six-strut tensegrity robot"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a full experiment from a config file");
    std::string run_config, run_outdir;
    bool run_dump_config = false;
    run->add_option("-c,--config", run_config, "JSON config file (defaults if omitted)")
        ->check(CLI::ExistingFile);
    run->add_option("-o,--output-dir", run_outdir,
                    "output directory (overrides the config file)")
        ->envname("TENSEG_OUTPUT_DIR");
    run->add_flag("--dump-config", run_dump_config,
                  "print the effective config as JSON and exit");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "evaluate one policy for one episode");
    std::vector<double> ev_chi;
    std::string ev_variant = "intact", ev_config, ev_dump;
    std::uint64_t ev_seed = 0;
    int ev_damaged = 0;
    ev->add_option("--chi", ev_chi, "motor settings chi1 chi2 chi3, each in [0,1]")
        ->expected(3)
        ->required();
    ev->add_option("--variant", ev_variant, "intact | damaged | rigid");
    ev->add_option("--seed", ev_seed, "episode seed (initial motor phases)");
    ev->add_option("--damaged-spring", ev_damaged,
                   "spring index removed by the damaged variant");
    ev->add_option("-c,--config", ev_config, "JSON config supplying sim/task params")
        ->check(CLI::ExistingFile);
    ev->add_option("--dump", ev_dump, "write the node trajectory to this CSV");

    // profiles
    auto* prof = app.add_subcommand(
        "profiles", "performance-profile heatmaps from an observation log");
    std::string prof_input, prof_outdir = "out", prof_prefix = "profile";
    bool prof_prior = false;
    double prof_prior_scale = 1.0;
    prof->add_option("-i,--input", prof_input, "observation CSV (a trials CSV works)")
        ->check(CLI::ExistingFile)
        ->required();
    prof->add_option("-o,--output-dir", prof_outdir, "output directory")
        ->envname("TENSEG_OUTPUT_DIR");
    prof->add_option("--prefix", prof_prefix, "output file prefix");
    prof->add_flag("--prior", prof_prior, "also write the hand-crafted prior's grids");
    prof->add_option("--prior-scale", prof_prior_scale,
                     "scale on the prior corner value");

    // stats
    auto* st = app.add_subcommand(
        "stats", "summaries and pairwise tests from finals CSVs");
    std::vector<std::string> st_files;
    st->add_option("files", st_files, "finals CSVs (replicate,final_best)")
        ->check(CLI::ExistingFile)
        ->expected(-1)
        ->required();

    // amplitude
    auto* amp = app.add_subcommand(
        "amplitude", "soft-vs-rigid marker amplitude study on random gaits");
    std::string amp_config, amp_outdir;
    int amp_gaits = 50;
    std::uint64_t amp_seed = 1;
    amp->add_option("--gaits", amp_gaits, "number of random gaits")
        ->check(CLI::PositiveNumber);
    amp->add_option("--seed", amp_seed, "gait-sampling seed");
    amp->add_option("-c,--config", amp_config, "JSON config supplying sim/task params")
        ->check(CLI::ExistingFile);
    amp->add_option("-o,--output-dir", amp_outdir,
                    "also write per-gait amplitudes here")
        ->envname("TENSEG_OUTPUT_DIR");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_config, run_outdir, run_dump_config);
        if (ev->parsed())
            return cmd_evaluate(*ev, ev_config, ev_chi, ev_variant, ev_seed,
                                ev_damaged, ev_dump);
        if (prof->parsed())
            return cmd_profiles(prof_input, prof_outdir, prof_prefix, prof_prior,
                                prof_prior_scale);
        if (st->parsed()) return cmd_stats(st_files);
        if (amp->parsed())
            return cmd_amplitude(amp_config, amp_gaits, amp_seed, amp_outdir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
