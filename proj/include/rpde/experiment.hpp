#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rpde/attractor.hpp"
#include "rpde/kvconfig.hpp"
#include "rpde/spectral.hpp"

namespace rpde {

inline constexpr const char* kVersion = "0.3.0";

/// Experiment file: `key = value` lines. `model` and `constants` name further files,
/// resolved relative to the experiment file. Noise keys live in the experiment file.
struct Experiment {
    std::filesystem::path path;
    KeyValue kv;
    KeyValue model_kv;
    KeyValue constants_kv;
    ModelConfig model;
    NoiseConfig noise;
    BoundPrimitives prim;
    std::vector<std::uint64_t> seeds;
    bool calibrate = true;
    std::string hash;  // FNV-1a over the three file texts

    /// Throws ConfigError for missing or invalid files and failed cross-checks.
    static Experiment load(const std::filesystem::path& path);

    double knob(const std::string& key, double fallback) const { return kv.get_double(key, fallback); }
    std::size_t count(const std::string& key, std::size_t fallback) const;
    std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
        return kv.get_doubles(key, std::move(fallback));
    }
};

std::uint64_t fnv1a(const std::string& text, std::uint64_t h = 1469598103934665603ull);

/// Independent stream per (seed, purpose, index).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0);

struct OutputFile {
    std::string name;
    std::string content;
};

struct RunOptions {
    std::vector<std::uint64_t> seeds;
    unsigned jobs = 1;
    std::ostream* log = nullptr;
};

struct RunOutcome {
    std::vector<OutputFile> files;
    bool acceptance_failed = false;
};

const std::vector<std::string>& command_names();

/// Run one command. Output is a pure function of (experiment, seeds): jobs only
/// changes scheduling.
RunOutcome run_command(const std::string& command, const Experiment& ex, const RunOptions& opt);

/// Constants record for the experiment: derived, then calibrated (M first, C_I second)
/// on training streams when the constants file asks for it.
BoundConstants experiment_constants(const Experiment& ex, const Dynamics& dyn, unsigned jobs,
                                    std::ostream* log);

/// Stream purposes; each keeps its draws disjoint from the others.
enum class Purpose : std::uint64_t {
    train = 1, validate, ergodic, attractor, cloud, lift, solve, specfun, oracle
};

struct Sample {
    GridRoughPath noise;
    ControlledPath path;
};

/// Noise on [0, units] and the solution from a random initial state of alpha-norm
/// uniform in [0.1, 1] * cloud_radius.
Sample make_sample(const Experiment& ex, const Dynamics& dyn, std::uint64_t seed, Purpose purpose,
                   long units);

/// Same primitives with the regularity shift beta; calibration flags carried over.
BoundConstants with_beta(const BoundConstants& k, const Dynamics& dyn, double beta);

/// Ensemble of ergodic_samples unit windows against ergodic_windows consecutive windows.
ErgodicReport ergodic_for(const Experiment& ex, std::uint64_t seed, double q, unsigned jobs);

/// Noise on [-max(K + 1, max t) - extra_units, 1] for the absorbing and pullback runs.
GridRoughPath attractor_noise(const Experiment& ex, std::uint64_t seed, long extra_units = 0);

struct AttractorSeed {
    std::uint64_t seed = 0;
    AbsorbReport absorb;
    std::vector<PullbackRow> rows;
    std::size_t failures = 0;
    double initial_diameter = 0;
};

/// Absorbing radius at time 0 and the pullback cloud over t_list, accepted against R + delta.
AttractorSeed attractor_seed(const Experiment& ex, const Dynamics& dyn, const BoundConstants& k,
                             std::uint64_t seed, double beta_norm);

struct Manifest {
    std::string command;
    std::filesystem::path config;
    std::string hash;
    std::vector<std::uint64_t> seeds;
    unsigned jobs = 1;
};

std::string render_manifest(const std::string& command, const Experiment& ex, const RunOptions& opt,
                            double wall_seconds);
Manifest parse_manifest(const std::filesystem::path& path);

void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files);

}  // namespace rpde
