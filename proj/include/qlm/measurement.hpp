#pragma once

// Born-rule branch sampling and end-to-end selective measurement runs.
//
// Random numbers: xoshiro256** (Blackman & Vigna) seeded through splitmix64.
// A uniform double in [0, 1) is (x >> 11) * 2^-53. Run k of an ensemble with
// seed s draws from its own generator seeded with splitmix64 applied to
// s + k * 0x9E3779B97F4A7C15, so results do not depend on the thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "qlm/dynamics.hpp"
#include "qlm/errors.hpp"
#include "qlm/geometry.hpp"
#include "qlm/linalg.hpp"
#include "qlm/potentials.hpp"
#include "qlm/state.hpp"

namespace qlm::measurement {

inline std::uint64_t splitmix64(std::uint64_t& x)
{
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Xoshiro256ss {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256ss(std::uint64_t seed = 0)
    {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_{};
};

/// Generator for run `index` of an ensemble seeded with `seed`.
inline Xoshiro256ss substream(std::uint64_t seed, std::uint64_t index)
{
    return Xoshiro256ss(seed + index * 0x9E3779B97F4A7C15ULL);
}

/// Outcome +1 iff u < p_plus for one uniform draw u.
inline Branch sample_outcome(const BlochVector& n0, const ObservableSpec& spec, Xoshiro256ss& rng)
{
    const double p_plus = born_probability(n0, spec, Branch::plus);
    return rng.uniform() < p_plus ? Branch::plus : Branch::minus;
}

inline Branch sample_outcome(const BlochVector& n0, const ObservableSpec& spec, std::uint64_t seed)
{
    Xoshiro256ss rng(seed);
    return sample_outcome(n0, spec, rng);
}

/// +1 when the device lies on the Theta <= pi/2 side, -1 beyond it. On the far
/// side the branch with driving sign l ends at -l w_hat.
inline double region_sign(const ObservableSpec& spec, const geometry::DeviceGeometry& dev)
{
    return geometry::effective_Theta(spec, dev) > geometry::half_pi ? -1.0 : 1.0;
}

/// Driving branch that realizes eigenvalue `outcome` for this device.
inline Branch branch_for_outcome(Branch outcome, const ObservableSpec& spec, const geometry::DeviceGeometry& dev)
{
    return region_sign(spec, dev) > 0.0 ? outcome : opposite(outcome);
}

struct MeasurementRecord {
    Branch lambda = Branch::plus;   // driving branch
    Branch outcome = Branch::plus;  // eigenvalue label reached
    double p_lambda = 0.0;          // Born probability of the outcome
    dynamics::Trajectory trajectory;
    BlochVector final_n;
    BlochVector vn_reference;
    double deviation = 0.0;         // |final_n - vn_reference|
};

inline BlochVector final_state(const dynamics::Trajectory& traj)
{
    const Vec3 n = traj.back().n;
    const double r = norm(n);
    return BlochVector(r > 1.0 ? n / r : n);
}

/// Integrates the branch leading to `outcome` and compares with the projection.
inline MeasurementRecord measure_branch(const BlochVector& n0, const ObservableSpec& spec,
                                        const dynamics::DeviceConfig& device, Branch outcome,
                                        const dynamics::IntegratorConfig& cfg)
{
    MeasurementRecord r;
    r.outcome = outcome;
    r.lambda = branch_for_outcome(outcome, spec, device.geometry);
    r.p_lambda = born_probability(n0, spec, outcome);
    r.trajectory = dynamics::integrate_bloch(n0, spec, device, r.lambda, cfg);
    r.final_n = final_state(r.trajectory);
    r.vn_reference = BlochVector(sign(outcome) * spec.unit());
    r.deviation = norm(r.final_n.vec() - r.vn_reference.vec());
    return r;
}

/// Samples the outcome by the Born rule, then runs the deterministic branch.
inline MeasurementRecord run_measurement(const BlochVector& n0, const ObservableSpec& spec,
                                         const dynamics::DeviceConfig& device, Xoshiro256ss& rng,
                                         const dynamics::IntegratorConfig& cfg)
{
    spec.require_nondegenerate();
    return measure_branch(n0, spec, device, sample_outcome(n0, spec, rng), cfg);
}

struct EnsembleStats {
    std::size_t n_runs = 0;
    std::size_t count_plus = 0;
    std::size_t count_minus = 0;
    double empirical_p_plus = 0.0;
    double born_p_plus = 0.0;
    double z_score = 0.0;
};

/// (empirical - born) / sqrt(born (1 - born) / n); 0 or +-inf when born is 0 or 1.
inline double z_score(double empirical, double born, std::size_t n)
{
    const double var = born * (1.0 - born) / static_cast<double>(n);
    if (var > 0.0) return (empirical - born) / std::sqrt(var);
    if (empirical == born) return 0.0;
    return empirical > born ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

inline EnsembleStats make_stats(std::size_t plus, std::size_t minus, double born_p_plus)
{
    EnsembleStats s;
    s.n_runs = plus + minus;
    s.count_plus = plus;
    s.count_minus = minus;
    s.empirical_p_plus = s.n_runs ? static_cast<double>(plus) / static_cast<double>(s.n_runs) : 0.0;
    s.born_p_plus = born_p_plus;
    s.z_score = s.n_runs ? z_score(s.empirical_p_plus, born_p_plus, s.n_runs) : 0.0;
    return s;
}

inline unsigned worker_count(std::size_t jobs)
{
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(1, jobs)));
}

/// Outcomes of n_runs independent Born draws, run k from substream(seed, k).
inline std::vector<Branch> sample_outcomes(const BlochVector& n0, const ObservableSpec& spec, std::size_t n_runs,
                                           std::uint64_t seed)
{
    spec.require_nondegenerate();
    std::vector<Branch> out(n_runs);
    const unsigned workers = worker_count(n_runs / 4096 + 1);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            Xoshiro256ss rng = substream(seed, k);
            out[k] = sample_outcome(n0, spec, rng);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_runs + workers - 1) / workers;
    for (unsigned w = 1; w < workers; ++w) {
        const std::size_t b = std::min(n_runs, w * chunk);
        const std::size_t e = std::min(n_runs, b + chunk);
        pool.emplace_back(work, b, e);
    }
    work(0, std::min(n_runs, chunk));
    for (auto& t : pool) t.join();
    return out;
}

struct DeviationHistogram {
    std::vector<double> edges;          // log10 bin edges
    std::vector<std::size_t> counts;    // one entry per bin, last bin open-ended
};

struct EnsembleResult {
    EnsembleStats stats;
    std::vector<Branch> outcomes;
    std::optional<MeasurementRecord> plus_record;   // set when +1 occurred
    std::optional<MeasurementRecord> minus_record;  // set when -1 occurred
    DeviationHistogram histogram;
};

/// Born-frequency ensemble. Each branch is deterministic, so it is integrated
/// once and its deviation is attributed to every run that selected it.
inline EnsembleResult ensemble_run(const BlochVector& n0, const ObservableSpec& spec,
                                   const dynamics::DeviceConfig& device, std::size_t n_runs, std::uint64_t seed,
                                   const dynamics::IntegratorConfig& cfg, bool integrate_branches = true)
{
    if (n_runs < 1) throw DomainError("ensemble_run: n_runs must be at least 1");
    EnsembleResult res;
    res.outcomes = sample_outcomes(n0, spec, n_runs, seed);
    const auto plus = static_cast<std::size_t>(std::count(res.outcomes.begin(), res.outcomes.end(), Branch::plus));
    res.stats = make_stats(plus, n_runs - plus, born_probability(n0, spec, Branch::plus));

    res.histogram.edges = {-16, -14, -12, -10, -8, -6, -4, -2, 0};
    res.histogram.counts.assign(res.histogram.edges.size(), 0);
    if (!integrate_branches) return res;
    if (plus > 0) res.plus_record = measure_branch(n0, spec, device, Branch::plus, cfg);
    if (plus < n_runs) res.minus_record = measure_branch(n0, spec, device, Branch::minus, cfg);

    auto bin_of = [&](double dev) {
        const double l = dev > 0.0 ? std::log10(dev) : -std::numeric_limits<double>::infinity();
        std::size_t b = 0;
        while (b + 1 < res.histogram.edges.size() && l >= res.histogram.edges[b + 1]) ++b;
        return b;
    };
    if (res.plus_record) res.histogram.counts[bin_of(res.plus_record->deviation)] += plus;
    if (res.minus_record) res.histogram.counts[bin_of(res.minus_record->deviation)] += n_runs - plus;
    return res;
}

// --- regime studies ---------------------------------------------------------

/// Start of the late window: the last time g = omega when the drive exceeds
/// omega, else the drive maximum ln2/kappa. Zero for other profiles.
inline double late_window_start(const ObservableSpec& spec, const potentials::PotentialProfile& profile)
{
    const auto* im = std::get_if<potentials::InvertedMorse>(&profile);
    if (!im) return 0.0;
    if (im->g0_rate >= spec.omega_rate)
        return potentials::morse_crossing_times(im->g0_rate, im->kappa, spec.omega_rate).second;
    return std::log(2.0) / im->kappa;
}

struct SweepRow {
    double Theta = 0.0;
    Branch lambda = Branch::plus;
    Branch outcome = Branch::plus;
    double final_w_dot_n = 0.0;
    double deviation = 0.0;          // from outcome * w_hat
    double deviation_lambda = 0.0;   // from lambda * w_hat
    double late_min_rate = 0.0;      // min |dn/dt| in the late window
    bool zero_probability = false;
};

/// Runs both driving branches for every Theta. The reference state is the
/// eigenvector the branch is expected to reach on its side of Theta = pi/2.
inline std::vector<SweepRow> critical_sweep(const ObservableSpec& spec, const dynamics::DeviceConfig& device_template,
                                            std::span<const double> Theta_values, const BlochVector& n0,
                                            const dynamics::IntegratorConfig& cfg)
{
    spec.require_nondegenerate();
    std::vector<SweepRow> rows(2 * Theta_values.size());
    const double t_late = late_window_start(spec, device_template.profile);

    auto one = [&](std::size_t idx) {
        const double Theta = Theta_values[idx / 2];
        const Branch lam = idx % 2 == 0 ? Branch::plus : Branch::minus;
        dynamics::DeviceConfig dev = device_template;
        dev.geometry.Theta = Theta;
        dev.geometry.phi.reset();
        const double rs = region_sign(spec, dev.geometry);
        const auto traj = dynamics::integrate_bloch(n0, spec, dev, lam, cfg);
        SweepRow r;
        r.Theta = Theta;
        r.lambda = lam;
        r.outcome = rs > 0.0 ? lam : opposite(lam);
        const Vec3 n = traj.back().n;
        r.final_w_dot_n = dot(spec.unit(), n);
        r.deviation = norm(n - sign(r.outcome) * spec.unit());
        r.deviation_lambda = norm(n - sign(lam) * spec.unit());
        r.late_min_rate = std::numeric_limits<double>::infinity();
        for (const auto& s : traj.samples)
            if (s.t > t_late) r.late_min_rate = std::fmin(r.late_min_rate, s.rate);
        r.zero_probability = born_probability(n0, spec, r.outcome) == 0.0;
        rows[idx] = r;
    };

    const std::size_t jobs = rows.size();
    const unsigned workers = worker_count(jobs);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < jobs; i += workers) one(i);
        });
    for (auto& t : pool) t.join();
    return rows;
}

struct WeakDrivingResult {
    MeasurementRecord record;
    double transverse_amplitude = 0.0;  // |n_final - (w.n_final) w_hat|
    std::optional<double> approach_time;  // from then on |dn/dt| < 1e-2 omega_rate
};

/// Inverted Morse drive with g0 = g0_fraction * omega_rate on the template device.
inline WeakDrivingResult weak_g_run(const ObservableSpec& spec, const dynamics::DeviceConfig& device_template,
                                    double g0_fraction, const BlochVector& n0, Branch outcome,
                                    const dynamics::IntegratorConfig& cfg)
{
    if (!(g0_fraction > 0.0)) throw DomainError("weak_g_run: g0_fraction must be positive");
    spec.require_nondegenerate();
    dynamics::DeviceConfig dev = device_template;
    double kappa = 1e5;
    if (const auto* im = std::get_if<potentials::InvertedMorse>(&device_template.profile)) kappa = im->kappa;
    dev.profile = potentials::InvertedMorse{g0_fraction * spec.omega_rate, kappa};

    WeakDrivingResult res;
    res.record = measure_branch(n0, spec, dev, outcome, cfg);
    const Vec3 n = res.record.final_n.vec();
    res.transverse_amplitude = norm(n - dot(spec.unit(), n) * spec.unit());
    res.approach_time = dynamics::settle_time(res.record.trajectory, 1e-2 * spec.omega_rate);
    return res;
}

}  // namespace qlm::measurement
