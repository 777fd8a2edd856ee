#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "forkjoin/asymptotics.hpp"
#include "forkjoin/model.hpp"
#include "forkjoin/numerics.hpp"

namespace forkjoin::sim {

using model::ModelParams;

/// Discretization of one replication. The horizon T_max = horizon_mult *
/// max(T_N(a), (sigma^2+sigma_a^2)/beta^2) is split into ceil(horizon_mult)
/// equal blocks and each block is filled by dyadic bridge refinement, so the
/// requested step count is rounded up to blocks * 2^k grid points. Under a
/// fixed seed, doubling `steps` refines every path in place (old grid values
/// are reused exactly) and doubling `steps` and `horizon_mult` together
/// extends it; grid maxima are then maxima over supersets of points.
struct PathConfig {
    double horizon_mult = 4.0;  // >= 1
    long steps = 4096;          // >= 2 requested grid points over (0, T_max]
    bool bridge_correction = false;
};

/// Exponential drift change for importance sampling. theta_a acts on the
/// shared arrival noise, theta_i on one designated queue's service noise.
/// Each tilt is switched off at the first grid time its component crosses
/// its share of the level (or at a time cap covering the hitting-time
/// spread); the likelihood-ratio weight uses the realized tilt segment.
struct TiltConfig {
    double theta_a = 0.0;
    double theta_i = 0.0;
    long designated_queue = 0;
};

enum class EstimatorKind { Crude, Tilted };

struct SimEstimate {
    double p_hat = 0.0;
    double stderr_ = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long reps = 0;
    EstimatorKind kind = EstimatorKind::Crude;
    // Weight diagnostics over the replications that hit the event.
    double max_weight_share = 0.0;
    double effective_sample_size = 0.0;
    bool degenerate_weights = false;  // tilted and ESS below 10
};

struct PathGrid {
    double block_len = 0.0;
    long blocks = 0;
    long steps_per_block = 0;
    long total_steps = 0;
    double dt = 0.0;
    double horizon() const { return block_len * static_cast<double>(blocks); }
    double time_at(long j) const { return dt * static_cast<double>(j); }
};

/// Anchor time scale: max(T_N(a), (sigma^2+sigma_a^2)/beta^2). The floor
/// keeps the horizon positive for N = 1 (log N = 0) and for levels near 0.
double horizon_anchor(const ModelParams& p, double a);

PathGrid make_grid(double anchor_time, const PathConfig& cfg);

/// One sample of max_{i<=N} max_grid (W_i(t) + W_A(t) - beta t). The arrival
/// path is drawn once per replication and shared by every queue; queue i's
/// noise depends only on (master_seed, replication, i), so enlarging N keeps
/// existing queues' draws fixed. sigma_a = 0 is accepted here (degenerate
/// arrival) even though the analytic modules require sigma_a > 0.
double simulate_max_backlog(const ModelParams& p, double a, const PathConfig& cfg,
                            std::uint64_t master_seed, std::uint64_t replication);

/// Per-queue grid suprema of one replication (index i = queue i).
std::vector<double> per_queue_suprema(const ModelParams& p, double a,
                                      const PathConfig& cfg, std::uint64_t master_seed,
                                      std::uint64_t replication);

/// Crude Bernoulli estimator of P(M_N > level) with level = f_N(a) by
/// default. Deterministic given master_seed, regardless of thread count.
SimEstimate estimate_tail_crude(const ModelParams& p, double a, const PathConfig& cfg,
                                long reps, std::uint64_t master_seed, int threads = 0,
                                std::optional<double> level_override = {});

/// Importance-sampled estimator; unbiased for the same truncated/discretized
/// event as the crude one. With theta_a = theta_i = 0 the output is
/// bit-identical to estimate_tail_crude.
SimEstimate estimate_tail_tilted(const ModelParams& p, double a, const PathConfig& cfg,
                                 const TiltConfig& tilt, long reps,
                                 std::uint64_t master_seed, int threads = 0,
                                 std::optional<double> level_override = {});

/// Default drift change: the arrival noise gets 2 rho(a) beta where rho(a) is
/// the arrival's share of the level (lambda(a) below a_star, the variance
/// share sigma_a^2/(sigma^2+sigma_a^2) from a_star on; continuous at a_star).
/// The service tilt defaults to zero in every regime: pushing one designated
/// queue leaves the other N-1 exceedance channels carrying an unstopped
/// lognormal weight factor, which makes the estimator's relative variance
/// explode with the horizon.
TiltConfig default_tilt(const ModelParams& p, double a);

struct CltSample {
    num::SummaryStats stats;            // of the standardized values
    std::vector<double> standardized;   // (M_N - (sigma^2/2beta) log N)/sqrt(log N)
};

/// Samples of the centered/scaled maximum for comparison against the
/// N(0, sigma^2 sigma_a^2/(2 beta^2)) limit. Requires N >= 2.
CltSample empirical_clt_statistic(const ModelParams& p, const PathConfig& cfg,
                                  long reps, std::uint64_t master_seed,
                                  int threads = 0);

struct FirstPassageSample {
    bool finite = false;
    double time = 0.0;  // meaningful only when finite
};

/// Exact draw of the first-passage time of spec.level by a Brownian motion
/// with signed drift: finite with probability min(1, exp(2 drift level /
/// vol^2)); conditional on finite the time is inverse-Gaussian (Levy when
/// drift = 0). No discretization.
FirstPassageSample sample_first_passage(const asym::FirstPassageSpec& spec,
                                        num::RngStream& stream);

/// Maximum of a Brownian bridge from x0 to x1 over an interval of length dt:
/// m = (x0 + x1 + sqrt((x1-x0)^2 - 2 vol^2 dt ln U))/2 >= max(x0, x1).
double bridge_max_sample(double x0, double x1, double dt, double vol,
                         num::RngStream& stream);

/// Grid supremum of a single drifted Brownian path vol*B(t) + drift*t over
/// [0, horizon] (validation helper: exponential sup-law and level-crossing
/// oracles).
struct SupSpec {
    double vol = 1.0;
    double drift = -1.0;
    double horizon = 8.0;
    long steps = 4096;
    bool bridge = false;
};
double sample_sup(const SupSpec& spec, std::uint64_t master_seed,
                  std::uint64_t replication);

}  // namespace forkjoin::sim
