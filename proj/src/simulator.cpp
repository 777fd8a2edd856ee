#include "forkjoin/simulator.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace forkjoin::sim {

namespace {

// Stream-index layout: (replication << 21) | component, component 0 = arrival,
// 1..N = queues. Counter layout inside a component: (block << 40) | dyadic
// rank for path nodes; bit 63 marks bridge-maximum uniforms per interval.
constexpr int kRepShift = 21;
constexpr std::uint64_t kBridgeBit = 1ull << 63;
constexpr int kBlockShift = 40;

void check_sim_params(const ModelParams& p) {
    if (!(p.sigma > 0.0)) throw std::domain_error("simulator: sigma must be positive");
    if (!(p.sigma_a >= 0.0)) throw std::domain_error("simulator: sigma_a must be nonnegative");
    if (!(p.beta > 0.0)) throw std::domain_error("simulator: beta must be positive");
    if (p.n_queues < 1) throw std::domain_error("simulator: n_queues must be at least 1");
    if (p.n_queues >= (1l << kRepShift))
        throw std::domain_error("simulator: n_queues exceeds the stream layout");
}

double level_f_n(const ModelParams& p, double a) {
    return (p.sigma * p.sigma / (2.0 * p.beta) + a) *
           std::log(static_cast<double>(p.n_queues));
}

// Dyadic (midpoint-bridge) fill of a Brownian path with the given volatility:
// buf[j] = W(j dt), buf[0] = 0. Draws are addressed by (block, dyadic rank),
// so refining steps_per_block or appending blocks reuses existing values.
void fill_path(std::vector<double>& buf, const PathGrid& g, double vol,
               const num::RngStream& st) {
    buf.resize(static_cast<std::size_t>(g.total_steps) + 1);
    buf[0] = 0.0;
    if (vol == 0.0) {
        std::fill(buf.begin(), buf.end(), 0.0);
        return;
    }
    const double sd_block = vol * std::sqrt(g.block_len);
    for (long b = 0; b < g.blocks; ++b) {
        const long base = b * g.steps_per_block;
        const std::uint64_t cbase = static_cast<std::uint64_t>(b) << kBlockShift;
        buf[base + g.steps_per_block] = buf[base] + sd_block * st.gaussian_at(cbase);
        for (long half = g.steps_per_block / 2; half >= 1; half /= 2) {
            const long count = g.steps_per_block / (2 * half);  // midpoints this level
            const double sd = vol * std::sqrt(0.5 * static_cast<double>(half) * g.dt);
            for (long pos = 0; pos < count; ++pos) {
                const long left = base + pos * 2 * half;
                buf[left + half] = 0.5 * (buf[left] + buf[left + 2 * half]) +
                                   sd * st.gaussian_at(cbase | static_cast<std::uint64_t>(count + pos));
            }
        }
    }
}

// One component's drift change, switched off at the first grid crossing of
// `target` by (tilted noise) - drift_rate * t, or at the time cap.
struct TiltRule {
    double theta = 0.0;
    double target = 0.0;
    double drift_rate = 0.0;
    double cap = 0.0;
    bool active() const { return theta != 0.0; }
};

// Applies the rule in place (noise -> tilted noise) and returns the
// likelihood-ratio weight exp(-theta A0(ts)/vol^2 - theta^2 ts/(2 vol^2)),
// where ts is the realized tilt stop time and A0 the untilted noise value.
double apply_tilt(std::vector<double>& noise, const PathGrid& g, double vol,
                  const TiltRule& rule) {
    if (!rule.active()) return 1.0;
    if (!(vol > 0.0))
        throw std::domain_error("simulator: cannot tilt a component with zero volatility");
    double stop_time = g.horizon();
    double noise_at_stop = noise.back();
    double shift = 0.0;
    bool stopped = false;
    for (long j = 1; j <= g.total_steps; ++j) {
        const double t = g.time_at(j);
        if (!stopped) {
            const double raw = noise[j];
            noise[j] = raw + rule.theta * t;
            if (noise[j] - rule.drift_rate * t > rule.target || t >= rule.cap) {
                stopped = true;
                stop_time = t;
                noise_at_stop = raw;
                shift = rule.theta * t;
            }
        } else {
            noise[j] += shift;
        }
    }
    const double v2 = vol * vol;
    return std::exp(-rule.theta * noise_at_stop / v2 -
                    0.5 * rule.theta * rule.theta * stop_time / v2);
}

struct TiltPlan {
    TiltRule arrival;
    TiltRule service;
    long designated = 0;
};

// Time cap: mean hitting time of the target plus three inverse-Gaussian
// standard deviations, clamped to the horizon.
double tilt_cap(double target, double drift_rate, double vol, double horizon) {
    const double mean = target / drift_rate;
    const double sd = (vol / drift_rate) * std::sqrt(mean / drift_rate);
    return std::min(horizon, mean + 3.0 * sd);
}

double arrival_share(const ModelParams& p, double a) {
    const double lam = model::lambda_of(p, a);
    const double share_var = p.sigma_a * p.sigma_a /
                             (p.sigma * p.sigma + p.sigma_a * p.sigma_a);
    return (a <= model::a_star_of(p)) ? lam : share_var;
}

TiltPlan make_plan(const ModelParams& p, double a, const TiltConfig& tilt,
                   double horizon) {
    TiltPlan plan;
    plan.designated = tilt.designated_queue;
    if (tilt.designated_queue < 0 || tilt.designated_queue >= p.n_queues)
        if (tilt.theta_i != 0.0)
            throw std::domain_error("simulator: designated_queue out of range");
    if (tilt.theta_a == 0.0 && tilt.theta_i == 0.0) return plan;

    const double f = level_f_n(p, a);
    const double rho = arrival_share(p, a);
    if (tilt.theta_a != 0.0) {
        plan.arrival.theta = tilt.theta_a;
        plan.arrival.target = rho * f;
        plan.arrival.drift_rate = rho * p.beta;
        plan.arrival.cap = (plan.arrival.target > 0.0 && plan.arrival.drift_rate > 0.0)
                               ? tilt_cap(plan.arrival.target, plan.arrival.drift_rate,
                                          p.sigma_a, horizon)
                               : horizon;
    }
    if (tilt.theta_i != 0.0) {
        plan.service.theta = tilt.theta_i;
        plan.service.target = (1.0 - rho) * f;
        plan.service.drift_rate = (1.0 - rho) * p.beta;
        plan.service.cap = (plan.service.target > 0.0 && plan.service.drift_rate > 0.0)
                               ? tilt_cap(plan.service.target, plan.service.drift_rate,
                                          p.sigma, horizon)
                               : horizon;
    }
    return plan;
}

struct Workspace {
    std::vector<double> base;   // tilted arrival noise minus beta t
    std::vector<double> queue;  // one queue's service noise
};

struct RepOutput {
    double sample_max = 0.0;
    double weight = 1.0;
};

RepOutput run_replication(const ModelParams& p, const PathGrid& g, const TiltPlan& plan,
                          bool bridge, std::uint64_t master_seed, std::uint64_t rep,
                          Workspace& ws, std::vector<double>* suprema = nullptr) {
    const std::uint64_t rep_base = rep << kRepShift;
    const double vol_comb = std::sqrt(p.sigma * p.sigma + p.sigma_a * p.sigma_a);

    num::RngStream arrival_stream(master_seed, rep_base);
    fill_path(ws.base, g, p.sigma_a, arrival_stream);
    RepOutput out;
    out.weight = apply_tilt(ws.base, g, p.sigma_a, plan.arrival);
    for (long j = 0; j <= g.total_steps; ++j) ws.base[j] -= p.beta * g.time_at(j);

    double global_max = 0.0;  // the t -> 0 limit of the combined process
    for (long i = 0; i < p.n_queues; ++i) {
        num::RngStream qs(master_seed, rep_base | static_cast<std::uint64_t>(i + 1));
        fill_path(ws.queue, g, p.sigma, qs);
        if (plan.service.active() && i == plan.designated)
            out.weight *= apply_tilt(ws.queue, g, p.sigma, plan.service);

        double qmax = ws.queue[0] + ws.base[0];
        if (!bridge) {
            for (long j = 1; j <= g.total_steps; ++j)
                qmax = std::max(qmax, ws.queue[j] + ws.base[j]);
        } else {
            double prev = qmax;
            for (long j = 1; j <= g.total_steps; ++j) {
                const double cur = ws.queue[j] + ws.base[j];
                const double u = qs.uniform_at(kBridgeBit | static_cast<std::uint64_t>(j));
                const double d = cur - prev;
                const double m = 0.5 * (prev + cur +
                                        std::sqrt(d * d - 2.0 * vol_comb * vol_comb *
                                                               g.dt * std::log(u)));
                qmax = std::max(qmax, m);
                prev = cur;
            }
        }
        if (suprema) suprema->push_back(qmax);
        global_max = std::max(global_max, qmax);
    }
    out.sample_max = global_max;
    return out;
}

template <typename Body>
void parallel_reps(long reps, int threads, Body&& body) {
    long t = (threads > 0) ? threads : static_cast<long>(std::thread::hardware_concurrency());
    t = std::max(1l, std::min({t, reps, 64l}));
    if (t == 1) {
        for (long r = 0; r < reps; ++r) body(r, 0);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    for (long w = 0; w < t; ++w)
        pool.emplace_back([&, w] {
            constexpr long chunk = 4;
            for (;;) {
                const long start = next.fetch_add(chunk);
                if (start >= reps) return;
                const long end = std::min(reps, start + chunk);
                for (long r = start; r < end; ++r) body(r, static_cast<int>(w));
            }
        });
    for (auto& th : pool) th.join();
}

void check_cfg(const PathConfig& cfg) {
    if (!(cfg.horizon_mult >= 1.0))
        throw std::domain_error("simulator: horizon_mult must be at least 1");
    if (cfg.steps < 2) throw std::domain_error("simulator: steps must be at least 2");
}

SimEstimate weighted_bernoulli_estimate(const ModelParams& p, double a,
                                        const PathConfig& cfg, const TiltConfig& tilt,
                                        long reps, std::uint64_t master_seed,
                                        int threads, std::optional<double> level_override,
                                        EstimatorKind kind) {
    check_sim_params(p);
    check_cfg(cfg);
    if (reps < 1) throw std::domain_error("simulator: reps must be at least 1");
    if (!(a > 0.0)) throw std::domain_error("simulator: a must be positive");

    const PathGrid g = make_grid(horizon_anchor(p, a), cfg);
    const TiltPlan plan = make_plan(p, a, tilt, g.horizon());
    const double level = level_override.value_or(level_f_n(p, a));

    std::vector<double> contrib(static_cast<std::size_t>(reps), 0.0);
    const int nworkers = 64;
    std::vector<Workspace> ws(nworkers);
    parallel_reps(reps, threads, [&](long r, int w) {
        const RepOutput o = run_replication(p, g, plan, cfg.bridge_correction,
                                            master_seed, static_cast<std::uint64_t>(r),
                                            ws[static_cast<std::size_t>(w)]);
        contrib[static_cast<std::size_t>(r)] = (o.sample_max > level) ? o.weight : 0.0;
    });

    const auto stats = num::summarize(contrib);
    SimEstimate est;
    est.p_hat = stats.mean;
    est.stderr_ = stats.stderr_;
    est.ci_low = stats.ci_low;
    est.ci_high = stats.ci_high;
    est.reps = reps;
    est.kind = kind;

    double wsum = 0.0, w2sum = 0.0, wmax = 0.0;
    for (double c : contrib) {
        wsum += c;
        w2sum += c * c;
        wmax = std::max(wmax, c);
    }
    if (wsum > 0.0) {
        est.effective_sample_size = wsum * wsum / w2sum;
        est.max_weight_share = wmax / wsum;
    }
    est.degenerate_weights =
        (kind == EstimatorKind::Tilted) && (est.effective_sample_size < 10.0);
    return est;
}

}  // namespace

double horizon_anchor(const ModelParams& p, double a) {
    const double log_n = std::log(static_cast<double>(p.n_queues));
    const double t_n = (p.sigma * p.sigma / (2.0 * p.beta) + a) * log_n / p.beta;
    const double floor_scale = (p.sigma * p.sigma + p.sigma_a * p.sigma_a) /
                               (p.beta * p.beta);
    return std::max(t_n, floor_scale);
}

PathGrid make_grid(double anchor_time, const PathConfig& cfg) {
    check_cfg(cfg);
    if (!(anchor_time > 0.0)) throw std::domain_error("simulator: horizon must be positive");
    PathGrid g;
    g.blocks = static_cast<long>(std::ceil(cfg.horizon_mult - 1e-12));
    g.block_len = anchor_time * cfg.horizon_mult / static_cast<double>(g.blocks);
    const auto per_block = static_cast<unsigned long>(
        (cfg.steps + g.blocks - 1) / g.blocks);
    g.steps_per_block = static_cast<long>(std::bit_ceil(per_block));
    g.total_steps = g.steps_per_block * g.blocks;
    g.dt = g.block_len / static_cast<double>(g.steps_per_block);
    return g;
}

double simulate_max_backlog(const ModelParams& p, double a, const PathConfig& cfg,
                            std::uint64_t master_seed, std::uint64_t replication) {
    check_sim_params(p);
    check_cfg(cfg);
    if (!(a >= 0.0)) throw std::domain_error("simulator: a must be nonnegative");
    const PathGrid g = make_grid(horizon_anchor(p, a), cfg);
    Workspace ws;
    return run_replication(p, g, TiltPlan{}, cfg.bridge_correction, master_seed,
                           replication, ws)
        .sample_max;
}

std::vector<double> per_queue_suprema(const ModelParams& p, double a,
                                      const PathConfig& cfg, std::uint64_t master_seed,
                                      std::uint64_t replication) {
    check_sim_params(p);
    check_cfg(cfg);
    const PathGrid g = make_grid(horizon_anchor(p, a), cfg);
    Workspace ws;
    std::vector<double> sup;
    sup.reserve(static_cast<std::size_t>(p.n_queues));
    run_replication(p, g, TiltPlan{}, cfg.bridge_correction, master_seed, replication,
                    ws, &sup);
    return sup;
}

SimEstimate estimate_tail_crude(const ModelParams& p, double a, const PathConfig& cfg,
                                long reps, std::uint64_t master_seed, int threads,
                                std::optional<double> level_override) {
    return weighted_bernoulli_estimate(p, a, cfg, TiltConfig{}, reps, master_seed,
                                       threads, level_override, EstimatorKind::Crude);
}

SimEstimate estimate_tail_tilted(const ModelParams& p, double a, const PathConfig& cfg,
                                 const TiltConfig& tilt, long reps,
                                 std::uint64_t master_seed, int threads,
                                 std::optional<double> level_override) {
    return weighted_bernoulli_estimate(p, a, cfg, tilt, reps, master_seed, threads,
                                       level_override, EstimatorKind::Tilted);
}

TiltConfig default_tilt(const ModelParams& p, double a) {
    check_sim_params(p);
    if (!(a > 0.0)) throw std::domain_error("default_tilt: a must be positive");
    TiltConfig tilt;
    tilt.theta_a = 2.0 * arrival_share(p, a) * p.beta;
    tilt.theta_i = 0.0;
    return tilt;
}

CltSample empirical_clt_statistic(const ModelParams& p, const PathConfig& cfg,
                                  long reps, std::uint64_t master_seed, int threads) {
    check_sim_params(p);
    check_cfg(cfg);
    if (p.n_queues < 2)
        throw std::domain_error("empirical_clt_statistic: n_queues must be at least 2");
    if (reps < 1) throw std::domain_error("empirical_clt_statistic: reps must be at least 1");

    const double log_n = std::log(static_cast<double>(p.n_queues));
    const double center = p.sigma * p.sigma / (2.0 * p.beta) * log_n;
    const PathGrid g = make_grid(horizon_anchor(p, 0.0), cfg);

    CltSample out;
    out.standardized.assign(static_cast<std::size_t>(reps), 0.0);
    const int nworkers = 64;
    std::vector<Workspace> ws(nworkers);
    parallel_reps(reps, threads, [&](long r, int w) {
        const RepOutput o =
            run_replication(p, g, TiltPlan{}, cfg.bridge_correction, master_seed,
                            static_cast<std::uint64_t>(r), ws[static_cast<std::size_t>(w)]);
        out.standardized[static_cast<std::size_t>(r)] =
            (o.sample_max - center) / std::sqrt(log_n);
    });
    out.stats = num::summarize(out.standardized);
    return out;
}

FirstPassageSample sample_first_passage(const asym::FirstPassageSpec& spec,
                                        num::RngStream& stream) {
    asym::validate(spec);
    const double level = spec.level, vol = spec.vol;
    FirstPassageSample out;
    if (spec.drift < 0.0) {
        const double p_fin = std::exp(2.0 * spec.drift * level / (vol * vol));
        if (stream.next_uniform() > p_fin) return out;  // never crosses
    }
    out.finite = true;
    if (spec.drift == 0.0) {
        const double z = stream.next_gaussian();
        out.time = level * level / (vol * vol * z * z);
        return out;
    }
    // Conditioned on crossing, the time is inverse-Gaussian with mean
    // level/|drift| and shape level^2/vol^2 (Michael-Schucany-Haas sampler).
    const double mu = level / std::fabs(spec.drift);
    const double lam = level * level / (vol * vol);
    const double z = stream.next_gaussian();
    const double y = z * z;
    const double x = mu + 0.5 * mu * mu * y / lam -
                     0.5 * mu / lam * std::sqrt(4.0 * mu * lam * y + mu * mu * y * y);
    const double u = stream.next_uniform();
    out.time = (u <= mu / (mu + x)) ? x : mu * mu / x;
    return out;
}

double bridge_max_sample(double x0, double x1, double dt, double vol,
                         num::RngStream& stream) {
    if (!(dt > 0.0)) throw std::domain_error("bridge_max_sample: dt must be positive");
    if (!(vol > 0.0)) throw std::domain_error("bridge_max_sample: vol must be positive");
    const double d = x1 - x0;
    const double u = stream.next_uniform();
    return 0.5 * (x0 + x1 + std::sqrt(d * d - 2.0 * vol * vol * dt * std::log(u)));
}

double sample_sup(const SupSpec& spec, std::uint64_t master_seed,
                  std::uint64_t replication) {
    if (!(spec.vol > 0.0)) throw std::domain_error("sample_sup: vol must be positive");
    if (!(spec.horizon > 0.0)) throw std::domain_error("sample_sup: horizon must be positive");
    if (spec.steps < 2) throw std::domain_error("sample_sup: steps must be at least 2");

    PathGrid g;
    g.blocks = 1;
    g.block_len = spec.horizon;
    g.steps_per_block = static_cast<long>(std::bit_ceil(static_cast<unsigned long>(spec.steps)));
    g.total_steps = g.steps_per_block;
    g.dt = g.block_len / static_cast<double>(g.steps_per_block);

    num::RngStream st(master_seed, replication << kRepShift);
    std::vector<double> buf;
    fill_path(buf, g, spec.vol, st);

    double best = 0.0, prev = 0.0;
    for (long j = 1; j <= g.total_steps; ++j) {
        const double cur = buf[j] + spec.drift * g.time_at(j);
        if (spec.bridge) {
            const double u = st.uniform_at(kBridgeBit | static_cast<std::uint64_t>(j));
            const double d = cur - prev;
            best = std::max(best, 0.5 * (prev + cur +
                                         std::sqrt(d * d - 2.0 * spec.vol * spec.vol *
                                                                g.dt * std::log(u))));
        } else {
            best = std::max(best, cur);
        }
        prev = cur;
    }
    return best;
}

}  // namespace forkjoin::sim
