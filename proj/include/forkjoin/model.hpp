#pragma once

#include <cstdint>

namespace forkjoin::model {

/// Brownian fork-join model: N queues Q_i = sup_{s>0}(W_i(s) + W_A(s) - beta*s)
/// with i.i.d. service noises W_i (std dev sigma) and one shared arrival
/// noise W_A (std dev sigma_a).
struct ModelParams {
    double sigma = 1.0;
    double sigma_a = 1.0;
    double beta = 1.0;
    long n_queues = 1;
};

/// Throws std::domain_error naming the violated precondition.
void validate(const ModelParams& p);

enum class Regime { Subcritical, Critical, Supercritical };

const char* regime_name(Regime r);

struct RegimeConstants {
    double lambda = 0.0;            // fraction of the level carried by the arrival noise
    double one_minus_lambda = 1.0;
    double a_star = 0.0;            // critical deviation parameter
    Regime regime = Regime::Subcritical;
};

struct LevelSchedule {
    double f_n = 0.0;  // exceedance level (sigma^2/(2 beta) + a) log N
    double t_n = 0.0;  // anchor time f_n/beta + k sqrt(log N)
    double r_n = 0.0;  // slow shift sigma sqrt(2 a beta + sigma^2)/(4 beta) loglog N
    double k = 0.0;
};

/// Relative half-width around a_star inside which a is classified Critical.
/// Exact equality is unreachable in floating point; callers that mean the
/// boundary case can also pass force_critical.
inline constexpr double kRegimeTolerance = 1e-12;

/// lambda(a) = 1 - sigma/sqrt(2 a beta + sigma^2), a_star, and the regime tag.
/// Accepts a = 0 (lambda = 0, Subcritical).
RegimeConstants derived_constants(const ModelParams& p, double a,
                                  bool force_critical = false);

double lambda_of(const ModelParams& p, double a);
double a_star_of(const ModelParams& p);

/// Power-law exponent gamma(a) of the tail P(M_N > f_N(a)), a > 0:
///   (2 a beta + 2 sigma^2 - 2 sigma sqrt(2 a beta + sigma^2)) / sigma_a^2   below a_star,
///   (2 a beta - sigma_a^2) / (sigma^2 + sigma_a^2)                          from a_star on.
/// Continuous at a_star where both branches equal sigma_a^2/sigma^2.
double gamma_exponent(const ModelParams& p, double a);

/// Both branch formulas regardless of regime (used by continuity and
/// dominance property checks).
double gamma_branch_arrival(const ModelParams& p, double a);
double gamma_branch_independent(const ModelParams& p, double a);

/// f_N(a), T_N(a,k), r_N. Requires N >= 2; r_n is only defined (nonzero
/// loglog) for N >= 3 and reported as 0 for N = 2.
LevelSchedule level_schedule(const ModelParams& p, double a, double k = 0.0);

/// Exact all-time supremum tail of W(s) + nu*s with nu < 0 and volatility
/// vol: P(sup > x) = exp(2 nu x / vol^2). Throws if nu >= 0 (tail is 1).
double sup_tail_exponential(double vol, double nu, double x);

/// Limiting tail of the centered maximum: P(M_N > (sigma^2/2beta) log N
/// + x sqrt(log N)) -> normal_tail(x sqrt(2) beta / (sigma sigma_a)).
double clt_tail(const ModelParams& p, double x);

/// Moderate-deviation limit x^2 beta^2 / (sigma^2 sigma_a^2).
double moderate_scaling(const ModelParams& p, double x);
/// The finite-N quantity log N * gamma(x/sqrt(log N)) converging to it.
double moderate_scaling_finite_n(const ModelParams& p, double x, double n_queues);

}  // namespace forkjoin::model
