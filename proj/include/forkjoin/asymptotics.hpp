#pragma once

#include <optional>

#include "forkjoin/model.hpp"

namespace forkjoin::asym {

using model::ModelParams;
using model::Regime;

/// Regime-dependent approximation of P(M_N > f_N(a)).
///
/// Supercritical: point estimate N^-gamma (prefactors 1).
/// Critical:      (1/2) N^-gamma.
/// Subcritical:   bracket [L, U] * N^-gamma * (log N)^-kappa, where kappa is
///                the logarithmic correction exponent and [L, U] the
///                constants from subcritical_constants().
struct TailApproximation {
    Regime regime = Regime::Supercritical;
    double gamma = 0.0;
    double log_correction_exponent = 0.0;  // kappa, zero from a_star on
    double prefactor_low = 1.0;
    double prefactor_high = 1.0;
    double estimate_low = 0.0;
    double estimate_high = 0.0;
};

/// First-passage problem: tau = inf{t > 0 : W(t) + drift*t > level} for a
/// Brownian motion W with volatility vol; drift is signed.
struct FirstPassageSpec {
    double level = 1.0;  // > 0
    double drift = -1.0;
    double vol = 1.0;    // > 0
};

void validate(const FirstPassageSpec& spec);

enum class ConvolutionCase { FiniteC, PlusInfinity, MinusInfinity };

/// Tail P(eta X + E/mu > x) of an independent normal + exponential sum.
struct ConvolutionSpec {
    double eta = 1.0;  // > 0
    double mu = 1.0;   // > 0
    double x = 0.0;
    std::optional<ConvolutionCase> case_hint{};
};

struct ConvolutionTail {
    double exact = 0.0;       // closed form, clamped to [0,1]
    double asymptotic = 0.0;  // case-appropriate approximation
    ConvolutionCase which = ConvolutionCase::FiniteC;
    // Log-scale values stay meaningful far past double underflow.
    double log_exact = 0.0;
    double log_asymptotic = 0.0;
};

/// |delta| <= kDeltaCut selects the finite-c case; erf saturates to +-1
/// within 1e-5 beyond it.
inline constexpr double kDeltaCut = 3.0;

/// Requires a > 0 and N >= 3.
TailApproximation tail_estimate(const ModelParams& p, double a);

/// kappa = lambda/(1-lambda) * sigma^2/(2 sigma_a^2) for a below a_star,
/// zero from a_star on.
double log_correction_exponent(const ModelParams& p, double a);

/// The bracket constants for the subcritical regime, 0 < a < a_star:
///   L = integral of d_A(k) G(k) dk,
///   U = integral of (c1(k) + c2(k)) d_i(k) dk + 1,
/// where d_A, d_i are the scaled limit densities of the arrival/service
/// hitting times, G the Gumbel exceedance limit and c1 + c2 the convolution
/// prefactor pair. Computed by adaptive quadrature (tol 1e-9 abs, 1e-8 rel).
struct SubcriticalConstants {
    double lower = 0.0;  // L > 0
    double upper = 0.0;  // U >= 1
};
SubcriticalConstants subcritical_constants(const ModelParams& p, double a);

/// Asymptotic equivalent N * P(Q_i > y) = N exp(-2 beta y/(sigma^2+sigma_a^2))
/// for levels y growing faster than log N.
double large_level_tail(const ModelParams& p, double y);

ConvolutionTail convolution_tail(const ConvolutionSpec& spec);

/// Density L/(sqrt(2 pi) vol t^{3/2}) exp(-(L - drift t)^2/(2 vol^2 t)) of the
/// first-passage time; integrates to min(1, exp(2 drift level / vol^2)).
double first_passage_density(const FirstPassageSpec& spec, double t);
double first_passage_prob_finite(const FirstPassageSpec& spec);

/// Closed-form limit of N sqrt(log N) f_tau(T_N(a,k)) for the service-side
/// hitting time with level shift -r; integrates over k to
/// exp(2 (1-lambda) beta r / sigma^2).
double scaled_passage_density_limit(const ModelParams& p, double a, double r, double k);

/// Scaled limit density of the arrival-side hitting time (integrates to 1).
double scaled_arrival_density_limit(const ModelParams& p, double a, double k);

/// Limit of P(max_i W_i(T_N(a,k)) - (1-lambda) beta T_N(a,k) >
/// (1-lambda) f_N(a) - r_N): 1 - exp(-exp(-beta^4 k^2/(2 a beta+sigma^2)^2)/(2 sqrt pi)).
double gumbel_exceedance_limit(const ModelParams& p, double a, double k);

/// Extreme-value normalizing constant b_N = sqrt(2 log N)
/// - log(4 pi log N)/(2 sqrt(2 log N)).
double gumbel_b_n(double n_queues);

}  // namespace forkjoin::asym
