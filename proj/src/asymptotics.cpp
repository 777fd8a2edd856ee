#include "forkjoin/asymptotics.hpp"

#include <cmath>
#include <stdexcept>

#include "forkjoin/numerics.hpp"

namespace forkjoin::asym {

namespace {
constexpr double kSqrtPi = 1.7724538509055161;

double log_sum_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (a == -INFINITY) return a;
    return a + std::log1p(std::exp(b - a));
}
}  // namespace

void validate(const FirstPassageSpec& spec) {
    if (!(spec.level > 0.0)) throw std::domain_error("first passage: level must be positive");
    if (!(spec.vol > 0.0)) throw std::domain_error("first passage: vol must be positive");
    if (!std::isfinite(spec.drift)) throw std::domain_error("first passage: drift must be finite");
}

double log_correction_exponent(const ModelParams& p, double a) {
    const auto rc = model::derived_constants(p, a);
    if (rc.regime != Regime::Subcritical) return 0.0;
    return rc.lambda / rc.one_minus_lambda * p.sigma * p.sigma /
           (2.0 * p.sigma_a * p.sigma_a);
}

double scaled_arrival_density_limit(const ModelParams& p, double a, double k) {
    const double s = std::sqrt(2.0 * a * p.beta + p.sigma * p.sigma);
    const double b4 = std::pow(p.beta, 4);
    const double coeff = p.beta * p.beta * (s - p.sigma) /
                         (kSqrtPi * p.sigma_a * s * s);
    const double d = (s - p.sigma) / (p.sigma_a * s * s);
    return coeff * std::exp(-b4 * k * k * d * d);
}

double gumbel_exceedance_limit(const ModelParams& p, double a, double k) {
    model::validate(p);
    if (!(a > 0.0)) throw std::domain_error("gumbel_exceedance_limit: a must be positive");
    const double s2 = 2.0 * a * p.beta + p.sigma * p.sigma;
    const double z = std::pow(p.beta, 4) * k * k / (s2 * s2);
    return -std::expm1(-std::exp(-z) / (2.0 * kSqrtPi));
}

double gumbel_b_n(double n_queues) {
    if (!(n_queues > 1.0)) throw std::domain_error("gumbel_b_n: need n_queues > 1");
    const double two_log = 2.0 * std::log(n_queues);
    return std::sqrt(two_log) - std::log(2.0 * M_PI * two_log) / (2.0 * std::sqrt(two_log));
}

SubcriticalConstants subcritical_constants(const ModelParams& p, double a) {
    model::validate(p);
    if (!(a > 0.0)) throw std::domain_error("subcritical_constants: a must be positive");
    const double a_star = model::a_star_of(p);
    if (!(a < a_star))
        throw std::domain_error("subcritical_constants: a must lie below a_star");

    const double sigma = p.sigma, sigma_a = p.sigma_a, beta = p.beta;
    const double s = std::sqrt(2.0 * a * beta + sigma * sigma);
    const double s2 = s * s;
    const double b4 = std::pow(beta, 4);
    const double sc2 = sigma * sigma + sigma_a * sigma_a;

    auto d_i = [&](double k) {
        return beta * beta * std::exp(-b4 * k * k / (s2 * s2)) / (kSqrtPi * s2);
    };
    // Convolution prefactor pair from the subcritical upper bound; the second
    // denominator sigma^2 + sigma_a^2 - sigma*s is positive exactly below a_star.
    auto conv_prefactors = [&](double k) {
        const double t1 = sigma_a *
                          std::exp(-b4 * k * k * (s - sigma) * (s - sigma) / (sigma_a * sigma_a * s2 * s2)) /
                          (2.0 * kSqrtPi * (s - sigma));
        const double e2 = 2.0 * b4 * k * k *
                          (sigma * sigma * (s - sigma) + a * beta * (s - 2.0 * sigma)) /
                          (sigma_a * sigma_a * s2 * s2 * s);
        const double t2 = sigma_a * sc2 * std::exp(-e2) /
                          (2.0 * kSqrtPi * sigma * (sc2 - sigma * s));
        return t1 + t2;
    };

    // Gaussian widths of the two k-densities seed the quadrature panels.
    const double w_i = s2 / (beta * beta * std::sqrt(2.0));
    const double w_a = sigma_a * s2 / (std::sqrt(2.0) * beta * beta * (s - sigma));
    const double w = std::max(w_i, w_a);
    num::QuadratureOptions opts;
    opts.tol_abs = 1e-9;
    opts.tol_rel = 1e-8;
    for (double m : {0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0}) {
        opts.knots.push_back(m * w);
        if (m > 0.0) opts.knots.push_back(-m * w);
    }

    SubcriticalConstants out;
    out.lower = num::integrate_real_line(
                    [&](double k) {
                        return scaled_arrival_density_limit(p, a, k) *
                               gumbel_exceedance_limit(p, a, k);
                    },
                    opts)
                    .value;
    out.upper = num::integrate_real_line(
                    [&](double k) { return conv_prefactors(k) * d_i(k); }, opts)
                    .value +
                1.0;
    return out;
}

TailApproximation tail_estimate(const ModelParams& p, double a) {
    model::validate(p);
    if (!(a > 0.0)) throw std::domain_error("tail_estimate: a must be positive");
    if (p.n_queues < 3) throw std::domain_error("tail_estimate: n_queues must be at least 3");

    const auto rc = model::derived_constants(p, a);
    const double log_n = std::log(static_cast<double>(p.n_queues));

    TailApproximation t;
    t.regime = rc.regime;
    t.gamma = model::gamma_exponent(p, a);
    t.log_correction_exponent = log_correction_exponent(p, a);
    switch (rc.regime) {
        case Regime::Supercritical:
            t.prefactor_low = t.prefactor_high = 1.0;
            break;
        case Regime::Critical:
            t.prefactor_low = t.prefactor_high = 0.5;
            break;
        case Regime::Subcritical: {
            const auto lu = subcritical_constants(p, a);
            t.prefactor_low = lu.lower;
            t.prefactor_high = lu.upper;
            break;
        }
    }
    const double scale =
        std::exp(-t.gamma * log_n - t.log_correction_exponent * std::log(log_n));
    t.estimate_low = t.prefactor_low * scale;
    t.estimate_high = t.prefactor_high * scale;
    return t;
}

double large_level_tail(const ModelParams& p, double y) {
    model::validate(p);
    if (!(y > 0.0)) throw std::domain_error("large_level_tail: y must be positive");
    const double sc2 = p.sigma * p.sigma + p.sigma_a * p.sigma_a;
    return static_cast<double>(p.n_queues) * std::exp(-2.0 * p.beta * y / sc2);
}

ConvolutionTail convolution_tail(const ConvolutionSpec& spec) {
    if (!(spec.eta > 0.0)) throw std::domain_error("convolution_tail: eta must be positive");
    if (!(spec.mu > 0.0)) throw std::domain_error("convolution_tail: mu must be positive");
    const double eta = spec.eta, mu = spec.mu, x = spec.x;

    const double delta = (x - mu * eta * eta) / (std::sqrt(2.0) * eta);
    const double expo = 0.5 * mu * (mu * eta * eta - 2.0 * x);  // exponential-part exponent

    ConvolutionTail out;
    // Exact: normal_tail(x/eta) + (1/2) e^expo (erf(delta)+1); the second term
    // is written with erfc(-delta) so its log stays finite for delta << 0.
    const double log_exp_term = expo + num::log_erfc(-delta) - M_LN2;
    out.log_exact = log_sum_exp(num::log_normal_tail(x / eta), log_exp_term);
    out.exact = std::min(1.0, std::exp(out.log_exact));

    if (spec.case_hint)
        out.which = *spec.case_hint;
    else if (delta > kDeltaCut)
        out.which = ConvolutionCase::PlusInfinity;
    else if (delta < -kDeltaCut)
        out.which = ConvolutionCase::MinusInfinity;
    else
        out.which = ConvolutionCase::FiniteC;

    // Gaussian part of every asymptotic branch: eta e^{-x^2/(2 eta^2)}/(sqrt(2 pi) x).
    const double log_gauss = (x > 0.0)
                                 ? std::log(eta / (std::sqrt(2.0 * M_PI) * x)) -
                                       x * x / (2.0 * eta * eta)
                                 : std::log(num::normal_tail(x / eta));
    switch (out.which) {
        case ConvolutionCase::FiniteC:
            out.log_asymptotic =
                log_sum_exp(log_gauss, expo + std::log1p(num::erf(delta)) - M_LN2);
            break;
        case ConvolutionCase::PlusInfinity:
            out.log_asymptotic = log_sum_exp(log_gauss, expo);
            break;
        case ConvolutionCase::MinusInfinity: {
            // (1/sqrt(2 pi)) e^expo eta e^{-delta^2 ...}/(mu eta^2 - x); the
            // combined exponent collapses to -x^2/(2 eta^2).
            const double log_conv = -x * x / (2.0 * eta * eta) +
                                    std::log(eta / (std::sqrt(2.0 * M_PI) *
                                                    (mu * eta * eta - x)));
            out.log_asymptotic = log_sum_exp(log_gauss, log_conv);
            break;
        }
    }
    out.asymptotic = std::exp(out.log_asymptotic);
    return out;
}

double first_passage_density(const FirstPassageSpec& spec, double t) {
    validate(spec);
    if (!(t > 0.0)) throw std::domain_error("first_passage_density: t must be positive");
    const double d = spec.level - spec.drift * t;
    return spec.level / (std::sqrt(2.0 * M_PI) * spec.vol * std::pow(t, 1.5)) *
           std::exp(-d * d / (2.0 * spec.vol * spec.vol * t));
}

double first_passage_prob_finite(const FirstPassageSpec& spec) {
    validate(spec);
    if (spec.drift >= 0.0) return 1.0;
    return std::exp(2.0 * spec.drift * spec.level / (spec.vol * spec.vol));
}

double scaled_passage_density_limit(const ModelParams& p, double a, double r, double k) {
    model::validate(p);
    if (!(a > 0.0))
        throw std::domain_error("scaled_passage_density_limit: a must be positive");
    const double sigma = p.sigma, beta = p.beta;
    const double s2 = 2.0 * a * beta + sigma * sigma;
    const double num_ = beta * (8.0 * a * a * beta * beta * r -
                                std::pow(beta, 3) * k * k * sigma * std::sqrt(s2) +
                                8.0 * a * beta * r * sigma * sigma +
                                2.0 * r * std::pow(sigma, 4));
    return beta * beta * std::exp(num_ / (sigma * std::pow(s2, 2.5))) / (kSqrtPi * s2);
}

}  // namespace forkjoin::asym
